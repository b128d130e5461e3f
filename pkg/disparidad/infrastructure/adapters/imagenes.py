"""
Imágenes RGB, máscaras y visualizaciones de disparidad con Pillow, y lectura
de mapas de disparidad según la extensión del archivo.
"""

import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from PIL import Image

from disparidad.domain.excepciones import ErrorFormato
from disparidad.infrastructure.adapters.kitti_png import read_kitti_disp_png
from disparidad.infrastructure.adapters.pfm import read_pfm

logger = logging.getLogger(__name__)

Ruta = Union[str, Path]


def read_rgb(ruta: Ruta) -> np.ndarray:
    """Imagen [3,H,W] float32 en [0,1]."""
    if not Path(ruta).is_file():
        raise ErrorFormato(f"no existe la imagen '{ruta}'")
    with Image.open(ruta) as imagen:
        valores = np.asarray(imagen.convert('RGB'), dtype=np.float32) / 255.0
    return np.ascontiguousarray(valores.transpose(2, 0, 1))


def write_rgb(ruta: Ruta, imagen: np.ndarray) -> None:
    imagen = np.asarray(imagen)
    if imagen.ndim != 3 or imagen.shape[0] != 3:
        raise ErrorFormato(f"se esperaba una imagen [3,H,W], recibido {imagen.shape}")
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    valores = np.round(np.clip(imagen, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(valores.transpose(1, 2, 0)).save(ruta, format='PNG')


def read_mascara(ruta: Ruta) -> np.ndarray:
    """Cualquier valor distinto de cero cuenta como válido."""
    if not Path(ruta).is_file():
        raise ErrorFormato(f"no existe la máscara '{ruta}'")
    with Image.open(ruta) as imagen:
        valores = np.array(imagen)
    if valores.ndim == 3:
        valores = valores.max(axis=2)
    return valores != 0


def write_mascara(ruta: Ruta, mascara: np.ndarray) -> None:
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.where(mascara, 255, 0).astype(np.uint8)).save(ruta, format='PNG')


def visualizacion(disparidad: np.ndarray, d_max: float) -> np.ndarray:
    """Gris de 8 bits: 0 -> 0 y d_max -> 255."""
    if d_max <= 0:
        raise ErrorFormato(f"d_max debe ser > 0 para visualizar, recibido {d_max}")
    escalada = np.clip(np.nan_to_num(disparidad, nan=0.0) / d_max, 0.0, 1.0) * 255.0
    return np.round(escalada).astype(np.uint8)


def write_visualizacion(ruta: Ruta, disparidad: np.ndarray, d_max: float) -> None:
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(visualizacion(disparidad, d_max)).save(ruta, format='PNG')


def leer_mapa_disparidad(ruta: Ruta) -> Tuple[np.ndarray, np.ndarray]:
    """
    (disparidad [H,W], válidos) desde .pfm o PNG KITTI.

    En PFM son válidos los valores finitos; Scene Flow no tiene centinela.
    """
    ruta = Path(ruta)
    if not ruta.is_file():
        raise ErrorFormato(f"no existe el archivo de disparidad '{ruta}'")
    sufijo = ruta.suffix.lower()
    if sufijo == '.pfm':
        disparidad, _ = read_pfm(ruta)
        if disparidad.ndim != 2:
            raise ErrorFormato(f"{ruta}: se esperaba un PFM de un canal, forma {disparidad.shape}")
        return disparidad, np.isfinite(disparidad)
    if sufijo == '.png':
        return read_kitti_disp_png(ruta)
    raise ErrorFormato(f"{ruta}: extensión '{sufijo}' no soportada (use .pfm o .png)")
