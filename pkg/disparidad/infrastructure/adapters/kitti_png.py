"""
Disparidad KITTI en PNG de 16 bits: disparidad = valor / 256, y 0 marca
píxeles sin verdad.
"""

import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from PIL import Image

from disparidad.domain.excepciones import ErrorFormato

logger = logging.getLogger(__name__)

ESCALA_KITTI = 256.0
MODOS_16_BITS = ('I;16', 'I;16B', 'I;16L', 'I')
MAXIMO_16_BITS = 65535


def read_kitti_disp_png(ruta: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """(gt [H,W] en píxeles, máscara de válidos)."""
    with Image.open(ruta) as imagen:
        if imagen.mode not in MODOS_16_BITS:
            raise ErrorFormato(f"{ruta}: se esperaba un PNG de 16 bits en un canal, modo '{imagen.mode}'")
        valores = np.array(imagen, dtype=np.int64)
    if valores.min(initial=0) < 0 or valores.max(initial=0) > MAXIMO_16_BITS:
        raise ErrorFormato(f"{ruta}: valores fuera del rango de 16 bits")
    valida = valores > 0
    gt = (valores / ESCALA_KITTI).astype(np.float32)
    logger.debug(f"PNG KITTI leído {ruta}: {int(valida.sum())} píxeles válidos de {valida.size}")
    return gt, valida


def cuantizar(disparidad: np.ndarray, valida: Optional[np.ndarray] = None) -> np.ndarray:
    """Valores de 16 bits; un píxel válido nunca queda en 0 (el centinela)."""
    disparidad = np.asarray(disparidad, dtype=np.float64)
    if valida is None:
        valida = np.isfinite(disparidad) & (disparidad > 0)
    valores = np.zeros(disparidad.shape, dtype=np.uint16)
    cuantizados = np.clip(np.round(disparidad[valida] * ESCALA_KITTI), 1, MAXIMO_16_BITS)
    valores[valida] = cuantizados.astype(np.uint16)
    return valores


def write_kitti_disp_png(ruta: Union[str, Path], disparidad: np.ndarray, valida: Optional[np.ndarray] = None) -> None:
    if np.ndim(disparidad) != 2:
        raise ErrorFormato(f"la disparidad KITTI debe ser [H,W], recibido {np.shape(disparidad)}")
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(cuantizar(disparidad, valida)).save(ruta, format='PNG')
    logger.debug(f"PNG KITTI escrito {ruta}")
