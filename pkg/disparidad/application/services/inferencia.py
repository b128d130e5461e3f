"""
Inferencia: disparidad de un par de imágenes con BN en modo evaluación.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.red.matcher import full_forward
from disparidad.domain.red.parametros import ParametrosRed
from disparidad.domain.tensor.tensor import sin_gradiente
from disparidad.infrastructure.adapters.imagenes import read_rgb, write_visualizacion
from disparidad.infrastructure.adapters.pfm import write_pfm

logger = logging.getLogger(__name__)

ARCHIVO_DISPARIDAD = 'disparidad.pfm'
ARCHIVO_VISUALIZACION = 'disparidad.png'


def mapa_de_disparidad(parametros: ParametrosRed, izquierda: np.ndarray, derecha: np.ndarray) -> np.ndarray:
    """Forward sin gradiente con el modo actual de `parametros`; no lo modifica."""
    with sin_gradiente():
        mapa = full_forward(izquierda, derecha, parametros)
    return np.array(mapa.numpy()[0], dtype=np.float32)


def predecir(parametros: ParametrosRed, izquierda: np.ndarray, derecha: np.ndarray) -> np.ndarray:
    """Mapa [H,W] para un par [3,H,W] con BN en evaluación; restaura el modo previo de la red."""
    modo = parametros.modo
    parametros.evaluar()
    try:
        return mapa_de_disparidad(parametros, izquierda, derecha)
    finally:
        parametros.modo = modo


@dataclass
class ResultadoInferencia:
    ruta_disparidad: Path
    ruta_visualizacion: Path
    disparidad: np.ndarray


def inferir_archivos(parametros: ParametrosRed, ruta_izquierda: Union[str, Path], ruta_derecha: Union[str, Path],
                     directorio_salida: Union[str, Path]) -> ResultadoInferencia:
    """Lee el par, escribe la disparidad en PFM y una visualización en gris sobre [0, d_max]."""
    izquierda, derecha = read_rgb(ruta_izquierda), read_rgb(ruta_derecha)
    if izquierda.shape != derecha.shape:
        raise ErrorForma("las imágenes izquierda y derecha deben tener la misma forma",
                         [izquierda.shape, derecha.shape])
    disparidad = predecir(parametros, izquierda, derecha)

    salida = Path(directorio_salida)
    ruta_pfm = salida / ARCHIVO_DISPARIDAD
    ruta_png = salida / ARCHIVO_VISUALIZACION
    write_pfm(ruta_pfm, disparidad)
    write_visualizacion(ruta_png, disparidad, parametros.config.d_max)
    logger.info(f"Disparidad {disparidad.shape} escrita en {ruta_pfm} (rango {disparidad.min():.2f}"
                f"–{disparidad.max():.2f})")
    return ResultadoInferencia(ruta_disparidad=ruta_pfm, ruta_visualizacion=ruta_png, disparidad=disparidad)
