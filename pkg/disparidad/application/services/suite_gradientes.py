"""
Suites de verificación de gradientes.

- Primitivas: cada operación diferenciable contra diferencias centrales en
  64 bits, tolerancia 1e-4, con variantes de stride, padding y dilatación.
- Extremo a extremo: la red completa + pérdida sobre una muestra 16×32,
  un elemento por tensor de parámetros, tolerancia 1e-3.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import sentry_sdk

from disparidad.domain.configuracion import NetworkConfig
from disparidad.domain.datos.muestras import SyntheticSpec
from disparidad.domain.datos.sintetico import generate_sample
from disparidad.domain.objetivo.perdida import loss
from disparidad.domain.red.matcher import build_cost_volume, full_forward, soft_argmin
from disparidad.domain.red.parametros import inicializar_parametros
from disparidad.domain.tensor import operaciones
from disparidad.domain.tensor.convolucion import conv2d, conv3d, deconv3d
from disparidad.domain.tensor.gradcheck import (
    TOLERANCIA_EXTREMO_A_EXTREMO, TOLERANCIA_PRIMITIVAS, ReporteGradiente, evaluar_parametros, gradcheck,
    lejos_de_cero,
)
from disparidad.domain.tensor.muestreo import (
    adaptive_avg_pool2d, avg_pool2d, bilinear_upsample2d, trilinear_upsample3d,
)
from disparidad.domain.tensor.normalizacion import batchnorm
from disparidad.domain.tensor.tensor import precision

logger = logging.getLogger(__name__)

ALTO_EXTREMO, ANCHO_EXTREMO = 16, 32
CONFIG_EXTREMO = NetworkConfig(block_counts=(1, 1, 1), d_max=16)


@dataclass
class CasoGradiente:
    nombre: str
    funcion: Callable
    formas: Dict[str, tuple]
    filtro: Optional[Callable] = None
    max_elementos: Optional[int] = 64


@dataclass
class ResultadoSuite:
    reportes: List[ReporteGradiente] = field(default_factory=list)
    tiempo_total: float = 0.0

    @property
    def aprobado(self) -> bool:
        return all(r.aprobado for r in self.reportes)

    @property
    def fallidos(self) -> List[ReporteGradiente]:
        return [r for r in self.reportes if not r.aprobado]

    def a_lineas(self) -> List[str]:
        return [r.resumen() for r in self.reportes]


def _lejos_del_quiebre(gt: np.ndarray) -> Callable:
    """smooth-L1 sólo donde |residuo| no está cerca de 1."""
    return lambda nombre, valor: np.abs(np.abs(valor - gt) - 1.0) > 0.05


def casos_primitivas(semilla: int = 0) -> List[CasoGradiente]:
    rng = np.random.default_rng(semilla)
    gt = rng.uniform(0, 4, size=(4, 4))
    mascara = rng.random((4, 4)) > 0.2
    mascara[0, 0] = True
    return [
        CasoGradiente('conv2d', lambda x, w, b: conv2d(x, w, b, stride=1, padding=1),
                      {'x': (2, 3, 6, 7), 'w': (4, 3, 3, 3), 'b': (4,)}),
        CasoGradiente('conv2d_stride2_dilatada', lambda x, w: conv2d(x, w, stride=2, padding=2, dilatacion=2),
                      {'x': (1, 2, 9, 8), 'w': (3, 2, 3, 3)}),
        CasoGradiente('conv2d_1x1_sin_relleno', lambda x, w, b: conv2d(x, w, b),
                      {'x': (1, 4, 3, 5), 'w': (2, 4, 1, 1), 'b': (2,)}),
        CasoGradiente('conv3d', lambda x, w, b: conv3d(x, w, b, stride=2, padding=1),
                      {'x': (1, 2, 4, 5, 5), 'w': (3, 2, 3, 3, 3), 'b': (3,)}),
        CasoGradiente('conv3d_kernel5', lambda x, w: conv3d(x, w, padding=2),
                      {'x': (1, 1, 3, 4, 4), 'w': (2, 1, 5, 5, 5)}),
        CasoGradiente('deconv3d', lambda x, w, b: deconv3d(x, w, b, stride=2, padding=1, output_padding=1),
                      {'x': (1, 2, 2, 3, 3), 'w': (2, 3, 3, 3, 3), 'b': (3,)}),
        CasoGradiente('deconv3d_k2', lambda x, w: deconv3d(x, w, stride=2),
                      {'x': (1, 2, 2, 2, 3), 'w': (2, 1, 2, 2, 2)}),
        CasoGradiente('avg_pool2d_truncado', lambda x: avg_pool2d(x, 2), {'x': (1, 2, 5, 7)}),
        CasoGradiente('adaptive_avg_pool2d', lambda x: adaptive_avg_pool2d(x, 3, 2), {'x': (1, 2, 7, 5)}),
        CasoGradiente('bilinear_upsample2d', lambda x: bilinear_upsample2d(x, 5, 9), {'x': (1, 2, 3, 4)}),
        CasoGradiente('trilinear_upsample3d', lambda x: trilinear_upsample3d(x, 3, 5, 4), {'x': (1, 1, 2, 3, 2)}),
        CasoGradiente('softmax', lambda x: operaciones.softmax(x, axis=1), {'x': (2, 5, 3)}),
        CasoGradiente('batchnorm', lambda x, gamma, beta: batchnorm(x, gamma, beta),
                      {'x': (2, 3, 4, 4), 'gamma': (3,), 'beta': (3,)}),
        CasoGradiente('relu', operaciones.relu, {'x': (3, 7)}, filtro=lejos_de_cero(0.1)),
        CasoGradiente('concat', lambda a, b: operaciones.concat([a, b], axis=1),
                      {'a': (1, 2, 3, 3), 'b': (1, 3, 3, 3)}),
        CasoGradiente('smooth_l1_loss', lambda pred: loss(pred, gt, mascara), {'pred': (4, 4)},
                      filtro=_lejos_del_quiebre(gt)),
        CasoGradiente('build_cost_volume', lambda izq, der: build_cost_volume(izq, der, 3).tensor,
                      {'izq': (1, 2, 3, 5), 'der': (1, 2, 3, 5)}),
        CasoGradiente('soft_argmin', lambda c: soft_argmin(c).tensor, {'c': (1, 1, 4, 2, 3)}),
    ]


def suite_primitivas(semilla: int = 0, tolerancia: float = TOLERANCIA_PRIMITIVAS) -> ResultadoSuite:
    rng = np.random.default_rng(semilla)
    inicio = time.time()
    resultado = ResultadoSuite()
    with sentry_sdk.start_span(op="gradcheck.primitivas", description="Suite de primitivas"):
        for caso in casos_primitivas(semilla):
            entradas = {n: rng.standard_normal(forma) for n, forma in caso.formas.items()}
            if caso.nombre == 'smooth_l1_loss':
                entradas['pred'] = entradas['pred'] * 2.0 + 2.0
            reporte = gradcheck(caso.funcion, entradas, tolerancia=tolerancia, operacion=caso.nombre,
                                max_elementos=caso.max_elementos, filtro=caso.filtro, semilla=semilla)
            resultado.reportes.append(reporte)
            if not reporte.aprobado:
                logger.warning(reporte.resumen())
    resultado.tiempo_total = time.time() - inicio
    logger.info(f"Suite de primitivas: {len(resultado.reportes) - len(resultado.fallidos)}/"
                f"{len(resultado.reportes)} aprobadas en {resultado.tiempo_total:.1f}s")
    return resultado


def suite_extremo_a_extremo(semilla: int = 0, config: NetworkConfig = CONFIG_EXTREMO,
                            alto: int = ALTO_EXTREMO, ancho: int = ANCHO_EXTREMO, max_por_tensor: int = 1,
                            tolerancia: float = TOLERANCIA_EXTREMO_A_EXTREMO) -> ResultadoSuite:
    """Red completa + pérdida en 64 bits; BN en modo entrenamiento."""
    inicio = time.time()
    muestra = generate_sample(SyntheticSpec(width=ancho, height=alto, d_max=config.d_max, seed=semilla))
    mascara = muestra.mascara_entrenamiento(config.d_max)
    with precision(np.float64):
        parametros = inicializar_parametros(config, semilla=semilla).convertir(np.float64)
        izquierda = muestra.left.astype(np.float64)
        derecha = muestra.right.astype(np.float64)

        def perdida_de():
            return loss(full_forward(izquierda, derecha, parametros), muestra.gt_disparity, mascara)

        with sentry_sdk.start_span(op="gradcheck.red", description="Red completa"):
            reporte = evaluar_parametros(perdida_de, [t for _, t in parametros], max_por_tensor=max_por_tensor,
                                         semilla=semilla, tolerancia=tolerancia, operacion='red_completa')
    resultado = ResultadoSuite(reportes=[reporte], tiempo_total=time.time() - inicio)
    logger.info(f"Suite extremo a extremo: {reporte.resumen()} ({resultado.tiempo_total:.1f}s)")
    return resultado
