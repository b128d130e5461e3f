"""
Evaluación de disparidades: comparación de archivos contra la verdad y
evaluación de un modelo sobre semillas sintéticas reservadas.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from disparidad.application.services.inferencia import mapa_de_disparidad
from disparidad.domain.datos.muestras import SyntheticSpec
from disparidad.domain.datos.sintetico import generate_sample
from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.objetivo.metricas import MetricReport, evaluar
from disparidad.domain.red.parametros import ParametrosRed
from disparidad.infrastructure.adapters.imagenes import leer_mapa_disparidad, read_mascara

logger = logging.getLogger(__name__)

SEMILLA_RESERVADA = 1_000_000

Ruta = Union[str, Path]


def evaluar_archivos(ruta_prediccion: Ruta, ruta_verdad: Ruta, ruta_noc: Optional[Ruta] = None,
                     ruta_fg: Optional[Ruta] = None) -> MetricReport:
    """MetricReport de una predicción (.pfm/.png) contra la verdad (.pfm/.png KITTI)."""
    prediccion, _ = leer_mapa_disparidad(ruta_prediccion)
    verdad, valida = leer_mapa_disparidad(ruta_verdad)
    if prediccion.shape != verdad.shape:
        raise ErrorForma("la predicción y la verdad tienen formas distintas", [prediccion.shape, verdad.shape])
    noc = read_mascara(ruta_noc) if ruta_noc else None
    fg = read_mascara(ruta_fg) if ruta_fg else None
    for nombre, mascara in (('noc', noc), ('fg', fg)):
        if mascara is not None and mascara.shape != verdad.shape:
            raise ErrorForma(f"la máscara {nombre} no coincide con la verdad", [mascara.shape, verdad.shape])
    return evaluar(prediccion, np.nan_to_num(verdad), valida, fg_mask=fg, noc_mask=noc)


@dataclass
class ResumenEvaluacion:
    reportes: List[MetricReport] = field(default_factory=list)
    semillas: List[int] = field(default_factory=list)

    @property
    def epe_medio(self) -> float:
        return float(np.mean([r.epe for r in self.reportes]))


def semillas_reservadas(cantidad: int, base: int = SEMILLA_RESERVADA) -> List[int]:
    return list(range(base, base + cantidad))


def _evaluar_semilla(parametros: ParametrosRed, spec: SyntheticSpec, semilla: int) -> MetricReport:
    muestra = generate_sample(spec.con_semilla(semilla))
    prediccion = mapa_de_disparidad(parametros, muestra.left, muestra.right)
    mascara = muestra.mascara_entrenamiento(parametros.config.d_max)
    return evaluar(prediccion, muestra.gt_disparity, mascara, fg_mask=muestra.fg_mask)


def evaluar_modelo(parametros: ParametrosRed, spec: SyntheticSpec, semillas: Sequence[int],
                   n_jobs: int = 1) -> ResumenEvaluacion:
    """
    Evalúa el modelo (BN en modo evaluación) sobre una muestra por semilla.
    Los resultados conservan el orden de `semillas` para cualquier `n_jobs`
    y el modo de `parametros` se restaura al terminar.
    """
    modo = parametros.modo
    parametros.evaluar()
    try:
        for nombre, canales in _capas_bn(parametros):
            parametros.estadisticas_de(nombre, canales)
        reportes = Parallel(n_jobs=n_jobs, prefer='threads')(
            delayed(_evaluar_semilla)(parametros, spec, s) for s in semillas
        )
    finally:
        parametros.modo = modo
    resumen = ResumenEvaluacion(reportes=list(reportes), semillas=list(semillas))
    logger.info(f"Evaluación sobre {len(semillas)} semillas: EPE medio {resumen.epe_medio:.4f}")
    return resumen


@dataclass
class ComparacionReservada:
    """EPE medio de un modelo entrenado frente al mismo modelo sin entrenar."""
    entrenado: ResumenEvaluacion
    base: ResumenEvaluacion

    @property
    def mejora(self) -> float:
        return self.base.epe_medio / max(self.entrenado.epe_medio, 1e-12)

    def a_lineas(self) -> List[str]:
        return [
            f"semillas_reservadas={len(self.entrenado.semillas)}",
            f"epe_reservado={self.entrenado.epe_medio:.6f}",
            f"epe_base={self.base.epe_medio:.6f}",
            f"mejora={self.mejora:.3f}",
        ]


def comparar_con_base(entrenado: ParametrosRed, base: ParametrosRed, spec: SyntheticSpec,
                      semillas: Sequence[int], n_jobs: int = 1) -> ComparacionReservada:
    return ComparacionReservada(
        entrenado=evaluar_modelo(entrenado, spec, semillas, n_jobs=n_jobs),
        base=evaluar_modelo(base, spec, semillas, n_jobs=n_jobs),
    )


def _capas_bn(parametros: ParametrosRed):
    """(capa, canales) de cada BN declarada, para crear sus estadísticas antes de paralelizar."""
    sufijo = '.bn.gamma'
    for nombre, tensor in parametros:
        if nombre.endswith(sufijo):
            yield nombre[:-len(sufijo)], tensor.shape[0]
