"""
Métricas de evaluación estilo KITTI: EPE, tasa de píxeles malos (>k px) y D1
por región (fondo, primer plano, todo), sobre All y, si hay máscara, Noc.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from disparidad.domain.excepciones import ErrorForma

logger = logging.getLogger(__name__)

UMBRALES_BAD = (1, 3, 4, 5)
D1_PIXELES = 3.0
D1_RELATIVO = 0.05


def _validar(pred: np.ndarray, gt: np.ndarray, mascara: np.ndarray) -> np.ndarray:
    pred, gt = np.asarray(pred), np.asarray(gt)
    mascara = np.asarray(mascara, dtype=bool)
    if pred.shape != gt.shape or mascara.shape != gt.shape:
        raise ErrorForma("las formas de predicción, verdad y máscara deben coincidir",
                         [pred.shape, gt.shape, mascara.shape])
    return mascara


def epe(pred: np.ndarray, gt: np.ndarray, mascara: np.ndarray) -> float:
    """Error absoluto medio sobre los píxeles válidos."""
    mascara = _validar(pred, gt, mascara)
    if not mascara.any():
        raise ErrorForma("epe: máscara vacía")
    return float(np.mean(np.abs(np.asarray(pred, dtype=np.float64)[mascara] - np.asarray(gt, dtype=np.float64)[mascara])))


def bad_pixel_rate(pred: np.ndarray, gt: np.ndarray, mascara: np.ndarray, threshold_px: float) -> float:
    """Fracción de píxeles válidos con |pred − gt| > threshold_px."""
    if threshold_px <= 0:
        raise ErrorForma(f"bad_pixel_rate: el umbral debe ser > 0, recibido {threshold_px}")
    mascara = _validar(pred, gt, mascara)
    if not mascara.any():
        raise ErrorForma("bad_pixel_rate: máscara vacía, tasa indefinida")
    error = np.abs(np.asarray(pred, dtype=np.float64) - np.asarray(gt, dtype=np.float64))[mascara]
    return float(np.mean(error > threshold_px))


def es_error_d1(error: np.ndarray, gt: np.ndarray) -> np.ndarray:
    return (error > D1_PIXELES) & (error > D1_RELATIVO * np.abs(gt))


def d1_metrics(pred: np.ndarray, gt: np.ndarray, fg_mask: Optional[np.ndarray],
               valid_mask: np.ndarray) -> Tuple[Optional[float], Optional[float], Optional[float]]:
    """(d1_bg, d1_fg, d1_all); una región vacía se reporta como None."""
    valid_mask = _validar(pred, gt, valid_mask)
    fg = np.zeros_like(valid_mask) if fg_mask is None else np.asarray(fg_mask, dtype=bool)
    if fg.shape != valid_mask.shape:
        raise ErrorForma("d1_metrics: la máscara de primer plano no coincide", [fg.shape, valid_mask.shape])
    gt = np.asarray(gt, dtype=np.float64)
    errores = es_error_d1(np.abs(np.asarray(pred, dtype=np.float64) - gt), gt)

    def tasa(region: np.ndarray) -> Optional[float]:
        return float(errores[region].mean()) if region.any() else None

    return tasa(valid_mask & ~fg), tasa(valid_mask & fg), tasa(valid_mask)


@dataclass
class MetricReport:
    """Métricas por región. Las claves de `valores` siguen 'metrica[_noc]'."""
    valores: Dict[str, Optional[float]] = field(default_factory=dict)
    conteos: Dict[str, int] = field(default_factory=dict)

    @property
    def epe(self) -> float:
        return self.valores['epe']

    def __getitem__(self, clave: str) -> Optional[float]:
        return self.valores[clave]

    def a_lineas(self) -> List[str]:
        """Líneas key=value; las regiones ausentes se escriben como 'absent'."""
        lineas = []
        for clave, valor in self.valores.items():
            lineas.append(f"{clave}={'absent' if valor is None else format(valor, '.6f')}")
        for clave, valor in self.conteos.items():
            lineas.append(f"{clave}={valor}")
        return lineas

    def a_texto(self) -> str:
        return "\n".join(self.a_lineas())


def evaluar(pred: np.ndarray, gt: np.ndarray, valid_mask: np.ndarray, fg_mask: Optional[np.ndarray] = None,
            noc_mask: Optional[np.ndarray] = None) -> MetricReport:
    """Reporte completo sobre All y, si se pasa `noc_mask`, también sobre Noc."""
    reporte = MetricReport()
    regiones = [('', np.asarray(valid_mask, dtype=bool))]
    if noc_mask is not None:
        regiones.append(('_noc', np.asarray(valid_mask, dtype=bool) & np.asarray(noc_mask, dtype=bool)))

    for sufijo, mascara in regiones:
        if not mascara.any():
            raise ErrorForma(f"evaluar: región{sufijo or ' all'} sin píxeles válidos")
        reporte.valores[f'epe{sufijo}'] = epe(pred, gt, mascara)
        for k in UMBRALES_BAD:
            reporte.valores[f'bad{k}{sufijo}'] = bad_pixel_rate(pred, gt, mascara, k)
        d1_bg, d1_fg, d1_all = d1_metrics(pred, gt, fg_mask, mascara)
        reporte.valores[f'd1_bg{sufijo}'] = d1_bg
        reporte.valores[f'd1_fg{sufijo}'] = d1_fg
        reporte.valores[f'd1_all{sufijo}'] = d1_all

        fg = np.zeros_like(mascara) if fg_mask is None else np.asarray(fg_mask, dtype=bool)
        reporte.conteos[f'pixeles_all{sufijo}'] = int(mascara.sum())
        reporte.conteos[f'pixeles_fg{sufijo}'] = int((mascara & fg).sum())
        reporte.conteos[f'pixeles_bg{sufijo}'] = int((mascara & ~fg).sum())

    logger.debug("Reporte de métricas: %s", reporte.valores)
    return reporte
