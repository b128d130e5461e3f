"""
Pérdida smooth-L1 enmascarada sobre los píxeles etiquetados.
"""

from typing import Optional, Union

import numpy as np

from disparidad.domain.datos.muestras import StereoSample
from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.tensor import operaciones
from disparidad.domain.tensor.tensor import Tensor


def smooth_l1(x: float) -> float:
    """0.5·x² si |x| < 1, |x| − 0.5 en otro caso."""
    absoluto = abs(x)
    return 0.5 * x * x if absoluto < 1 else absoluto - 0.5


def loss(pred, sample: Union[StereoSample, np.ndarray], mascara: Optional[np.ndarray] = None) -> Tensor:
    """
    Media de smooth_l1(gt − pred) sobre los N píxeles de la máscara.

    `pred` es un DisparityMap o un Tensor [N,H,W] / [H,W]; `sample` una
    StereoSample o directamente el mapa de verdad [H,W]. Sin `mascara` se usa
    `sample.valid_mask`.
    """
    prediccion: Tensor = getattr(pred, 'tensor', pred)
    if isinstance(sample, StereoSample):
        gt = sample.gt_disparity
        mascara = sample.valid_mask if mascara is None else mascara
    else:
        gt = np.asarray(sample)
        mascara = np.ones(gt.shape, dtype=bool) if mascara is None else mascara
    if prediccion.shape[-2:] != gt.shape or mascara.shape != gt.shape:
        raise ErrorForma("loss: la predicción, la verdad y la máscara deben coincidir",
                         [prediccion.shape, gt.shape, mascara.shape])
    lote = int(np.prod(prediccion.shape[:-2], dtype=np.int64))
    etiquetados = int(mascara.sum()) * lote
    if etiquetados == 0:
        raise ErrorForma("loss: la muestra no tiene píxeles válidos")

    verdad = Tensor(gt.astype(prediccion.dtype), dtype=prediccion.dtype)
    pesos = Tensor(mascara.astype(prediccion.dtype), dtype=prediccion.dtype)
    residuo = operaciones.sub(verdad, prediccion)
    por_pixel = operaciones.mul(operaciones.smooth_l1(residuo), pesos)
    return operaciones.div(operaciones.sum(por_pixel), float(etiquetados))
