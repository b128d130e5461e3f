"""
Definición declarativa de capas convolucionales.

Una `CapaConv` describe a la vez qué parámetros hay que crear y cómo se aplica
la capa, de modo que el conteo de parámetros y el forward no pueden divergir.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from disparidad.domain.tensor import operaciones
from disparidad.domain.tensor.convolucion import conv2d, conv3d, deconv3d
from disparidad.domain.tensor.normalizacion import batchnorm
from disparidad.domain.tensor.tensor import Tensor


@dataclass(frozen=True)
class CapaConv:
    nombre: str
    entrada: int
    salida: int
    kernel: int
    dims: int = 2
    stride: int = 1
    padding: Optional[int] = None
    dilatacion: int = 1
    normalizar: bool = True
    activar: bool = True
    transpuesta: bool = False

    @property
    def relleno(self) -> int:
        """Por defecto, padding que conserva la extensión: dilatación·(k−1)/2."""
        return self.dilatacion * (self.kernel - 1) // 2 if self.padding is None else self.padding

    def con_bn(self, usar_batchnorm: bool) -> bool:
        return self.normalizar and usar_batchnorm

    def formas(self, usar_batchnorm: bool) -> Dict[str, Tuple[int, ...]]:
        """Nombre -> forma de cada tensor entrenable de la capa."""
        espacial = (self.kernel,) * self.dims
        if self.transpuesta:
            peso = (self.entrada, self.salida) + espacial
        else:
            peso = (self.salida, self.entrada) + espacial
        formas = {f'{self.nombre}.peso': peso}
        if self.con_bn(usar_batchnorm):
            formas[f'{self.nombre}.bn.gamma'] = (self.salida,)
            formas[f'{self.nombre}.bn.beta'] = (self.salida,)
        else:
            formas[f'{self.nombre}.sesgo'] = (self.salida,)
        return formas


def aplicar(capa: CapaConv, x: Tensor, params, residuo: Optional[Tensor] = None,
            output_padding=0) -> Tensor:
    """
    conv → BN (si corresponde) → + residuo → ReLU (si corresponde).

    `params` es un ParametrosRed: expone tensores por nombre, estadísticas de
    BN y el modo (train/eval).
    """
    peso = params[f'{capa.nombre}.peso']
    usar_bn = capa.con_bn(params.config.use_batchnorm)
    sesgo = None if usar_bn else params[f'{capa.nombre}.sesgo']

    if capa.transpuesta:
        y = deconv3d(x, peso, sesgo, stride=capa.stride, padding=capa.relleno, output_padding=output_padding)
    elif capa.dims == 3:
        y = conv3d(x, peso, sesgo, stride=capa.stride, padding=capa.relleno, dilatacion=capa.dilatacion)
    else:
        y = conv2d(x, peso, sesgo, stride=capa.stride, padding=capa.relleno, dilatacion=capa.dilatacion)

    if usar_bn:
        y = batchnorm(
            y, params[f'{capa.nombre}.bn.gamma'], params[f'{capa.nombre}.bn.beta'],
            modo=params.modo, estadisticas=params.estadisticas_de(capa.nombre, capa.salida),
        )
    if residuo is not None:
        y = operaciones.add(y, residuo)
    if capa.activar:
        y = operaciones.relu(y)
    return y
