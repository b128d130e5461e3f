"""
Optimizadores SGD y Adam sobre los parámetros de la red.

El estado (momentos de Adam y contador de pasos) se exporta como arreglos
con nombre para guardarlo en el checkpoint y reanudar de forma exacta.
"""

import logging
from typing import Dict, Iterable, Tuple

import numpy as np

from disparidad.domain.configuracion import TipoOptimizador, TrainConfig
from disparidad.domain.tensor.tensor import Tensor

logger = logging.getLogger(__name__)

PREFIJO_M = 'optim.m.'
PREFIJO_V = 'optim.v.'


class OptimizadorSGD:
    """Descenso de gradiente simple: p ← p − lr·g."""

    tipo = TipoOptimizador.SGD

    def __init__(self, parametros: Iterable[Tuple[str, Tensor]], learning_rate: float):
        self.parametros = dict(parametros)
        self.learning_rate = learning_rate
        self.paso = 0

    def step(self) -> None:
        self.paso += 1
        for tensor in self.parametros.values():
            if tensor.grad is None:
                continue
            tensor.data = tensor.data - (self.learning_rate * tensor.grad).astype(tensor.dtype)

    def zero_grad(self) -> None:
        for tensor in self.parametros.values():
            tensor.cero_grad()

    def estado(self) -> Dict[str, np.ndarray]:
        return {}

    def cargar_estado(self, tensores: Dict[str, np.ndarray], paso: int) -> None:
        self.paso = paso


class OptimizadorAdam(OptimizadorSGD):
    """Adam con corrección de sesgo."""

    tipo = TipoOptimizador.ADAM

    def __init__(self, parametros: Iterable[Tuple[str, Tensor]], learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        super().__init__(parametros, learning_rate)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {n: np.zeros_like(t.data) for n, t in self.parametros.items()}
        self.v = {n: np.zeros_like(t.data) for n, t in self.parametros.items()}

    def step(self) -> None:
        self.paso += 1
        correccion1 = 1.0 - self.beta1 ** self.paso
        correccion2 = 1.0 - self.beta2 ** self.paso
        for nombre, tensor in self.parametros.items():
            if tensor.grad is None:
                continue
            g = tensor.grad.astype(tensor.dtype)
            self.m[nombre] = self.beta1 * self.m[nombre] + (1 - self.beta1) * g
            self.v[nombre] = self.beta2 * self.v[nombre] + (1 - self.beta2) * (g * g)
            m_hat = self.m[nombre] / correccion1
            v_hat = self.v[nombre] / correccion2
            actualizacion = self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
            tensor.data = tensor.data - actualizacion.astype(tensor.dtype)

    def estado(self) -> Dict[str, np.ndarray]:
        estado = {f'{PREFIJO_M}{n}': m for n, m in self.m.items()}
        estado.update({f'{PREFIJO_V}{n}': v for n, v in self.v.items()})
        return estado

    def cargar_estado(self, tensores: Dict[str, np.ndarray], paso: int) -> None:
        self.paso = paso
        for nombre, tensor in self.parametros.items():
            for prefijo, destino in ((PREFIJO_M, self.m), (PREFIJO_V, self.v)):
                clave = prefijo + nombre
                if clave in tensores:
                    destino[nombre] = tensores[clave].astype(tensor.dtype)
                else:
                    logger.warning(f"Estado de Adam sin '{clave}', se reinicia en cero")
                    destino[nombre] = np.zeros_like(tensor.data)


def crear_optimizador(parametros: Iterable[Tuple[str, Tensor]], config: TrainConfig) -> OptimizadorSGD:
    if TipoOptimizador(config.optimizer) is TipoOptimizador.SGD:
        return OptimizadorSGD(parametros, config.learning_rate)
    return OptimizadorAdam(parametros, config.learning_rate, config.beta1, config.beta2, config.eps)
