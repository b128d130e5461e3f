"""
Batch normalization con modos de entrenamiento y evaluación.
"""

from dataclasses import dataclass

import numpy as np

from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.tensor.tensor import Tensor, registrar

MOMENTUM = 0.1
EPS = 1e-5

MODOS = ('train', 'eval')


@dataclass
class EstadisticasBN:
    """Media y varianza acumuladas de un canal por capa (no son parámetros)."""
    media: np.ndarray
    varianza: np.ndarray

    @classmethod
    def nuevas(cls, canales: int) -> 'EstadisticasBN':
        return cls(media=np.zeros(canales, dtype=np.float32), varianza=np.ones(canales, dtype=np.float32))

    def actualizar(self, media: np.ndarray, varianza_insesgada: np.ndarray, momentum: float) -> None:
        self.media = ((1 - momentum) * self.media + momentum * media).astype(self.media.dtype)
        self.varianza = ((1 - momentum) * self.varianza + momentum * varianza_insesgada).astype(self.varianza.dtype)


def batchnorm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = EPS, modo: str = 'train',
              estadisticas: EstadisticasBN = None, momentum: float = MOMENTUM) -> Tensor:
    """
    Normaliza sobre los ejes de lote y espaciales de [N, C, ...].

    En modo 'train' usa la media y varianza (sesgada) del lote y, si se pasan
    `estadisticas`, las actualiza con varianza insesgada. En modo 'eval' usa
    las estadísticas acumuladas.
    """
    if eps <= 0:
        raise ErrorForma(f"batchnorm: eps debe ser > 0, recibido {eps}")
    if modo not in MODOS:
        raise ErrorForma(f"batchnorm: modo desconocido '{modo}'")
    if x.ndim < 2:
        raise ErrorForma("batchnorm: se esperaba [N, C, ...]", [x.shape])
    canales = x.shape[1]
    if gamma.shape != (canales,) or beta.shape != (canales,):
        raise ErrorForma("batchnorm: gamma/beta no coinciden con los canales", [x.shape, gamma.shape, beta.shape])

    ejes = (0,) + tuple(range(2, x.ndim))
    forma_canal = (1, canales) + (1,) * (x.ndim - 2)
    cuenta = x.size // canales

    if modo == 'train':
        media = x.data.mean(axis=ejes)
        centrado = x.data - media.reshape(forma_canal)
        varianza = (centrado * centrado).mean(axis=ejes)
        if estadisticas is not None:
            insesgada = varianza * cuenta / max(cuenta - 1, 1)
            estadisticas.actualizar(media, insesgada, momentum)
    else:
        if estadisticas is None:
            raise ErrorForma("batchnorm: el modo 'eval' requiere estadísticas acumuladas")
        media = estadisticas.media.astype(x.dtype)
        varianza = estadisticas.varianza.astype(x.dtype)
        centrado = x.data - media.reshape(forma_canal)

    inv_std = (1.0 / np.sqrt(varianza + eps)).astype(x.dtype).reshape(forma_canal)
    normalizado = centrado * inv_std
    datos = gamma.data.reshape(forma_canal) * normalizado + beta.data.reshape(forma_canal)

    def retroceso(g):
        g_gamma = np.sum(g * normalizado, axis=ejes)
        g_beta = np.sum(g, axis=ejes)
        g_norm = g * gamma.data.reshape(forma_canal)
        if modo == 'train':
            g_x = inv_std / cuenta * (
                cuenta * g_norm
                - np.sum(g_norm, axis=ejes).reshape(forma_canal)
                - normalizado * np.sum(g_norm * normalizado, axis=ejes).reshape(forma_canal)
            )
        else:
            g_x = g_norm * inv_std
        return g_x, g_gamma, g_beta

    return registrar(datos, (x, gamma, beta), retroceso, 'batchnorm')
