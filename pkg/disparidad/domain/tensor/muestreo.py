"""
Pooling promedio y remuestreo align-corners, separables por eje.

Ambos se construyen con dos primitivas de un eje: promediar sobre intervalos
[inicio, fin) y interpolar linealmente entre dos muestras vecinas. La
interpolación se calcula como a + t·(b − a), de modo que un campo constante
se conserva exactamente.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np

from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.tensor.tensor import Tensor, registrar

Intervalo = Tuple[int, int]


def intervalos_ventana(extension: int, ventana: int) -> List[Intervalo]:
    """Ventanas contiguas; la última se trunca a la extensión restante."""
    return [(i, min(i + ventana, extension)) for i in range(0, extension, ventana)]


def intervalos_adaptativos(extension: int, salida: int) -> List[Intervalo]:
    """Intervalos adaptativos: inicio = floor(i·E/n), fin = ceil((i+1)·E/n)."""
    return [
        ((i * extension) // salida, -((-(i + 1) * extension) // salida))
        for i in range(salida)
    ]


def _eje_normalizado(x: Tensor, eje: int) -> int:
    if not -x.ndim <= eje < x.ndim:
        raise ErrorForma(f"eje {eje} fuera de rango", [x.shape])
    return eje % x.ndim


def promediar_eje(x: Tensor, eje: int, intervalos: Sequence[Intervalo]) -> Tensor:
    eje = _eje_normalizado(x, eje)
    datos = np.stack(
        [np.sum(np.take(x.data, range(a, b), axis=eje), axis=eje) / (b - a) for a, b in intervalos],
        axis=eje,
    )

    def retroceso(g):
        g_x = np.zeros(x.shape, dtype=g.dtype)
        for i, (a, b) in enumerate(intervalos):
            destino = [slice(None)] * x.ndim
            destino[eje] = slice(a, b)
            g_x[tuple(destino)] += np.expand_dims(np.take(g, i, axis=eje), eje) / (b - a)
        return (g_x,)

    return registrar(datos, (x,), retroceso, 'promediar_eje')


def _pesos_align_corners(entrada: int, salida: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Índice izquierdo, derecho y fracción de cada muestra de salida."""
    if entrada == 1:
        ceros = np.zeros(salida, dtype=np.int64)
        return ceros, ceros, np.zeros(salida)
    if salida == 1:
        posiciones = np.zeros(1)
    else:
        posiciones = np.arange(salida) * ((entrada - 1) / (salida - 1))
    izquierdo = np.minimum(np.floor(posiciones).astype(np.int64), entrada - 2)
    fraccion = posiciones - izquierdo
    derecho = izquierdo + 1
    if salida > 1:
        # última muestra anclada a la esquina
        izquierdo[-1] = derecho[-1] = entrada - 1
        fraccion[-1] = 0.0
    return izquierdo, derecho, fraccion


def interpolar_eje(x: Tensor, eje: int, salida: int) -> Tensor:
    eje = _eje_normalizado(x, eje)
    izquierdo, derecho, fraccion = _pesos_align_corners(x.shape[eje], salida)
    forma_t = [1] * x.ndim
    forma_t[eje] = salida
    t = fraccion.reshape(forma_t).astype(x.dtype)
    a = np.take(x.data, izquierdo, axis=eje)
    b = np.take(x.data, derecho, axis=eje)
    datos = a + t * (b - a)

    def retroceso(g):
        g_x = np.zeros(x.shape, dtype=g.dtype)
        movido = np.moveaxis(g_x, eje, 0)
        np.add.at(movido, izquierdo, np.moveaxis(g * (1 - t), eje, 0))
        np.add.at(movido, derecho, np.moveaxis(g * t, eje, 0))
        return (g_x,)

    return registrar(datos, (x,), retroceso, 'interpolar_eje')


def avg_pool2d(x: Tensor, ventana: int) -> Tensor:
    """Promedio por ventanas de `ventana`×`ventana`; ventanas finales truncadas."""
    if ventana < 1:
        raise ErrorForma(f"avg_pool2d: la ventana debe ser ≥ 1, recibida {ventana}")
    if x.ndim != 4:
        raise ErrorForma("avg_pool2d: se esperaba [N,C,H,W]", [x.shape])
    h, w = x.shape[2:]
    salida = promediar_eje(x, 2, intervalos_ventana(h, ventana))
    return promediar_eje(salida, 3, intervalos_ventana(w, ventana))


def adaptive_avg_pool2d(x: Tensor, salida_h: int, salida_w: int) -> Tensor:
    if x.ndim != 4:
        raise ErrorForma("adaptive_avg_pool2d: se esperaba [N,C,H,W]", [x.shape])
    h, w = x.shape[2:]
    salida_h, salida_w = min(max(1, salida_h), h), min(max(1, salida_w), w)
    salida = promediar_eje(x, 2, intervalos_adaptativos(h, salida_h))
    return promediar_eje(salida, 3, intervalos_adaptativos(w, salida_w))


def _remuestrear(x: Tensor, salidas: Sequence[int], nombre: str) -> Tensor:
    extensiones = x.shape[2:]
    if len(salidas) != len(extensiones):
        raise ErrorForma(f"{nombre}: se esperaban {len(extensiones)} extensiones de salida", [x.shape])
    if any(o < e for o, e in zip(salidas, extensiones)):
        raise ErrorForma(f"{nombre}: la salida {tuple(salidas)} no puede ser menor que la entrada", [x.shape])
    for i, objetivo in enumerate(salidas):
        if x.shape[2 + i] != objetivo:
            x = interpolar_eje(x, 2 + i, objetivo)
    return x


def bilinear_upsample2d(x: Tensor, salida_h: int, salida_w: int) -> Tensor:
    """Interpolación bilineal align-corners: las esquinas se conservan exactamente."""
    if x.ndim != 4:
        raise ErrorForma("bilinear_upsample2d: se esperaba [N,C,h,w]", [x.shape])
    return _remuestrear(x, (salida_h, salida_w), 'bilinear_upsample2d')


def trilinear_upsample3d(x: Tensor, salida_d: int, salida_h: int, salida_w: int) -> Tensor:
    if x.ndim != 5:
        raise ErrorForma("trilinear_upsample3d: se esperaba [N,C,d,h,w]", [x.shape])
    return _remuestrear(x, (salida_d, salida_h, salida_w), 'trilinear_upsample3d')


def trilinear_resize3d(x: Tensor, salida_d: int, salida_h: int, salida_w: int) -> Tensor:
    """Redimensiona a la forma exacta; también reduce (guardia de redondeo)."""
    if x.ndim != 5:
        raise ErrorForma("trilinear_resize3d: se esperaba [N,C,d,h,w]", [x.shape])
    for i, objetivo in enumerate((salida_d, salida_h, salida_w)):
        if x.shape[2 + i] != objetivo:
            x = interpolar_eje(x, 2 + i, objetivo)
    return x


def tamano_rejilla(extension: int, escala: int, pool: int) -> int:
    """max(1, round_half_up(extension·escala/pool))."""
    return max(1, int(math.floor(extension * escala / pool + 0.5)))
