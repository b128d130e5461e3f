"""
Convoluciones N-dimensionales (2D y 3D) y convolución transpuesta 3D.

Implementación im2col: cada tap del kernel se extrae con una rebanada con
paso sobre la entrada rellenada, y el producto se resuelve con un solo matmul.
El retroceso de la entrada es el "fold" inverso (suma de rebanadas), que es
exactamente la operación hacia adelante de la convolución transpuesta.
"""

import itertools
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.tensor.tensor import Tensor, registrar

logger = logging.getLogger(__name__)

Entero = Union[int, Sequence[int]]


def _tupla(valor: Entero, n: int, nombre: str) -> Tuple[int, ...]:
    if isinstance(valor, (int, np.integer)):
        return (int(valor),) * n
    valores = tuple(int(v) for v in valor)
    if len(valores) != n:
        raise ErrorForma(f"{nombre}: se esperaban {n} valores, se recibieron {len(valores)}")
    return valores


def _taps(kernel: Tuple[int, ...]) -> List[Tuple[int, ...]]:
    return list(itertools.product(*[range(k) for k in kernel]))


def _rebanadas(tap, dilatacion, stride, salida) -> Tuple[slice, ...]:
    return tuple(
        slice(i * d, i * d + s * (o - 1) + 1, s)
        for i, d, s, o in zip(tap, dilatacion, stride, salida)
    )


def _tomar_parches(xp: np.ndarray, kernel, stride, dilatacion, salida) -> np.ndarray:
    """[N, C, *P] -> [N, C·T, L] con T = prod(kernel) y L = prod(salida)."""
    n, c = xp.shape[:2]
    taps = _taps(kernel)
    col = np.empty((n, c, len(taps)) + tuple(salida), dtype=xp.dtype)
    for t, tap in enumerate(taps):
        col[:, :, t] = xp[(slice(None), slice(None)) + _rebanadas(tap, dilatacion, stride, salida)]
    return col.reshape(n, c * len(taps), -1)


def _devolver_parches(col: np.ndarray, forma_rellena, kernel, stride, dilatacion, salida) -> np.ndarray:
    """Adjunto de _tomar_parches: suma cada tap en su rebanada."""
    n, c = forma_rellena[:2]
    taps = _taps(kernel)
    col = col.reshape((n, c, len(taps)) + tuple(salida))
    xp = np.zeros(forma_rellena, dtype=col.dtype)
    for t, tap in enumerate(taps):
        xp[(slice(None), slice(None)) + _rebanadas(tap, dilatacion, stride, salida)] += col[:, :, t]
    return xp


def _relleno(padding: Tuple[int, ...]) -> List[Tuple[int, int]]:
    return [(0, 0), (0, 0)] + [(p, p) for p in padding]


def _recorte(padding: Tuple[int, ...], extensiones: Sequence[int]) -> Tuple[slice, ...]:
    return (slice(None), slice(None)) + tuple(slice(p, p + e) for p, e in zip(padding, extensiones))


def _validar_geometria(nombre, stride, padding, dilatacion) -> None:
    if any(s < 1 for s in stride):
        raise ErrorForma(f"{nombre}: stride debe ser ≥ 1, recibido {stride}")
    if any(d < 1 for d in dilatacion):
        raise ErrorForma(f"{nombre}: dilatación debe ser ≥ 1, recibida {dilatacion}")
    if any(p < 0 for p in padding):
        raise ErrorForma(f"{nombre}: padding debe ser ≥ 0, recibido {padding}")


def _conv_nd(entrada: Tensor, peso: Tensor, sesgo: Optional[Tensor], stride: Entero,
             padding: Entero, dilatacion: Entero, dims: int, nombre: str) -> Tensor:
    if entrada.ndim != dims + 2 or peso.ndim != dims + 2:
        raise ErrorForma(f"{nombre}: se esperaban tensores de {dims + 2} ejes", [entrada.shape, peso.shape])
    stride = _tupla(stride, dims, 'stride')
    padding = _tupla(padding, dims, 'padding')
    dilatacion = _tupla(dilatacion, dims, 'dilatación')
    _validar_geometria(nombre, stride, padding, dilatacion)

    n, c_entrada = entrada.shape[:2]
    c_salida, c_peso = peso.shape[:2]
    kernel = peso.shape[2:]
    if c_entrada != c_peso:
        raise ErrorForma(
            f"{nombre}: C_in de la entrada ({c_entrada}) no coincide con el peso ({c_peso})",
            [entrada.shape, peso.shape],
        )
    if sesgo is not None and sesgo.shape != (c_salida,):
        raise ErrorForma(f"{nombre}: el sesgo debe tener forma ({c_salida},)", [sesgo.shape])

    extensiones = entrada.shape[2:]
    salida = tuple(
        (e + 2 * p - d * (k - 1) - 1) // s + 1
        for e, p, d, k, s in zip(extensiones, padding, dilatacion, kernel, stride)
    )
    if any(o < 1 for o in salida):
        raise ErrorForma(
            f"{nombre}: extensión de salida no positiva {salida} "
            f"(kernel {kernel}, dilatación {dilatacion}, padding {padding})",
            [entrada.shape, peso.shape],
        )

    xp = np.pad(entrada.data, _relleno(padding))
    col = _tomar_parches(xp, kernel, stride, dilatacion, salida)
    w2 = peso.data.reshape(c_salida, -1)
    datos = np.matmul(w2, col).reshape((n, c_salida) + salida)
    if sesgo is not None:
        datos = datos + sesgo.data.reshape((1, c_salida) + (1,) * dims)

    def retroceso(g):
        g2 = g.reshape(n, c_salida, -1)
        g_peso = np.tensordot(g2, col, axes=([0, 2], [0, 2])).reshape(peso.shape) if peso.requires_grad else None
        g_entrada = None
        if entrada.requires_grad:
            g_col = np.matmul(w2.T, g2)
            g_xp = _devolver_parches(g_col, xp.shape, kernel, stride, dilatacion, salida)
            g_entrada = g_xp[_recorte(padding, extensiones)]
        g_sesgo = g.sum(axis=(0,) + tuple(range(2, dims + 2))) if sesgo is not None else None
        return g_entrada, g_peso, g_sesgo

    entradas = (entrada, peso) if sesgo is None else (entrada, peso, sesgo)
    return registrar(datos, entradas, retroceso, nombre)


def conv2d(entrada: Tensor, peso: Tensor, sesgo: Optional[Tensor] = None, stride: Entero = 1,
           padding: Entero = 0, dilatacion: Entero = 1) -> Tensor:
    """[N,C_in,H,W] * [C_out,C_in,kH,kW] -> [N,C_out,H',W'] con relleno de ceros."""
    return _conv_nd(entrada, peso, sesgo, stride, padding, dilatacion, 2, 'conv2d')


def conv3d(entrada: Tensor, peso: Tensor, sesgo: Optional[Tensor] = None, stride: Entero = 1,
           padding: Entero = 0, dilatacion: Entero = 1) -> Tensor:
    """Generalización a tres ejes (D, H, W) de conv2d."""
    return _conv_nd(entrada, peso, sesgo, stride, padding, dilatacion, 3, 'conv3d')


def deconv3d(entrada: Tensor, peso: Tensor, sesgo: Optional[Tensor] = None, stride: Entero = 1,
             padding: Entero = 0, output_padding: Entero = 0) -> Tensor:
    """
    Convolución transpuesta 3D, adjunta de conv3d con la misma geometría.

    El peso tiene la forma [C_in, C_out, kD, kH, kW]. La extensión de salida es
    (D−1)·stride − 2·padding + kD + output_padding, con 0 ≤ output_padding < stride.
    """
    dims = 3
    if entrada.ndim != dims + 2 or peso.ndim != dims + 2:
        raise ErrorForma("deconv3d: se esperaban tensores de 5 ejes", [entrada.shape, peso.shape])
    stride = _tupla(stride, dims, 'stride')
    padding = _tupla(padding, dims, 'padding')
    output_padding = _tupla(output_padding, dims, 'output_padding')
    dilatacion = (1,) * dims
    _validar_geometria('deconv3d', stride, padding, dilatacion)
    if any(not 0 <= op < s for op, s in zip(output_padding, stride)):
        raise ErrorForma(f"deconv3d: output_padding {output_padding} debe estar en [0, stride)")

    n, c_entrada = entrada.shape[:2]
    c_peso, c_salida = peso.shape[:2]
    kernel = peso.shape[2:]
    if c_entrada != c_peso:
        raise ErrorForma(
            f"deconv3d: C_in de la entrada ({c_entrada}) no coincide con el peso ({c_peso})",
            [entrada.shape, peso.shape],
        )
    if sesgo is not None and sesgo.shape != (c_salida,):
        raise ErrorForma(f"deconv3d: el sesgo debe tener forma ({c_salida},)", [sesgo.shape])

    extensiones = entrada.shape[2:]
    salida = tuple(
        (e - 1) * s - 2 * p + k + op
        for e, s, p, k, op in zip(extensiones, stride, padding, kernel, output_padding)
    )
    if any(o < 1 for o in salida):
        raise ErrorForma(f"deconv3d: extensión de salida no positiva {salida}", [entrada.shape, peso.shape])

    forma_rellena = (n, c_salida) + tuple(o + 2 * p for o, p in zip(salida, padding))
    w2 = peso.data.reshape(c_entrada, -1)
    x2 = entrada.data.reshape(n, c_entrada, -1)
    col = np.matmul(w2.T, x2)
    datos = _devolver_parches(col, forma_rellena, kernel, stride, dilatacion, extensiones)[_recorte(padding, salida)]
    if sesgo is not None:
        datos = datos + sesgo.data.reshape((1, c_salida) + (1,) * dims)

    def retroceso(g):
        col_g = _tomar_parches(np.pad(g, _relleno(padding)), kernel, stride, dilatacion, extensiones)
        g_entrada = np.matmul(w2, col_g).reshape(entrada.shape) if entrada.requires_grad else None
        g_peso = np.tensordot(x2, col_g, axes=([0, 2], [0, 2])).reshape(peso.shape) if peso.requires_grad else None
        g_sesgo = g.sum(axis=(0, 2, 3, 4)) if sesgo is not None else None
        return g_entrada, g_peso, g_sesgo

    entradas = (entrada, peso) if sesgo is None else (entrada, peso, sesgo)
    return registrar(np.ascontiguousarray(datos), entradas, retroceso, 'deconv3d')


def extension_conv(extension: int, kernel: int, stride: int = 1, padding: int = 0, dilatacion: int = 1) -> int:
    return (extension + 2 * padding - dilatacion * (kernel - 1) - 1) // stride + 1


def output_padding_para(extension_entrada: int, objetivo: int, kernel: int, stride: int, padding: int) -> int:
    """output_padding que lleva una deconvolución de `extension_entrada` a `objetivo`."""
    base = (extension_entrada - 1) * stride - 2 * padding + kernel
    return min(max(objetivo - base, 0), stride - 1)
