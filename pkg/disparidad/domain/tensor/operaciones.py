"""
Primitivas diferenciables elementales.

Cada función calcula la salida con numpy y registra una regla de retroceso
que devuelve un gradiente por entrada (None si la entrada no lo necesita).
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.tensor.tensor import Tensor, como_tensor, registrar

Eje = Union[int, Tuple[int, ...], None]


def _reducir_a_forma(g: np.ndarray, forma: Tuple[int, ...]) -> np.ndarray:
    """Suma sobre los ejes que el broadcasting expandió."""
    while g.ndim > len(forma):
        g = g.sum(axis=0)
    for eje, tamano in enumerate(forma):
        if tamano == 1 and g.shape[eje] != 1:
            g = g.sum(axis=eje, keepdims=True)
    return g


def _validar_broadcast(a: Tensor, b: Tensor, operacion: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ErrorForma(f"{operacion}: formas no compatibles", [a.shape, b.shape]) from None


def add(a, b) -> Tensor:
    a, b = como_tensor(a), como_tensor(b)
    _validar_broadcast(a, b, 'add')

    def retroceso(g):
        return _reducir_a_forma(g, a.shape), _reducir_a_forma(g, b.shape)

    return registrar(a.data + b.data, (a, b), retroceso, 'add')


def sub(a, b) -> Tensor:
    a, b = como_tensor(a), como_tensor(b)
    _validar_broadcast(a, b, 'sub')

    def retroceso(g):
        return _reducir_a_forma(g, a.shape), _reducir_a_forma(-g, b.shape)

    return registrar(a.data - b.data, (a, b), retroceso, 'sub')


def mul(a, b) -> Tensor:
    a, b = como_tensor(a), como_tensor(b)
    _validar_broadcast(a, b, 'mul')

    def retroceso(g):
        return _reducir_a_forma(g * b.data, a.shape), _reducir_a_forma(g * a.data, b.shape)

    return registrar(a.data * b.data, (a, b), retroceso, 'mul')


def div(a, b) -> Tensor:
    a, b = como_tensor(a), como_tensor(b)
    _validar_broadcast(a, b, 'div')

    def retroceso(g):
        ga = g / b.data
        gb = -g * a.data / (b.data * b.data)
        return _reducir_a_forma(ga, a.shape), _reducir_a_forma(gb, b.shape)

    return registrar(a.data / b.data, (a, b), retroceso, 'div')


def neg(a: Tensor) -> Tensor:
    return registrar(-a.data, (a,), lambda g: (-g,), 'neg')


def sum(x: Tensor, axis: Eje = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    forma = x.shape

    def retroceso(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, forma).copy(),)

    return registrar(np.sum(x.data, axis=axis, keepdims=keepdims), (x,), retroceso, 'sum')


def mean(x: Tensor, axis: Eje = None, keepdims: bool = False) -> Tensor:
    if axis is None:
        cuenta = x.size
    else:
        ejes = (axis,) if isinstance(axis, int) else axis
        cuenta = int(np.prod([x.shape[e] for e in ejes]))
    return sum(x, axis=axis, keepdims=keepdims) / float(cuenta)


def reshape(x: Tensor, forma: Sequence[int]) -> Tensor:
    original = x.shape
    try:
        datos = x.data.reshape(tuple(forma))
    except ValueError:
        raise ErrorForma("reshape: el número de elementos no coincide", [original, tuple(forma)]) from None
    return registrar(datos, (x,), lambda g: (g.reshape(original),), 'reshape')


def indexar(x: Tensor, indice) -> Tensor:
    """Recorte por rebanadas (basic indexing); el retroceso rellena con ceros."""
    datos = x.data[indice]

    def retroceso(g):
        completo = np.zeros(x.shape, dtype=g.dtype)
        completo[indice] = g
        return (completo,)

    return registrar(np.array(datos, copy=True), (x,), retroceso, 'indexar')


def rellenar(x: Tensor, anchos: Sequence[Tuple[int, int]]) -> Tensor:
    """Relleno con ceros; `anchos` tiene un par (antes, después) por eje."""
    anchos = [tuple(a) for a in anchos]
    recorte = tuple(slice(a, a + n) for (a, _), n in zip(anchos, x.shape))

    def retroceso(g):
        return (g[recorte],)

    return registrar(np.pad(x.data, anchos), (x,), retroceso, 'rellenar')


def concat(tensores: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensores = [como_tensor(t) for t in tensores]
    if not tensores:
        raise ErrorForma("concat: lista vacía")
    ndim = tensores[0].ndim
    eje = axis % ndim
    formas = [t.shape for t in tensores]
    for forma in formas:
        if len(forma) != ndim or any(
            forma[i] != formas[0][i] for i in range(ndim) if i != eje
        ):
            raise ErrorForma(f"concat: las entradas difieren fuera del eje {axis}", formas)
    cortes = np.cumsum([f[eje] for f in formas])[:-1]

    def retroceso(g):
        return tuple(np.split(g, cortes, axis=eje))

    return registrar(np.concatenate([t.data for t in tensores], axis=eje), tensores, retroceso, 'concat')


def relu(x: Tensor) -> Tensor:
    activo = x.data > 0
    return registrar(np.where(activo, x.data, 0).astype(x.dtype), (x,), lambda g: (g * activo,), 'relu')


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    if not -x.ndim <= axis < x.ndim:
        raise ErrorForma(f"softmax: eje {axis} fuera de rango", [x.shape])
    desplazado = x.data - np.max(x.data, axis=axis, keepdims=True)
    exponencial = np.exp(desplazado)
    salida = exponencial / np.sum(exponencial, axis=axis, keepdims=True)

    def retroceso(g):
        return (salida * (g - np.sum(g * salida, axis=axis, keepdims=True)),)

    return registrar(salida, (x,), retroceso, 'softmax')


def smooth_l1(x: Tensor) -> Tensor:
    """0.5·x² si |x| < 1, |x| − 0.5 en otro caso, elemento a elemento."""
    absoluto = np.abs(x.data)
    cuadratico = absoluto < 1
    salida = np.where(cuadratico, 0.5 * x.data * x.data, absoluto - 0.5)

    def retroceso(g):
        return (g * np.where(cuadratico, x.data, np.sign(x.data)),)

    return registrar(salida, (x,), retroceso, 'smooth_l1')


def es_finito(x: Optional[Tensor]) -> bool:
    return x is None or bool(np.all(np.isfinite(x.data)))
