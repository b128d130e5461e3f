"""
Tensor denso con registro de operaciones y retropropagación en modo reverso.

Cada operación diferenciable crea un `Nodo` con un número de secuencia global
creciente; la `Cinta` se reconstruye desde la pérdida recolectando los nodos
alcanzables y ordenándolos por secuencia, lo que garantiza orden topológico.
"""

import contextlib
import itertools
import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from disparidad.domain.excepciones import ErrorGradiente

logger = logging.getLogger(__name__)

Retroceso = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_SECUENCIA = itertools.count()
_ESTADO = threading.local()


def dtype_actual() -> np.dtype:
    """float32 para entrenamiento e inferencia; float64 dentro de `precision`."""
    return getattr(_ESTADO, 'dtype', np.dtype(np.float32))


def grad_habilitado() -> bool:
    return getattr(_ESTADO, 'grad', True)


@contextlib.contextmanager
def precision(dtype) -> Iterator[None]:
    """Cambia la precisión de los tensores creados dentro del bloque."""
    anterior = dtype_actual()
    _ESTADO.dtype = np.dtype(dtype)
    try:
        yield
    finally:
        _ESTADO.dtype = anterior


@contextlib.contextmanager
def sin_gradiente() -> Iterator[None]:
    """Desactiva el registro de operaciones (inferencia y evaluación)."""
    anterior = grad_habilitado()
    _ESTADO.grad = False
    try:
        yield
    finally:
        _ESTADO.grad = anterior


@dataclass(eq=False)
class Nodo:
    """Operación registrada: entradas, id de salida y regla de retroceso."""
    secuencia: int
    operacion: str
    entradas: Tuple['Tensor', ...]
    salida_id: int
    retroceso: Retroceso


@dataclass
class Cinta:
    """Lista ordenada de nodos; cada entrada de un nodo precede al nodo."""
    nodos: List[Nodo] = field(default_factory=list)

    @classmethod
    def desde(cls, raiz: 'Tensor') -> 'Cinta':
        visitados: Dict[int, Nodo] = {}
        pendientes = [raiz]
        while pendientes:
            tensor = pendientes.pop()
            nodo = tensor._nodo
            if nodo is None or nodo.secuencia in visitados:
                continue
            visitados[nodo.secuencia] = nodo
            pendientes.extend(nodo.entradas)
        return cls(nodos=[visitados[s] for s in sorted(visitados)])

    def __len__(self) -> int:
        return len(self.nodos)

    def reproducir(self, raiz: 'Tensor', semilla: np.ndarray) -> int:
        """Recorre la cinta en reverso acumulando gradientes. Devuelve nodos visitados."""
        gradientes: Dict[int, np.ndarray] = {id(raiz): semilla}
        visitados = 0
        for nodo in reversed(self.nodos):
            g = gradientes.pop(nodo.salida_id, None)
            if g is None:
                continue
            visitados += 1
            for entrada, g_entrada in zip(nodo.entradas, nodo.retroceso(g)):
                if g_entrada is None or not entrada.requires_grad:
                    continue
                if g_entrada.shape != entrada.shape:
                    raise ErrorGradiente(
                        f"'{nodo.operacion}' devolvió gradiente {g_entrada.shape} "
                        f"para una entrada {entrada.shape}"
                    )
                if entrada._nodo is None:
                    entrada._acumular(g_entrada)
                else:
                    clave = id(entrada)
                    if clave in gradientes:
                        gradientes[clave] = gradientes[clave] + g_entrada
                    else:
                        gradientes[clave] = g_entrada
        return visitados


class Tensor:
    """Arreglo denso que participa en el grafo de operaciones registrado."""

    __slots__ = ('data', 'requires_grad', 'grad', 'nombre', '_nodo', '__weakref__')
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, nombre: Optional[str] = None, dtype=None):
        arreglo = np.asarray(data)
        if dtype is not None or arreglo.dtype.kind != 'f' or arreglo.dtype != dtype_actual():
            arreglo = arreglo.astype(dtype or dtype_actual())
        self.data: np.ndarray = arreglo
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.nombre = nombre
        self._nodo: Optional[Nodo] = None

    # Propiedades de forma

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def es_hoja(self) -> bool:
        return self._nodo is None

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.size == 1 else float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def cero_grad(self) -> None:
        self.grad = None

    def _acumular(self, g: np.ndarray) -> None:
        self.grad = g.copy() if self.grad is None else self.grad + g

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        etiqueta = f", nombre={self.nombre!r}" if self.nombre else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{etiqueta})"

    # Operadores; las reglas viven en operaciones.py

    def __add__(self, otro):
        from disparidad.domain.tensor import operaciones
        return operaciones.add(self, otro)

    __radd__ = __add__

    def __sub__(self, otro):
        from disparidad.domain.tensor import operaciones
        return operaciones.sub(self, otro)

    def __rsub__(self, otro):
        from disparidad.domain.tensor import operaciones
        return operaciones.sub(otro, self)

    def __mul__(self, otro):
        from disparidad.domain.tensor import operaciones
        return operaciones.mul(self, otro)

    __rmul__ = __mul__

    def __truediv__(self, otro):
        from disparidad.domain.tensor import operaciones
        return operaciones.div(self, otro)

    def __neg__(self):
        from disparidad.domain.tensor import operaciones
        return operaciones.neg(self)

    def __getitem__(self, indice):
        from disparidad.domain.tensor import operaciones
        return operaciones.indexar(self, indice)


def como_tensor(valor) -> Tensor:
    return valor if isinstance(valor, Tensor) else Tensor(valor)


def registrar(datos: np.ndarray, entradas: Sequence[Tensor], retroceso: Retroceso, operacion: str) -> Tensor:
    """Crea el tensor de salida y, si alguna entrada requiere gradiente, su nodo."""
    salida = Tensor(datos, dtype=datos.dtype if datos.dtype.kind == 'f' else None)
    if grad_habilitado() and any(t.requires_grad for t in entradas):
        salida.requires_grad = True
        salida._nodo = Nodo(
            secuencia=next(_SECUENCIA),
            operacion=operacion,
            entradas=tuple(entradas),
            salida_id=id(salida),
            retroceso=retroceso,
        )
    return salida


def backward(perdida: Tensor) -> Cinta:
    """Propaga d(perdida)/d(hoja) a cada hoja con requires_grad."""
    if perdida.size != 1:
        raise ErrorGradiente(f"backward requiere una pérdida escalar, forma recibida {perdida.shape}")
    if not perdida.requires_grad:
        raise ErrorGradiente("la pérdida no depende de ningún tensor con requires_grad")
    cinta = Cinta.desde(perdida)
    semilla = np.ones(perdida.shape, dtype=perdida.dtype)
    if perdida._nodo is None:
        perdida._acumular(semilla)
        return cinta
    visitados = cinta.reproducir(perdida, semilla)
    logger.debug("backward: %d nodos en cinta, %d visitados", len(cinta), visitados)
    return cinta
