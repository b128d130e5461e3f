"""
Verificación de gradientes por diferencias centrales en 64 bits.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from disparidad.domain.tensor import operaciones
from disparidad.domain.tensor.tensor import Tensor, backward, precision, sin_gradiente

logger = logging.getLogger(__name__)

PASO = 1e-4
TOLERANCIA_PRIMITIVAS = 1e-4
TOLERANCIA_EXTREMO_A_EXTREMO = 1e-3

# Selecciona qué elementos de cada entrada se verifican (p. ej. lejos del kink de relu).
FiltroElementos = Callable[[str, np.ndarray], np.ndarray]


def error_relativo(analitico: np.ndarray, numerico: np.ndarray) -> np.ndarray:
    return np.abs(analitico - numerico) / np.maximum(1e-8, np.abs(analitico) + np.abs(numerico))


@dataclass
class ReporteGradiente:
    """Error relativo máximo por entrada."""
    operacion: str
    tolerancia: float
    errores: Dict[str, float] = field(default_factory=dict)
    elementos_verificados: Dict[str, int] = field(default_factory=dict)

    @property
    def error_maximo(self) -> float:
        return max(self.errores.values(), default=0.0)

    @property
    def aprobado(self) -> bool:
        return self.error_maximo < self.tolerancia

    def resumen(self) -> str:
        estado = "OK" if self.aprobado else "FALLA"
        detalle = ", ".join(f"{k}={v:.2e}" for k, v in self.errores.items())
        return f"{estado} {self.operacion}: max={self.error_maximo:.2e} ({detalle})"


def gradcheck(funcion: Callable[..., Tensor], entradas: Dict[str, np.ndarray], tolerancia: float = TOLERANCIA_PRIMITIVAS,
              operacion: str = 'op', paso: float = PASO, max_elementos: Optional[int] = None,
              filtro: Optional[FiltroElementos] = None, semilla: int = 0) -> ReporteGradiente:
    """
    Compara el gradiente analítico de `funcion` con diferencias centrales.

    La salida (de cualquier forma) se proyecta a un escalar con pesos
    aleatorios fijos, así se verifican todas las componentes de la salida.
    """
    rng = np.random.default_rng(semilla)
    reporte = ReporteGradiente(operacion=operacion, tolerancia=tolerancia)
    with precision(np.float64):
        valores = {nombre: np.array(v, dtype=np.float64) for nombre, v in entradas.items()}
        proyeccion: List[np.ndarray] = []

        def evaluar(tensores: Dict[str, Tensor]) -> Tensor:
            salida = funcion(**tensores)
            if not proyeccion:
                proyeccion.append(rng.standard_normal(salida.shape))
            return operaciones.sum(operaciones.mul(salida, Tensor(proyeccion[0])))

        tensores = {n: Tensor(v, requires_grad=True, nombre=n) for n, v in valores.items()}
        backward(evaluar(tensores))
        analiticos = {
            n: (t.grad if t.grad is not None else np.zeros_like(t.data)) for n, t in tensores.items()
        }

        for nombre, valor in valores.items():
            indices = _seleccionar(nombre, valor, max_elementos, filtro, rng)
            if len(indices) == 0:
                continue
            numericos = np.empty(len(indices))
            for j, indice in enumerate(indices):
                numericos[j] = _derivada_central(evaluar, valores, nombre, indice, paso)
            analitico = analiticos[nombre].reshape(-1)[indices]
            reporte.errores[nombre] = float(np.max(error_relativo(analitico, numericos)))
            reporte.elementos_verificados[nombre] = len(indices)

    logger.debug(reporte.resumen())
    return reporte


def _seleccionar(nombre: str, valor: np.ndarray, max_elementos: Optional[int],
                 filtro: Optional[FiltroElementos], rng: np.random.Generator) -> np.ndarray:
    candidatos = np.arange(valor.size)
    if filtro is not None:
        candidatos = candidatos[filtro(nombre, valor).reshape(-1)]
    if max_elementos is not None and candidatos.size > max_elementos:
        candidatos = np.sort(rng.choice(candidatos, size=max_elementos, replace=False))
    return candidatos


def _derivada_central(evaluar, valores: Dict[str, np.ndarray], nombre: str, indice: int, paso: float) -> float:
    resultados = []
    for signo in (1.0, -1.0):
        perturbado = valores[nombre].copy()
        perturbado.flat[indice] += signo * paso
        tensores = {n: Tensor(perturbado if n == nombre else v) for n, v in valores.items()}
        with sin_gradiente():
            resultados.append(float(evaluar(tensores).item()))
    return (resultados[0] - resultados[1]) / (2 * paso)


def lejos_de_cero(umbral: float = 0.1) -> FiltroElementos:
    """Filtro para relu: sólo puntos con |x| > umbral."""
    return lambda _nombre, valor: np.abs(valor) > umbral


def evaluar_parametros(perdida_de: Callable[[], Tensor], parametros: Sequence[Tensor], paso: float = PASO,
                       max_por_tensor: int = 1, semilla: int = 0,
                       tolerancia: float = TOLERANCIA_EXTREMO_A_EXTREMO,
                       operacion: str = 'red') -> ReporteGradiente:
    """
    Gradcheck sobre hojas que ya viven dentro de un modelo (parámetros de la red).

    `perdida_de` recalcula la pérdida escalar leyendo los datos actuales de
    `parametros`, que deben estar en float64.
    """
    rng = np.random.default_rng(semilla)
    reporte = ReporteGradiente(operacion=operacion, tolerancia=tolerancia)
    with precision(np.float64):
        for p in parametros:
            p.cero_grad()
        backward(perdida_de())
        for p in parametros:
            analitico = p.grad if p.grad is not None else np.zeros_like(p.data)
            cuantos = min(max_por_tensor, p.size)
            indices = np.sort(rng.choice(p.size, size=cuantos, replace=False))
            errores = []
            for indice in indices:
                original = p.data.flat[indice]
                resultados = []
                for signo in (1.0, -1.0):
                    p.data.flat[indice] = original + signo * paso
                    with sin_gradiente():
                        resultados.append(float(perdida_de().item()))
                p.data.flat[indice] = original
                numerico = (resultados[0] - resultados[1]) / (2 * paso)
                errores.append(float(error_relativo(analitico.reshape(-1)[indice], numerico)))
            clave = p.nombre or f"tensor_{len(reporte.errores)}"
            reporte.errores[clave] = max(errores)
            reporte.elementos_verificados[clave] = cuantos
    logger.debug(reporte.resumen())
    return reporte
