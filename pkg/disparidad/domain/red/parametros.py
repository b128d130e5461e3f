"""
Contenedor de parámetros de la red e inicialización reproducible.
"""

import logging
import zlib
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple

import numpy as np

from disparidad.domain.configuracion import NetworkConfig
from disparidad.domain.red.matcher import declarar_parametros
from disparidad.domain.tensor.normalizacion import EstadisticasBN
from disparidad.domain.tensor.tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class ParametrosRed:
    """Tensores entrenables por nombre, estadísticas de BN y modo de la red."""
    config: NetworkConfig
    tensores: Dict[str, Tensor]
    estadisticas: Dict[str, EstadisticasBN] = field(default_factory=dict)
    modo: str = 'train'

    def __getitem__(self, nombre: str) -> Tensor:
        return self.tensores[nombre]

    def __contains__(self, nombre: str) -> bool:
        return nombre in self.tensores

    def __iter__(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self.tensores.items())

    def nombres(self) -> List[str]:
        return list(self.tensores)

    def estadisticas_de(self, capa: str, canales: int) -> EstadisticasBN:
        if capa not in self.estadisticas:
            self.estadisticas[capa] = EstadisticasBN.nuevas(canales)
        return self.estadisticas[capa]

    def entrenar(self) -> 'ParametrosRed':
        self.modo = 'train'
        return self

    def evaluar(self) -> 'ParametrosRed':
        self.modo = 'eval'
        return self

    def contar(self, prefijo: str = '') -> int:
        return int(sum(t.size for n, t in self.tensores.items() if n.startswith(prefijo)))

    def cero_grad(self) -> None:
        for tensor in self.tensores.values():
            tensor.cero_grad()

    def convertir(self, dtype) -> 'ParametrosRed':
        """Copia con todos los tensores en `dtype` (float64 para gradcheck)."""
        tensores = {
            n: Tensor(t.data.astype(dtype), requires_grad=t.requires_grad, nombre=n, dtype=dtype)
            for n, t in self.tensores.items()
        }
        estadisticas = {
            n: EstadisticasBN(media=e.media.astype(dtype), varianza=e.varianza.astype(dtype))
            for n, e in self.estadisticas.items()
        }
        return ParametrosRed(config=self.config, tensores=tensores, estadisticas=estadisticas, modo=self.modo)


def _inicializar_tensor(nombre: str, forma: Tuple[int, ...], semilla: int) -> np.ndarray:
    if nombre.endswith('.bn.gamma'):
        return np.ones(forma, dtype=np.float32)
    if nombre.endswith('.bn.beta') or nombre.endswith('.sesgo'):
        return np.zeros(forma, dtype=np.float32)
    # Kaiming normal por fan-in; el eje 1 es C_in en conv y C_out en deconv
    fan_in = int(np.prod(forma[1:]))
    rng = np.random.default_rng([semilla, zlib.crc32(nombre.encode('utf-8'))])
    return (rng.standard_normal(forma) * np.sqrt(2.0 / fan_in)).astype(np.float32)


def inicializar_parametros(config: NetworkConfig, semilla: int = 0) -> ParametrosRed:
    """Crea todos los parámetros declarados por el backbone y el matcher."""
    formas = declarar_parametros(config)
    tensores = {
        nombre: Tensor(_inicializar_tensor(nombre, forma, semilla), requires_grad=True, nombre=nombre,
                       dtype=np.float32)
        for nombre, forma in formas.items()
    }
    logger.debug("Inicializados %d tensores (%d parámetros)", len(tensores), sum(t.size for t in tensores.values()))
    return ParametrosRed(config=config, tensores=tensores)
