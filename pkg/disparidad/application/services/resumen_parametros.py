"""
Conteo de parámetros por módulo (LFE, pirámide, emparejamiento 3D).

El conteo sale de las mismas definiciones de capas que usa el forward, así
que es una función pura de NetworkConfig.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from disparidad.domain.configuracion import NetworkConfig
from disparidad.domain.red.backbone import contar_convs_lfe
from disparidad.domain.red.matcher import declarar_parametros

logger = logging.getLogger(__name__)

MODULOS = ('lfe', 'cfspp', 'matcher')
REFERENCIA_MILLONES = 4.68


@dataclass
class ResumenParametros:
    config: NetworkConfig
    por_modulo: Dict[str, int] = field(default_factory=dict)
    tensores: int = 0
    convs_lfe: int = 0

    @property
    def total(self) -> int:
        return sum(self.por_modulo.values())

    @property
    def total_millones(self) -> float:
        return self.total / 1e6

    def a_lineas(self) -> List[str]:
        lineas = [f"variante={self.config.pyramid_variant.value}"]
        lineas += [f"{modulo}={cuenta}" for modulo, cuenta in self.por_modulo.items()]
        lineas += [
            f"total={self.total}",
            f"total_M={self.total_millones:.2f}",
            f"referencia_M={REFERENCIA_MILLONES:.2f}",
            f"tensores={self.tensores}",
            f"convs_lfe={self.convs_lfe}",
        ]
        return lineas

    def a_texto(self) -> str:
        return "\n".join(self.a_lineas())


def summary(config: NetworkConfig) -> ResumenParametros:
    formas = declarar_parametros(config)
    por_modulo = {modulo: 0 for modulo in MODULOS}
    for nombre, forma in formas.items():
        modulo = nombre.split('.', 1)[0]
        por_modulo[modulo] = por_modulo.get(modulo, 0) + int(np.prod(forma, dtype=np.int64))
    resumen = ResumenParametros(config=config, por_modulo=por_modulo, tensores=len(formas),
                                convs_lfe=contar_convs_lfe(config))
    logger.debug(f"Resumen de parámetros: {resumen.por_modulo} (total {resumen.total})")
    return resumen
