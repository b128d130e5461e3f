"""
Validador de configuraciones de red y de entrenamiento.

Acumula todas las violaciones en lugar de detenerse en la primera, para que
un archivo de configuración con varios errores se corrija en una sola pasada.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

logger = logging.getLogger(__name__)

FACTOR_SUBMUESTREO = 8
VARIANTES = ('CFSPP', 'SPP', 'ASPP', 'PlainLFE', 'Plain3D')
OPTIMIZADORES = ('sgd', 'adam')


@dataclass
class ResultadoValidacion:
    """Resultado de validación de una configuración"""
    es_valido: bool
    violaciones: List[str]
    estadisticas: Dict[str, Any] = field(default_factory=dict)


class ValidadorConfiguracion:
    """
    Reglas de NetworkConfig y TrainConfig.

    Opera sobre los atributos del objeto, sin importar las clases, para que
    configuracion.py pueda usarlo desde __post_init__.
    """

    def __init__(self):
        self.violaciones: List[str] = []

    def validar_red(self, config) -> ResultadoValidacion:
        self.violaciones = []

        self._positivo('base_channels', config.base_channels)
        self._positivo('fusion_channels', config.fusion_channels)
        self._longitud('block_counts', config.block_counts, 3)
        for i, n in enumerate(config.block_counts):
            if n < 0:
                self.violaciones.append(f"block_counts[{i}] debe ser ≥ 0, recibido {n}")
        self._longitud('stage_channels', config.stage_channels, 3)
        for i, c in enumerate(config.stage_channels):
            self._positivo(f'stage_channels[{i}]', c)

        self._longitud('pyramid_pool_sizes', config.pyramid_pool_sizes, 4)
        self._longitud('pyramid_dilations', config.pyramid_dilations, 4)
        pools = list(config.pyramid_pool_sizes)
        if any(p < 1 for p in pools):
            self.violaciones.append(f"pyramid_pool_sizes debe ser positivo, recibido {pools}")
        if any(a <= b for a, b in zip(pools, pools[1:])):
            self.violaciones.append(f"pyramid_pool_sizes debe ser estrictamente decreciente, recibido {pools}")
        if any(d < 1 for d in config.pyramid_dilations):
            self.violaciones.append(f"pyramid_dilations debe ser ≥ 1, recibido {list(config.pyramid_dilations)}")

        variante = getattr(config.pyramid_variant, 'value', config.pyramid_variant)
        if variante not in VARIANTES:
            self.violaciones.append(f"pyramid_variant desconocida '{variante}' (opciones: {', '.join(VARIANTES)})")

        if config.d_max <= 0 or config.d_max % FACTOR_SUBMUESTREO != 0:
            self.violaciones.append(f"d_max debe ser positivo y divisible por {FACTOR_SUBMUESTREO}, recibido {config.d_max}")

        self._longitud('kernel_pair', config.kernel_pair, 2)
        for k in config.kernel_pair:
            if k < 1 or k % 2 == 0:
                self.violaciones.append(f"kernel_pair admite sólo kernels impares ≥ 1, recibido {k}")

        return self._resultado({'d_levels': config.d_max // FACTOR_SUBMUESTREO if config.d_max > 0 else 0})

    def validar_entrenamiento(self, config) -> ResultadoValidacion:
        self.violaciones = []

        if config.learning_rate < 0:
            self.violaciones.append(f"learning_rate no puede ser negativo, recibido {config.learning_rate}")
        optimizador = getattr(config.optimizer, 'value', config.optimizer)
        if optimizador not in OPTIMIZADORES:
            self.violaciones.append(f"optimizer desconocido '{optimizador}' (opciones: sgd, adam)")
        for nombre in ('beta1', 'beta2'):
            valor = getattr(config, nombre)
            if not 0 <= valor < 1:
                self.violaciones.append(f"{nombre} debe estar en [0, 1), recibido {valor}")
        self._positivo('eps', config.eps)
        if config.steps < 0:
            self.violaciones.append(f"steps debe ser ≥ 0, recibido {config.steps}")
        for nombre in ('crop_h', 'crop_w'):
            valor = getattr(config, nombre)
            if valor <= 0 or valor % FACTOR_SUBMUESTREO != 0:
                self.violaciones.append(f"{nombre} debe ser positivo y divisible por {FACTOR_SUBMUESTREO}, recibido {valor}")
        if config.seed < 0:
            self.violaciones.append(f"seed debe ser ≥ 0, recibido {config.seed}")
        if config.checkpoint_every < 0:
            self.violaciones.append(f"checkpoint_every debe ser ≥ 0, recibido {config.checkpoint_every}")
        self._positivo('log_every', config.log_every)

        return self._resultado({'pasos': config.steps})

    def _positivo(self, nombre: str, valor) -> None:
        if valor <= 0:
            self.violaciones.append(f"{nombre} debe ser > 0, recibido {valor}")

    def _longitud(self, nombre: str, valores: Sequence, esperada: int) -> None:
        if len(valores) != esperada:
            self.violaciones.append(f"{nombre} debe tener {esperada} elementos, recibidos {len(valores)}")

    def _resultado(self, estadisticas: Dict[str, Any]) -> ResultadoValidacion:
        if self.violaciones:
            logger.debug("Configuración inválida: %s", self.violaciones)
        return ResultadoValidacion(
            es_valido=not self.violaciones,
            violaciones=list(self.violaciones),
            estadisticas=estadisticas,
        )
