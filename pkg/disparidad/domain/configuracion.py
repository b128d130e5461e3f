"""
Configuración de la red (NetworkConfig) y del entrenamiento (TrainConfig).

Ambas son dataclasses inmutables que se validan al construirse y se
convierten a/desde pares clave=valor de texto para checkpoints y archivos
de configuración.
"""

from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Dict, Mapping, Tuple

from disparidad.domain.excepciones import ErrorConfiguracion
from disparidad.domain.validators.validador_configuracion import FACTOR_SUBMUESTREO, ValidadorConfiguracion


class VariantePiramide(str, Enum):
    CFSPP = 'CFSPP'
    SPP = 'SPP'
    ASPP = 'ASPP'
    PLAIN_LFE = 'PlainLFE'
    PLAIN_3D = 'Plain3D'

    @property
    def piramide(self) -> 'VariantePiramide':
        """Variante efectiva del backbone: Plain3D conserva la pirámide completa."""
        return VariantePiramide.CFSPP if self is VariantePiramide.PLAIN_3D else self


class TipoOptimizador(str, Enum):
    SGD = 'sgd'
    ADAM = 'adam'


def _a_texto(valor) -> str:
    if isinstance(valor, Enum):
        return valor.value
    if isinstance(valor, bool):
        return 'true' if valor else 'false'
    if isinstance(valor, (tuple, list)):
        return ','.join(str(v) for v in valor)
    return repr(valor) if isinstance(valor, float) else str(valor)


def _a_bool(texto: str) -> bool:
    normalizado = texto.strip().lower()
    if normalizado in ('1', 'true', 'yes', 'on', 'si', 'sí'):
        return True
    if normalizado in ('0', 'false', 'no', 'off', ''):
        return False
    raise ValueError(f"valor booleano inválido '{texto}'")


def _a_enteros(texto) -> Tuple[int, ...]:
    if isinstance(texto, (tuple, list)):
        return tuple(int(v) for v in texto)
    return tuple(int(v) for v in str(texto).split(',') if v.strip())


class _ConfigTexto:
    """Conversión común a pares clave=valor."""

    _conversores: Dict[str, object] = {}

    def a_pares(self) -> Dict[str, str]:
        return {f.name: _a_texto(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def claves(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def desde_pares(cls, pares: Mapping[str, object]):
        desconocidas = sorted(set(pares) - set(cls.claves()))
        if desconocidas:
            raise ErrorConfiguracion([f"clave desconocida '{k}'" for k in desconocidas])
        valores, violaciones = {}, []
        for clave, crudo in pares.items():
            conversor = cls._conversores[clave]
            try:
                valores[clave] = conversor(crudo) if isinstance(crudo, str) else crudo
            except ValueError as error:
                violaciones.append(f"{clave}: {error}")
        if violaciones:
            raise ErrorConfiguracion(violaciones)
        return cls(**valores)


@dataclass(frozen=True)
class NetworkConfig(_ConfigTexto):
    base_channels: int = 32
    block_counts: Tuple[int, ...] = (3, 15, 3)
    stage_channels: Tuple[int, ...] = (32, 64, 128)
    pyramid_pool_sizes: Tuple[int, ...] = (64, 32, 16, 8)
    pyramid_dilations: Tuple[int, ...] = (32, 12, 8, 4)
    pyramid_variant: VariantePiramide = VariantePiramide.CFSPP
    fusion_channels: int = 32
    d_max: int = 192
    use_batchnorm: bool = True
    kernel_pair: Tuple[int, ...] = (3, 5)
    lfe_residual: bool = True

    def __post_init__(self):
        for nombre in ('block_counts', 'stage_channels', 'pyramid_pool_sizes', 'pyramid_dilations', 'kernel_pair'):
            object.__setattr__(self, nombre, tuple(int(v) for v in getattr(self, nombre)))
        try:
            object.__setattr__(self, 'pyramid_variant', VariantePiramide(self.pyramid_variant))
        except ValueError:
            pass
        resultado = ValidadorConfiguracion().validar_red(self)
        if not resultado.es_valido:
            raise ErrorConfiguracion(resultado.violaciones)

    @property
    def d_levels(self) -> int:
        return self.d_max // FACTOR_SUBMUESTREO

    @property
    def canales_lfe(self) -> int:
        """Canales a la salida del LFE (última etapa no vacía, o conv0)."""
        for canales, bloques in zip(reversed(self.stage_channels), reversed(self.block_counts)):
            if bloques > 0:
                return canales
        return self.base_channels

    def con(self, **cambios) -> 'NetworkConfig':
        return replace(self, **cambios)


NetworkConfig._conversores = {
    'base_channels': int, 'block_counts': _a_enteros, 'stage_channels': _a_enteros,
    'pyramid_pool_sizes': _a_enteros, 'pyramid_dilations': _a_enteros,
    'pyramid_variant': VariantePiramide, 'fusion_channels': int, 'd_max': int,
    'use_batchnorm': _a_bool, 'kernel_pair': _a_enteros, 'lfe_residual': _a_bool,
}


@dataclass(frozen=True)
class TrainConfig(_ConfigTexto):
    learning_rate: float = 1e-3
    optimizer: TipoOptimizador = TipoOptimizador.ADAM
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    steps: int = 300
    crop_h: int = 32
    crop_w: int = 64
    seed: int = 0
    checkpoint_every: int = 0
    log_every: int = 10

    def __post_init__(self):
        try:
            object.__setattr__(self, 'optimizer', TipoOptimizador(self.optimizer))
        except ValueError:
            pass
        resultado = ValidadorConfiguracion().validar_entrenamiento(self)
        if not resultado.es_valido:
            raise ErrorConfiguracion(resultado.violaciones)

    def con(self, **cambios) -> 'TrainConfig':
        return replace(self, **cambios)


TrainConfig._conversores = {
    'learning_rate': float, 'optimizer': TipoOptimizador, 'beta1': float, 'beta2': float,
    'eps': float, 'steps': int, 'crop_h': int, 'crop_w': int, 'seed': int,
    'checkpoint_every': int, 'log_every': int,
}
