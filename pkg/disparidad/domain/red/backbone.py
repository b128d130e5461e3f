"""
Extractor de características 2D: LFE (bloques básicos residuales en tres
etapas con stride 2) seguido de la pirámide espacial de forma cruzada.

Variantes de la pirámide:
- CFSPP: cada nivel combina rama dilatada + rama de pooling y las fusiona.
- SPP: sólo ramas de pooling.
- ASPP: sólo ramas dilatadas.
- PlainLFE: sin pirámide, conv 1×1 a C_feat.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from disparidad.domain.configuracion import NetworkConfig, VariantePiramide
from disparidad.domain.excepciones import ErrorConfiguracion, ErrorForma
from disparidad.domain.red.capas import CapaConv, aplicar
from disparidad.domain.tensor import operaciones
from disparidad.domain.tensor.muestreo import adaptive_avg_pool2d, bilinear_upsample2d, tamano_rejilla
from disparidad.domain.tensor.tensor import Tensor, como_tensor

logger = logging.getLogger(__name__)

FACTOR = 8
CANALES_RAMA = 32


@dataclass(frozen=True)
class FeatureMap:
    tensor: Tensor
    procedencia: str  # 'izquierda' | 'derecha'

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.tensor.shape


@dataclass(frozen=True)
class BloqueBasico:
    conv1: CapaConv
    conv2: CapaConv
    proyeccion: Optional[CapaConv]
    residual: bool = True

    @property
    def capas(self) -> List[CapaConv]:
        return [c for c in (self.conv1, self.conv2, self.proyeccion) if c is not None]


@dataclass(frozen=True)
class DefinicionLFE:
    conv0: CapaConv
    etapas: Tuple[Tuple[BloqueBasico, ...], ...]

    @property
    def capas(self) -> List[CapaConv]:
        return [self.conv0] + [c for etapa in self.etapas for bloque in etapa for c in bloque.capas]

    def contar_convs_3x3(self) -> int:
        return 1 + 2 * sum(len(etapa) for etapa in self.etapas)


@dataclass(frozen=True)
class NivelPiramide:
    pool: int
    dilatacion: int
    dilatada: Tuple[CapaConv, ...]
    pooling: Optional[CapaConv]
    fusion: Optional[CapaConv]


@dataclass(frozen=True)
class DefinicionPiramide:
    variante: VariantePiramide
    niveles: Tuple[NivelPiramide, ...]
    fusion: Tuple[CapaConv, ...]

    @property
    def capas(self) -> List[CapaConv]:
        capas: List[CapaConv] = []
        for nivel in self.niveles:
            capas.extend(nivel.dilatada)
            capas.extend(c for c in (nivel.pooling, nivel.fusion) if c is not None)
        return capas + list(self.fusion)


def definir_lfe(config: NetworkConfig) -> DefinicionLFE:
    conv0 = CapaConv('lfe.conv0', 3, config.base_channels, 3)
    canales = config.base_channels
    etapas = []
    for e, (bloques, salida) in enumerate(zip(config.block_counts, config.stage_channels), start=1):
        etapa = []
        for b in range(1, bloques + 1):
            prefijo = f'lfe.etapa{e}.bloque{b}'
            stride = 2 if b == 1 else 1
            proyeccion = None
            if config.lfe_residual and (stride != 1 or canales != salida):
                proyeccion = CapaConv(f'{prefijo}.proyeccion', canales, salida, 1, stride=stride, activar=False)
            etapa.append(BloqueBasico(
                conv1=CapaConv(f'{prefijo}.conv1', canales, salida, 3, stride=stride),
                conv2=CapaConv(f'{prefijo}.conv2', salida, salida, 3),
                proyeccion=proyeccion,
                residual=config.lfe_residual,
            ))
            canales = salida
        etapas.append(tuple(etapa))
    return DefinicionLFE(conv0=conv0, etapas=tuple(etapas))


def definir_piramide(config: NetworkConfig, variante: Optional[VariantePiramide] = None) -> DefinicionPiramide:
    variante = VariantePiramide(variante or config.pyramid_variant).piramide
    entrada = config.canales_lfe
    if variante is VariantePiramide.PLAIN_LFE:
        plana = CapaConv('cfspp.plana', entrada, config.fusion_channels, 1, normalizar=False, activar=False)
        return DefinicionPiramide(variante=variante, niveles=(), fusion=(plana,))

    niveles = []
    for i, (pool, dilatacion) in enumerate(zip(config.pyramid_pool_sizes, config.pyramid_dilations), start=1):
        prefijo = f'cfspp.nivel{i}'
        dilatada: Tuple[CapaConv, ...] = ()
        pooling = fusion = None
        if variante in (VariantePiramide.CFSPP, VariantePiramide.ASPP):
            dilatada = (
                CapaConv(f'{prefijo}.dilatada', entrada, CANALES_RAMA, 3, dilatacion=dilatacion),
                CapaConv(f'{prefijo}.dilatada_1x1', CANALES_RAMA, CANALES_RAMA, 1),
            )
        if variante in (VariantePiramide.CFSPP, VariantePiramide.SPP):
            pooling = CapaConv(f'{prefijo}.pooling_1x1', entrada, CANALES_RAMA, 1)
        if variante is VariantePiramide.CFSPP:
            fusion = CapaConv(f'{prefijo}.fusion', 2 * CANALES_RAMA, CANALES_RAMA, 3)
        niveles.append(NivelPiramide(pool=pool, dilatacion=dilatacion, dilatada=dilatada, pooling=pooling, fusion=fusion))

    concatenados = entrada + CANALES_RAMA * len(niveles)
    fusion_final = (
        CapaConv('cfspp.fusion', concatenados, entrada, 3),
        CapaConv('cfspp.salida', entrada, config.fusion_channels, 1, normalizar=False, activar=False),
    )
    return DefinicionPiramide(variante=variante, niveles=tuple(niveles), fusion=fusion_final)


def declarar_parametros_backbone(config: NetworkConfig) -> Dict[str, Tuple[int, ...]]:
    formas: Dict[str, Tuple[int, ...]] = {}
    for capa in definir_lfe(config).capas + definir_piramide(config).capas:
        formas.update(capa.formas(config.use_batchnorm))
    return formas


def pad_to_multiple(imagen, m: int = FACTOR) -> Tuple[Tensor, Tuple[int, int]]:
    """Rellena con ceros abajo/derecha hasta el siguiente múltiplo de m."""
    if m < 1:
        raise ErrorForma(f"pad_to_multiple: m debe ser ≥ 1, recibido {m}")
    imagen = como_tensor(imagen)
    h, w = imagen.shape[-2:]
    extra_h, extra_w = (-h) % m, (-w) % m
    if extra_h == 0 and extra_w == 0:
        return imagen, (h, w)
    anchos = [(0, 0)] * (imagen.ndim - 2) + [(0, extra_h), (0, extra_w)]
    return operaciones.rellenar(imagen, anchos), (h, w)


def recortar(x: Tensor, extensiones: Tuple[int, int]) -> Tensor:
    h, w = extensiones
    if x.shape[-2:] == (h, w):
        return x
    return operaciones.indexar(x, (Ellipsis, slice(0, h), slice(0, w)))


def _aplicar_bloque(bloque: BloqueBasico, x: Tensor, params) -> Tensor:
    salida = aplicar(bloque.conv1, x, params)
    atajo = None
    if bloque.residual:
        atajo = aplicar(bloque.proyeccion, x, params) if bloque.proyeccion is not None else x
    return aplicar(bloque.conv2, salida, params, residuo=atajo)


def lfe_forward(imagen: Tensor, params) -> Tensor:
    """[N,3,H,W] -> [N,C_lfe,H/8,W/8]."""
    config: NetworkConfig = params.config
    if imagen.ndim != 4 or imagen.shape[1] != 3:
        raise ErrorForma("lfe_forward: se esperaba una imagen [N,3,H,W]", [imagen.shape])
    h, w = imagen.shape[2:]
    if h % FACTOR or w % FACTOR:
        raise ErrorForma(f"lfe_forward: H y W deben ser múltiplos de {FACTOR} (usar pad_to_multiple)", [imagen.shape])
    if any(n < 1 for n in config.block_counts):
        raise ErrorConfiguracion([
            f"el forward requiere al menos un bloque por etapa, block_counts={list(config.block_counts)}"
        ])

    definicion = definir_lfe(config)
    x = aplicar(definicion.conv0, imagen, params)
    for etapa in definicion.etapas:
        for bloque in etapa:
            x = _aplicar_bloque(bloque, x, params)
    return x


def rama_pooling(features: Tensor, nivel: NivelPiramide, params) -> Tensor:
    """Pooling adaptativo → conv 1×1 → bilineal de vuelta a (h, w)."""
    h, w = features.shape[2:]
    rejilla_h = tamano_rejilla(h, FACTOR, nivel.pool)
    rejilla_w = tamano_rejilla(w, FACTOR, nivel.pool)
    x = adaptive_avg_pool2d(features, rejilla_h, rejilla_w)
    x = aplicar(nivel.pooling, x, params)
    return bilinear_upsample2d(x, h, w)


def rama_dilatada(features: Tensor, nivel: NivelPiramide, params) -> Tensor:
    x = aplicar(nivel.dilatada[0], features, params)
    return aplicar(nivel.dilatada[1], x, params)


def cfspp_forward(features: Tensor, params, variant: Optional[VariantePiramide] = None) -> Tensor:
    """[N,C_lfe,h,w] -> [N,C_feat,h,w] para cualquier variante."""
    config: NetworkConfig = params.config
    declarada = VariantePiramide(config.pyramid_variant).piramide
    variante = VariantePiramide(variant).piramide if variant is not None else declarada
    if variante is not declarada:
        raise ErrorConfiguracion([
            f"la variante '{variante.value}' no coincide con los parámetros declarados ('{declarada.value}')"
        ])
    if features.ndim != 4 or features.shape[1] != config.canales_lfe:
        raise ErrorForma(f"cfspp_forward: se esperaban {config.canales_lfe} canales", [features.shape])

    definicion = definir_piramide(config, variante)
    if variante is VariantePiramide.PLAIN_LFE:
        return aplicar(definicion.fusion[0], features, params)

    salidas = [features]
    for nivel in definicion.niveles:
        if variante is VariantePiramide.SPP:
            salidas.append(rama_pooling(features, nivel, params))
        elif variante is VariantePiramide.ASPP:
            salidas.append(rama_dilatada(features, nivel, params))
        else:
            ramas = operaciones.concat(
                [rama_dilatada(features, nivel, params), rama_pooling(features, nivel, params)], axis=1
            )
            salidas.append(aplicar(nivel.fusion, ramas, params))

    x = aplicar(definicion.fusion[0], operaciones.concat(salidas, axis=1), params)
    return aplicar(definicion.fusion[1], x, params)


def extraer_caracteristicas(imagen: Tensor, params, procedencia: str) -> FeatureMap:
    return FeatureMap(tensor=cfspp_forward(lfe_forward(imagen, params), params), procedencia=procedencia)


def como_lote(imagen) -> Tensor:
    """Acepta [3,H,W] o [N,3,H,W] (Tensor o ndarray) y devuelve [N,3,H,W]."""
    tensor = como_tensor(imagen)
    if tensor.ndim == 3:
        tensor = operaciones.reshape(tensor, (1,) + tensor.shape)
    return tensor


def contar_convs_lfe(config: NetworkConfig) -> int:
    return definir_lfe(config).contar_convs_3x3()

