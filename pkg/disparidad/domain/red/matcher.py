"""
Volumen de costo por concatenación, red 3D de emparejamiento y fusión
multiescala, recuperación de escala y regresión soft argmin.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, MutableMapping, Optional, Tuple, Union

import numpy as np

from disparidad.domain.configuracion import NetworkConfig, VariantePiramide
from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.red.backbone import (
    FACTOR, FeatureMap, como_lote, declarar_parametros_backbone, extraer_caracteristicas,
    pad_to_multiple, recortar,
)
from disparidad.domain.red.capas import CapaConv, aplicar
from disparidad.domain.tensor import operaciones
from disparidad.domain.tensor.convolucion import output_padding_para
from disparidad.domain.tensor.muestreo import trilinear_resize3d
from disparidad.domain.tensor.tensor import Tensor, registrar

logger = logging.getLogger(__name__)

CANALES_ENCODER = (32, 32, 64, 64)
CANALES_FUSION = 2


@dataclass(frozen=True)
class CostVolume:
    tensor: Tensor

    @property
    def d_levels(self) -> int:
        return self.tensor.shape[2]

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.tensor.shape


@dataclass(frozen=True)
class DisparityMap:
    tensor: Tensor
    extensiones: Tuple[int, int]

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.tensor.shape

    def numpy(self) -> np.ndarray:
        return self.tensor.data


@dataclass(frozen=True)
class RamaHourglass:
    kernel: int
    encoder: Tuple[CapaConv, ...]
    decoder: Tuple[CapaConv, ...]


@dataclass(frozen=True)
class DefinicionMatcher:
    ramas: Tuple[RamaHourglass, ...]
    plano: Tuple[CapaConv, ...]
    fusion: CapaConv
    recuperacion: Tuple[CapaConv, ...]

    @property
    def capas(self) -> List[CapaConv]:
        capas = [c for rama in self.ramas for c in rama.encoder + rama.decoder]
        return capas + list(self.plano) + [self.fusion] + list(self.recuperacion)


def definir_matcher(config: NetworkConfig) -> DefinicionMatcher:
    entrada = 2 * config.fusion_channels
    c1, c2, c3, c4 = CANALES_ENCODER
    ramas: Tuple[RamaHourglass, ...] = ()
    plano: Tuple[CapaConv, ...] = ()
    if VariantePiramide(config.pyramid_variant) is VariantePiramide.PLAIN_3D:
        canales = (entrada,) + CANALES_ENCODER
        plano = tuple(
            CapaConv(f'matcher.plano.conv{i + 1}', canales[i], canales[i + 1], 3, dims=3)
            for i in range(len(CANALES_ENCODER))
        )
    else:
        ramas = tuple(
            RamaHourglass(
                kernel=k,
                encoder=(
                    CapaConv(f'matcher.rama{r}.enc1', entrada, c1, k, dims=3),
                    CapaConv(f'matcher.rama{r}.enc2', c1, c2, k, dims=3, stride=2),
                    CapaConv(f'matcher.rama{r}.enc3', c2, c3, k, dims=3),
                    CapaConv(f'matcher.rama{r}.enc4', c3, c4, k, dims=3, stride=2),
                ),
                decoder=(
                    CapaConv(f'matcher.rama{r}.dec1', c4, c2, k, dims=3, stride=2, transpuesta=True),
                    CapaConv(f'matcher.rama{r}.dec2', c2, c1, k, dims=3, stride=2, transpuesta=True),
                ),
            )
            for r, k in enumerate(config.kernel_pair, start=1)
        )
    fusion_entrada = c4 if plano else c1 * len(ramas)
    fusion = CapaConv('matcher.fusion', fusion_entrada, CANALES_FUSION, 3, dims=3)
    recuperacion = (
        CapaConv('matcher.recuperacion1', CANALES_FUSION, CANALES_FUSION, 3, dims=3, stride=2, transpuesta=True),
        CapaConv('matcher.recuperacion2', CANALES_FUSION, CANALES_FUSION, 3, dims=3, stride=2, transpuesta=True),
        CapaConv('matcher.recuperacion3', CANALES_FUSION, 1, 3, dims=3, stride=2, transpuesta=True,
                 normalizar=False, activar=False),
    )
    return DefinicionMatcher(ramas=ramas, plano=plano, fusion=fusion, recuperacion=recuperacion)


def declarar_parametros(config: NetworkConfig) -> Dict[str, Tuple[int, ...]]:
    """Todos los tensores de la red, en orden de declaración."""
    formas = declarar_parametros_backbone(config)
    for capa in definir_matcher(config).capas:
        formas.update(capa.formas(config.use_batchnorm))
    return formas


def _tensor_de(mapa: Union[FeatureMap, Tensor]) -> Tensor:
    return mapa.tensor if isinstance(mapa, FeatureMap) else mapa


def build_cost_volume(izquierda: Union[FeatureMap, Tensor], derecha: Union[FeatureMap, Tensor],
                      d_levels: int) -> CostVolume:
    """
    [N,C,h,w] x2 -> [N,2C,d_levels,h,w].

    Canales [0,C): la característica izquierda en todo nivel d. Canales [C,2C):
    la derecha desplazada d posiciones a la derecha, con ceros donde x−d < 0.
    """
    izq, der = _tensor_de(izquierda), _tensor_de(derecha)
    if izq.shape != der.shape or izq.ndim != 4:
        raise ErrorForma("build_cost_volume: las características deben tener la misma forma [N,C,h,w]",
                         [izq.shape, der.shape])
    if d_levels < 1:
        raise ErrorForma(f"build_cost_volume: d_levels debe ser ≥ 1, recibido {d_levels}")
    n, c, h, w = izq.shape
    datos = np.zeros((n, 2 * c, d_levels, h, w), dtype=np.result_type(izq.dtype, der.dtype))
    for d in range(d_levels):
        datos[:, :c, d] = izq.data
        if d < w:
            datos[:, c:, d, :, d:] = der.data[..., :w - d]

    def retroceso(g):
        g_izq = g[:, :c].sum(axis=2)
        g_der = np.zeros(der.shape, dtype=g.dtype)
        for d in range(min(d_levels, w)):
            g_der[..., :w - d] += g[:, c:, d, :, d:]
        return g_izq, g_der

    return CostVolume(tensor=registrar(datos, (izq, der), retroceso, 'build_cost_volume'))


def _rama_forward(rama: RamaHourglass, x: Tensor, params) -> Tensor:
    e1 = aplicar(rama.encoder[0], x, params)
    e2 = aplicar(rama.encoder[1], e1, params)
    e3 = aplicar(rama.encoder[2], e2, params)
    e4 = aplicar(rama.encoder[3], e3, params)
    u = _deconv_a(rama.decoder[0], e4, e2, params)
    return _deconv_a(rama.decoder[1], u, e1, params)


def _deconv_a(capa: CapaConv, x: Tensor, destino: Tensor, params) -> Tensor:
    """Deconvolución hasta la extensión de `destino`, sumando `destino` como atajo."""
    output_padding = [
        output_padding_para(e, objetivo, capa.kernel, capa.stride, capa.relleno)
        for e, objetivo in zip(x.shape[2:], destino.shape[2:])
    ]
    return aplicar(capa, x, params, residuo=destino, output_padding=output_padding)


def matching_fusion_forward(volumen: Union[CostVolume, Tensor], params,
                            extensiones: Optional[Tuple[int, int]] = None) -> Tensor:
    """
    [N,2C,D/8,h,w] -> [N,1,D_max,H,W].

    `extensiones` fija (H, W) de la salida; por defecto 8·h × 8·w.
    """
    config: NetworkConfig = params.config
    x = volumen.tensor if isinstance(volumen, CostVolume) else volumen
    esperados = 2 * config.fusion_channels
    if x.ndim != 5 or x.shape[1] != esperados:
        raise ErrorForma(f"matching_fusion_forward: se esperaba un volumen con {esperados} canales", [x.shape])
    if any(e < 1 for e in x.shape[2:]):
        raise ErrorForma(
            "matching_fusion_forward: el volumen necesita al menos 1 nivel de disparidad y 1×1 espacial",
            [x.shape],
        )
    if x.shape[2] != config.d_levels:
        raise ErrorForma(
            f"matching_fusion_forward: el volumen tiene {x.shape[2]} niveles y d_max={config.d_max} exige "
            f"{config.d_levels}",
            [x.shape],
        )
    h, w = extensiones or (x.shape[3] * FACTOR, x.shape[4] * FACTOR)

    definicion = definir_matcher(config)
    if definicion.plano:
        y = x
        for capa in definicion.plano:
            y = aplicar(capa, y, params)
    else:
        y = operaciones.concat([_rama_forward(rama, x, params) for rama in definicion.ramas], axis=1)
    y = aplicar(definicion.fusion, y, params)

    for capa in definicion.recuperacion:
        objetivo = [2 * e for e in y.shape[2:]]
        output_padding = [
            output_padding_para(e, o, capa.kernel, capa.stride, capa.relleno) for e, o in zip(y.shape[2:], objetivo)
        ]
        y = aplicar(capa, y, params, output_padding=output_padding)

    if y.shape[2:] != (config.d_max, h, w):
        logger.debug("Ajuste trilineal %s -> %s", y.shape[2:], (config.d_max, h, w))
        y = trilinear_resize3d(y, config.d_max, h, w)
    return y


def soft_argmin(costos: Tensor) -> DisparityMap:
    """d̂ = Σ_d d · softmax_d(−c); [N,1,D,H,W] -> [N,H,W]."""
    if costos.ndim != 5 or costos.shape[1] != 1 or costos.shape[2] < 1:
        raise ErrorForma("soft_argmin: se esperaban costos [N,1,D,H,W] con D ≥ 1", [costos.shape])
    n, _, d, h, w = costos.shape
    c = operaciones.reshape(costos, (n, d, h, w))
    probabilidades = operaciones.softmax(operaciones.neg(c), axis=1)
    indices = Tensor(np.arange(d, dtype=costos.dtype).reshape(1, d, 1, 1), dtype=costos.dtype)
    disparidad = operaciones.sum(operaciones.mul(probabilidades, indices), axis=1)
    return DisparityMap(tensor=disparidad, extensiones=(h, w))


def full_forward(izquierda, derecha, params, etapas: Optional[MutableMapping[str, Tensor]] = None) -> DisparityMap:
    """
    Composición completa: pad → LFE → CFSPP (pesos compartidos) → volumen →
    emparejamiento → soft argmin → recorte a la extensión original.

    Si se pasa `etapas`, se guardan las salidas intermedias por nombre.
    """
    izquierda, derecha = como_lote(izquierda), como_lote(derecha)
    if izquierda.shape != derecha.shape or izquierda.shape[1] != 3:
        raise ErrorForma("full_forward: se esperaban dos imágenes [N,3,H,W] de igual forma",
                         [izquierda.shape, derecha.shape])
    registro: MutableMapping[str, Tensor] = etapas if etapas is not None else {}

    izquierda, extensiones = pad_to_multiple(izquierda)
    derecha, _ = pad_to_multiple(derecha)
    caracteristicas_izq = extraer_caracteristicas(izquierda, params, 'izquierda')
    registro['caracteristicas_izquierda'] = caracteristicas_izq.tensor
    caracteristicas_der = extraer_caracteristicas(derecha, params, 'derecha')
    registro['caracteristicas_derecha'] = caracteristicas_der.tensor

    volumen = build_cost_volume(caracteristicas_izq, caracteristicas_der, params.config.d_levels)
    registro['volumen'] = volumen.tensor
    costos = matching_fusion_forward(volumen, params, extensiones=izquierda.shape[2:])
    registro['emparejamiento'] = costos

    disparidad = soft_argmin(costos)
    registro['soft_argmin'] = disparidad.tensor
    return DisparityMap(tensor=recortar(disparidad.tensor, extensiones), extensiones=extensiones)

