"""
Tipos de datos de muestras estéreo y de los parámetros del generador sintético.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from disparidad.domain.excepciones import ErrorConfiguracion, ErrorForma

EXTENSION_MINIMA = 16


class Textura(str, Enum):
    RANDOM_NOISE = 'random_noise'
    SMOOTHED_NOISE = 'smoothed_noise'


class CampoDisparidad(str, Enum):
    CONSTANT = 'constant'
    PLANAR_RAMP = 'planar_ramp'
    BLOCKS = 'blocks'


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Parámetros de una muestra sintética.

    El campo constante usa `disp_min`; la rampa va de `disp_min` a `disp_max`
    a lo ancho; los bloques colocan `num_blocks` rectángulos con disparidades
    en (disp_min, disp_max] sobre un fondo a `disp_min`.
    """
    width: int = 64
    height: int = 32
    d_max: int = 16
    texture: Textura = Textura.SMOOTHED_NOISE
    disparity_field: CampoDisparidad = CampoDisparidad.PLANAR_RAMP
    seed: int = 0
    disp_min: float = 1.0
    disp_max: Optional[float] = None
    num_blocks: int = 2

    def __post_init__(self):
        violaciones = []
        try:
            object.__setattr__(self, 'texture', Textura(self.texture))
        except ValueError:
            violaciones.append(f"texture desconocida '{self.texture}'")
        try:
            object.__setattr__(self, 'disparity_field', CampoDisparidad(self.disparity_field))
        except ValueError:
            violaciones.append(f"disparity_field desconocido '{self.disparity_field}'")
        if self.width < EXTENSION_MINIMA or self.height < EXTENSION_MINIMA:
            violaciones.append(
                f"width y height deben ser ≥ {EXTENSION_MINIMA}, recibidos {self.width}×{self.height}"
            )
        if self.d_max <= 0:
            violaciones.append(f"d_max debe ser > 0, recibido {self.d_max}")
        if self.seed < 0:
            violaciones.append(f"seed debe ser ≥ 0, recibido {self.seed}")
        if self.disp_min < 0:
            violaciones.append(f"disp_min debe ser ≥ 0, recibido {self.disp_min}")
        if self.rango_maximo > self.d_max - 1:
            violaciones.append(
                f"el campo de disparidad excede d_max−1: disp_max={self.rango_maximo} con d_max={self.d_max}"
            )
        if self.disp_min > self.rango_maximo:
            violaciones.append(f"disp_min ({self.disp_min}) mayor que disp_max ({self.rango_maximo})")
        if self.num_blocks < 0:
            violaciones.append(f"num_blocks debe ser ≥ 0, recibido {self.num_blocks}")
        if violaciones:
            raise ErrorConfiguracion(violaciones)

    @property
    def rango_maximo(self) -> float:
        return float(self.d_max - 1 if self.disp_max is None else self.disp_max)

    def con_semilla(self, seed: int) -> 'SyntheticSpec':
        return replace(self, seed=seed)


@dataclass
class StereoSample:
    """Par rectificado [3,H,W] en [0,1], disparidad real [H,W] y máscaras."""
    left: np.ndarray
    right: np.ndarray
    gt_disparity: np.ndarray
    valid_mask: np.ndarray
    fg_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.left.shape != self.right.shape or self.left.ndim != 3 or self.left.shape[0] != 3:
            raise ErrorForma("StereoSample: left/right deben ser [3,H,W] de igual forma",
                             [self.left.shape, self.right.shape])
        extension = self.left.shape[1:]
        for nombre in ('gt_disparity', 'valid_mask', 'fg_mask'):
            valor = getattr(self, nombre)
            if valor is not None and valor.shape != extension:
                raise ErrorForma(f"StereoSample: {nombre} debe ser {extension}", [valor.shape])
        self.valid_mask = self.valid_mask.astype(bool)
        if self.fg_mask is not None:
            self.fg_mask = self.fg_mask.astype(bool)

    @property
    def extensiones(self) -> Tuple[int, int]:
        return self.left.shape[1], self.left.shape[2]

    def mascara_entrenamiento(self, d_max: int) -> np.ndarray:
        """Píxeles válidos con 0 < gt < d_max (los que la regresión puede representar)."""
        return self.valid_mask & (self.gt_disparity > 0) & (self.gt_disparity < d_max)

    def recortar(self, y: int, x: int, alto: int, ancho: int) -> 'StereoSample':
        h, w = self.extensiones
        if y < 0 or x < 0 or y + alto > h or x + ancho > w:
            raise ErrorForma(f"recorte {alto}×{ancho} en ({y},{x}) fuera de la muestra {h}×{w}")
        ventana = (slice(y, y + alto), slice(x, x + ancho))
        gt = self.gt_disparity[ventana].copy()
        # el origen en la derecha (x − d) tiene que seguir dentro del recorte
        dentro = np.arange(ancho)[None, :] - gt >= 0
        return StereoSample(
            left=self.left[(slice(None),) + ventana].copy(),
            right=self.right[(slice(None),) + ventana].copy(),
            gt_disparity=gt,
            valid_mask=self.valid_mask[ventana] & dentro,
            fg_mask=None if self.fg_mask is None else self.fg_mask[ventana].copy(),
        )

    def recorte_aleatorio(self, alto: int, ancho: int, rng: np.random.Generator) -> 'StereoSample':
        h, w = self.extensiones
        if (alto, ancho) == (h, w):
            return self
        y = int(rng.integers(0, h - alto + 1))
        x = int(rng.integers(0, w - ancho + 1))
        return self.recortar(y, x, alto, ancho)
