"""
Configuraciones pequeñas compartidas por las pruebas.
"""

from disparidad.domain.configuracion import NetworkConfig, TrainConfig
from disparidad.domain.datos.muestras import SyntheticSpec

RED_MINIMA = NetworkConfig(
    base_channels=8,
    block_counts=(1, 1, 1),
    stage_channels=(8, 16, 16),
    pyramid_pool_sizes=(16, 8, 4, 2),
    pyramid_dilations=(4, 3, 2, 1),
    fusion_channels=8,
    d_max=16,
)

ENTRENAMIENTO_MINIMO = TrainConfig(learning_rate=1e-3, steps=3, crop_h=16, crop_w=32, log_every=1)

MUESTRA_MINIMA = SyntheticSpec(width=32, height=16, d_max=16, disp_max=8.0)
