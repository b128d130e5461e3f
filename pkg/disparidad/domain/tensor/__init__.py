"""
Núcleo de diferenciación automática: tensores densos, cinta de operaciones
y primitivas diferenciables que usa la red.
"""

from .convolucion import conv2d, conv3d, deconv3d
from .muestreo import adaptive_avg_pool2d, avg_pool2d, bilinear_upsample2d, trilinear_upsample3d
from .normalizacion import EstadisticasBN, batchnorm
from .operaciones import concat, relu, smooth_l1, softmax
from .tensor import Cinta, Tensor, backward, precision, sin_gradiente

__all__ = [
    'Cinta', 'EstadisticasBN', 'Tensor', 'adaptive_avg_pool2d', 'avg_pool2d', 'backward',
    'batchnorm', 'bilinear_upsample2d', 'concat', 'conv2d', 'conv3d', 'deconv3d', 'precision',
    'relu', 'sin_gradiente', 'smooth_l1', 'softmax', 'trilinear_upsample3d',
]
