"""
Generación de muestras estéreo sintéticas en disco.

Cada muestra va en su propio directorio con el par RGB, la disparidad en
PFM y en PNG KITTI, la máscara de validez y la de primer plano.
"""

import logging
import time
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError
from joblib import Parallel, delayed

from disparidad.domain.datos.muestras import SyntheticSpec
from disparidad.domain.datos.sintetico import generate_sample
from disparidad.infrastructure.adapters.imagenes import write_mascara, write_rgb
from disparidad.infrastructure.adapters.kitti_png import write_kitti_disp_png
from disparidad.infrastructure.adapters.pfm import write_pfm
from disparidad.infrastructure.utils.archivo_configuracion import escribir_configuracion, leer_configuracion
from disparidad.management.commands._comun import ComandoDisparidad

logger = logging.getLogger(__name__)

ARCHIVOS_MUESTRA = ('izquierda.png', 'derecha.png', 'disparidad.pfm', 'disparidad_kitti.png', 'valida.png',
                    'primer_plano.png')


def escribir_muestra(spec: SyntheticSpec, directorio: Path) -> Path:
    """Genera la muestra de `spec` y la escribe en `directorio`."""
    muestra = generate_sample(spec)
    directorio.mkdir(parents=True, exist_ok=True)
    write_rgb(directorio / 'izquierda.png', muestra.left)
    write_rgb(directorio / 'derecha.png', muestra.right)
    write_pfm(directorio / 'disparidad.pfm', muestra.gt_disparity)
    write_kitti_disp_png(directorio / 'disparidad_kitti.png', muestra.gt_disparity, muestra.valid_mask)
    write_mascara(directorio / 'valida.png', muestra.valid_mask)
    if muestra.fg_mask is not None:
        write_mascara(directorio / 'primer_plano.png', muestra.fg_mask)
    return directorio


class Command(ComandoDisparidad):
    help = 'Escribe muestras estéreo sintéticas en un directorio'
    nombre_error = 'Error generando datos'

    def add_arguments(self, parser):
        parser.add_argument('--config', type=str, default=None, help='Archivo de configuración (opcional)')
        parser.add_argument('--out', type=str, required=True, help='Directorio de salida')
        parser.add_argument('--seed', type=int, default=None, help='Semilla de la primera muestra')
        parser.add_argument('--count', type=int, default=1, help='Número de muestras')
        super().add_arguments(parser)

    def ejecutar(self, **options):
        if options['count'] < 1:
            raise CommandError('--count debe ser ≥ 1')
        configuracion = leer_configuracion(options['config'])
        if options['seed'] is not None:
            configuracion = configuracion.con_semilla(options['seed'])
        spec = configuracion.sintetico
        salida = Path(options['out'])
        salida.mkdir(parents=True, exist_ok=True)
        escribir_configuracion(salida / 'configuracion.cfg', configuracion)

        inicio = time.time()
        directorios = Parallel(n_jobs=settings.DISPARIDAD_N_JOBS)(
            delayed(escribir_muestra)(spec.con_semilla(spec.seed + i), salida / f'muestra_{i:04d}')
            for i in range(options['count'])
        )
        logger.info(f"{len(directorios)} muestras en {time.time() - inicio:.2f}s")
        self.stdout.write(self.style.SUCCESS(
            f'✅ {len(directorios)} muestras {spec.height}×{spec.width} escritas en {salida}'
        ))
