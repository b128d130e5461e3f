"""
Reporte de parámetros por módulo para una configuración de red.
"""

import logging

from disparidad.application.services.resumen_parametros import summary
from disparidad.infrastructure.utils.archivo_configuracion import leer_configuracion
from disparidad.management.commands._comun import ComandoDisparidad

logger = logging.getLogger(__name__)


class Command(ComandoDisparidad):
    help = 'Imprime el número de parámetros del LFE, la pirámide y el emparejamiento 3D'
    nombre_error = 'Error en el resumen'

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            type=str,
            default=None,
            help='Archivo de configuración (por defecto la red completa)'
        )
        super().add_arguments(parser)

    def ejecutar(self, **options):
        configuracion = leer_configuracion(options['config'])
        self.stdout.write(summary(configuracion.red).a_texto())
