"""
Base común de los comandos del laboratorio: --verbose, logging y traducción
de errores de la librería a CommandError.
"""

import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from disparidad.domain.excepciones import ErrorDisparidad

logger = logging.getLogger(__name__)


class ComandoDisparidad(BaseCommand):
    requires_system_checks = []
    requires_migrations_checks = False

    def add_arguments(self, parser):
        parser.add_argument(
            '--verbose',
            action='store_true',
            help='Mostrar información detallada'
        )

    def handle(self, *args, **options):
        if options['verbose']:
            logging.basicConfig(level=logging.DEBUG)
        else:
            logging.basicConfig(level=logging.INFO)

        try:
            return self.ejecutar(**options)
        except CommandError:
            raise
        except (ErrorDisparidad, OSError) as e:
            logger.debug("Detalle del error", exc_info=True)
            raise CommandError(f'{self.nombre_error}: {e}')

    nombre_error = 'Error'

    def ejecutar(self, **options):
        raise NotImplementedError

    @staticmethod
    def archivo_existente(ruta, bandera: str) -> Path:
        if not ruta:
            raise CommandError(f'falta {bandera}')
        ruta = Path(ruta)
        if not ruta.is_file():
            raise CommandError(f'{bandera}: no existe el archivo {ruta}')
        return ruta
