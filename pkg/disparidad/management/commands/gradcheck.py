"""
Verificación numérica de gradientes: primitivas y red completa.
"""

import logging

from django.core.management.base import CommandError

from disparidad.application.services.suite_gradientes import suite_extremo_a_extremo, suite_primitivas
from disparidad.management.commands._comun import ComandoDisparidad

logger = logging.getLogger(__name__)


class Command(ComandoDisparidad):
    help = 'Compara gradientes analíticos con diferencias finitas centrales'
    nombre_error = 'Error en la verificación de gradientes'

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=0, help='Semilla de entradas y parámetros')
        parser.add_argument(
            '--solo-primitivas',
            action='store_true',
            help='Omitir la verificación de la red completa'
        )
        super().add_arguments(parser)

    def ejecutar(self, **options):
        """
        1. Primitivas (tolerancia 1e-4).
        2. Red completa + pérdida sobre una muestra 16×32 (tolerancia 1e-3).
        Cualquier fallo termina con código distinto de cero.
        """
        self.stdout.write(self.style.SUCCESS('🔍 Verificando gradientes'))
        suites = [('primitivas', suite_primitivas(semilla=options['seed']))]
        if not options['solo_primitivas']:
            suites.append(('red completa', suite_extremo_a_extremo(semilla=options['seed'])))

        fallidos = []
        for nombre, resultado in suites:
            self.stdout.write(f'\n📊 {nombre} ({resultado.tiempo_total:.1f}s)')
            for reporte in resultado.reportes:
                estilo = self.style.SUCCESS if reporte.aprobado else self.style.ERROR
                self.stdout.write(estilo(f'   {reporte.resumen()}'))
            fallidos += [r.operacion for r in resultado.fallidos]

        if fallidos:
            raise CommandError(f'Gradientes incorrectos en: {", ".join(fallidos)}')
        self.stdout.write(self.style.SUCCESS('\n✅ Todos los gradientes coinciden'))
