"""
Compara un mapa de disparidad predicho con la verdad e imprime el
MetricReport como líneas clave=valor.
"""

import logging

from disparidad.application.services.evaluacion import evaluar_archivos
from disparidad.management.commands._comun import ComandoDisparidad

logger = logging.getLogger(__name__)


class Command(ComandoDisparidad):
    help = 'Evalúa una disparidad predicha (.pfm/.png) contra la verdad'
    nombre_error = 'Error en la evaluación'

    def add_arguments(self, parser):
        parser.add_argument('--pred', type=str, required=True, help='Disparidad predicha')
        parser.add_argument('--gt', type=str, required=True, help='Disparidad verdadera')
        parser.add_argument('--noc', type=str, default=None, help='Máscara de píxeles no ocluidos (opcional)')
        parser.add_argument('--fg', type=str, default=None, help='Máscara de primer plano (opcional)')
        super().add_arguments(parser)

    def ejecutar(self, **options):
        prediccion = self.archivo_existente(options['pred'], '--pred')
        verdad = self.archivo_existente(options['gt'], '--gt')
        noc = self.archivo_existente(options['noc'], '--noc') if options['noc'] else None
        fg = self.archivo_existente(options['fg'], '--fg') if options['fg'] else None

        reporte = evaluar_archivos(prediccion, verdad, ruta_noc=noc, ruta_fg=fg)
        # salida parseable: sólo las líneas del reporte
        self.stdout.write(reporte.a_texto())
