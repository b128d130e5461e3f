"""
Inferencia sobre un par de imágenes con un checkpoint entrenado.
"""

import logging

from disparidad.application.services.estado_modelo import EstadoModelo
from disparidad.application.services.inferencia import inferir_archivos
from disparidad.management.commands._comun import ComandoDisparidad

logger = logging.getLogger(__name__)


class Command(ComandoDisparidad):
    help = 'Calcula la disparidad de un par estéreo y la escribe en PFM y PNG'
    nombre_error = 'Error en la inferencia'

    def add_arguments(self, parser):
        parser.add_argument('--checkpoint', type=str, required=True, help='Checkpoint del modelo')
        parser.add_argument('--left', type=str, required=True, help='Imagen izquierda (PNG)')
        parser.add_argument('--right', type=str, required=True, help='Imagen derecha (PNG)')
        parser.add_argument('--out', type=str, required=True, help='Directorio de salida')
        super().add_arguments(parser)

    def ejecutar(self, **options):
        ruta_checkpoint = self.archivo_existente(options['checkpoint'], '--checkpoint')
        izquierda = self.archivo_existente(options['left'], '--left')
        derecha = self.archivo_existente(options['right'], '--right')

        estado = EstadoModelo.cargar(ruta_checkpoint)
        resultado = inferir_archivos(estado.parametros, izquierda, derecha, options['out'])

        self.stdout.write(self.style.SUCCESS(f'✅ Disparidad escrita en {resultado.ruta_disparidad}'))
        self.stdout.write(f'   Visualización: {resultado.ruta_visualizacion}')
        if options['verbose']:
            d = resultado.disparidad
            self.stdout.write(f'   Forma {d.shape}, rango [{d.min():.3f}, {d.max():.3f}]')
