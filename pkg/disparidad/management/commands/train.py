"""
Comando de entrenamiento: sobreajuste a una muestra fija o flujo de muestras
sintéticas, con log de pérdidas y checkpoints.
"""

import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from disparidad.application.services.entrenador import ARCHIVO_PERDIDAS, EntrenadorEstereo
from disparidad.application.services.estado_modelo import EstadoModelo
from disparidad.domain.excepciones import ErrorEntrenamiento
from disparidad.infrastructure.utils.archivo_configuracion import escribir_configuracion, leer_configuracion
from disparidad.infrastructure.utils.logging_estructurado import crear_logger_estructurado
from disparidad.management.commands._comun import ComandoDisparidad

logger = logging.getLogger(__name__)


class Command(ComandoDisparidad):
    help = 'Entrena el emparejador estéreo desde un archivo de configuración'
    nombre_error = 'Error en el entrenamiento'

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            type=str,
            default=None,
            help='Archivo de configuración clave = valor (opcional)'
        )
        parser.add_argument(
            '--checkpoint',
            type=str,
            default=None,
            help='Checkpoint desde el que reanudar (opcional)'
        )
        parser.add_argument(
            '--out',
            type=str,
            required=True,
            help='Directorio de salida para checkpoints y log de pérdidas'
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=None,
            help='Semilla que sustituye a la del archivo de configuración'
        )
        parser.add_argument(
            '--steps',
            type=int,
            default=None,
            help='Número de pasos que sustituye al del archivo de configuración'
        )
        parser.add_argument(
            '--held-out',
            type=int,
            default=0,
            help='Semillas reservadas sobre las que comparar el EPE con la red sin entrenar'
        )
        super().add_arguments(parser)

    def ejecutar(self, **options):
        """
        Flujo:
        1. Leer la configuración y aplicar --seed.
        2. Reanudar desde --checkpoint si se indica (la red viene del checkpoint).
        3. Entrenar, escribiendo `perdidas.tsv` y los checkpoints en --out.
        4. Mostrar la pérdida final y, en modo fijo, las métricas de la muestra.
        5. Con --held-out N, comparar el EPE medio sobre N semillas reservadas
           con el de la red sin entrenar.
        """
        if options['steps'] is not None and options['steps'] < 0:
            raise CommandError('--steps debe ser ≥ 0')
        if options['held_out'] < 0:
            raise CommandError('--held-out debe ser ≥ 0')

        configuracion = leer_configuracion(options['config'])
        if options['seed'] is not None:
            configuracion = configuracion.con_semilla(options['seed'])

        estado = None
        if options['checkpoint']:
            ruta = self.archivo_existente(options['checkpoint'], '--checkpoint')
            estado = EstadoModelo.cargar(ruta, configuracion.entrenamiento)
            if estado.red != configuracion.red:
                logger.warning("La red del checkpoint difiere de la configuración; se usa la del checkpoint")
                configuracion = configuracion.con_red(estado.red)
            self.stdout.write(f'🔄 Reanudando desde {ruta} (paso {estado.paso})')

        salida = Path(options['out'])
        salida.mkdir(parents=True, exist_ok=True)
        escribir_configuracion(salida / 'configuracion.cfg', configuracion)

        self.stdout.write(self.style.SUCCESS(
            f'🚀 Entrenando {configuracion.red.pyramid_variant.value} '
            f'({configuracion.modo_datos}, semilla {configuracion.entrenamiento.seed})'
        ))
        entrenador = EntrenadorEstereo(configuracion, directorio_salida=salida, estado=estado,
                                       logger_estructurado=crear_logger_estructurado())
        try:
            resultado = entrenador.entrenar(pasos=options['steps'], reservadas=options['held_out'],
                                            n_jobs=settings.DISPARIDAD_N_JOBS)
        except ErrorEntrenamiento as e:
            raise CommandError(f'Entrenamiento detenido en {e.etapa}: {e}')

        self._mostrar_resultado(resultado, salida)

    def _mostrar_resultado(self, resultado, salida: Path):
        """Resumen en consola."""
        self.stdout.write(f'   Pasos: {resultado.pasos}')
        if resultado.perdida_final is not None:
            self.stdout.write(f'   Pérdida final: {resultado.perdida_final:.6f}')
        self.stdout.write(f'   Tiempo: {resultado.tiempo_total:.2f}s')
        self.stdout.write(f'   Log de pérdidas: {salida / ARCHIVO_PERDIDAS}')
        if resultado.ruta_checkpoint:
            self.stdout.write(f'   Checkpoint: {resultado.ruta_checkpoint}')
        if resultado.reporte_final:
            for linea in resultado.reporte_final.a_lineas():
                self.stdout.write(f'   {linea}')
        if resultado.comparacion_reservada:
            for linea in resultado.comparacion_reservada.a_lineas():
                self.stdout.write(f'   {linea}')
        self.stdout.write(self.style.SUCCESS('✅ Entrenamiento completado'))
