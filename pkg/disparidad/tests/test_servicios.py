"""
Tests para los servicios de aplicación: resumen de parámetros, inferencia,
evaluación sobre semillas reservadas y utilidades de logging.
"""

import json
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings

from disparidad.application.services.entrenador import train_step
from disparidad.application.services.estado_modelo import EstadoModelo
from disparidad.application.services.evaluacion import (
    SEMILLA_RESERVADA, comparar_con_base, evaluar_archivos, evaluar_modelo, semillas_reservadas,
)
from disparidad.application.services.inferencia import ARCHIVO_DISPARIDAD, inferir_archivos, predecir
from disparidad.application.services.resumen_parametros import summary
from disparidad.domain.configuracion import NetworkConfig, VariantePiramide
from disparidad.domain.datos.sintetico import generate_sample
from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.red.parametros import inicializar_parametros
from disparidad.infrastructure.adapters.imagenes import write_rgb
from disparidad.infrastructure.adapters.pfm import read_pfm, write_pfm
from disparidad.infrastructure.utils.logging_estructurado import crear_logger_estructurado
from disparidad.infrastructure.utils.serialization import make_json_serializable
from disparidad.tests.utilidades import ENTRENAMIENTO_MINIMO, MUESTRA_MINIMA, RED_MINIMA


class ConDirectorioTemporal(SimpleTestCase):

    def setUp(self):
        self._temporal = tempfile.TemporaryDirectory()
        self.directorio = Path(self._temporal.name)

    def tearDown(self):
        self._temporal.cleanup()


class TestResumenParametros(SimpleTestCase):

    def test_ablaciones_mas_livianas_que_cfspp(self):
        cfspp = summary(NetworkConfig()).por_modulo['cfspp']
        self.assertLess(summary(NetworkConfig(pyramid_variant='SPP')).por_modulo['cfspp'], cfspp)
        self.assertLess(summary(NetworkConfig(pyramid_variant='ASPP')).por_modulo['cfspp'], cfspp)
        self.assertLess(summary(NetworkConfig(pyramid_variant='PlainLFE')).por_modulo['cfspp'], cfspp)

    def test_total_por_defecto(self):
        resumen = summary(NetworkConfig())
        self.assertGreater(resumen.total, 3_000_000)
        self.assertLess(resumen.total, 6_500_000)
        self.assertEqual(resumen.convs_lfe, 43)

    def test_coincide_con_los_parametros_creados(self):
        for config in (RED_MINIMA, RED_MINIMA.con(pyramid_variant=VariantePiramide.PLAIN_3D),
                       RED_MINIMA.con(use_batchnorm=False)):
            with self.subTest(variante=config.pyramid_variant.value, bn=config.use_batchnorm):
                parametros = inicializar_parametros(config)
                resumen = summary(config)
                self.assertEqual(resumen.total, parametros.contar())
                self.assertEqual(resumen.tensores, len(parametros.nombres()))
                for modulo, cuenta in resumen.por_modulo.items():
                    self.assertEqual(cuenta, parametros.contar(modulo + '.'))

    def test_totales_por_variante(self):
        totales = {v: summary(NetworkConfig(pyramid_variant=v)).total for v in VariantePiramide}
        cfspp = totales[VariantePiramide.CFSPP]
        self.assertLess(totales[VariantePiramide.SPP], cfspp)
        self.assertLess(totales[VariantePiramide.ASPP], cfspp)
        self.assertLess(totales[VariantePiramide.PLAIN_LFE],
                        min(totales[VariantePiramide.SPP], totales[VariantePiramide.ASPP]))
        for variante, total in totales.items():
            with self.subTest(variante=variante.value):
                self.assertEqual(total, inicializar_parametros(NetworkConfig(pyramid_variant=variante)).contar())

    def test_coincide_con_los_gradientes_de_un_paso(self):
        """Cada parámetro contado recibe gradiente en el backward de un paso."""
        muestra = generate_sample(MUESTRA_MINIMA)
        for variante in (VariantePiramide.CFSPP, VariantePiramide.PLAIN_LFE, VariantePiramide.PLAIN_3D):
            with self.subTest(variante=variante.value):
                config = RED_MINIMA.con(pyramid_variant=variante)
                estado, _ = train_step(EstadoModelo.nuevo(config, ENTRENAMIENTO_MINIMO), muestra,
                                       ENTRENAMIENTO_MINIMO)
                con_gradiente = sum(t.size for _, t in estado.parametros if t.grad is not None)
                self.assertEqual(con_gradiente, summary(config).total)

    def test_lfe_vacio(self):
        resumen = summary(NetworkConfig(block_counts=(0, 0, 0)))
        self.assertEqual(resumen.convs_lfe, 1)
        self.assertGreater(resumen.por_modulo['lfe'], 0)

    def test_texto(self):
        texto = summary(RED_MINIMA).a_texto()
        self.assertIn('variante=CFSPP', texto)
        self.assertIn('total=', texto)
        self.assertIn('convs_lfe=7', texto)


class TestInferencia(ConDirectorioTemporal):

    def test_predecir_restaura_el_modo(self):
        parametros = inicializar_parametros(RED_MINIMA)
        muestra = generate_sample(MUESTRA_MINIMA)
        mapa = predecir(parametros, muestra.left, muestra.right)
        self.assertEqual(parametros.modo, 'train')
        self.assertEqual(mapa.shape, (16, 32))
        self.assertEqual(mapa.dtype, np.float32)

    def test_inferir_archivos(self):
        muestra = generate_sample(MUESTRA_MINIMA.con_semilla(5))
        write_rgb(self.directorio / 'izquierda.png', muestra.left)
        write_rgb(self.directorio / 'derecha.png', muestra.right)
        resultado = inferir_archivos(inicializar_parametros(RED_MINIMA), self.directorio / 'izquierda.png',
                                     self.directorio / 'derecha.png', self.directorio / 'salida')
        self.assertEqual(resultado.ruta_disparidad, self.directorio / 'salida' / ARCHIVO_DISPARIDAD)
        self.assertTrue(resultado.ruta_visualizacion.is_file())
        disparidad, _ = read_pfm(resultado.ruta_disparidad)
        np.testing.assert_array_equal(disparidad, resultado.disparidad)

    def test_pares_de_formas_distintas(self):
        write_rgb(self.directorio / 'a.png', np.zeros((3, 16, 32)))
        write_rgb(self.directorio / 'b.png', np.zeros((3, 16, 24)))
        with self.assertRaises(ErrorForma):
            inferir_archivos(inicializar_parametros(RED_MINIMA), self.directorio / 'a.png',
                             self.directorio / 'b.png', self.directorio)


class TestEvaluacion(ConDirectorioTemporal):

    def test_semillas_reservadas(self):
        self.assertEqual(semillas_reservadas(3), [SEMILLA_RESERVADA, SEMILLA_RESERVADA + 1, SEMILLA_RESERVADA + 2])

    def test_resultado_independiente_de_n_jobs(self):
        semillas = semillas_reservadas(3)
        parametros = inicializar_parametros(RED_MINIMA)
        secuencial = evaluar_modelo(parametros, MUESTRA_MINIMA, semillas, n_jobs=1)
        paralelo = evaluar_modelo(parametros, MUESTRA_MINIMA, semillas, n_jobs=2)
        self.assertEqual(paralelo.semillas, semillas)
        self.assertEqual([r.epe for r in secuencial.reportes], [r.epe for r in paralelo.reportes])
        self.assertAlmostEqual(secuencial.epe_medio, np.mean([r.epe for r in secuencial.reportes]))

    def test_restaura_el_modo_del_llamador(self):
        parametros = inicializar_parametros(RED_MINIMA)
        evaluar_modelo(parametros, MUESTRA_MINIMA, semillas_reservadas(2), n_jobs=2)
        self.assertEqual(parametros.modo, 'train')
        parametros.evaluar()
        evaluar_modelo(parametros, MUESTRA_MINIMA, semillas_reservadas(1))
        self.assertEqual(parametros.modo, 'eval')

    def test_comparacion_con_la_misma_red(self):
        parametros = inicializar_parametros(RED_MINIMA)
        comparacion = comparar_con_base(parametros, parametros, MUESTRA_MINIMA, semillas_reservadas(2))
        self.assertAlmostEqual(comparacion.mejora, 1.0)
        self.assertIn('semillas_reservadas=2', comparacion.a_lineas())

    def test_archivos_identicos(self):
        gt = np.random.default_rng(0).uniform(1, 10, (4, 6)).astype(np.float32)
        write_pfm(self.directorio / 'gt.pfm', gt)
        reporte = evaluar_archivos(self.directorio / 'gt.pfm', self.directorio / 'gt.pfm')
        self.assertEqual(reporte.epe, 0.0)
        self.assertEqual(reporte['bad3'], 0.0)

    def test_formas_distintas(self):
        write_pfm(self.directorio / 'a.pfm', np.zeros((2, 3), dtype=np.float32))
        write_pfm(self.directorio / 'b.pfm', np.zeros((3, 3), dtype=np.float32))
        with self.assertRaises(ErrorForma):
            evaluar_archivos(self.directorio / 'a.pfm', self.directorio / 'b.pfm')


@dataclass
class _Ejemplo:
    nombre: str
    valores: tuple


class TestSerializacion(SimpleTestCase):

    def test_tipos_numpy_y_no_finitos(self):
        self.assertEqual(make_json_serializable(np.float32(1.5)), 1.5)
        self.assertEqual(make_json_serializable(float('nan')), 'nan')
        self.assertEqual(make_json_serializable(np.arange(3)), [0, 1, 2])
        self.assertEqual(make_json_serializable(np.zeros((10, 10))), {'shape': [10, 10], 'dtype': 'float64'})

    def test_dataclasses_enums_y_rutas(self):
        datos = make_json_serializable({'ejemplo': _Ejemplo('a', (1, 2)), 'variante': VariantePiramide.SPP,
                                        'ruta': Path('/tmp/x')})
        self.assertEqual(datos, {'ejemplo': {'nombre': 'a', 'valores': [1, 2]}, 'variante': 'SPP', 'ruta': '/tmp/x'})
        json.dumps(make_json_serializable(NetworkConfig()))


class TestLoggerEstructurado(ConDirectorioTemporal):

    def test_eventos_en_orden(self):
        registro = crear_logger_estructurado(directorio=str(self.directorio))
        registro.iniciar_ejecucion({'d_max': 16}, semilla=3)
        registro.registrar_paso(1, 0.5)
        registro.log_error('pérdida no finita', {'etapa': 'volumen'})
        registro.registrar_resultado_final({'exito': False, 'pasos': 1})
        eventos = registro.eventos()
        self.assertEqual([e['evento'] for e in eventos],
                         ['inicio_ejecucion', 'paso_entrenamiento', 'error', 'fin_ejecucion'])
        self.assertEqual(eventos[0]['configuracion']['semilla'], 3)
        self.assertEqual(eventos[2]['contexto']['etapa'], 'volumen')
        self.assertFalse(eventos[-1]['resumen']['exito'])

    def test_directorio_desde_settings(self):
        with override_settings(DISPARIDAD_LOG_DIR=str(self.directorio / 'logs')):
            registro = crear_logger_estructurado()
        self.assertEqual(registro.archivo_log.parent, self.directorio / 'logs')
