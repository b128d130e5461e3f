"""
Tests para NetworkConfig, TrainConfig y los archivos de experimento.
"""

import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from disparidad.domain.configuracion import NetworkConfig, TipoOptimizador, TrainConfig, VariantePiramide
from disparidad.domain.excepciones import ErrorConfiguracion
from disparidad.domain.validators.validador_configuracion import ValidadorConfiguracion
from disparidad.infrastructure.utils.archivo_configuracion import (
    ConfiguracionExperimento, desde_pares, escribir_configuracion, leer_configuracion,
)

RAIZ = Path(__file__).resolve().parents[2]


class TestNetworkConfig(SimpleTestCase):

    def test_valores_por_defecto(self):
        config = NetworkConfig()
        self.assertEqual(config.d_levels, 24)
        self.assertEqual(config.canales_lfe, 128)
        self.assertIs(config.pyramid_variant, VariantePiramide.CFSPP)

    def test_d_max_no_divisible(self):
        with self.assertRaises(ErrorConfiguracion) as contexto:
            NetworkConfig(d_max=20)
        self.assertIn('d_max', contexto.exception.violaciones[0])

    def test_variante_desconocida(self):
        with self.assertRaises(ErrorConfiguracion):
            NetworkConfig(pyramid_variant='Piramide')

    def test_kernel_par(self):
        with self.assertRaises(ErrorConfiguracion):
            NetworkConfig(kernel_pair=(3, 4))

    def test_pools_no_decrecientes(self):
        with self.assertRaises(ErrorConfiguracion):
            NetworkConfig(pyramid_pool_sizes=(8, 16, 4, 2))

    def test_acumula_todas_las_violaciones(self):
        resultado = ValidadorConfiguracion().validar_red(
            _SinValidar(base_channels=0, d_max=7, block_counts=(1, -1, 1))
        )
        self.assertFalse(resultado.es_valido)
        self.assertEqual(len(resultado.violaciones), 3)

    def test_etapa_vacia_se_acepta(self):
        config = NetworkConfig(block_counts=(0, 0, 0))
        self.assertEqual(config.canales_lfe, config.base_channels)

    def test_conversion_a_texto(self):
        config = NetworkConfig(block_counts=(1, 2, 1), pyramid_variant='ASPP', use_batchnorm=False)
        pares = config.a_pares()
        self.assertEqual(pares['block_counts'], '1,2,1')
        self.assertEqual(pares['pyramid_variant'], 'ASPP')
        self.assertEqual(pares['use_batchnorm'], 'false')
        self.assertEqual(NetworkConfig.desde_pares(pares), config)

    def test_clave_desconocida(self):
        with self.assertRaises(ErrorConfiguracion):
            NetworkConfig.desde_pares({'canales': '3'})


class _SinValidar:
    """Objeto con los atributos de NetworkConfig, sin pasar por __post_init__."""

    def __init__(self, **cambios):
        base = NetworkConfig()
        for nombre in NetworkConfig.claves():
            setattr(self, nombre, cambios.get(nombre, getattr(base, nombre)))


class TestTrainConfig(SimpleTestCase):

    def test_tasa_de_aprendizaje_cero(self):
        self.assertEqual(TrainConfig(learning_rate=0.0).learning_rate, 0.0)

    def test_tasa_negativa(self):
        with self.assertRaises(ErrorConfiguracion):
            TrainConfig(learning_rate=-1e-3)

    def test_recorte_no_multiplo(self):
        with self.assertRaises(ErrorConfiguracion) as contexto:
            TrainConfig(crop_h=30, crop_w=60)
        self.assertEqual(len(contexto.exception.violaciones), 2)

    def test_optimizador(self):
        self.assertIs(TrainConfig(optimizer='sgd').optimizer, TipoOptimizador.SGD)
        with self.assertRaises(ErrorConfiguracion):
            TrainConfig(optimizer='rmsprop')

    def test_betas(self):
        with self.assertRaises(ErrorConfiguracion):
            TrainConfig(beta1=1.0)

    def test_texto_conserva_los_flotantes(self):
        config = TrainConfig(learning_rate=3e-4, eps=1e-7)
        self.assertEqual(TrainConfig.desde_pares(config.a_pares()), config)

    def test_valor_no_numerico(self):
        with self.assertRaises(ErrorConfiguracion) as contexto:
            TrainConfig.desde_pares({'steps': 'muchos'})
        self.assertIn('steps', str(contexto.exception))


class TestArchivoConfiguracion(SimpleTestCase):

    def setUp(self):
        self._temporal = tempfile.TemporaryDirectory()
        self.directorio = Path(self._temporal.name)

    def tearDown(self):
        self._temporal.cleanup()

    def _escribir(self, texto):
        ruta = self.directorio / 'experimento.cfg'
        ruta.write_text(texto, encoding='utf-8')
        return ruta

    def test_archivo_completo(self):
        ruta = self._escribir(
            "# red\n"
            "block_counts = 1,2,1\n"
            "d_max = 32\n"
            "pyramid_variant = SPP\n"
            "\n"
            "learning_rate = 0.0005\n"
            "steps = 50\n"
            "width = 64\n"
            "height = 32\n"
            "disparity_field = blocks\n"
            "data_mode = stream\n"
        )
        configuracion = leer_configuracion(ruta)
        self.assertEqual(configuracion.red.block_counts, (1, 2, 1))
        self.assertIs(configuracion.red.pyramid_variant, VariantePiramide.SPP)
        self.assertEqual(configuracion.entrenamiento.learning_rate, 0.0005)
        self.assertEqual(configuracion.sintetico.d_max, 32)
        self.assertEqual(configuracion.sintetico.disparity_field.value, 'blocks')
        self.assertEqual(configuracion.modo_datos, 'stream')

    def test_sin_ruta_devuelve_valores_por_defecto(self):
        self.assertEqual(leer_configuracion(None), ConfiguracionExperimento())

    def test_clave_desconocida(self):
        with self.assertRaises(ErrorConfiguracion) as contexto:
            leer_configuracion(self._escribir("d_max = 32\ncanales = 4\n"))
        self.assertIn("canales", str(contexto.exception))

    def test_linea_mal_formada(self):
        with self.assertRaises(ErrorConfiguracion) as contexto:
            leer_configuracion(self._escribir("d_max = 32\nsolo_una_palabra\n"))
        self.assertIn('línea 2', str(contexto.exception))

    def test_lista_invalida(self):
        with self.assertRaises(ErrorConfiguracion):
            leer_configuracion(self._escribir("block_counts = 1,dos,1\n"))

    def test_modo_de_datos(self):
        with self.assertRaises(ErrorConfiguracion):
            desde_pares({'data_mode': 'infinito'})

    def test_archivo_inexistente(self):
        with self.assertRaises(ErrorConfiguracion):
            leer_configuracion(self.directorio / 'no_existe.cfg')

    def test_escribir_y_leer(self):
        configuracion = desde_pares({'block_counts': '1,1,1', 'd_max': '16', 'optimizer': 'sgd', 'steps': '5',
                                     'width': '32', 'height': '16', 'disp_max': '8.0'})
        ruta = self.directorio / 'copia.cfg'
        escribir_configuracion(ruta, configuracion)
        self.assertEqual(leer_configuracion(ruta), configuracion)

    def test_con_semilla(self):
        configuracion = ConfiguracionExperimento().con_semilla(11)
        self.assertEqual(configuracion.entrenamiento.seed, 11)
        self.assertEqual(configuracion.sintetico.seed, 11)

    def test_con_red_alinea_los_datos(self):
        configuracion = ConfiguracionExperimento().con_red(NetworkConfig(d_max=64))
        self.assertEqual(configuracion.sintetico.d_max, 64)

    def test_configuraciones_del_repositorio(self):
        for ruta in sorted((RAIZ / 'configs').glob('*.cfg')):
            with self.subTest(archivo=ruta.name):
                configuracion = leer_configuracion(ruta)
                self.assertEqual(configuracion.sintetico.d_max, configuracion.red.d_max)
