"""
Tests para el backbone (LFE + pirámide), el volumen de costo, el
emparejamiento 3D y el soft argmin.
"""

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from disparidad.domain.configuracion import NetworkConfig, VariantePiramide
from disparidad.domain.excepciones import ErrorConfiguracion, ErrorForma
from disparidad.domain.red.backbone import (
    cfspp_forward, contar_convs_lfe, definir_piramide, lfe_forward, pad_to_multiple, rama_pooling, recortar,
)
from disparidad.domain.red.matcher import (
    build_cost_volume, full_forward, matching_fusion_forward, soft_argmin,
)
from disparidad.domain.red.parametros import inicializar_parametros
from disparidad.domain.tensor.tensor import Tensor, precision, sin_gradiente
from disparidad.tests.utilidades import RED_MINIMA


class TestLFE(SimpleTestCase):

    def test_forma_con_valores_por_defecto(self):
        params = inicializar_parametros(NetworkConfig())
        salida = lfe_forward(Tensor(np.random.default_rng(0).random((1, 3, 64, 128))), params)
        self.assertEqual(salida.shape, (1, 128, 8, 16))

    def test_conteo_de_convoluciones(self):
        self.assertEqual(contar_convs_lfe(NetworkConfig()), 43)
        self.assertEqual(contar_convs_lfe(NetworkConfig(block_counts=(1, 1, 1))), 7)

    def test_exige_multiplos_de_ocho(self):
        params = inicializar_parametros(RED_MINIMA)
        with self.assertRaises(ErrorForma):
            lfe_forward(Tensor(np.zeros((1, 3, 20, 32))), params)

    def test_etapa_vacia_no_hace_forward(self):
        config = RED_MINIMA.con(block_counts=(1, 0, 1))
        params = inicializar_parametros(config)
        with self.assertRaises(ErrorConfiguracion):
            lfe_forward(Tensor(np.zeros((1, 3, 16, 16))), params)

    def test_sin_residuo(self):
        params = inicializar_parametros(RED_MINIMA.con(lfe_residual=False))
        self.assertFalse(any('proyeccion' in n for n in params.nombres()))
        salida = lfe_forward(Tensor(np.ones((1, 3, 16, 16))), params)
        self.assertEqual(salida.shape, (1, 16, 2, 2))


class TestPiramide(SimpleTestCase):
    """Tests para CFSPP y sus variantes de ablación."""

    def test_variantes_conservan_el_contrato(self):
        features = Tensor(np.random.default_rng(1).standard_normal((1, 128, 8, 16)))
        for variante in (VariantePiramide.CFSPP, VariantePiramide.SPP, VariantePiramide.ASPP,
                         VariantePiramide.PLAIN_LFE):
            with self.subTest(variante=variante.value):
                params = inicializar_parametros(NetworkConfig(pyramid_variant=variante))
                self.assertEqual(cfspp_forward(features, params).shape, (1, 32, 8, 16))

    def test_variante_distinta_de_los_parametros(self):
        params = inicializar_parametros(RED_MINIMA)
        features = Tensor(np.zeros((1, 16, 2, 4)))
        with self.assertRaises(ErrorConfiguracion):
            cfspp_forward(features, params, variant=VariantePiramide.SPP)

    def test_rama_pooling_conserva_constantes(self):
        params = inicializar_parametros(RED_MINIMA).evaluar()
        features = Tensor(np.full((1, 16, 4, 6), 0.7))
        with sin_gradiente():
            for nivel in definir_piramide(RED_MINIMA).niveles:
                salida = rama_pooling(features, nivel, params).data
                self.assertEqual(salida.shape, (1, 32, 4, 6))
                np.testing.assert_allclose(salida, salida[:, :, :1, :1] * np.ones_like(salida), atol=1e-6)

    def test_plain3d_conserva_la_piramide(self):
        nombres = inicializar_parametros(RED_MINIMA.con(pyramid_variant=VariantePiramide.PLAIN_3D)).nombres()
        self.assertTrue(any(n.startswith('cfspp.nivel1.pooling') for n in nombres))
        self.assertTrue(any(n.startswith('matcher.plano') for n in nombres))


class TestRelleno(SimpleTestCase):

    def test_redondea_al_multiplo(self):
        relleno, original = pad_to_multiple(Tensor(np.zeros((1, 3, 375, 1242))), 8)
        self.assertEqual(relleno.shape, (1, 3, 376, 1248))
        self.assertEqual(original, (375, 1242))

    def test_multiplo_sin_cambios(self):
        imagen = Tensor(np.zeros((1, 3, 16, 24)))
        relleno, _ = pad_to_multiple(imagen, 8)
        self.assertIs(relleno, imagen)

    @settings(max_examples=20, deadline=None)
    @given(alto=st.integers(1, 30), ancho=st.integers(1, 30))
    def test_recortar_deshace_el_relleno(self, alto, ancho):
        datos = np.random.default_rng(alto * 31 + ancho).random((1, 3, alto, ancho)).astype(np.float32)
        relleno, extensiones = pad_to_multiple(Tensor(datos), 8)
        self.assertEqual(relleno.shape[2] % 8, 0)
        self.assertEqual(relleno.shape[3] % 8, 0)
        np.testing.assert_array_equal(recortar(relleno, extensiones).data, datos)
        np.testing.assert_array_equal(relleno.data[..., alto:, :], 0.0)


class TestVolumenDeCosto(SimpleTestCase):
    """Tests para el volumen de costo por concatenación."""

    def test_desplazamiento_de_un_nivel(self):
        izquierda = Tensor(np.array([1.0, 2.0, 3.0]).reshape(1, 1, 1, 3))
        derecha = Tensor(np.array([4.0, 5.0, 6.0]).reshape(1, 1, 1, 3))
        volumen = build_cost_volume(izquierda, derecha, 2).tensor.data
        np.testing.assert_array_equal(volumen[0, 0, 1, 0], [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(volumen[0, 1, 1, 0], [0.0, 4.0, 5.0])
        np.testing.assert_array_equal(volumen[0, 1, 0, 0], [4.0, 5.0, 6.0])

    def test_mismas_caracteristicas_en_d_cero(self):
        f = Tensor(np.random.default_rng(2).standard_normal((1, 3, 2, 5)))
        volumen = build_cost_volume(f, f, 3).tensor.data
        np.testing.assert_array_equal(volumen[:, :3, 0], volumen[:, 3:, 0])

    def test_forma(self):
        f = Tensor(np.zeros((1, 32, 8, 16)))
        self.assertEqual(build_cost_volume(f, f, 4).shape, (1, 64, 4, 8, 16))

    def test_igual_a_construccion_directa(self):
        rng = np.random.default_rng(3)
        izquierda, derecha = rng.standard_normal((2, 2, 3, 4, 6))
        with precision(np.float64):
            volumen = build_cost_volume(Tensor(izquierda), Tensor(derecha), 8).tensor.data
        for d in range(8):
            for x in range(6):
                np.testing.assert_array_equal(volumen[:, :3, d, :, x], izquierda[..., x])
                esperado = derecha[..., x - d] if x - d >= 0 else np.zeros_like(derecha[..., 0])
                np.testing.assert_array_equal(volumen[:, 3:, d, :, x], esperado)

    def test_formas_distintas(self):
        with self.assertRaises(ErrorForma):
            build_cost_volume(Tensor(np.zeros((1, 2, 2, 4))), Tensor(np.zeros((1, 2, 2, 5))), 2)


class TestEmparejamiento(SimpleTestCase):
    """Tests para la red 3D multiescala y la recuperación de escala."""

    def test_recupera_escala_completa(self):
        config = NetworkConfig(d_max=32)
        params = inicializar_parametros(config)
        volumen = Tensor(np.random.default_rng(4).standard_normal((1, 64, 4, 8, 16)))
        with sin_gradiente():
            salida = matching_fusion_forward(volumen, params)
        self.assertEqual(salida.shape, (1, 1, 32, 64, 128))

    def test_kernels_iguales(self):
        config = RED_MINIMA.con(kernel_pair=(3, 3))
        params = inicializar_parametros(config)
        volumen = Tensor(np.random.default_rng(5).standard_normal((1, 16, 2, 2, 4)))
        self.assertEqual(matching_fusion_forward(volumen, params).shape, (1, 1, 16, 16, 32))

    def test_niveles_de_disparidad_incorrectos(self):
        params = inicializar_parametros(RED_MINIMA)
        with self.assertRaises(ErrorForma):
            matching_fusion_forward(Tensor(np.zeros((1, 16, 3, 2, 4))), params)

    def test_desplazar_el_volumen_desplaza_la_salida(self):
        """Plain3D en modo evaluación: una celda del volumen son 8 píxeles de salida."""
        config = RED_MINIMA.con(pyramid_variant=VariantePiramide.PLAIN_3D)
        params = inicializar_parametros(config, semilla=1).evaluar()
        rng = np.random.default_rng(6)
        volumen = np.zeros((1, 16, 2, 2, 24), dtype=np.float32)
        volumen[..., 9:12] = rng.standard_normal((1, 16, 2, 2, 3))
        desplazado = np.roll(volumen, 1, axis=-1)
        with sin_gradiente():
            original = matching_fusion_forward(Tensor(volumen), params).data
            movido = matching_fusion_forward(Tensor(desplazado), params).data
        self.assertGreater(np.abs(original).max(), 0.0)
        np.testing.assert_allclose(movido[..., 8:], original[..., :-8], atol=1e-5)


class TestSoftArgmin(SimpleTestCase):

    def _regresion(self, costos):
        c = Tensor(np.array(costos, dtype=np.float64).reshape(1, 1, -1, 1, 1), dtype=np.float64)
        return float(soft_argmin(c).numpy().item())

    def test_costos_uniformes(self):
        self.assertAlmostEqual(self._regresion([0, 0, 0, 0]), 1.5)

    def test_simetria(self):
        self.assertAlmostEqual(self._regresion([5, 0, 5]), 1.0, places=12)

    def test_oraculo_escalar(self):
        e = np.exp(-10.0)
        self.assertAlmostEqual(self._regresion([0, 10, 10]), 3 * e / (1 + 2 * e), places=12)
        self.assertAlmostEqual(self._regresion([0, 10, 10]), 1.36e-4, places=6)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=12))
    def test_dentro_del_rango(self, costos):
        d = self._regresion(costos)
        self.assertGreaterEqual(d, -1e-9)
        self.assertLessEqual(d, len(costos) - 1 + 1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**16), st.floats(0, 100))
    def test_invariante_a_desplazar_los_costos(self, semilla, escala):
        """Sumar una constante por píxel a todos los niveles no cambia la disparidad."""
        rng = np.random.default_rng(semilla)
        costos = rng.normal(0, 3, (2, 1, 8, 3, 5)).astype(np.float32)
        constantes = rng.uniform(-escala, escala, (2, 1, 1, 3, 5)).astype(np.float32)
        original = soft_argmin(Tensor(costos)).numpy()
        desplazado = soft_argmin(Tensor(costos + constantes)).numpy()
        np.testing.assert_allclose(desplazado, original, atol=1e-5)

    def test_costo_agudo_elige_su_nivel(self):
        for nivel in (0, 5, 11):
            with self.subTest(nivel=nivel):
                costos = np.zeros(12)
                costos[nivel] = -100.0
                self.assertAlmostEqual(self._regresion(costos), nivel, delta=1e-2)

    def test_forma_invalida(self):
        with self.assertRaises(ErrorForma):
            soft_argmin(Tensor(np.zeros((1, 2, 3, 4, 4))))


class TestRedCompleta(SimpleTestCase):

    def test_par_completo(self):
        config = RED_MINIMA.con(d_max=32)
        params = inicializar_parametros(config)
        rng = np.random.default_rng(7)
        izquierda, derecha = rng.random((2, 3, 64, 128)).astype(np.float32)
        with sin_gradiente():
            mapa = full_forward(izquierda, derecha, params)
        self.assertEqual(mapa.shape, (1, 64, 128))
        self.assertTrue(np.all(np.isfinite(mapa.numpy())))
        self.assertGreaterEqual(mapa.numpy().min(), 0.0)
        self.assertLessEqual(mapa.numpy().max(), 31.0)

    def test_imagenes_iguales_dan_salida_finita(self):
        params = inicializar_parametros(RED_MINIMA).evaluar()
        imagen = np.random.default_rng(8).random((3, 16, 32)).astype(np.float32)
        with sin_gradiente():
            mapa = full_forward(imagen, imagen, params).numpy()
        self.assertTrue(np.all(np.isfinite(mapa)))
        self.assertTrue(np.all((mapa >= 0) & (mapa <= 15)))

    def test_extension_no_multiplo(self):
        params = inicializar_parametros(RED_MINIMA)
        imagen = np.random.default_rng(9).random((3, 20, 36)).astype(np.float32)
        with sin_gradiente():
            mapa = full_forward(imagen, imagen, params)
        self.assertEqual(mapa.shape, (1, 20, 36))

    def test_registra_etapas(self):
        params = inicializar_parametros(RED_MINIMA)
        etapas = {}
        imagen = np.zeros((3, 16, 32), dtype=np.float32)
        with sin_gradiente():
            full_forward(imagen, imagen, params, etapas)
        self.assertEqual(list(etapas), ['caracteristicas_izquierda', 'caracteristicas_derecha', 'volumen',
                                        'emparejamiento', 'soft_argmin'])

    def test_imagenes_de_formas_distintas(self):
        params = inicializar_parametros(RED_MINIMA)
        with self.assertRaises(ErrorForma):
            full_forward(np.zeros((3, 16, 32)), np.zeros((3, 16, 40)), params)
