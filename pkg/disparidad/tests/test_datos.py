"""
Tests para el generador sintético y las muestras estéreo.
"""

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from disparidad.domain.datos.muestras import CampoDisparidad, StereoSample, SyntheticSpec, Textura
from disparidad.domain.datos.sintetico import generate_sample, marcar_oclusiones
from disparidad.domain.excepciones import ErrorConfiguracion, ErrorForma


class TestGeneradorSintetico(SimpleTestCase):

    def test_disparidad_constante(self):
        spec = SyntheticSpec(width=32, height=16, disparity_field=CampoDisparidad.CONSTANT, disp_min=4.0)
        muestra = generate_sample(spec)
        np.testing.assert_array_equal(muestra.gt_disparity, 4.0)
        np.testing.assert_allclose(muestra.left[:, :, 4:], muestra.right[:, :, :-4], atol=1e-6)
        self.assertFalse(muestra.valid_mask[:, :4].any())
        self.assertTrue(muestra.valid_mask[:, 4:].all())
        self.assertIsNone(muestra.fg_mask)

    def test_disparidad_cero(self):
        spec = SyntheticSpec(width=16, height=16, disparity_field='constant', disp_min=0.0, texture='random_noise')
        muestra = generate_sample(spec)
        np.testing.assert_allclose(muestra.left, muestra.right, atol=1e-6)
        self.assertTrue(muestra.valid_mask.all())

    def test_rampa_consistente_con_interpolacion_lineal(self):
        spec = SyntheticSpec(width=64, height=16, disparity_field=CampoDisparidad.PLANAR_RAMP,
                             disp_min=1.0, disp_max=8.0)
        muestra = generate_sample(spec)
        self.assertAlmostEqual(float(muestra.gt_disparity[0, 0]), 1.0, places=6)
        self.assertAlmostEqual(float(muestra.gt_disparity[0, -1]), 8.0, places=6)
        columnas = np.arange(spec.width, dtype=np.float64)
        for y in range(spec.height):
            origen = columnas - muestra.gt_disparity[y].astype(np.float64)
            for c in range(3):
                esperado = np.interp(origen, columnas, muestra.right[c, y].astype(np.float64))
                residuo = np.abs(muestra.left[c, y] - esperado)[muestra.valid_mask[y]]
                self.assertLess(residuo.max(), 1e-6)

    def test_textura_en_rango(self):
        for textura in Textura:
            with self.subTest(textura=textura.value):
                muestra = generate_sample(SyntheticSpec(texture=textura))
                self.assertEqual(muestra.left.dtype, np.float32)
                self.assertGreaterEqual(muestra.right.min(), 0.0)
                self.assertLessEqual(muestra.right.max(), 1.0)

    def test_bloques_marcan_primer_plano(self):
        spec = SyntheticSpec(width=64, height=32, d_max=32, disparity_field=CampoDisparidad.BLOCKS, num_blocks=3)
        muestra = generate_sample(spec)
        self.assertTrue(muestra.fg_mask.any())
        np.testing.assert_array_equal(muestra.gt_disparity[~muestra.fg_mask], spec.disp_min)
        self.assertTrue(np.all(muestra.gt_disparity[muestra.fg_mask] >= (spec.disp_min + 31) / 2))
        self.assertTrue(np.all(muestra.gt_disparity <= 31))

    @settings(max_examples=10, deadline=None)
    @given(semilla=st.integers(0, 10_000))
    def test_determinista_por_semilla(self, semilla):
        spec = SyntheticSpec(disparity_field=CampoDisparidad.BLOCKS, seed=semilla)
        a, b = generate_sample(spec), generate_sample(spec)
        np.testing.assert_array_equal(a.left, b.left)
        np.testing.assert_array_equal(a.gt_disparity, b.gt_disparity)
        np.testing.assert_array_equal(a.valid_mask, b.valid_mask)

    def test_semillas_distintas(self):
        a = generate_sample(SyntheticSpec(seed=1))
        b = generate_sample(SyntheticSpec(seed=2))
        self.assertFalse(np.array_equal(a.right, b.right))


class TestOclusiones(SimpleTestCase):

    def test_fondo_tapado_por_bloque(self):
        fila = np.array([[0.0, 0.0, 0.0, 0.0, 3.0, 3.0, 3.0, 0.0, 0.0, 0.0]])
        ocluido = marcar_oclusiones(fila, 0.5)
        np.testing.assert_array_equal(np.flatnonzero(ocluido[0]), [1, 2, 3])

    def test_campo_plano_sin_oclusiones(self):
        self.assertFalse(marcar_oclusiones(np.full((3, 12), 2.0), 0.5).any())


class TestSyntheticSpec(SimpleTestCase):

    def test_extension_minima(self):
        with self.assertRaises(ErrorConfiguracion):
            SyntheticSpec(width=8)

    def test_disparidad_mayor_que_el_rango(self):
        with self.assertRaises(ErrorConfiguracion) as contexto:
            SyntheticSpec(d_max=16, disp_max=15.5)
        self.assertIn('d_max', str(contexto.exception))

    def test_valores_desconocidos(self):
        with self.assertRaises(ErrorConfiguracion):
            SyntheticSpec(texture='ruido_rosa')
        with self.assertRaises(ErrorConfiguracion):
            SyntheticSpec(disparity_field='esfera')

    def test_acumula_violaciones(self):
        with self.assertRaises(ErrorConfiguracion) as contexto:
            SyntheticSpec(width=4, seed=-1, num_blocks=-2)
        self.assertEqual(len(contexto.exception.violaciones), 3)

    def test_con_semilla(self):
        spec = SyntheticSpec(seed=3)
        self.assertEqual(spec.con_semilla(9).seed, 9)
        self.assertEqual(spec.seed, 3)


class TestStereoSample(SimpleTestCase):

    def _muestra(self):
        return generate_sample(SyntheticSpec(width=32, height=16, disparity_field='constant', disp_min=4.0))

    def test_recorte_invalida_origenes_fuera(self):
        recorte = self._muestra().recortar(2, 10, 8, 16)
        self.assertEqual(recorte.extensiones, (8, 16))
        self.assertFalse(recorte.valid_mask[:, :4].any())
        self.assertTrue(recorte.valid_mask[:, 4:].all())

    def test_recorte_fuera_de_la_muestra(self):
        with self.assertRaises(ErrorForma):
            self._muestra().recortar(10, 0, 8, 16)

    def test_recorte_aleatorio(self):
        muestra = self._muestra()
        self.assertIs(muestra.recorte_aleatorio(16, 32, np.random.default_rng(0)), muestra)
        recorte = muestra.recorte_aleatorio(8, 16, np.random.default_rng(0))
        self.assertEqual(recorte.left.shape, (3, 8, 16))

    def test_mascara_de_entrenamiento(self):
        gt = np.array([[0.0, 3.0, 15.9, 16.0]])
        muestra = StereoSample(left=np.zeros((3, 1, 4)), right=np.zeros((3, 1, 4)), gt_disparity=gt,
                               valid_mask=np.ones((1, 4)))
        np.testing.assert_array_equal(muestra.mascara_entrenamiento(16), [[False, True, True, False]])

    def test_formas_incompatibles(self):
        with self.assertRaises(ErrorForma):
            StereoSample(left=np.zeros((3, 4, 4)), right=np.zeros((3, 4, 5)), gt_disparity=np.zeros((4, 4)),
                         valid_mask=np.ones((4, 4)))
