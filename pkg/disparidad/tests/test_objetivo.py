"""
Tests para la pérdida smooth-L1 enmascarada y las métricas de evaluación.
"""

import numpy as np
import pytest
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from disparidad.domain.excepciones import ErrorForma
from disparidad.domain.objetivo.metricas import (
    MetricReport, bad_pixel_rate, d1_metrics, epe, es_error_d1, evaluar,
)
from disparidad.domain.objetivo.perdida import loss, smooth_l1
from disparidad.domain.tensor.tensor import Tensor, backward, precision


class TestSmoothL1(SimpleTestCase):

    def test_valores_escalares(self):
        self.assertEqual(smooth_l1(0.0), 0.0)
        self.assertEqual(smooth_l1(0.5), 0.125)
        self.assertEqual(smooth_l1(-2.0), 1.5)
        self.assertEqual(smooth_l1(1.0), 0.5)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-1e3, 1e3))
    def test_es_par(self, x):
        self.assertEqual(smooth_l1(x), smooth_l1(-x))

    def test_gradiente_unitario_desde_el_quiebre(self):
        """La pérdida de un píxel con error ±1 o mayor tiene derivada ±1."""
        with precision(np.float64):
            pred = Tensor(np.array([[1.0, -1.0, 4.0, -2.5]]), requires_grad=True)
            backward(loss(pred, np.zeros((1, 4))))
        np.testing.assert_allclose(pred.grad, [[0.25, -0.25, 0.25, -0.25]])


class TestPerdida(SimpleTestCase):

    def test_prediccion_exacta(self):
        gt = np.arange(12, dtype=np.float32).reshape(3, 4)
        self.assertEqual(loss(Tensor(gt), gt).item(), 0.0)

    def test_un_pixel_lejano(self):
        pred = Tensor(np.zeros((1, 1)))
        self.assertAlmostEqual(loss(pred, np.array([[2.0]])).item(), 1.5)

    def test_ignora_pixeles_sin_etiqueta(self):
        pred = Tensor(np.zeros((2, 2)))
        gt = np.array([[2.0, 100.0], [0.0, 100.0]])
        mascara = np.array([[True, False], [True, False]])
        self.assertAlmostEqual(loss(pred, gt, mascara).item(), 0.75)

    def test_igual_a_bucle_directo(self):
        rng = np.random.default_rng(0)
        pred, gt = rng.uniform(0, 6, (2, 4, 4))
        mascara = rng.random((4, 4)) > 0.3
        esperado = np.mean([smooth_l1(gt[i, j] - pred[i, j]) for i in range(4) for j in range(4) if mascara[i, j]])
        with precision(np.float64):
            obtenido = loss(Tensor(pred), gt, mascara).item()
        self.assertAlmostEqual(obtenido, esperado, places=10)

    def test_gradiente_por_pixel(self):
        with precision(np.float64):
            pred = Tensor(np.array([[0.0, 0.0]]), requires_grad=True)
            backward(loss(pred, np.array([[0.5, 3.0]])))
        np.testing.assert_allclose(pred.grad, [[-0.25, -0.5]])

    def test_lote_promedia_sobre_todas_las_muestras(self):
        pred = Tensor(np.zeros((2, 1, 1)))
        self.assertAlmostEqual(loss(pred, np.array([[2.0]])).item(), 1.5)

    def test_mascara_vacia(self):
        with self.assertRaises(ErrorForma):
            loss(Tensor(np.zeros((2, 2))), np.zeros((2, 2)), np.zeros((2, 2), dtype=bool))

    def test_formas_distintas(self):
        with self.assertRaises(ErrorForma):
            loss(Tensor(np.zeros((2, 3))), np.zeros((2, 2)))


class TestMetricas(SimpleTestCase):

    def test_epe_desplazado(self):
        gt = np.full((3, 5), 7.0)
        self.assertAlmostEqual(epe(gt + 2.0, gt, np.ones_like(gt, dtype=bool)), 2.0)

    def test_bad_pixel(self):
        gt = np.array([[1.0, 1.0, 1.0]])
        pred = np.array([[1.0, 5.0, 10.0]])
        self.assertAlmostEqual(bad_pixel_rate(pred, gt, np.ones((1, 3), dtype=bool), 3), 2 / 3)

    def test_bad_pixel_es_estricto(self):
        gt = np.zeros((1, 1))
        self.assertEqual(bad_pixel_rate(gt + 3.0, gt, np.ones((1, 1), dtype=bool), 3), 0.0)

    def test_bad_pixel_mascara_vacia(self):
        with self.assertRaises(ErrorForma):
            bad_pixel_rate(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2), dtype=bool), 3)

    def test_d1_relativo(self):
        self.assertFalse(es_error_d1(np.array(4.0), np.array(100.0)))
        self.assertTrue(es_error_d1(np.array(4.0), np.array(10.0)))
        self.assertFalse(es_error_d1(np.array(3.0), np.array(10.0)))

    def test_d1_por_regiones(self):
        gt = np.array([[10.0, 10.0, 100.0, 100.0]])
        pred = gt + np.array([[4.0, 0.0, 4.0, 9.0]])
        fg = np.array([[True, True, False, False]])
        bg, primer_plano, todo = d1_metrics(pred, gt, fg, np.ones_like(fg))
        self.assertAlmostEqual(primer_plano, 0.5)
        self.assertAlmostEqual(bg, 0.5)
        self.assertAlmostEqual(todo, 0.5)

    def test_d1_sin_primer_plano(self):
        gt = np.ones((2, 2))
        bg, primer_plano, todo = d1_metrics(gt, gt, None, np.ones((2, 2), dtype=bool))
        self.assertIsNone(primer_plano)
        self.assertEqual(bg, 0.0)
        self.assertEqual(todo, 0.0)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, (3, 4), elements=st.floats(0, 50)), arrays(np.float64, (3, 4), elements=st.floats(0, 50)))
    def test_tasas_monotonas_en_el_umbral(self, pred, gt):
        mascara = np.ones((3, 4), dtype=bool)
        tasas = [bad_pixel_rate(pred, gt, mascara, k) for k in (1, 3, 4, 5)]
        self.assertEqual(tasas, sorted(tasas, reverse=True))
        self.assertTrue(all(0.0 <= t <= 1.0 for t in tasas))


@pytest.mark.unit
class TestReporte(SimpleTestCase):

    def test_lineas_con_region_ausente(self):
        gt = np.full((2, 3), 5.0)
        reporte = evaluar(gt, gt, np.ones((2, 3), dtype=bool))
        lineas = reporte.a_lineas()
        self.assertIn('epe=0.000000', lineas)
        self.assertIn('bad3=0.000000', lineas)
        self.assertIn('d1_fg=absent', lineas)
        self.assertIn('pixeles_all=6', lineas)

    def test_region_noc(self):
        gt = np.zeros((1, 4))
        pred = np.array([[0.0, 0.0, 0.0, 8.0]])
        noc = np.array([[True, True, True, False]])
        reporte = evaluar(pred, gt, np.ones((1, 4), dtype=bool), noc_mask=noc)
        self.assertAlmostEqual(reporte['epe'], 2.0)
        self.assertEqual(reporte['epe_noc'], 0.0)
        self.assertEqual(reporte.conteos['pixeles_all_noc'], 3)

    def test_region_sin_pixeles(self):
        with self.assertRaises(ErrorForma):
            evaluar(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2), dtype=bool))

    def test_texto_vacio(self):
        self.assertEqual(MetricReport().a_texto(), '')
