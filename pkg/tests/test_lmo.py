"""
Test unitari per gli oracoli di minimizzazione lineare.
"""
import os
import sys
import unittest

import numpy as np

# Aggiungi il percorso principale al path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from solver.lmo import (
    NormConstraint, lmo_bruteforce, lmo_exact, lmo_l1_exact, lmo_l1_softmax, lmo_linf_exact,
    lmo_lp_exact, lmo_relaxed, softmax_weights, tilde_gradient
)
from utils.exceptions import InvalidInputError


class TestNormConstraint(unittest.TestCase):
    """Test per la classe NormConstraint."""

    def test_invalid_parameters(self):
        """Pesi non positivi, raggio negativo e ordine < 1 vengono rifiutati."""
        with self.assertRaises(InvalidInputError):
            NormConstraint(w=np.array([1.0, 0.0]), t=1.0)
        with self.assertRaises(InvalidInputError):
            NormConstraint(w=np.ones(2), t=-1.0)
        with self.assertRaises(InvalidInputError):
            NormConstraint(w=np.ones(2), t=1.0, p=0.5)
        with self.assertRaises(InvalidInputError):
            NormConstraint(w=np.array([1.0, np.nan]), t=1.0)

    def test_weights_are_copied(self):
        """Il vincolo non condivide i pesi con il chiamante."""
        w = np.ones(3)
        c = NormConstraint(w=w, t=1.0)
        w[0] = 5.0
        self.assertEqual(c.w[0], 1.0)

    def test_dual_order(self):
        """q è il coniugato di Hölder di p."""
        self.assertTrue(np.isinf(NormConstraint(np.ones(2), 1.0, p=1).q))
        self.assertEqual(NormConstraint(np.ones(2), 1.0, p=2).q, 2.0)
        self.assertEqual(NormConstraint(np.ones(2), 1.0, p=np.inf).q, 1.0)
        self.assertAlmostEqual(NormConstraint(np.ones(2), 1.0, p=3).q, 1.5)

    def test_tilde_gradient(self):
        """g_tw = (t/w) ∘ g e r = |g_tw|."""
        c = NormConstraint(w=np.array([1.0, 2.0]), t=2.0)
        tg = tilde_gradient(np.array([1.0, -3.0]), c)
        np.testing.assert_allclose(tg.g_tw, [2.0, -3.0])
        np.testing.assert_allclose(tg.r, [2.0, 3.0])
        np.testing.assert_array_equal(tg.sign, [1.0, -1.0])


class TestExactLMO(unittest.TestCase):
    """Test per gli LMO esatti."""

    def setUp(self):
        """Configura il test."""
        self.rng = np.random.default_rng(1234)
        self.unit = NormConstraint(w=np.ones(2), t=1.0, p=1)

    def test_l1_vertex(self):
        """Il vertice ha segno opposto al gradiente sulla coordinata dominante."""
        np.testing.assert_array_equal(lmo_l1_exact(np.array([1.0, -2.0]), self.unit), [0.0, 1.0])

    def test_l1_tie_uses_lowest_index(self):
        """In caso di parità vince l'indice minimo."""
        np.testing.assert_array_equal(lmo_l1_exact(np.array([1.0, 1.0]), self.unit), [-1.0, 0.0])

    def test_l1_zero_gradient(self):
        """Gradiente nullo: vertice nullo."""
        np.testing.assert_array_equal(lmo_l1_exact(np.zeros(2), self.unit), [0.0, 0.0])

    def test_l1_weighted(self):
        """La scelta usa il gradiente riscalato (t/w) ∘ g."""
        c = NormConstraint(w=np.array([0.5, 4.0]), t=1.0)
        # g_tw = (2 · 1, 0.25 · 3) = (2, 0.75)
        np.testing.assert_allclose(lmo_l1_exact(np.array([1.0, 3.0]), c), [-2.0, 0.0])

    def test_l2_closed_form(self):
        """Per p = 2 e w = 1 il vertice è −t · g / ‖g‖."""
        c = NormConstraint(w=np.ones(2), t=1.0, p=2)
        np.testing.assert_allclose(lmo_lp_exact(np.array([3.0, 4.0]), c), [-0.6, -0.8])

    def test_lp_on_boundary(self):
        """Il vertice ℓp sta sul bordo ‖w ∘ s‖_p = t."""
        for p in (1.5, 2.0, 3.0, 7.0):
            w = self.rng.uniform(0.5, 1.5, size=6)
            c = NormConstraint(w=w, t=1.7, p=p)
            s = lmo_lp_exact(self.rng.standard_normal(6), c)
            self.assertAlmostEqual(c.norm(s), 1.7, places=10)

    def test_lp_zero_gradient(self):
        """Gradiente nullo: vertice nullo."""
        c = NormConstraint(w=np.ones(3), t=1.0, p=3)
        np.testing.assert_array_equal(lmo_lp_exact(np.zeros(3), c), np.zeros(3))

    def test_lp_rejects_wrong_order(self):
        """lmo_lp_exact richiede 1 < p < ∞."""
        with self.assertRaises(InvalidInputError):
            lmo_lp_exact(np.ones(2), self.unit)

    def test_linf_corner(self):
        """Per p = ∞ il vertice è l'angolo −(t/w) ∘ sign(g)."""
        c = NormConstraint(w=np.array([1.0, 2.0]), t=2.0, p=np.inf)
        np.testing.assert_allclose(lmo_linf_exact(np.array([0.3, -5.0]), c), [-2.0, 1.0])

    def test_dispatch(self):
        """lmo_exact sceglie l'oracolo in base a p."""
        g = np.array([0.2, -0.7, 0.1])
        for p, fn in ((1, lmo_l1_exact), (2, lmo_lp_exact), (np.inf, lmo_linf_exact)):
            c = NormConstraint(w=np.ones(3), t=1.0, p=p)
            np.testing.assert_array_equal(lmo_exact(g, c), fn(g, c))

    def test_l1_and_linf_match_bruteforce(self):
        """ℓ1 e ℓ∞ esatti coincidono con l'enumerazione dei vertici su 1000 istanze."""
        for _ in range(1000):
            n = int(self.rng.integers(2, 11))
            g = self.rng.standard_normal(n)
            w = self.rng.uniform(0.5, 1.5, size=n)
            t = float(self.rng.uniform(0.5, 2.0))
            for p in (1.0, np.inf):
                c = NormConstraint(w=w, t=t, p=p)
                gap = g @ lmo_exact(g, c) - g @ lmo_bruteforce(g, c)
                self.assertLessEqual(abs(gap), 1e-9)

    def test_l1_scale_covariance(self):
        """Il vertice ℓ1 dipende da g solo tramite segni e argmax."""
        for _ in range(50):
            n = int(self.rng.integers(2, 11))
            g = self.rng.standard_normal(n)
            c = NormConstraint(w=self.rng.uniform(0.5, 1.5, size=n), t=float(self.rng.uniform(0.5, 2.0)))
            for factor in (1e-3, 0.5, 7.0, 1e4):
                np.testing.assert_array_equal(lmo_l1_exact(factor * g, c), lmo_l1_exact(g, c))

    def test_lp_matches_sampling_oracle(self):
        """Per 1 < p < ∞ l'LMO esatto non è peggiore dell'oracolo a campionamento."""
        for p in (1.5, 2.0, 3.0):
            for seed in range(3):
                g = self.rng.standard_normal(3)
                c = NormConstraint(w=self.rng.uniform(0.5, 1.5, size=3), t=1.0, p=p)
                exact = float(g @ lmo_lp_exact(g, c))
                sampled = float(g @ lmo_bruteforce(g, c, num_samples=20_000, seed=seed))
                self.assertLessEqual(exact, sampled + 1e-9)
                self.assertLessEqual(sampled - exact, 1e-3 * abs(exact))


class TestSoftmaxLMO(unittest.TestCase):
    """Test per il vertice rilassato con softmax."""

    def setUp(self):
        """Configura il test."""
        self.c = NormConstraint(w=np.ones(3), t=2.0, p=1)
        self.g = np.array([1.0, -2.0, 0.5])

    def test_weights_sum_to_one(self):
        """softmax_weights è una distribuzione."""
        pi = softmax_weights(np.array([1.0, 2.0, 1000.0]), 0.01)
        self.assertAlmostEqual(pi.sum(), 1.0, places=12)
        self.assertTrue(np.all(np.isfinite(pi)))

    def test_invalid_temperature(self):
        """τ ≤ 0 viene rifiutata."""
        with self.assertRaises(InvalidInputError):
            softmax_weights(np.ones(2), 0.0)

    def test_low_temperature_recovers_vertex(self):
        """Per τ → 0 il vertice rilassato tende a quello esatto."""
        np.testing.assert_allclose(lmo_l1_softmax(self.g, self.c, 0.01), lmo_l1_exact(self.g, self.c),
                                   atol=1e-12)

    def test_high_temperature_spreads_mass(self):
        """Per τ grande la massa è quasi uniforme sulle coordinate."""
        s = lmo_l1_softmax(self.g, self.c, 1e8)
        np.testing.assert_allclose(np.abs(s), np.full(3, 2.0 / 3.0), rtol=1e-6)

    def test_relaxed_vertex_is_feasible(self):
        """Il vertice rilassato è una combinazione convessa di vertici."""
        for tau in (1.0, 0.25, 1e-3):
            s = lmo_l1_softmax(self.g, self.c, tau)
            self.assertTrue(self.c.is_feasible(s))

    def test_examples(self):
        """Casi noti: τ grande, τ piccolo e gradiente nullo."""
        unit = NormConstraint(w=np.ones(2), t=1.0)
        np.testing.assert_allclose(lmo_l1_softmax(np.array([1.0, 1.0]), unit, 1e6), [-0.5, -0.5])
        np.testing.assert_allclose(lmo_l1_softmax(np.array([2.0, -3.0]), unit, 1e-4), [0.0, 1.0], atol=1e-6)
        for tau in (1e-4, 1.0, 1e6):
            np.testing.assert_array_equal(lmo_l1_softmax(np.zeros(2), unit, tau), np.zeros(2))

    def test_relaxation_consistency(self):
        """Dimezzando τ da 1 a 2^(−20) la distanza dal vertice esatto non cresce."""
        rng = np.random.default_rng(7)
        taus = [2.0 ** -k for k in range(21)]
        for _ in range(100):
            n = int(rng.integers(2, 8))
            r = rng.uniform(0.2, 3.0, size=n)
            top = int(np.argmax(r))
            # margine ≥ 0.1 tra il massimo e gli altri valori
            others = np.delete(np.arange(n), top)
            r[others] = np.minimum(r[others], r[top] - 0.1)
            g = r * rng.choice([-1.0, 1.0], size=n)
            c = NormConstraint(w=np.ones(n), t=float(rng.uniform(0.5, 2.0)))
            exact = lmo_l1_exact(g, c)
            dist = [np.linalg.norm(lmo_l1_softmax(g, c, tau) - exact) for tau in taus]
            self.assertTrue(all(b <= a * (1.0 + 1e-12) + 1e-15 for a, b in zip(dist, dist[1:])))
            self.assertLessEqual(dist[-1], 1e-9)

    def test_softmax_gap_is_monotone(self):
        """⟨g, ŝ(τ) − s_esatto⟩ ≥ 0 e non cresce al diminuire di τ."""
        rng = np.random.default_rng(8)
        taus = [2.0 ** -k for k in range(21)]
        for _ in range(100):
            n = int(rng.integers(2, 11))
            g = rng.standard_normal(n)
            c = NormConstraint(w=rng.uniform(0.5, 1.5, size=n), t=float(rng.uniform(0.5, 2.0)))
            base = float(g @ lmo_l1_exact(g, c))
            gaps = [float(g @ lmo_l1_softmax(g, c, tau)) - base for tau in taus]
            slack = 1e-12 * max(1.0, abs(base))
            self.assertTrue(all(gap >= -slack for gap in gaps))
            self.assertTrue(all(b <= a + slack for a, b in zip(gaps, gaps[1:])))

    def test_relaxed_dispatch(self):
        """lmo_relaxed usa la softmax solo per p = 1."""
        np.testing.assert_array_equal(lmo_relaxed(self.g, self.c, 0.5), lmo_l1_softmax(self.g, self.c, 0.5))
        c2 = NormConstraint(w=np.ones(3), t=2.0, p=2)
        np.testing.assert_array_equal(lmo_relaxed(self.g, c2, 0.5), lmo_lp_exact(self.g, c2))


if __name__ == '__main__':
    unittest.main()
