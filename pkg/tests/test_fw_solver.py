"""
Test unitari per il passo in avanti Frank-Wolfe.
"""
import os
import sys
import unittest

import numpy as np

# Aggiungi il percorso principale al path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from problems.problem_generator import gen_qp
from reference.projected_gradient import projected_gradient_solve
from solver.fw_solver import (
    BRANCH_AGNOSTIC, BRANCH_CLIP, BRANCH_DEGENERATE, BRANCH_INTERIOR, BRANCH_LOWER,
    SolverConfig, TemperatureSchedule, fw_gap, solve, step_size, temperature
)
from solver.lmo import NormConstraint
from solver.objective import QuadraticObjective
from utils.exceptions import InvalidInputError


def scalar_problem(q: float):
    """f(x) = ½x² + qx con |x| ≤ 1."""
    return QuadraticObjective(np.array([[1.0]]), np.array([q])), NormConstraint(w=np.ones(1), t=1.0, p=1)


class TestTemperature(unittest.TestCase):
    """Test per lo schedule della temperatura."""

    def test_annealing(self):
        """τ_k = 2^(−⌊k/30⌋)."""
        sched = TemperatureSchedule.annealing(30)
        self.assertEqual(temperature(0, sched), 1.0)
        self.assertEqual(temperature(59, sched), 0.5)
        self.assertEqual(temperature(60, sched), 0.25)

    def test_constant(self):
        """Schedule costante."""
        sched = TemperatureSchedule.constant(0.25)
        for k in (0, 17, 10_000):
            self.assertEqual(temperature(k, sched), 0.25)

    def test_floor(self):
        """L'annealing non scende sotto il minimo configurato."""
        sched = TemperatureSchedule.annealing(1)
        self.assertEqual(temperature(5000, sched), 2.0 ** -30)

    def test_invalid(self):
        """Parametri fuori dominio."""
        with self.assertRaises(InvalidInputError):
            TemperatureSchedule.constant(0.0)
        with self.assertRaises(InvalidInputError):
            TemperatureSchedule.annealing(0)
        with self.assertRaises(InvalidInputError):
            temperature(-1, TemperatureSchedule.annealing())

    def test_labels(self):
        """Etichette usate nei CSV dello sweep."""
        self.assertEqual(TemperatureSchedule.constant(0.125).label, "tau=0.125")
        self.assertEqual(TemperatureSchedule.annealing(30).label, "anneal-T30")


class TestStepSize(unittest.TestCase):
    """Test per il passo short-path."""

    def test_clip_boundary(self):
        """Rapporto pari a 1: ramo clip."""
        step = step_size([1.0, 0.0], [1.0, 0.0], [0.0, 0.0], 1.0)
        self.assertEqual(step.gamma, 1.0)
        self.assertEqual(step.branch, BRANCH_CLIP)

    def test_interior(self):
        """γ = min{2/4, 1} = 0.5."""
        step = step_size([1.0, 0.0], [1.0, 0.0], [-1.0, 0.0], 1.0)
        self.assertAlmostEqual(step.gamma, 0.5)
        self.assertEqual(step.branch, BRANCH_INTERIOR)

    def test_zero_ratio_is_interior(self):
        """⟨g, d⟩ = 0 con d ≠ 0: γ = 0 sul ramo interno."""
        step = step_size([0.0, 0.0], [0.5, 0.0], [0.0, 0.0], 1.0)
        self.assertEqual(step.gamma, 0.0)
        self.assertEqual(step.branch, BRANCH_INTERIOR)

    def test_negative_ratio(self):
        """⟨g, d⟩ < 0: passo nullo sul ramo inferiore."""
        step = step_size([-1.0, 0.0], [0.5, 0.0], [0.0, 0.0], 1.0)
        self.assertEqual(step.gamma, 0.0)
        self.assertEqual(step.branch, BRANCH_LOWER)

    def test_degenerate(self):
        """s = x: direzione nulla."""
        step = step_size([1.0, 2.0], [0.3, 0.3], [0.3, 0.3], 1.0)
        self.assertEqual(step.gamma, 0.0)
        self.assertEqual(step.branch, BRANCH_DEGENERATE)

    def test_invalid_inputs(self):
        """L non positiva e valori non finiti."""
        with self.assertRaises(InvalidInputError):
            step_size([1.0], [0.0], [1.0], 0.0)
        with self.assertRaises(InvalidInputError):
            step_size([np.nan], [0.0], [1.0], 1.0)


class TestFWGap(unittest.TestCase):
    """Test per il gap di Frank-Wolfe."""

    def test_examples(self):
        """x = s dà 0, il caso noto dà 2."""
        self.assertEqual(fw_gap([1.0, 2.0], [0.5, 0.5], [0.5, 0.5]), 0.0)
        self.assertEqual(fw_gap([1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]), 2.0)

    def test_gap_at_optimum(self):
        """All'ottimo vincolato del caso 1-D il gap è piccolo."""
        obj, c = scalar_problem(-2.0)
        report = solve(obj, c, SolverConfig(tol=1e-8))
        self.assertLessEqual(report.gap_trace[-1], 1e-3)


class TestSolve(unittest.TestCase):
    """Test per la funzione solve."""

    def setUp(self):
        """Configura il test."""
        self.instance = gen_qp(10, seed=11)

    def test_interior_optimum(self):
        """q = −0.5: ottimo interno x* = 0.5."""
        obj, c = scalar_problem(-0.5)
        report = solve(obj, c)
        self.assertAlmostEqual(report.solution[0], 0.5, delta=1e-3)

    def test_active_constraint(self):
        """q = −2: ottimo sul bordo x* = 1."""
        obj, c = scalar_problem(-2.0)
        report = solve(obj, c)
        self.assertAlmostEqual(report.solution[0], 1.0, delta=1e-3)
        self.assertEqual(report.termination, "zero_step")

    def test_matches_reference(self):
        """Su una QP casuale n = 10 l'obiettivo coincide con il riferimento."""
        obj, c = self.instance.objective, self.instance.constraint
        report = solve(obj, c, SolverConfig(tol=1e-12, max_iters=20_000))
        f_ref = obj.value(projected_gradient_solve(obj, c, accelerate=True))
        self.assertLessEqual(abs(report.objective - f_ref), 1e-4 * abs(f_ref))
        self.assertLessEqual(f_ref, report.objective + 1e-6 * abs(f_ref))

    def test_feasibility_and_descent(self):
        """Ogni iterato è ammissibile e l'obiettivo non cresce."""
        for p in (1.0, 2.0, np.inf):
            instance = gen_qp(12, seed=5, p=p)
            obj, c = instance.objective, instance.constraint
            report = solve(obj, c, SolverConfig(record_tape=True, max_iters=500))
            for x in report.trajectory.iterates():
                self.assertLessEqual(c.norm(x), c.t * (1 + 1e-12))
            self.assertTrue(np.all(np.diff(report.objective_trace) <= 1e-12))

    def test_update_is_recorded_exactly(self):
        """x̂_{k+1} = (1 − γ_k) x̂_k + γ_k ŝ_k per record consecutivi."""
        obj, c = self.instance.objective, self.instance.constraint
        report = solve(obj, c, SolverConfig(record_tape=True, max_iters=200))
        records = report.trajectory.records
        for rec, nxt in zip(records, records[1:]):
            np.testing.assert_array_equal(nxt.x, (1.0 - rec.gamma) * rec.x + rec.gamma * rec.s)
        self.assertEqual(report.trajectory.iterates().shape, (report.iterations + 1, 10))

    def test_convergence_law_exact_lmo(self):
        """Con l'LMO esatto: f(x_k) − f(x*) ≤ 2LM²/(k + 2)."""
        for seed in range(20):
            n = 2 + seed % 9
            instance = gen_qp(n, seed=100 + seed)
            obj, c = instance.objective, instance.constraint
            f_ref = obj.value(projected_gradient_solve(obj, c, accelerate=True))
            M = 2.0 * np.sqrt(n) * float(np.max(c.scale))
            report = solve(obj, c, SolverConfig(exact_lmo=True, tol=1e-10, max_iters=2000))
            for k, f in enumerate(report.objective_trace):
                self.assertLessEqual(f - f_ref, 2.0 * obj.lipschitz * M ** 2 / (k + 2))

    def test_annealing_gap_beats_fixed_temperature(self):
        """Con l'annealing il gap finale non supera quello a τ fisso."""
        obj, c = self.instance.objective, self.instance.constraint
        f_ref = obj.value(projected_gradient_solve(obj, c, accelerate=True))
        gaps = {}
        for sched in (TemperatureSchedule.constant(1.0), TemperatureSchedule.constant(0.5),
                      TemperatureSchedule.annealing(30)):
            report = solve(obj, c, SolverConfig(schedule=sched, tol=1e-12, max_iters=3000))
            gaps[sched.label] = report.objective - f_ref
        self.assertLessEqual(gaps["anneal-T30"], gaps["tau=1"])
        self.assertLessEqual(gaps["anneal-T30"], gaps["tau=0.5"])

    def test_annealing_waits_for_sharp_vertex(self):
        """Con l'annealing l'arresto per tolleranza avviene a vertice quasi esatto."""
        obj, c = self.instance.objective, self.instance.constraint
        cfg = SolverConfig(record_tape=True)
        report = solve(obj, c, cfg)
        tape = report.trajectory
        last = tape.records[tape.grad_start - 1]
        if report.termination != "max_iters" and last.tau > 2.0 ** -30:
            relax_gap = float(last.r.max() - last.probs @ last.r)
            self.assertLessEqual(relax_gap, cfg.tol * abs(report.objective) + 1e-15)

    def test_refinement_follows_annealing(self):
        """Dopo l'annealing seguono al più refine_iters passi a vertice esatto."""
        obj, c = self.instance.objective, self.instance.constraint
        report = solve(obj, c, SolverConfig(record_tape=True, refine_iters=40))
        tape = report.trajectory
        self.assertIn(report.termination, ("tolerance", "zero_step"))
        self.assertGreater(tape.grad_start, 0)
        self.assertGreater(report.refine_iterations, 0)
        self.assertLessEqual(report.refine_iterations, 40)
        self.assertEqual(tape.iterations - tape.grad_start, report.refine_iterations)
        self.assertTrue(all(rec.relaxed for rec in tape.records[:tape.grad_start]))
        self.assertTrue(all(not rec.relaxed and rec.tau is None for rec in tape.records[tape.grad_start:]))
        self.assertTrue(all(np.sum(rec.s != 0) <= 1 for rec in tape.records[tape.grad_start:]))

    def test_refinement_improves_solution(self):
        """La rifinitura avvicina la soluzione al riferimento."""
        obj, c = self.instance.objective, self.instance.constraint
        x_ref = projected_gradient_solve(obj, c, accelerate=True)
        plain = solve(obj, c, SolverConfig(refine_iters=0))
        refined = solve(obj, c, SolverConfig())
        self.assertEqual(plain.refine_iterations, 0)
        self.assertLessEqual(refined.objective, plain.objective)
        self.assertLessEqual(np.linalg.norm(refined.solution - x_ref), 1e-3)

    def test_no_refinement_without_annealing(self):
        """Schedule costante, LMO esatto e regola agnostica derivano tutto il nastro."""
        obj, c = self.instance.objective, self.instance.constraint
        for cfg in (SolverConfig(schedule=TemperatureSchedule.constant(0.5), record_tape=True),
                    SolverConfig(exact_lmo=True, record_tape=True),
                    SolverConfig(step_rule="agnostic", record_tape=True, max_iters=50)):
            report = solve(obj, c, cfg)
            self.assertEqual(report.refine_iterations, 0)
            self.assertEqual(report.trajectory.grad_start, 0)

    def test_deterministic_trajectory(self):
        """Due risoluzioni identiche producono nastri identici bit a bit."""
        obj, c = self.instance.objective, self.instance.constraint
        cfg = SolverConfig(record_tape=True)
        first, second = solve(obj, c, cfg), solve(obj, c, cfg)
        self.assertEqual(first.iterations, second.iterations)
        self.assertEqual(first.objective_trace, second.objective_trace)
        self.assertEqual(first.trajectory.grad_start, second.trajectory.grad_start)
        for a, b in zip(first.trajectory.records, second.trajectory.records):
            np.testing.assert_array_equal(a.x, b.x)
            np.testing.assert_array_equal(a.s, b.s)
            self.assertEqual((a.gamma, a.branch, a.tau), (b.gamma, b.branch, b.tau))
            if a.relaxed:
                np.testing.assert_array_equal(a.probs, b.probs)
        np.testing.assert_array_equal(first.solution, second.solution)

    def test_max_iters(self):
        """Con max_iters = 1 si esegue una sola iterazione."""
        obj, c = self.instance.objective, self.instance.constraint
        report = solve(obj, c, SolverConfig(max_iters=1))
        self.assertEqual(report.iterations, 1)
        self.assertEqual(report.termination, "max_iters")
        self.assertEqual(len(report.objective_trace), 2)

    def test_without_tape(self):
        """Senza record_tape non viene salvata la traiettoria."""
        obj, c = scalar_problem(-0.5)
        self.assertIsNone(solve(obj, c).trajectory)

    def test_exact_lmo_records_no_temperature(self):
        """Con exact_lmo il nastro non contiene temperature."""
        obj, c = self.instance.objective, self.instance.constraint
        report = solve(obj, c, SolverConfig(exact_lmo=True, record_tape=True, max_iters=20))
        self.assertFalse(report.trajectory.relaxed)
        self.assertTrue(all(rec.tau is None for rec in report.trajectory.records))

    def test_agnostic_step(self):
        """La regola agnostica usa γ_k = 2/(k + 3)."""
        obj, c = self.instance.objective, self.instance.constraint
        report = solve(obj, c, SolverConfig(step_rule="agnostic", record_tape=True, max_iters=3, tol=1e-12))
        gammas = [rec.gamma for rec in report.trajectory.records]
        np.testing.assert_allclose(gammas, [2 / 3, 2 / 4, 2 / 5])
        self.assertTrue(all(rec.branch == BRANCH_AGNOSTIC for rec in report.trajectory.records))

    def test_dimension_mismatch(self):
        """Obiettivo e vincolo con dimensioni diverse."""
        obj, _ = scalar_problem(-0.5)
        with self.assertRaises(InvalidInputError):
            solve(obj, NormConstraint(w=np.ones(2), t=1.0))

    def test_invalid_config(self):
        """Configurazioni non valide."""
        with self.assertRaises(InvalidInputError):
            SolverConfig(tol=0.0)
        with self.assertRaises(InvalidInputError):
            SolverConfig(max_iters=0)
        with self.assertRaises(InvalidInputError):
            SolverConfig(step_rule="armijo")
        with self.assertRaises(InvalidInputError):
            SolverConfig(refine_iters=-1)


if __name__ == '__main__':
    unittest.main()
