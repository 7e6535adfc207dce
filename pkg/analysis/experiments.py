"""
Modulo per l'esecuzione dei trial di benchmark: tempi, accuratezza,
sweep della temperatura e demo di fitting end-to-end.

Ogni funzione di trial è pura dato (n, seed) e restituisce un dizionario
di metriche, così i trial possono girare in un pool di thread.
"""
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from tqdm import tqdm

from config import ORACLE_SOLVER_TOL
from analysis.metrics import batch_violation, cosine_similarity, row_cosine_similarity, solution_distance
from problems.problem_generator import ProblemInstance, gen_power_constrained, gen_qp, make_rng
from reference.projected_gradient import projected_gradient_solve
from solver.fw_solver import SolverConfig, TemperatureSchedule, solve
from solver.objective import QuadraticObjective
from solver.unroll_grad import backward, finite_diff_jacobian, jacobian
from utils.exceptions import FitDivergedError, InvalidInputError

DENSE_JACOBIAN_MAX_N = 50
ORACLE_STEP_TOL = 1e-12
FIT_SUCCESS_RATIO = 1e-6
FIT_DIVERGENCE_PATIENCE = 50
FIT_INIT_NOISE = 0.02


def run_trials(trial_fn: Callable[[int], Dict[str, Any]],
               trials: int,
               workers: int = 1,
               desc: str = "trial",
               show_progress: bool = True) -> List[Dict[str, Any]]:
    """
    Esegue `trial_fn(trial)` per trial = 0 … trials−1, eventualmente in parallelo.

    Args:
        trial_fn: Funzione del singolo trial (restituisce un dizionario con la chiave 'trial')
        trials: Numero di trial
        workers: Thread del pool
        desc: Etichetta della barra di avanzamento
        show_progress: Mostra la barra di avanzamento

    Returns:
        Risultati ordinati per indice di trial
    """
    indices = range(int(trials))
    if workers <= 1:
        results = [trial_fn(i) for i in tqdm(indices, desc=desc, disable=not show_progress)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(pool.map(trial_fn, indices), total=len(indices), desc=desc,
                                disable=not show_progress))
    return sorted(results, key=lambda row: row["trial"])


def seed_direction(n: int, seed: int) -> np.ndarray:
    """Seme casuale u per le VJP, da uno stream indipendente da quello dell'istanza."""
    return make_rng(seed).spawn(1)[0].standard_normal(n)


def reference_solution(instance: ProblemInstance) -> np.ndarray:
    """Soluzione di riferimento con gradiente proiettato accelerato."""
    return projected_gradient_solve(instance.objective, instance.constraint, accelerate=True)


def oracle_solver(instance: ProblemInstance, x_ref: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """
    Mappa q ↦ x*(q) per le differenze finite.

    Gradiente proiettato con partenza a caldo in x_ref, tolleranza sull'obiettivo
    ORACLE_SOLVER_TOL e sullo spostamento ORACLE_STEP_TOL.
    """
    def solve_fn(q: np.ndarray) -> np.ndarray:
        obj_q = instance.objective.with_q(q)
        return projected_gradient_solve(obj_q, instance.constraint, tol=ORACLE_SOLVER_TOL,
                                        x0=x_ref, step_tol=ORACLE_STEP_TOL, accelerate=True)
    return solve_fn


def active_columns(instance: ProblemInstance, x_ref: np.ndarray, rtol: float = 1e-6) -> np.ndarray:
    """
    Colonne dello Jacobiano potenzialmente non nulle per p = 1.

    Sono il supporto di x_ref più le coordinate quasi attive, con
    |g_i| / w_i ≥ (1 − rtol) λ e λ = max sul supporto. Le altre colonne sono
    localmente nulle: una piccola perturbazione di q_j non cambia la soluzione.
    """
    n = instance.n
    c = instance.constraint
    support = np.flatnonzero(np.abs(x_ref) > 1e-9)
    if c.p != 1.0 or support.size == 0 or support.size == n:
        return np.arange(n)
    ratio = np.abs(instance.objective.grad(x_ref)) / c.w
    lam = float(np.max(ratio[support]))
    near = np.flatnonzero(ratio >= (1.0 - rtol) * lam)
    return np.union1d(support, near)


def oracle_jacobian(instance: ProblemInstance, x_ref: np.ndarray, dense: bool,
                    show_progress: bool = False) -> np.ndarray:
    """Jacobiano alle differenze finite (tutte le colonne se dense, altrimenti quelle attive)."""
    columns = None if dense else active_columns(instance, x_ref)
    return finite_diff_jacobian(oracle_solver(instance, x_ref), instance.objective.q,
                                columns=columns, show_progress=show_progress)


def time_trial(n: int, seed: int, trial: int, cfg: SolverConfig, include_reference: bool = True) -> Dict[str, Any]:
    """
    Misura il tempo della sola risoluzione in avanti.

    Args:
        n: Dimensione
        seed: Seme dell'istanza
        trial: Indice del trial
        cfg: Configurazione del solutore
        include_reference: Misura anche il solutore di riferimento

    Returns:
        Dizionario con scale, trial, seconds, iterations, reference_seconds
    """
    instance = gen_qp(n, seed)
    report = solve(instance.objective, instance.constraint, cfg)

    reference_seconds = float("nan")
    if include_reference:
        start = time.perf_counter()
        reference_solution(instance)
        reference_seconds = time.perf_counter() - start

    return {
        "scale": n,
        "trial": trial,
        "seconds": report.wall_time,
        "iterations": report.iterations,
        "termination": report.termination,
        "reference_seconds": reference_seconds,
    }


def accuracy_trial(n: int, seed: int, trial: int, cfg: SolverConfig,
                   dense_max_n: int = DENSE_JACOBIAN_MAX_N) -> Dict[str, Any]:
    """
    Confronta soluzione e gradienti del layer con gli oracoli.

    Per n ≤ dense_max_n la similarità è la media riga per riga tra Jacobiano
    srotolato e Jacobiano alle differenze finite completo (righe non nulle
    dell'oracolo); altrimenti è calcolata sulla VJP con un seme casuale u.

    Args:
        n: Dimensione
        seed: Seme dell'istanza
        trial: Indice del trial
        cfg: Configurazione del solutore (il nastro viene sempre registrato)
        dense_max_n: Soglia per la variante a Jacobiano denso

    Returns:
        Dizionario con scale, trial, cos_sim, sol_dist, mean_viol, max_viol
    """
    instance = gen_qp(n, seed)
    obj, c = instance.objective, instance.constraint

    x_ref = reference_solution(instance)
    report = solve(obj, c, _with_tape(cfg))

    dense = n <= dense_max_n
    J_fd = oracle_jacobian(instance, x_ref, dense=dense)
    if dense:
        J_dfw = jacobian(report, obj)
        rows = np.flatnonzero(np.linalg.norm(J_fd, axis=1) > 1e-8)
        if rows.size:
            cos_sim = float(np.mean(row_cosine_similarity(J_dfw[rows], J_fd[rows])))
        else:
            cos_sim = cosine_similarity(J_dfw.ravel(), J_fd.ravel())
    else:
        u = seed_direction(n, seed)
        cos_sim = cosine_similarity(backward(report, obj, u), J_fd.T @ u)

    viol = batch_violation(report.solution, c)
    return {
        "scale": n,
        "trial": trial,
        "cos_sim": cos_sim,
        "sol_dist": solution_distance(report.solution, x_ref),
        "mean_viol": viol["mean_violation"],
        "max_viol": viol["max_violation"],
        "iterations": report.iterations,
    }


def temperature_sweep(n: int, seed: int, taus: Sequence[float], period: int,
                      cfg: SolverConfig) -> List[Dict[str, Any]]:
    """
    Confronta temperature costanti e annealing sulla stessa istanza.

    Args:
        n: Dimensione
        seed: Seme dell'istanza
        taus: Temperature costanti da provare
        period: Periodo T dell'annealing
        cfg: Configurazione di base (lo schedule viene sostituito)

    Returns:
        Righe (setting, k, distance, final_cos_sim), una per iterato
    """
    instance = gen_qp(n, seed)
    obj, c = instance.objective, instance.constraint
    x_ref = reference_solution(instance)
    u = seed_direction(n, seed)
    oracle_grad = oracle_jacobian(instance, x_ref, dense=n <= DENSE_JACOBIAN_MAX_N).T @ u

    schedules = [TemperatureSchedule.constant(tau) for tau in taus]
    schedules.append(TemperatureSchedule.annealing(period))

    rows = []
    for sched in schedules:
        run_cfg = replace(cfg, schedule=sched, record_tape=True)
        report = solve(obj, c, run_cfg)
        final_cos = cosine_similarity(backward(report, obj, u), oracle_grad)
        distances = np.linalg.norm(report.trajectory.iterates() - x_ref, axis=1)
        logger.info(f"Sweep {sched.label}: {report.iterations} iterazioni, distanza finale "
                    f"{distances[-1]:.4e}, similarità {final_cos:.4f}")
        rows += [
            {"setting": sched.label, "k": k, "distance": float(dist), "final_cos_sim": final_cos}
            for k, dist in enumerate(distances)
        ]
    return rows


@dataclass
class FitResult:
    """Esito della demo di fitting."""

    q: np.ndarray
    losses: List[float] = field(default_factory=list)
    success: bool = False

    @property
    def ratio(self) -> float:
        if not self.losses or self.losses[0] == 0.0:
            return 0.0
        return self.losses[-1] / self.losses[0]


def fit_parameters(obj: QuadraticObjective,
                   c,
                   q_true,
                   q0,
                   steps: int,
                   lr: float,
                   cfg: Optional[SolverConfig] = None,
                   line_search: bool = True,
                   show_progress: bool = False) -> FitResult:
    """
    Discesa del gradiente su ½‖x*(q) − x*(q_true)‖² con le VJP del layer.

    Con `line_search` il passo viene dimezzato finché la loss non cresce e
    aumentato del 20% dopo ogni passo accettato. Senza ricerca lineare la
    discesa è semplice e 50 aumenti consecutivi della loss sollevano
    FitDivergedError.

    Args:
        obj: Obiettivo quadratico (P fissata)
        c: Vincolo
        q_true: Parametro che genera il bersaglio
        q0: Parametro iniziale
        steps: Numero massimo di passi
        lr: Passo iniziale (≥ 0)
        cfg: Configurazione del solutore
        line_search: Abilita la ricerca lineare con backtracking
        show_progress: Mostra una barra di avanzamento

    Returns:
        FitResult con parametro finale e storia della loss
    """
    if not (np.isfinite(lr) and lr >= 0):
        raise InvalidInputError(f"lr deve essere non negativo, ricevuto {lr}")
    cfg = _with_tape(cfg or SolverConfig(tol=1e-6))

    def forward(q: np.ndarray):
        obj_q = obj.with_q(q)
        report = solve(obj_q, c, cfg)
        residual = report.solution - target
        return obj_q, report, 0.5 * float(residual @ residual), residual

    target = solve(obj.with_q(q_true), c, cfg).solution
    q = np.asarray(q0, dtype=np.float64).copy()
    obj_q, report, loss, residual = forward(q)
    result = FitResult(q=q, losses=[loss])
    threshold = FIT_SUCCESS_RATIO * loss
    increases = 0

    for step in tqdm(range(int(steps)), desc="fit", disable=not show_progress):
        if loss <= threshold:
            break
        grad = backward(report, obj_q, residual)

        if line_search:
            accepted = False
            for _ in range(40):
                candidate = forward(q - lr * grad)
                if candidate[2] <= loss:
                    accepted = True
                    break
                lr *= 0.5
            if not accepted:
                logger.info(f"Fit: nessun passo di discesa trovato al passo {step}, arresto")
                break
            q = q - lr * grad
            obj_q, report, new_loss, residual = candidate
            lr *= 1.2
        else:
            q = q - lr * grad
            obj_q, report, new_loss, residual = forward(q)
            increases = increases + 1 if new_loss > loss else 0
            if increases >= FIT_DIVERGENCE_PATIENCE:
                raise FitDivergedError(
                    f"la loss è cresciuta per {FIT_DIVERGENCE_PATIENCE} passi consecutivi (loss={new_loss:.3e})"
                )

        loss = new_loss
        result.losses.append(loss)
        logger.debug(f"Fit passo {step + 1}: loss={loss:.6e}")

    result.q = q
    result.success = loss <= threshold
    logger.info(f"Fit terminato dopo {len(result.losses) - 1} passi: loss {result.losses[0]:.3e} → "
                f"{loss:.3e} (successo={result.success})")
    return result


def fit_demo(n: int, seed: int, steps: int, lr: float, family: str = "qp",
             p_max: float = 20.0, cfg: Optional[SolverConfig] = None,
             line_search: bool = True, show_progress: bool = False) -> FitResult:
    """
    Demo end-to-end: recupera q_true partendo da q₀ = q_true + FIT_INIT_NOISE · rumore.

    Per p = 1 il rumore tocca solo il supporto del bersaglio: fuori dal supporto
    x*(q) è localmente costante in q e la perturbazione non sarebbe recuperabile.

    Args:
        n: Dimensione (numero di giunti per la famiglia power)
        seed: Seme
        steps: Passi di discesa
        lr: Passo iniziale
        family: "qp" (gen_qp) oppure "power" (gen_power_constrained)
        p_max: Potenza massima per la famiglia power
        cfg: Configurazione del solutore
        line_search: Abilita la ricerca lineare
        show_progress: Mostra una barra di avanzamento

    Returns:
        FitResult
    """
    if family == "qp":
        instance = gen_qp(n, seed)
    elif family == "power":
        instance = gen_power_constrained(n, p_max, seed)
    else:
        raise InvalidInputError(f"famiglia sconosciuta: {family}")

    q_true = instance.objective.q
    noise = FIT_INIT_NOISE * seed_direction(instance.n, seed)
    if instance.constraint.p == 1.0:
        support = np.abs(reference_solution(instance)) > 1e-9
        noise = np.where(support, noise, 0.0)
    q0 = q_true + noise
    return fit_parameters(instance.objective, instance.constraint, q_true, q0, steps, lr,
                          cfg=cfg, line_search=line_search, show_progress=show_progress)


def _with_tape(cfg: SolverConfig) -> SolverConfig:
    return cfg if cfg.record_tape else replace(cfg, record_tape=True)
