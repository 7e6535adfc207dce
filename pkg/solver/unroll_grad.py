"""
Modulo per la differenziazione in modalità inversa attraverso il nastro di Frank-Wolfe.

Il passo all'indietro ripercorre le iterazioni registrate dall'ultima alla prima
e propaga gli aggiunti attraverso l'aggiornamento convesso, il passo short-path,
il vertice (softmax per p = 1, forma chiusa per 1 < p < ∞) e le valutazioni del
gradiente g_k = ∇_x f(x̂_k; θ). Tutti i fattori sign(·) hanno derivata nulla.
L'iterato da cui parte il tratto registrato (Trajectory.grad_start) è una
costante: dopo l'annealing solo la rifinitura a vertice esatto viene derivata.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np
from loguru import logger
from tqdm import tqdm

from solver.fw_solver import BRANCH_INTERIOR, IterationRecord, SolveReport, Trajectory
from solver.lmo import NormConstraint
from solver.objective import Objective
from utils.exceptions import InvalidInputError, TapeMissingError


@dataclass
class AdjointState:
    """Aggiunti correnti: x̄ per blocco di semi (m × n) e θ̄ accumulato (m × param_dim)."""

    x_bar: np.ndarray
    theta_bar: np.ndarray

    @classmethod
    def seeded(cls, u: np.ndarray, param_dim: int) -> "AdjointState":
        return cls(x_bar=u.copy(), theta_bar=np.zeros((u.shape[0], param_dim)))


def _resolve_tape(traj: Union[Trajectory, SolveReport]) -> Trajectory:
    if isinstance(traj, SolveReport):
        traj = traj.trajectory
    if traj is None or traj.x_final is None:
        raise TapeMissingError("nessun nastro registrato: risolvere con record_tape=True")
    return traj


def _vertex_vjp(rec: IterationRecord, s_bar: np.ndarray, c: NormConstraint) -> np.ndarray:
    """
    Propaga s̄ (m × n) al gradiente g attraverso il vertice.

    Restituisce ḡ (m × n); nullo per gli LMO esatti a valori costanti a tratti.
    """
    scale = c.scale
    sign = np.sign(rec.g_tw)

    if rec.relaxed:
        # ŝ = −(t/w) ∘ σ ∘ π, π = softmax(r/τ)
        pi = rec.probs
        pi_bar = -scale * sign * s_bar
        z_bar = pi * (pi_bar - (pi_bar @ pi)[:, None])
        r_bar = z_bar / rec.tau
        return scale * sign * r_bar

    if c.p == 1.0 or np.isinf(c.p):
        return np.zeros_like(s_bar)

    # 1 < p < ∞: s = −(t/w) ∘ y, y_i = σ_i r_i^e / S^{1/p}, S = Σ r^q, e = q/p
    r = rec.r
    r_max = r.max()
    if r_max == 0.0:
        return np.zeros_like(s_bar)
    p, q = c.p, c.q
    e = q / p
    r_n = r / r_max
    S = np.sum(r_n ** q)
    Z = S ** (1.0 / p)
    y = sign * r_n ** e / Z
    y_bar = -scale * s_bar
    with np.errstate(divide="ignore", invalid="ignore"):
        r_pow = np.where(r_n > 0, r_n ** (e - 1.0), 0.0)
    r_bar = e * (sign * y_bar * r_pow / Z - (y_bar @ y)[:, None] * r_n ** e / S)
    # y è omogenea di grado 0 in r: il fattore 1/r_max riporta la derivativa a r
    return scale * sign * r_bar / r_max


def _reverse_sweep(tape: Trajectory, obj: Objective, U: np.ndarray) -> np.ndarray:
    c = tape.constraint
    L = tape.lipschitz
    state = AdjointState.seeded(U, obj.param_dim)

    for rec in reversed(tape.records[tape.grad_start:]):
        x_bar_next = state.x_bar
        gamma = rec.gamma

        # x̂_{k+1} = (1 − γ) x̂_k + γ ŝ_k
        x_bar = (1.0 - gamma) * x_bar_next
        s_bar = gamma * x_bar_next
        g_bar = np.zeros_like(x_bar_next)

        if rec.branch == BRANCH_INTERIOR:
            # γ = ⟨g, d⟩ / (L‖d‖²), d = x̂ − ŝ
            d = rec.x - rec.s
            den = L * float(d @ d)
            gamma_bar = -(x_bar_next @ d)
            g_bar += np.outer(gamma_bar, d) / den
            d_bar = np.outer(gamma_bar, rec.g - 2.0 * gamma * L * d) / den
            x_bar += d_bar
            s_bar -= d_bar

        if np.any(s_bar):
            g_bar += _vertex_vjp(rec, s_bar, c)

        if np.any(g_bar):
            x_bar += obj.hvp(rec.x, g_bar)
            state.theta_bar += obj.param_vjp(rec.x, g_bar)

        state.x_bar = x_bar

    # il punto di partenza del tratto non dipende da θ
    return state.theta_bar


def backward(traj: Union[Trajectory, SolveReport], obj: Objective, u) -> np.ndarray:
    """
    VJP uᵀ · ∂x̂*/∂θ per replica inversa del nastro.

    Args:
        traj: Nastro (o SolveReport con nastro)
        obj: Obiettivo usato nella risoluzione
        u: Seme (n) o blocco di semi (m × n)

    Returns:
        θ̄ di lunghezza param_dim (o blocco m × param_dim)
    """
    tape = _resolve_tape(traj)
    U = np.asarray(u, dtype=np.float64)
    single = U.ndim == 1
    U = np.atleast_2d(U)
    if U.ndim != 2 or U.shape[1] != tape.constraint.n:
        raise InvalidInputError(f"il seme ha forma {np.shape(u)}, attesa lunghezza {tape.constraint.n}")
    if not np.all(np.isfinite(U)):
        raise InvalidInputError("il seme contiene valori non finiti")
    if obj.n != tape.constraint.n:
        raise InvalidInputError(f"dimensioni incoerenti: obiettivo n={obj.n}, nastro n={tape.constraint.n}")

    theta_bar = _reverse_sweep(tape, obj, U)
    return theta_bar[0] if single else theta_bar


def jacobian(traj: Union[Trajectory, SolveReport], obj: Objective, workers: int = 1,
             block_size: Optional[int] = None) -> np.ndarray:
    """
    Jacobiano completo ∂x̂*/∂θ (n × param_dim) con semi unitari.

    Args:
        traj: Nastro (o SolveReport con nastro)
        obj: Obiettivo
        workers: Thread per blocchi di righe indipendenti
        block_size: Righe per blocco (default: tutte in un solo passaggio)

    Returns:
        Matrice n × param_dim
    """
    tape = _resolve_tape(traj)
    n = tape.constraint.n
    block_size = block_size or (n if workers <= 1 else int(np.ceil(n / workers)))
    eye = np.eye(n)
    blocks = [eye[i:i + block_size] for i in range(0, n, block_size)]

    if workers <= 1 or len(blocks) == 1:
        rows = [backward(tape, obj, block) for block in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda block: backward(tape, obj, block), blocks))
    return np.vstack(rows)


def finite_diff_jacobian(solve_fn: Callable[[np.ndarray], np.ndarray],
                         theta,
                         h: Optional[float] = None,
                         columns: Optional[Iterable[int]] = None,
                         show_progress: bool = False) -> np.ndarray:
    """
    Jacobiano per differenze centrali (x*(θ + h e_j) − x*(θ − h e_j)) / 2h.

    Args:
        solve_fn: Mappa deterministica θ ↦ x*(θ)
        theta: Punto di valutazione
        h: Passo (default 1e-5 · (1 + ‖θ‖_∞))
        columns: Sottoinsieme di colonne da valutare (le altre restano nulle)
        show_progress: Mostra una barra di avanzamento

    Returns:
        Matrice n × len(θ)
    """
    theta = np.asarray(theta, dtype=np.float64)
    if h is None:
        h = 1e-5 * (1.0 + np.max(np.abs(theta)))
    x0 = np.asarray(solve_fn(theta), dtype=np.float64)
    J = np.zeros((x0.size, theta.size))

    cols = range(theta.size) if columns is None else sorted(set(int(j) for j in columns))
    for j in tqdm(cols, desc="differenze finite", disable=not show_progress):
        step = np.zeros_like(theta)
        step[j] = h
        J[:, j] = (np.asarray(solve_fn(theta + step)) - np.asarray(solve_fn(theta - step))) / (2.0 * h)

    logger.debug(f"Jacobiano alle differenze finite: {len(cols)} colonne, h={h:.3e}")
    return J
