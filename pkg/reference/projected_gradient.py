"""
Modulo per il solutore di riferimento: gradiente proiettato con proiezioni
esatte sulle palle pesate ℓ1, ℓ2 e ℓ∞.

Fornisce la soluzione di riferimento x_ref per le metriche di accuratezza e
l'oracolo usato dalle differenze finite.
"""
from typing import Callable, Optional

import numpy as np
from loguru import logger

from config import REFERENCE_MAX_ITERS, REFERENCE_STEP_TOL, REFERENCE_TOL
from solver.lmo import NormConstraint
from solver.objective import Objective
from utils.exceptions import InvalidInputError
from utils.validation import as_finite_vector

BISECTION_STEPS = 64


def _check_ball(x, w, t):
    x = as_finite_vector(x, "x")
    w = as_finite_vector(w, "w", x.size)
    if np.any(w <= 0):
        raise InvalidInputError("tutti i pesi w devono essere strettamente positivi")
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidInputError(f"il raggio t deve essere finito e non negativo, ricevuto {t}")
    return x, w, t


def _bisect_feasible(residual: Callable[[float], float], hi: float, steps: int = BISECTION_STEPS) -> float:
    """Bisezione su [0, hi] per una funzione decrescente; restituisce l'estremo ammissibile."""
    lo = 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def project_weighted_l1(x, w, t) -> np.ndarray:
    """
    Proiezione euclidea su {y : Σ w_i |y_i| ≤ t}.

    Soglia morbida y_i = sign(x_i) · max(|x_i| − λ w_i, 0) con λ trovato per
    bisezione sul residuo del vincolo nell'intervallo [0, max |x_i| / w_i].

    Args:
        x: Punto da proiettare
        w: Pesi strettamente positivi
        t: Raggio

    Returns:
        Proiezione di x (x stesso se già ammissibile)
    """
    x, w, t = _check_ball(x, w, t)
    if np.sum(w * np.abs(x)) <= t:
        return x.copy()

    abs_x = np.abs(x)

    def shrink(lam: float) -> np.ndarray:
        return np.maximum(abs_x - lam * w, 0.0)

    lam = _bisect_feasible(lambda lam: float(np.sum(w * shrink(lam))) - t, float(np.max(abs_x / w)))
    return np.sign(x) * shrink(lam)


def project_weighted_l2(x, w, t) -> np.ndarray:
    """
    Proiezione euclidea su {y : ‖w ∘ y‖₂ ≤ t}.

    y_i = x_i / (1 + μ w_i²) con μ ≥ 0 trovato per bisezione su Σ w_i² y_i² = t².

    Args:
        x: Punto da proiettare
        w: Pesi strettamente positivi
        t: Raggio

    Returns:
        Proiezione di x (x stesso se già ammissibile)
    """
    x, w, t = _check_ball(x, w, t)
    norm = float(np.linalg.norm(w * x))
    if norm <= t:
        return x.copy()
    if t == 0.0:
        return np.zeros_like(x)

    w2 = w * w

    def scaled(mu: float) -> np.ndarray:
        return x / (1.0 + mu * w2)

    # a μ = ‖w∘x‖ / (t · min w²) il punto è già nella palla
    hi = norm / (t * float(np.min(w2)))
    mu = _bisect_feasible(lambda mu: float(np.linalg.norm(w * scaled(mu))) - t, hi)
    return scaled(mu)


def project_weighted_linf(x, w, t) -> np.ndarray:
    """Proiezione su {y : max_i w_i |y_i| ≤ t}: clip coordinata per coordinata."""
    x, w, t = _check_ball(x, w, t)
    bound = t / w
    return np.clip(x, -bound, bound)


def project(x, c: NormConstraint) -> np.ndarray:
    """
    Proiezione sul vincolo c in base all'ordine p.

    Args:
        x: Punto da proiettare
        c: Vincolo con p ∈ {1, 2, ∞}

    Returns:
        Proiezione di x
    """
    if c.p == 1.0:
        return project_weighted_l1(x, c.w, c.t)
    if c.p == 2.0:
        return project_weighted_l2(x, c.w, c.t)
    if np.isinf(c.p):
        return project_weighted_linf(x, c.w, c.t)
    raise InvalidInputError(
        f"proiezione non disponibile per p={c.p}: usare Frank-Wolfe con LMO esatto "
        f"(SolverConfig(exact_lmo=True, tol=1e-10)) come riferimento"
    )


def projected_gradient_solve(obj: Objective,
                             c: NormConstraint,
                             tol: float = REFERENCE_TOL,
                             max_iters: int = REFERENCE_MAX_ITERS,
                             x0=None,
                             step_tol: Optional[float] = REFERENCE_STEP_TOL,
                             accelerate: bool = False) -> np.ndarray:
    """
    Gradiente proiettato y ← proj(y − ∇f(y)/L).

    Con `accelerate` usa il momento di FISTA e lo azzera quando l'obiettivo
    aumenta. L'arresto avviene quando la variazione relativa dell'obiettivo è
    ≤ tol e anche ‖Δx‖ ≤ step_tol · (1 + ‖x‖); con step_tol = None conta solo
    l'obiettivo, che da solo fissa x soltanto a circa √tol.

    Args:
        obj: Obiettivo
        c: Vincolo con p ∈ {1, 2, ∞}
        tol: Tolleranza sulla variazione relativa dell'obiettivo
        max_iters: Numero massimo di iterazioni
        x0: Punto iniziale (default 0, proiettato sul vincolo)
        step_tol: Tolleranza sullo spostamento dell'iterato (None la disattiva)
        accelerate: Abilita il momento di Nesterov (FISTA)

    Returns:
        Soluzione di riferimento x_ref
    """
    if obj.n != c.n:
        raise InvalidInputError(f"dimensioni incoerenti: obiettivo n={obj.n}, vincolo n={c.n}")
    if not (tol > 0):
        raise InvalidInputError(f"tol deve essere positiva, ricevuto {tol}")
    if step_tol is not None and not (step_tol > 0):
        raise InvalidInputError(f"step_tol deve essere positiva, ricevuto {step_tol}")

    step = 1.0 / obj.lipschitz
    x = project(np.zeros(c.n) if x0 is None else as_finite_vector(x0, "x0", c.n), c)
    f = obj.value(x)
    y = x
    momentum = 1.0

    for k in range(int(max_iters)):
        x_next = project(y - step * obj.grad(y), c)
        f_next = obj.value(x_next)

        if accelerate and f_next > f:
            # riavvio: passo semplice dall'iterato corrente
            momentum = 1.0
            x_next = project(x - step * obj.grad(x), c)
            f_next = obj.value(x_next)

        change = abs(f_next - f)
        if abs(f) >= 1e-12:
            change /= abs(f)
        moved = float(np.linalg.norm(x_next - x))

        if accelerate:
            momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum ** 2))
            y = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x)
            momentum = momentum_next
        else:
            y = x_next
        x, f = x_next, f_next

        if change <= tol and (step_tol is None or moved <= step_tol * (1.0 + np.linalg.norm(x))):
            logger.debug(f"Gradiente proiettato convergente dopo {k + 1} iterazioni, f={f:.10e}")
            return x

    logger.warning(f"Gradiente proiettato: raggiunto il limite di {max_iters} iterazioni, f={f:.10e}")
    return x
