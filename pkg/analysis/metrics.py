"""
Modulo per le metriche di accuratezza e di violazione dei vincoli.
"""
from typing import Dict, Iterable, Tuple, Union

import numpy as np
from loguru import logger

from solver.lmo import NormConstraint
from utils.exceptions import InvalidInputError
from utils.validation import as_finite_vector


def cosine_similarity(a, b, return_flag: bool = False) -> Union[float, Tuple[float, bool]]:
    """
    Similarità del coseno ⟨a, b⟩ / (‖a‖₂ ‖b‖₂).

    Args:
        a: Primo vettore
        b: Secondo vettore
        return_flag: Restituisce anche un flag che segnala un vettore nullo

    Returns:
        Similarità in [−1, 1] (0 se uno dei vettori è nullo), eventualmente con il flag
    """
    a = as_finite_vector(a, "a")
    b = as_finite_vector(b, "b", a.size)
    norm_a, norm_b = np.linalg.norm(a), np.linalg.norm(b)
    degenerate = norm_a == 0.0 or norm_b == 0.0
    if degenerate:
        logger.debug("Similarità del coseno con vettore nullo: restituito 0")
        value = 0.0
    else:
        value = float(np.clip((a @ b) / (norm_a * norm_b), -1.0, 1.0))
    return (value, degenerate) if return_flag else value


def row_cosine_similarity(A, B) -> np.ndarray:
    """Similarità del coseno riga per riga tra due matrici con la stessa forma."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape or A.ndim != 2:
        raise InvalidInputError(f"forme incompatibili: {A.shape} e {B.shape}")
    return np.array([cosine_similarity(a, b) for a, b in zip(A, B)])


def solution_distance(a, b) -> float:
    """Distanza euclidea ‖a − b‖₂."""
    a = as_finite_vector(a, "a")
    b = as_finite_vector(b, "b", a.size)
    return float(np.linalg.norm(a - b))


def violation(x, c: NormConstraint) -> float:
    """
    Violazione assoluta max(0, ‖w ∘ x‖_p − t).

    Args:
        x: Punto
        c: Vincolo

    Returns:
        Violazione (≥ 0)
    """
    return max(0.0, c.norm(x) - c.t)


def batch_violation(X, c: NormConstraint) -> Dict[str, float]:
    """
    Statistiche di violazione su un insieme di soluzioni.

    Args:
        X: Soluzioni impilate per riga (o lista di vettori)
        c: Vincolo comune

    Returns:
        Dizionario con mean_violation (media sui soli campioni violati),
        mean_violation_all (media su tutti), max_violation e violation_rate
    """
    values = np.array([violation(x, c) for x in np.atleast_2d(np.asarray(X, dtype=np.float64))])
    violated = values[values > 0.0]
    return {
        "mean_violation": float(violated.mean()) if violated.size else 0.0,
        "mean_violation_all": float(values.mean()) if values.size else 0.0,
        "max_violation": float(values.max()) if values.size else 0.0,
        "violation_rate": float(violated.size / values.size) if values.size else 0.0,
    }


def summarize(values: Iterable[float]) -> Tuple[float, float]:
    """Media e deviazione standard di popolazione (0 per un solo valore)."""
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        return float("nan"), float("nan")
    return float(values.mean()), float(values.std(ddof=0))
