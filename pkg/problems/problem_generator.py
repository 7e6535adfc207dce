"""
Modulo per la generazione deterministica di problemi di benchmark.

Tutte le estrazioni usano il generatore counter-based indicato in
config.PRNG_ALGORITHM, quindi la stessa coppia (n, seed) produce istanze
identiche bit per bit.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from loguru import logger

from config import PRNG_ALGORITHM, SCALES
from solver.lmo import NormConstraint
from solver.objective import QuadraticObjective
from utils.exceptions import InvalidInputError

# Preset del vincolo di potenza degli attuatori: (dimensione, potenza massima)
POWER_PRESETS: Dict[str, Tuple[int, float]] = {
    "HC+O": (6, 20.0),
    "R+O03": (2, 0.3),
}

P_REGULARIZATION = 1e-3


@dataclass(eq=False)
class ProblemInstance:
    """Istanza di benchmark: obiettivo quadratico, vincolo e metadati di generazione."""

    objective: QuadraticObjective
    constraint: NormConstraint
    seed: Optional[int] = None
    scale: Optional[str] = None
    family: str = "qp"
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.constraint.n

    @property
    def label(self) -> str:
        return f"{self.family} n={self.n} p={self.constraint.p:g} seed={self.seed}"


def make_rng(seed: int) -> np.random.Generator:
    """Generatore numpy con il bit generator configurato (Philox di default)."""
    if seed is None or int(seed) < 0:
        raise InvalidInputError(f"il seme deve essere un intero non negativo, ricevuto {seed}")
    bit_generator = getattr(np.random, PRNG_ALGORITHM)
    return np.random.Generator(bit_generator(int(seed)))


def scale_label(n: int) -> Optional[str]:
    """Restituisce l'etichetta di scala (small/medium/large) se n coincide con una scala nota."""
    for label, size in SCALES.items():
        if size == n:
            return label
    return None


def gen_qp(n: int, seed: int, p: float = 1.0) -> ProblemInstance:
    """
    Genera una QP vincolata casuale.

    Ordine di estrazione: A (n × n normale standard), q (normale standard),
    w (uniforme su [0.5, 1.5]), t (uniforme su [0.5, 2]).
    P = AᵀA / n + 10⁻³ I.

    Args:
        n: Dimensione della variabile (≥ 1)
        seed: Seme a 64 bit
        p: Ordine della norma del vincolo

    Returns:
        ProblemInstance
    """
    if int(n) < 1:
        raise InvalidInputError(f"n deve essere ≥ 1, ricevuto {n}")
    n = int(n)
    rng = make_rng(seed)

    A = rng.standard_normal((n, n))
    P = A.T @ A / n + P_REGULARIZATION * np.eye(n)
    P = 0.5 * (P + P.T)
    q = rng.standard_normal(n)
    w = rng.uniform(0.5, 1.5, size=n)
    t = float(rng.uniform(0.5, 2.0))

    instance = ProblemInstance(
        objective=QuadraticObjective(P, q, check_psd=False),
        constraint=NormConstraint(w=w, t=t, p=p),
        seed=int(seed),
        scale=scale_label(n),
        family="qp",
        metadata={
            "generator": f"gen_qp prng={PRNG_ALGORITHM}",
            "P": "A^T A / n + 1e-3 I, A_ij ~ N(0,1)",
            "q": "N(0,1)",
            "w": "U[0.5,1.5]",
            "t": "U[0.5,2]",
        },
    )
    logger.debug(f"Generata istanza {instance.label} (t={t:.4f})")
    return instance


def gen_power_constrained(d: int, p_max: float, seed: int) -> ProblemInstance:
    """
    Genera un'istanza con vincolo di potenza Σ |w_i a_i| ≤ p_max.

    w_i rappresenta la velocità angolare del giunto i (|N(0,1)| + 0.1), a le
    coppie. L'obiettivo è ½‖a − a_ref‖² con a_ref normale scalato in modo che
    la potenza richiesta superi tipicamente p_max.

    Args:
        d: Numero di giunti
        p_max: Potenza massima (> 0)
        seed: Seme

    Returns:
        ProblemInstance con P = I, q = −a_ref, p = 1
    """
    if int(d) < 1:
        raise InvalidInputError(f"d deve essere ≥ 1, ricevuto {d}")
    if not (np.isfinite(p_max) and p_max > 0):
        raise InvalidInputError(f"p_max deve essere positivo, ricevuto {p_max}")
    d = int(d)
    rng = make_rng(seed)

    w = np.abs(rng.standard_normal(d)) + 0.1
    a_ref = rng.standard_normal(d) * (p_max / float(np.mean(w)))

    instance = ProblemInstance(
        objective=QuadraticObjective(np.eye(d), -a_ref, check_psd=False),
        constraint=NormConstraint(w=w, t=float(p_max), p=1.0),
        seed=int(seed),
        family="power",
        metadata={
            "generator": f"gen_power_constrained prng={PRNG_ALGORITHM}",
            "w": "|N(0,1)| + 0.1",
            "a_ref": "N(0,1) * p_max / mean(w)",
        },
    )
    logger.debug(f"Generata istanza di potenza {instance.label} (p_max={p_max})")
    return instance


def gen_power_preset(name: str, seed: int) -> ProblemInstance:
    """Istanza di potenza da uno dei preset in POWER_PRESETS."""
    if name not in POWER_PRESETS:
        raise InvalidInputError(f"preset sconosciuto: {name} (disponibili: {', '.join(POWER_PRESETS)})")
    d, p_max = POWER_PRESETS[name]
    return gen_power_constrained(d, p_max, seed)
