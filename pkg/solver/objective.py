"""
Modulo per l'astrazione dell'obiettivo f(x; θ) e la sua specializzazione quadratica.
"""
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np
from loguru import logger

from config import LIPSCHITZ_SAFETY, POWER_ITERS, POWER_TOL
from utils.exceptions import InvalidInputError
from utils.validation import as_finite_vector, as_finite_matrix

LIPSCHITZ_FLOOR = 1e-12


class Objective(ABC):
    """
    Obiettivo convesso e L-smooth con oracoli di valore, gradiente e VJP sui parametri.

    Le sottoclassi devono fornire `value`, `grad`, `param_vjp`, `n`, `param_dim`
    e `lipschitz`. Il prodotto Hessiana-vettore ha un'implementazione di ripiego
    alle differenze finite centrali sul gradiente.
    """

    @property
    @abstractmethod
    def n(self) -> int:
        """Dimensione della variabile x."""

    @property
    @abstractmethod
    def param_dim(self) -> int:
        """Dimensione del parametro θ."""

    @property
    @abstractmethod
    def lipschitz(self) -> float:
        """Costante di Lipschitz L del gradiente."""

    @abstractmethod
    def value(self, x: np.ndarray) -> float:
        """Valore f(x; θ)."""

    @abstractmethod
    def grad(self, x: np.ndarray) -> np.ndarray:
        """Gradiente ∇_x f(x; θ)."""

    @abstractmethod
    def param_vjp(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """
        Prodotto uᵀ · ∂(∇_x f(x; θ))/∂θ.

        Args:
            x: Punto di valutazione
            u: Aggiunto (vettore di lunghezza n o blocco m × n)

        Returns:
            Vettore di lunghezza param_dim (o blocco m × param_dim)
        """

    def hvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """
        Prodotto Hessiana-vettore per differenze centrali del gradiente.

        Il passo è h = √ε · (1 + ‖x‖). Accetta un vettore o un blocco di righe.

        Args:
            x: Punto di valutazione
            v: Direzione (n) o blocco di direzioni (m × n)

        Returns:
            ∇²f(x) v con la stessa forma di v
        """
        v = np.asarray(v, dtype=np.float64)
        if v.ndim == 2:
            return np.vstack([self.hvp(x, row) for row in v])
        norm_v = np.linalg.norm(v)
        if norm_v == 0.0:
            return np.zeros_like(v)
        h = np.sqrt(np.finfo(np.float64).eps) * (1.0 + np.linalg.norm(x))
        direction = v / norm_v
        return norm_v * (self.grad(x + h * direction) - self.grad(x - h * direction)) / (2.0 * h)


class QuadraticObjective(Objective):
    """Obiettivo quadratico f(x; q) = ½ xᵀPx + qᵀx con parametro θ = q."""

    def __init__(self, P, q, lipschitz: Optional[float] = None, check_psd: bool = True):
        """
        Inizializza l'obiettivo quadratico.

        Args:
            P: Matrice simmetrica semidefinita positiva n × n
            q: Vettore lineare di lunghezza n
            lipschitz: Costante L (stimata con power iteration se assente)
            check_psd: Verifica xᵀPx ≥ 0 su alcune sonde casuali
        """
        P = as_finite_matrix(P, "P")
        q = as_finite_vector(q, "q", P.shape[0])
        _check_symmetric(P)
        if check_psd:
            _check_psd_samples(P)

        self.P = P
        self.q = q

        if lipschitz is None:
            lipschitz = estimate_lipschitz(P)
        elif not np.isfinite(lipschitz) or lipschitz <= 0:
            raise InvalidInputError(f"la costante di Lipschitz deve essere positiva, ricevuto {lipschitz}")
        self._lipschitz = float(lipschitz)

    @property
    def n(self) -> int:
        return int(self.q.shape[0])

    @property
    def param_dim(self) -> int:
        return self.n

    @property
    def lipschitz(self) -> float:
        return self._lipschitz

    def value(self, x) -> float:
        x = as_finite_vector(x, "x", self.n)
        return float(0.5 * x @ (self.P @ x) + self.q @ x)

    def grad(self, x) -> np.ndarray:
        x = as_finite_vector(x, "x", self.n)
        return self.P @ x + self.q

    def param_vjp(self, x, u) -> np.ndarray:
        # ∂(Px + q)/∂q = I
        u = np.asarray(u, dtype=np.float64)
        if u.shape[-1] != self.n:
            raise InvalidInputError(f"l'aggiunto ha lunghezza {u.shape[-1]}, attesa {self.n}")
        return u.copy()

    def hvp(self, x, v) -> np.ndarray:
        # Esatto: P è simmetrica, quindi il blocco di righe V dà V P
        v = np.asarray(v, dtype=np.float64)
        return v @ self.P

    def with_q(self, q) -> "QuadraticObjective":
        """Restituisce lo stesso obiettivo con un nuovo q (P e L condivisi)."""
        return QuadraticObjective(self.P, q, lipschitz=self._lipschitz, check_psd=False)


def qp_value(obj: QuadraticObjective, x) -> float:
    """Restituisce ½ xᵀPx + qᵀx."""
    return obj.value(x)


def qp_grad(obj: QuadraticObjective, x) -> np.ndarray:
    """Restituisce Px + q."""
    return obj.grad(x)


def qp_param_vjp(obj: QuadraticObjective, x, u) -> np.ndarray:
    """Restituisce u: la VJP del gradiente rispetto a q è l'identità."""
    u = as_finite_vector(u, "u", obj.n)
    return obj.param_vjp(x, u)


def estimate_lipschitz(P, iters: int = POWER_ITERS, tol: float = POWER_TOL,
                       safety: float = LIPSCHITZ_SAFETY) -> float:
    """
    Stima λ_max(P) con power iteration e applica un margine di sicurezza.

    Il vettore iniziale è il vettore di uno normalizzato. Se il quoziente di
    Rayleigh resta sotto max_i P_ii (limite inferiore di λ_max per matrici PSD)
    la stima riparte dalla base canonica corrispondente.

    Args:
        P: Matrice simmetrica semidefinita positiva
        iters: Numero massimo di iterazioni
        tol: Tolleranza relativa sul quoziente di Rayleigh
        safety: Sovrastima relativa (0.01 = +1%)

    Returns:
        L = λ_max · (1 + safety), mai inferiore a 1e-12
    """
    P = as_finite_matrix(P, "P")
    _check_symmetric(P)
    n = P.shape[0]

    lam = _power_iteration(P, np.full(n, 1.0 / np.sqrt(n)), iters, tol)
    diag_max = float(np.max(np.diag(P)))
    if lam < diag_max:
        start = np.zeros(n)
        start[int(np.argmax(np.diag(P)))] = 1.0
        lam = max(diag_max, _power_iteration(P, start, iters, tol))

    L = max(lam * (1.0 + safety), LIPSCHITZ_FLOOR)
    logger.debug(f"Costante di Lipschitz stimata: {L:.6e} (n={n})")
    return L


def _power_iteration(P: np.ndarray, v: np.ndarray, iters: int, tol: float) -> float:
    lam = 0.0
    for _ in range(iters):
        w = P @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        lam_new = float(v @ w)
        v = w / norm_w
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new
        lam = lam_new
    return lam


def _check_symmetric(P: np.ndarray) -> None:
    asym = np.max(np.abs(P - P.T))
    if asym > 1e-10 * max(np.max(np.abs(P)), 1e-300):
        raise InvalidInputError(f"P non è simmetrica (‖P − Pᵀ‖_∞ = {asym:.3e})")


def _check_psd_samples(P: np.ndarray, samples: int = 3) -> None:
    rng = np.random.default_rng(0)
    scale = max(np.max(np.abs(P)), 1e-300)
    for z in rng.standard_normal((samples, P.shape[0])):
        if z @ P @ z < -1e-10 * scale * (z @ z):
            raise InvalidInputError("P non è semidefinita positiva")
