"""
Modulo per gli oracoli di minimizzazione lineare (LMO) su palle ℓp pesate.

La regione ammissibile è C = {x : ‖w ∘ x‖_p ≤ t}. Tutte le funzioni sono pure
e restituiscono nuovi vettori.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import softmax
from loguru import logger

from utils.exceptions import InvalidInputError
from utils.validation import as_finite_vector


@dataclass(frozen=True, eq=False)
class NormConstraint:
    """Vincolo ‖w ∘ x‖_p ≤ t con pesi strettamente positivi."""

    w: np.ndarray
    t: float
    p: float = 1.0

    def __post_init__(self):
        w = as_finite_vector(self.w, "w")
        if w.size == 0:
            raise InvalidInputError("w non può essere vuoto")
        if np.any(w <= 0):
            raise InvalidInputError("tutti i pesi w devono essere strettamente positivi")
        t = float(self.t)
        if not np.isfinite(t) or t < 0:
            raise InvalidInputError(f"il raggio t deve essere finito e non negativo, ricevuto {self.t}")
        p = float(self.p)
        if np.isnan(p) or p < 1:
            raise InvalidInputError(f"l'ordine p deve appartenere a [1, ∞], ricevuto {self.p}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return int(self.w.shape[0])

    @property
    def q(self) -> float:
        """Ordine duale: 1/p + 1/q = 1."""
        if self.p == 1.0:
            return np.inf
        if np.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    @property
    def scale(self) -> np.ndarray:
        """Vettore t / w."""
        return self.t / self.w

    def norm(self, x) -> float:
        """Restituisce ‖w ∘ x‖_p."""
        x = as_finite_vector(x, "x", self.n)
        return float(np.linalg.norm(self.w * x, ord=self.p))

    def is_feasible(self, x, rtol: float = 1e-12) -> bool:
        return self.norm(x) <= self.t * (1.0 + rtol)


@dataclass(frozen=True, eq=False)
class TildeGradient:
    """Gradiente riscalato g_tw = (t/w) ∘ g e il suo modulo r = |g_tw|."""

    g_tw: np.ndarray
    r: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "r", np.abs(self.g_tw))

    @property
    def sign(self) -> np.ndarray:
        # sign(0) = 0: le coordinate a gradiente nullo non ricevono massa
        return np.sign(self.g_tw)


def tilde_gradient(g, c: NormConstraint) -> TildeGradient:
    """
    Calcola il gradiente riscalato rispetto al vincolo.

    Args:
        g: Gradiente dell'obiettivo
        c: Vincolo di norma

    Returns:
        TildeGradient con g_tw e r
    """
    g = as_finite_vector(g, "g", c.n)
    return TildeGradient(c.scale * g)


def softmax_weights(r: np.ndarray, tau: float) -> np.ndarray:
    """
    Distribuzione di Boltzmann sui vertici: softmax(r / tau) in forma stabile.

    Args:
        r: Modulo del gradiente riscalato
        tau: Temperatura (> 0)

    Returns:
        Probabilità dei vertici
    """
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0:
        raise InvalidInputError(f"la temperatura deve essere positiva, ricevuto {tau}")
    # scipy sottrae il massimo prima dell'esponenziale
    return softmax(np.asarray(r, dtype=np.float64) / tau)


def lmo_lp_exact(g, c: NormConstraint) -> np.ndarray:
    """
    LMO esatto per 1 < p < ∞.

    Il minimo di ⟨g, s⟩ sulla palla si trova sul bordo ‖w ∘ s‖_p = t:
    s_i = −(t/w_i) · sign(g_tw,i) · |g_tw,i|^{q/p} / ‖g_tw‖_q^{q/p}.

    Args:
        g: Gradiente
        c: Vincolo con p finito e maggiore di 1

    Returns:
        Vertice s
    """
    if not (1.0 < c.p < np.inf):
        raise InvalidInputError(f"lmo_lp_exact richiede 1 < p < ∞, ricevuto p={c.p}")
    tg = tilde_gradient(g, c)
    r_max = tg.r.max()
    if r_max == 0.0:
        return np.zeros(c.n)
    # l'espressione è omogenea di grado 0 in r: normalizzare evita overflow per p → 1
    r = tg.r / r_max
    y = tg.sign * r ** (c.q / c.p) / np.sum(r ** c.q) ** (1.0 / c.p)
    return -c.scale * y


def lmo_l1_exact(g, c: NormConstraint) -> np.ndarray:
    """
    LMO esatto per p = 1: vertice ±(t/w_i*) e_i* con i* = argmax r (indice minimo in caso di parità).

    Args:
        g: Gradiente
        c: Vincolo con p = 1

    Returns:
        Vertice s con al più un elemento non nullo
    """
    if c.p != 1.0:
        raise InvalidInputError(f"lmo_l1_exact richiede p = 1, ricevuto p={c.p}")
    tg = tilde_gradient(g, c)
    s = np.zeros(c.n)
    i_star = int(np.argmax(tg.r))
    if tg.r[i_star] == 0.0:
        return s
    s[i_star] = -c.scale[i_star] * tg.sign[i_star]
    return s


def lmo_linf_exact(g, c: NormConstraint) -> np.ndarray:
    """LMO esatto per p = ∞: angolo −(t/w) ∘ sign(g)."""
    if not np.isinf(c.p):
        raise InvalidInputError(f"lmo_linf_exact richiede p = ∞, ricevuto p={c.p}")
    g = as_finite_vector(g, "g", c.n)
    return -c.scale * np.sign(g)


def lmo_l1_softmax(g, c: NormConstraint, tau: float) -> np.ndarray:
    """
    Vertice rilassato per p = 1: ŝ = −(t/w) ∘ sign(g_tw) ∘ softmax(r / tau).

    Args:
        g: Gradiente
        c: Vincolo con p = 1
        tau: Temperatura (> 0)

    Returns:
        Vertice rilassato ŝ (media dei vertici sotto la distribuzione di Boltzmann)
    """
    if c.p != 1.0:
        raise InvalidInputError(f"lmo_l1_softmax richiede p = 1, ricevuto p={c.p}")
    tg = tilde_gradient(g, c)
    return -c.scale * tg.sign * softmax_weights(tg.r, tau)


def lmo_exact(g, c: NormConstraint) -> np.ndarray:
    """Dispatcher dell'LMO esatto in base all'ordine p."""
    if c.p == 1.0:
        return lmo_l1_exact(g, c)
    if np.isinf(c.p):
        return lmo_linf_exact(g, c)
    return lmo_lp_exact(g, c)


def lmo_bruteforce(g, c: NormConstraint,
                   num_samples: int = 100_000,
                   refine_rounds: int = 300,
                   seed: Optional[int] = 0) -> np.ndarray:
    """
    Oracolo di riferimento per i test.

    p = 1: enumerazione dei 2n vertici ±(t/w_i) e_i. p = ∞: angolo −(t/w) ∘ sign(g).
    1 < p < ∞: campionamento casuale del bordo della palla seguito da una ricerca
    locale con rinormalizzazione.

    Args:
        g: Gradiente
        c: Vincolo
        num_samples: Punti campionati sul bordo (solo 1 < p < ∞)
        refine_rounds: Iterazioni della ricerca locale
        seed: Seme del generatore

    Returns:
        Punto ammissibile con prodotto interno minimo sull'insieme di ricerca
    """
    g = as_finite_vector(g, "g", c.n)
    if c.p == 1.0:
        vertices = np.vstack([np.diag(c.scale), -np.diag(c.scale)])
        return vertices[int(np.argmin(vertices @ g))].copy()
    if np.isinf(c.p):
        return -c.scale * np.sign(g)

    rng = np.random.default_rng(seed)

    def to_boundary(z: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(z * c.w, ord=c.p, axis=-1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return c.t * z / norms

    candidates = to_boundary(rng.standard_normal((num_samples, c.n)))
    best = candidates[int(np.argmin(candidates @ g))]
    best_value = float(best @ g)

    step = 0.1 * max(float(np.max(c.scale)), 1e-12)
    for _ in range(refine_rounds):
        proposals = to_boundary(best + step * rng.standard_normal((64, c.n)))
        values = proposals @ g
        i = int(np.argmin(values))
        if values[i] < best_value:
            best, best_value = proposals[i], float(values[i])
        else:
            step *= 0.8
    logger.debug(f"lmo_bruteforce p={c.p}: valore minimo {best_value:.6e}")
    return best.copy()


def lmo_relaxed(g, c: NormConstraint, tau: float) -> np.ndarray:
    """Vertice usato dal passo in avanti: softmax per p = 1, esatto altrimenti."""
    if c.p == 1.0:
        return lmo_l1_softmax(g, c, tau)
    return lmo_exact(g, c)
