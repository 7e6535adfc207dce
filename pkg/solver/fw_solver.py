"""
Modulo per il passo in avanti del layer Frank-Wolfe differenziabile.

Ogni iterazione calcola il vertice (rilassato con softmax per p = 1, esatto
per p > 1), il passo short-path e l'aggiornamento per combinazione convessa.
Con `record_tape` ogni iterazione viene registrata per il passo all'indietro.

Con vertice rilassato e annealing, al termine della fase a temperatura
decrescente seguono `refine_iters` passi con il vertice esatto: il passo
all'indietro ripercorre solo questi ultimi e tratta il loro punto di partenza
come costante.
"""
import time
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
from loguru import logger

from config import DEFAULT_TOL, DEFAULT_MAX_ITERS, DEFAULT_ANNEAL_PERIOD, REFINE_ITERS, TEMPERATURE_FLOOR
from solver.lmo import NormConstraint, lmo_exact, lmo_relaxed, softmax_weights
from solver.objective import Objective
from utils.exceptions import InvalidInputError, SolverAssertionError
from utils.validation import as_finite_vector

STEP_RULES = ("short_path", "agnostic")

# Rami del passo registrati nel nastro
BRANCH_INTERIOR = "interior"
BRANCH_CLIP = "clip"
BRANCH_LOWER = "lower"
BRANCH_DEGENERATE = "degenerate"
BRANCH_AGNOSTIC = "agnostic"


@dataclass(frozen=True)
class TemperatureSchedule:
    """Temperatura costante τ₀ oppure annealing τ_k = 2^(−⌊k/T⌋)."""

    variant: str = "annealing"
    tau0: float = 1.0
    period: int = DEFAULT_ANNEAL_PERIOD

    def __post_init__(self):
        if self.variant not in ("constant", "annealing"):
            raise InvalidInputError(f"schedule sconosciuto: {self.variant}")
        if self.variant == "constant" and not (np.isfinite(self.tau0) and self.tau0 > 0):
            raise InvalidInputError(f"τ₀ deve essere positivo, ricevuto {self.tau0}")
        if self.variant == "annealing" and int(self.period) < 1:
            raise InvalidInputError(f"il periodo T deve essere ≥ 1, ricevuto {self.period}")

    @classmethod
    def constant(cls, tau0: float) -> "TemperatureSchedule":
        return cls(variant="constant", tau0=float(tau0))

    @classmethod
    def annealing(cls, period: int = DEFAULT_ANNEAL_PERIOD) -> "TemperatureSchedule":
        return cls(variant="annealing", period=int(period))

    @property
    def label(self) -> str:
        if self.variant == "constant":
            return f"tau={self.tau0:g}"
        return f"anneal-T{self.period}"


@dataclass(frozen=True)
class SolverConfig:
    """Parametri del solutore."""

    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    schedule: TemperatureSchedule = field(default_factory=TemperatureSchedule.annealing)
    record_tape: bool = False
    exact_lmo: bool = False
    step_rule: str = "short_path"
    refine_iters: int = REFINE_ITERS

    def __post_init__(self):
        if not (self.tol > 0):
            raise InvalidInputError(f"tol deve essere positiva, ricevuto {self.tol}")
        if int(self.max_iters) < 1:
            raise InvalidInputError(f"max_iters deve essere ≥ 1, ricevuto {self.max_iters}")
        if self.step_rule not in STEP_RULES:
            raise InvalidInputError(f"regola del passo sconosciuta: {self.step_rule}")
        if int(self.refine_iters) < 0:
            raise InvalidInputError(f"refine_iters deve essere ≥ 0, ricevuto {self.refine_iters}")


@dataclass(frozen=True, eq=False)
class IterationRecord:
    """Valori di una iterazione necessari alla replica all'indietro."""

    x: np.ndarray
    g: np.ndarray
    g_tw: np.ndarray
    s: np.ndarray
    gamma: float
    branch: str
    tau: Optional[float] = None
    probs: Optional[np.ndarray] = None

    @property
    def r(self) -> np.ndarray:
        return np.abs(self.g_tw)

    @property
    def relaxed(self) -> bool:
        return self.probs is not None


@dataclass(eq=False)
class Trajectory:
    """
    Nastro della risoluzione: record per iterazione e soluzione finale.

    Il passo all'indietro ripercorre solo records[grad_start:]; l'iterato
    records[grad_start].x è trattato come costante.
    """

    constraint: NormConstraint
    lipschitz: float
    relaxed: bool
    records: List[IterationRecord] = field(default_factory=list)
    x_final: Optional[np.ndarray] = None
    grad_start: int = 0

    @property
    def iterations(self) -> int:
        return len(self.records)

    def iterates(self) -> np.ndarray:
        """Restituisce gli iterati x̂_0 … x̂_K impilati per riga."""
        rows = [rec.x for rec in self.records]
        rows.append(self.x_final)
        return np.vstack(rows)


@dataclass(eq=False)
class SolveReport:
    """Risultato di `solve`."""

    solution: np.ndarray
    objective_trace: List[float]
    gap_trace: List[float]
    iterations: int
    wall_time: float
    termination: str
    trajectory: Optional[Trajectory] = None
    refine_iterations: int = 0

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


class StepSize(NamedTuple):
    gamma: float
    branch: str


def temperature(k: int, sched: TemperatureSchedule, floor: float = TEMPERATURE_FLOOR) -> float:
    """
    Temperatura all'iterazione k.

    Args:
        k: Indice di iterazione (≥ 0)
        sched: Schedule della temperatura
        floor: Valore minimo per l'annealing

    Returns:
        τ_k
    """
    if k < 0:
        raise InvalidInputError(f"l'iterazione deve essere ≥ 0, ricevuto {k}")
    if sched.variant == "constant":
        return sched.tau0
    return max(2.0 ** -(k // sched.period), floor)


def step_size(g, x, s, L: float) -> StepSize:
    """
    Passo short-path γ = min{⟨g, x − s⟩ / (L‖x − s‖²), 1}, limitato inferiormente a 0.

    Args:
        g: Gradiente in x
        x: Iterato corrente
        s: Vertice
        L: Costante di Lipschitz (> 0)

    Returns:
        StepSize con γ e ramo attivo (per il passo all'indietro)
    """
    if not (np.isfinite(L) and L > 0):
        raise InvalidInputError(f"L deve essere positiva, ricevuto {L}")
    g = as_finite_vector(g, "g")
    x = as_finite_vector(x, "x", g.size)
    s = as_finite_vector(s, "s", g.size)
    d = x - s
    dd = float(d @ d)
    if dd < 1e-24:
        return StepSize(0.0, BRANCH_DEGENERATE)
    ratio = float(g @ d) / (L * dd)
    if ratio >= 1.0:
        return StepSize(1.0, BRANCH_CLIP)
    if ratio < 0.0:
        return StepSize(0.0, BRANCH_LOWER)
    return StepSize(ratio, BRANCH_INTERIOR)


def fw_gap(g, x, s) -> float:
    """Gap di Frank-Wolfe ⟨g, x − s⟩."""
    g = np.asarray(g, dtype=np.float64)
    return float(g @ (np.asarray(x, dtype=np.float64) - np.asarray(s, dtype=np.float64)))


def solve(obj: Objective, c: NormConstraint, cfg: Optional[SolverConfig] = None) -> SolveReport:
    """
    Risolve min f(x) su ‖w ∘ x‖_p ≤ t con Frank-Wolfe a partire da x₀ = 0.

    L'arresto avviene per variazione relativa dell'obiettivo ≤ tol, per γ = 0 o
    per max_iters. Con vertice rilassato e annealing i primi due criteri valgono
    solo quando il gap di rilassamento max r − ⟨π, r⟩ è ≤ tol · |f| oppure τ ha
    raggiunto il minimo; seguono poi al più `refine_iters` passi con il vertice
    esatto, interrotti solo da una direzione nulla. max_iters limita il totale.

    Args:
        obj: Obiettivo
        c: Vincolo
        cfg: Configurazione del solutore

    Returns:
        SolveReport con tracce, motivo di arresto e (se richiesto) nastro
    """
    cfg = cfg or SolverConfig()
    if obj.n != c.n:
        raise InvalidInputError(f"dimensioni incoerenti: obiettivo n={obj.n}, vincolo n={c.n}")

    L = obj.lipschitz
    relaxed = c.p == 1.0 and not cfg.exact_lmo
    annealing = relaxed and cfg.schedule.variant == "annealing"
    refine = annealing and cfg.step_rule == "short_path" and int(cfg.refine_iters) > 0
    scale = c.scale
    tape = Trajectory(constraint=c, lipschitz=L, relaxed=relaxed) if cfg.record_tape else None

    start = time.perf_counter()
    x = np.zeros(c.n)
    f = obj.value(x)
    objective_trace = [f]
    gap_trace = []
    termination = "max_iters"
    refine_from = None

    logger.debug(f"Avvio Frank-Wolfe: n={c.n}, p={c.p}, L={L:.4e}, schedule={cfg.schedule.label}")

    for k in range(int(cfg.max_iters)):
        refining = refine_from is not None
        if refining and k - refine_from >= cfg.refine_iters:
            break

        g = obj.grad(x)
        g_tw = scale * g
        tau, probs = None, None
        if relaxed and not refining:
            tau = temperature(k, cfg.schedule)
            s = lmo_relaxed(g, c, tau)
            if tape is not None:
                probs = softmax_weights(np.abs(g_tw), tau)
        else:
            s = lmo_exact(g, c)

        gap = fw_gap(g, x, s)
        if cfg.step_rule == "agnostic":
            step = StepSize(2.0 / (k + 3.0), BRANCH_AGNOSTIC)
        else:
            step = step_size(g, x, s, L)
        if refining and step.branch == BRANCH_DEGENERATE:
            break

        x_next = (1.0 - step.gamma) * x + step.gamma * s
        f_next = obj.value(x_next) if np.all(np.isfinite(x_next)) else np.nan
        if not np.isfinite(f_next):
            raise SolverAssertionError(f"obiettivo non finito all'iterazione {k}")

        if tape is not None:
            tape.records.append(IterationRecord(
                x=x, g=g, g_tw=g_tw, s=s, gamma=step.gamma, branch=step.branch, tau=tau, probs=probs
            ))

        objective_trace.append(f_next)
        gap_trace.append(gap)
        change = abs(f_next - f)
        if abs(f) >= 1e-12:
            change /= abs(f)
        x, f = x_next, f_next
        if refining:
            continue

        # con l'annealing l'arresto attende che il vertice rilassato sia quasi esatto
        settled = True
        if annealing and tau > TEMPERATURE_FLOOR:
            relax_gap = float(g @ s) + float(np.max(np.abs(g_tw)))
            settled = relax_gap <= cfg.tol * (abs(f) if abs(f) >= 1e-12 else 1.0)

        if step.gamma == 0.0 and settled:
            termination = "zero_step"
        elif change <= cfg.tol and settled:
            termination = "tolerance"
        else:
            continue
        if not refine or k + 1 >= cfg.max_iters:
            break
        refine_from = k + 1
        if tape is not None:
            tape.grad_start = len(tape.records)
        logger.debug(f"Annealing concluso ({termination}) all'iterazione {k + 1} con τ={tau:.3e}, "
                     f"rifinitura con vertice esatto")

    wall_time = time.perf_counter() - start
    if tape is not None:
        tape.x_final = x

    iterations = len(gap_trace)
    refine_iterations = iterations - refine_from if refine_from is not None else 0
    logger.debug(f"Frank-Wolfe terminato ({termination}) dopo {iterations} iterazioni "
                 f"({refine_iterations} di rifinitura), f={f:.6e}, tempo {wall_time:.3f}s")

    return SolveReport(
        solution=x,
        objective_trace=objective_trace,
        gap_trace=gap_trace,
        iterations=iterations,
        wall_time=wall_time,
        termination=termination,
        trajectory=tape,
        refine_iterations=refine_iterations,
    )
