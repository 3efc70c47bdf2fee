"""Derivative-free variational optimization of Slater exponents.

The search runs a bounded Nelder-Mead simplex on the logarithms of the
parameters, which keeps every exponent positive.  When a simplex run stops
(converged or stalled) a fresh simplex is started around the best point found
so far, until a restart no longer improves the objective or the evaluation
budget is spent.  Every evaluation is recorded; the accepted-step trace keeps
only evaluations that lowered the best value so far.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .ci import SpatialSector, VariationalBoundError
from .model import BasisSpec, sector_energies
from .sto import DegenerateBasisError

DEFAULT_BUDGET = 2000
DEFAULT_STEP = 0.1
# Exponent sets closer to linear dependence than this are rejected: the
# integral roundoff would exceed the energy differences being optimized.
MIN_OVERLAP_EIGENVALUE = 1e-5
MAX_RESTARTS = 20


@dataclass
class OptimizationProblem:
    """Minimize ``objective(x)`` over positive ``x`` inside ``[lower, upper]``."""

    objective: Callable[[np.ndarray], float]
    x0: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    budget: int = DEFAULT_BUDGET
    tolerance: float = 1e-10
    step: float = DEFAULT_STEP

    def __post_init__(self):
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float), self.x0.shape).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), self.x0.shape).copy()
        if self.budget < 1:
            raise ValueError(f"budget must be at least 1, got {self.budget}")
        if np.any(self.lower <= 0) or np.any(self.upper <= self.lower):
            raise ValueError("bounds must satisfy 0 < lower < upper")


@dataclass
class Evaluation:
    index: int
    params: np.ndarray
    value: float


@dataclass
class OptimizationResult:
    best_params: np.ndarray
    best_value: float
    trace: list[Evaluation]
    evaluations: list[Evaluation] = field(repr=False)
    restarts: int = 0

    @property
    def best_energy(self) -> float:
        return self.best_value


class _BudgetSpent(Exception):
    pass


def optimize(problem: OptimizationProblem, seed_params=None) -> OptimizationResult:
    """Run the restarted simplex search from ``seed_params`` (default ``problem.x0``).

    Evaluations that fail (for example a basis that orthonormalization
    empties) count as +inf.  The result is never worse than the seed, and the
    same problem and seed always give the same trace.
    """
    x0 = problem.x0 if seed_params is None else np.atleast_1d(np.asarray(seed_params, dtype=float))
    if x0.shape != problem.x0.shape:
        raise ValueError(f"seed has shape {x0.shape}, expected {problem.x0.shape}")
    if np.any(x0 < problem.lower) or np.any(x0 > problem.upper):
        raise ValueError("seed lies outside the bounds")
    log_lo, log_hi = np.log(problem.lower), np.log(problem.upper)
    evaluations: list[Evaluation] = []
    trace: list[Evaluation] = []

    def f(y):
        if len(evaluations) >= problem.budget:
            raise _BudgetSpent
        x = np.exp(np.clip(y, log_lo, log_hi))
        try:
            value = float(problem.objective(x))
        except (DegenerateBasisError, VariationalBoundError, np.linalg.LinAlgError, FloatingPointError):
            value = np.inf
        if not np.isfinite(value):
            value = np.inf
        ev = Evaluation(len(evaluations), x.copy(), value)
        evaluations.append(ev)
        if not trace or value < trace[-1].value:
            trace.append(ev)
        return value

    y = np.log(x0)
    restarts = 0
    try:
        f(y)
        previous = trace[-1].value if trace else np.inf
        while restarts <= MAX_RESTARTS:
            start = np.log(trace[-1].params) if trace else y
            simplex = _simplex(start, problem.step, log_lo, log_hi)
            minimize(f, start, method="Nelder-Mead", bounds=list(zip(log_lo, log_hi)),
                     options={"initial_simplex": simplex, "xatol": 1e-9, "fatol": problem.tolerance,
                              "maxfev": problem.budget, "adaptive": len(start) > 2})
            best = trace[-1].value if trace else np.inf
            if not previous - best > problem.tolerance:
                break
            previous = best
            restarts += 1
    except _BudgetSpent:
        pass
    if not trace:
        return OptimizationResult(x0.copy(), np.inf, trace, evaluations, restarts)
    return OptimizationResult(trace[-1].params.copy(), trace[-1].value, trace, evaluations, restarts)


def _simplex(center, step, lo, hi):
    n = len(center)
    pts = np.repeat(center[None, :], n + 1, axis=0)
    for i in range(n):
        # step inward when the vertex would leave the box
        pts[i + 1, i] += step if center[i] + step <= hi[i] else -step
    return np.clip(pts, lo, hi)


def exponent_problem(spec: BasisSpec, sector, ordinals: Sequence[int] = (0,), Z: float = 2.0,
                     budget: int = DEFAULT_BUDGET, spread: float = 4.0,
                     lower=None, upper=None, workers: int = 1,
                     min_overlap: float = MIN_OVERLAP_EIGENVALUE, precision: str = "auto") -> OptimizationProblem:
    """Exponent problem for the sum of the chosen sector eigenvalues.

    A single ordinal gives the usual excited-state target; several ordinals
    give a state-averaged target (the sum of the lowest Ritz values is itself
    variational).  Default bounds allow each parameter to move a factor
    ``spread`` either way, with even-tempered ratios kept below one.  Bases
    whose smallest overlap eigenvalue is below ``min_overlap`` score +inf.
    """
    sector = SpatialSector.parse(sector)
    ordinals = tuple(int(k) for k in ordinals)
    if not ordinals or min(ordinals) < 0:
        raise ValueError("ordinals must be non-negative and non-empty")
    x0 = spec.parameters()
    lo = x0 / spread if lower is None else np.asarray(lower, dtype=float)
    hi = x0 * spread if upper is None else np.asarray(upper, dtype=float)
    if spec.mode == "even-tempered" and upper is None:
        hi = hi.copy()
        hi[1::2] = np.minimum(hi[1::2], 0.99)
        lo = np.minimum(lo, hi * 0.5)

    def objective(x):
        trial = spec.with_parameters(x)
        if trial.smallest_overlap_eigenvalue() < min_overlap:
            return np.inf
        w = sector_energies(trial, sector, Z, workers=workers, precision=precision)
        if len(w) <= max(ordinals):
            return np.inf
        return float(sum(w[k] for k in ordinals))

    return OptimizationProblem(objective, x0, lo, hi, budget)


def write_trace(result: OptimizationResult, path, accepted_only: bool = False) -> None:
    """CSV with columns evaluation, p0, p1, ..., energy."""
    rows = result.trace if accepted_only else result.evaluations
    width = len(rows[0].params) if rows else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["evaluation", *(f"p{i}" for i in range(width)), "energy"])
        for ev in rows:
            w.writerow([ev.index, *(repr(float(p)) for p in ev.params), repr(ev.value)])
