import csv

import numpy as np
import pytest

from helium_ci.model import BasisSpec, sector_energies
from helium_ci.optimize import OptimizationProblem, exponent_problem, optimize, write_trace
from helium_ci.sto import DegenerateBasisError


def _quadratic(budget=200):
    return OptimizationProblem(lambda x: float((x[0] - 3.0) ** 2), [1.0], [1e-3], [100.0], budget=budget)


def test_quadratic_minimum():
    result = optimize(_quadratic())
    assert result.best_params[0] == pytest.approx(3.0, abs=1e-6)
    assert len(result.evaluations) <= 200


def test_single_configuration_closed_form():
    # E(xi) = xi^2 - 2 Z xi + 5 xi / 8 is minimized at xi = Z - 5/16
    result = optimize(exponent_problem(BasisSpec.explicit([[1.0]]), "singlet", budget=300))
    assert result.best_params[0] == pytest.approx(27 / 16, abs=1e-6)
    assert result.best_energy == pytest.approx(-(27 / 16) ** 2, abs=1e-10)
    assert round(result.best_energy, 5) == -2.84766


def test_trace_monotone_and_never_worse_than_seed():
    spec = BasisSpec.even(1, 4, 3.0, 0.6)
    problem = exponent_problem(spec, "singlet", budget=150)
    result = optimize(problem)
    values = [ev.value for ev in result.trace]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert result.trace[0].index == 0
    assert result.best_energy <= sector_energies(spec, "singlet")[0]
    assert len(result.evaluations) <= 150
    assert np.all(result.best_params >= problem.lower) and np.all(result.best_params <= problem.upper)


def test_serial_reruns_are_bit_identical(tmp_path):
    spec = BasisSpec.even(0, 4, 3.0, 0.6)
    paths = []
    for i in range(2):
        result = optimize(exponent_problem(spec, "triplet", ordinals=(0, 1), budget=80))
        paths.append(tmp_path / f"trace{i}.csv")
        write_trace(result, paths[-1])
    assert paths[0].read_bytes() == paths[1].read_bytes()
    rows = list(csv.reader(paths[0].open()))
    assert rows[0] == ["evaluation", "p0", "p1", "energy"]
    assert len(rows) == 81


def test_failed_evaluations_score_infinity():
    calls = []

    def objective(x):
        calls.append(x[0])
        if x[0] > 2.0:
            raise DegenerateBasisError("empty basis")
        return (x[0] - 3.0) ** 2

    result = optimize(OptimizationProblem(objective, [1.0], [0.1], [10.0], budget=100))
    assert np.isfinite(result.best_value)
    assert result.best_params[0] <= 2.0
    assert any(not np.isfinite(ev.value) for ev in result.evaluations)


def test_budget_of_one_returns_seed():
    result = optimize(_quadratic(budget=1))
    assert len(result.evaluations) == 1
    assert result.best_params[0] == 1.0


def test_problem_validation():
    with pytest.raises(ValueError):
        OptimizationProblem(lambda x: 0.0, [1.0], [0.0], [2.0])
    with pytest.raises(ValueError):
        OptimizationProblem(lambda x: 0.0, [1.0], [0.5], [2.0], budget=0)
    with pytest.raises(ValueError):
        optimize(_quadratic(), seed_params=[500.0])
    with pytest.raises(ValueError):
        exponent_problem(BasisSpec.even(0, 3, 2.0, 0.6), "singlet", ordinals=())


def test_ground_state_optimization_improves_default_schedule():
    spec = BasisSpec.even(1, 5, 2.0, 0.6)
    result = optimize(exponent_problem(spec, "singlet", budget=250))
    start = sector_energies(spec, "singlet")[0]
    assert result.best_energy < start - 1e-3
    assert result.best_energy > -2.9040  # never below the exact non-relativistic energy
