import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helium_ci.ci import CiState, Configuration, SpatialSector, enumerate_configurations
from helium_ci.entanglement import (AmbiguousReferenceError, ConsistencyError, dehesa_measure,
                                    entanglement_measure, entropy_report, inverse_participation_ratio,
                                    linear_entropy, reduced_density, reference_entropy, von_neumann_entropy,
                                    write_spectrum)
from helium_ci.model import BasisSpec, solve_sector
from oracles import reduced_spectrum_on_grid

S, A = SpatialSector.SYMMETRIC, SpatialSector.ANTISYMMETRIC


def _state(configs, coefficients, sector=S, dominant=None, weight=1.0):
    return CiState(-2.0, np.asarray(coefficients, float), sector, 0, dominant=dominant, dominant_weight=weight)


def test_product_state_spectrum():
    configs = enumerate_configurations(2, 0, S)
    rho = reduced_density(_state(configs, [1, 0, 0]), configs, {0: 2})
    np.testing.assert_allclose(rho.spectrum, [1.0, 0.0], atol=1e-15)
    assert von_neumann_entropy(rho.spectrum) == 0.0


def test_symmetrized_pair_spectrum():
    configs = enumerate_configurations(2, 0, S)
    rho = reduced_density(_state(configs, [0, 1, 0]), configs, {0: 2})
    np.testing.assert_allclose(rho.spectrum, [0.5, 0.5], atol=1e-15)
    assert von_neumann_entropy(rho.spectrum) == pytest.approx(1.0, abs=1e-15)
    assert linear_entropy(rho.spectrum) == pytest.approx(0.5, abs=1e-15)


def test_non_normalized_state_rejected():
    configs = enumerate_configurations(2, 0, S)
    with pytest.raises(ValueError):
        reduced_density(_state(configs, [1, 1, 0]), configs, {0: 2})


def test_p_shell_multiplicity_and_conventions():
    configs = enumerate_configurations(1, 1, S)  # (1s)^2 and (2p)^2
    c = np.array([np.sqrt(0.9), np.sqrt(0.1)])
    rho = reduced_density(_state(configs, c), configs, {0: 1, 1: 1})
    np.testing.assert_allclose(rho.spectrum, [0.9, 0.1 / 3, 0.1 / 3, 0.1 / 3], atol=1e-15)
    np.testing.assert_allclose(rho.shell_spectrum, [0.9, 0.1], atol=1e-15)
    assert rho.trace == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        rho.spectrum_for("per-m")


def test_entropy_edge_cases():
    assert von_neumann_entropy([1.0, 1e-16]) == 0.0
    with pytest.raises(ConsistencyError):
        von_neumann_entropy([0.6, 0.6])
    with pytest.raises(ConsistencyError):
        von_neumann_entropy([1.0 + 1e-9, -1e-9])
    with pytest.raises(ConsistencyError):
        linear_entropy([])


def test_reference_entropy():
    s2 = Configuration(0, 1, 1, S)
    assert reference_entropy(_state([], [], S, s2, 0.95)) == 0
    assert reference_entropy(_state([], [], S, Configuration(0, 1, 2, S), 0.96)) == 1
    assert reference_entropy(_state([], [], A, Configuration(0, 1, 2, A), 0.99)) == 1
    with pytest.raises(AmbiguousReferenceError):
        reference_entropy(_state([], [], S, s2, 0.4))
    with pytest.raises(AmbiguousReferenceError):
        reference_entropy(_state([], [], S, None, 1.0))


def test_entanglement_measure_examples():
    assert entanglement_measure(0.0785, 0) == pytest.approx(0.0785)
    assert entanglement_measure(0.991099, 1) == pytest.approx(0.008901)
    assert entanglement_measure(1.00494, 1) == pytest.approx(0.00494)
    with pytest.raises(ValueError):
        entanglement_measure(0.5, 2)


def test_comparison_measures():
    assert dehesa_measure([1.0], "singlet") == 0.0
    lam = [0.5769, 0.4231]
    assert dehesa_measure(lam, "singlet") == pytest.approx(linear_entropy(lam), abs=1e-15)
    assert inverse_participation_ratio([1.0]) == 1.0
    assert inverse_participation_ratio([0.5, 0.5]) == 2.0
    # a spectrum with S_L = 0.01606 has IPR = 1 / (1 - S_L)
    a = (1 + np.sqrt(1 - 2 * 0.01606)) / 2
    assert inverse_participation_ratio([a, 1 - a]) == pytest.approx(1 / (1 - 0.01606), rel=1e-12)


@pytest.fixture(scope="module")
def solutions():
    spec = BasisSpec.even(2, 8, 10.0, 0.72)
    return {s: solve_sector(spec, s, count=5) for s in ("singlet", "triplet")}


def test_trace_and_positivity(solutions):
    for sol in solutions.values():
        for st_ in sol.states:
            rho = reduced_density(st_, sol.configs, sol.bases)
            assert abs(rho.spectrum.sum() - 1) <= 1e-12
            assert rho.spectrum.min() >= -1e-12
            for block in rho.blocks.values():
                assert np.linalg.eigvalsh(block).min() >= -1e-12


def test_triplet_spectra_pair_up(solutions):
    sol = solutions["triplet"]
    for st_ in sol.states:
        for lam in (reduced_density(st_, sol.configs, sol.bases).spectrum,
                    sol.report(st_).spectrum):
            big = lam[lam > 1e-13]
            big = big[: len(big) // 2 * 2]
            assert np.abs(big[0::2] - big[1::2]).max() <= 1e-8


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2), st.integers(0, 10_000))
def test_entropy_invariant_under_radial_rotation(l, seed):
    spec = BasisSpec.even(2, 5, 8.0, 0.7)
    bases = spec.bases()
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(bases[l].retained,) * 2))
    rotated = dict(bases)
    rotated[l] = bases[l].rotated(q)
    from helium_ci.ci import assemble_hamiltonian, diagonalize, label_states

    configs = enumerate_configurations(5, 2, "singlet")
    values = []
    for b in (bases, rotated):
        w, v = diagonalize(assemble_hamiltonian(configs, b))
        state = label_states(w, v, configs, 1)[0]
        lam = reduced_density(state, configs, b).spectrum
        values.append((von_neumann_entropy(lam), linear_entropy(lam)))
    assert values[0][0] == pytest.approx(values[1][0], abs=1e-10)
    assert values[0][1] == pytest.approx(values[1][1], abs=1e-10)


@pytest.mark.parametrize("sector, ordinal", [("singlet", 0), ("singlet", 1), ("triplet", 0)])
def test_partial_trace_matches_grid_integration(sector, ordinal):
    spec = BasisSpec.even(1, 4, 5.0, 0.6)
    sol = solve_sector(spec, sector, count=2)
    state = sol.states[ordinal]
    lam = reduced_density(state, sol.configs, sol.bases).spectrum
    grid = reduced_spectrum_on_grid(state.coefficients, sol.configs, sol.bases)
    np.testing.assert_allclose(grid[: len(lam)], lam, atol=1e-6)
    assert grid[len(lam):].max(initial=0.0) < 1e-6


def test_report_fields(solutions):
    sol = solutions["singlet"]
    report = entropy_report(sol.states[0], sol.configs, sol.bases)
    assert report.s0 == 0
    assert report.entanglement == pytest.approx(report.s_vn)
    assert 0 <= report.s_lin < 1
    assert report.comparison_dehesa == pytest.approx(report.s_lin)
    assert report.shifted_entropy == pytest.approx(report.s_vn - 1)
    orbital = entropy_report(sol.states[0], sol.configs, sol.bases, "orbital")
    assert orbital.s_vn > report.s_vn  # splitting p, d weight over m only adds entropy


def test_write_spectrum(tmp_path):
    path = tmp_path / "spec.txt"
    write_spectrum([0.1, 0.9], path)
    assert path.read_bytes() == b"1 9.000000000000e-01\n2 1.000000000000e-01\n"
