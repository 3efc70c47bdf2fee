"""Single-electron reduced density matrix and entropy measures.

Because the configuration basis is orthonormal, the reduced density matrix is a
partial trace over coefficient products and needs no spatial integration.
With L = 0 coupling it is block diagonal in (l, m): every m of a shell carries
the same radial block D_l D_l^T / (2l + 1), where D_l is the radial coefficient
matrix of the pair function in that shell.

Two spectra follow from that structure.  The *orbital* spectrum lists every
eigenvalue of rho_1 over (n, l, m) orbitals, each shell eigenvalue repeated
2l + 1 times.  The *shell* spectrum sums each eigenvalue over its 2l + 1
degenerate copies, i.e. it is the spectrum of the one-electron density with the
magnetic quantum number traced out.  The shell spectrum is the default for
reported entropies; the two differ only through the small p, d, ...
occupations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .ci import CiState, Configuration, SpatialSector, symmetrizer
from .sto import OrthonormalRadialBasis

TRACE_TOL = 1e-10
NEGATIVE_TOL = 1e-12
ZERO_CUTOFF = 1e-14
NORM_TOL = 1e-10
CONVENTIONS = ("shell", "orbital")
SPIN_PURITY = 0.5


class ConsistencyError(ValueError):
    """Spectrum violates the trace or positivity requirements of a density matrix."""


class AmbiguousReferenceError(ValueError):
    """No configuration dominates the state, so the reference entropy is undefined."""


@dataclass
class ReducedDensity:
    blocks: dict[int, np.ndarray]
    multiplicity: dict[int, int]
    spectrum: np.ndarray = field(repr=False)
    block_spectra: dict[int, np.ndarray] = field(repr=False, default_factory=dict)

    @property
    def trace(self) -> float:
        return float(sum(self.multiplicity[l] * np.trace(b) for l, b in self.blocks.items()))

    @property
    def shell_spectrum(self) -> np.ndarray:
        """Eigenvalues summed over m within each shell, descending."""
        parts = [self.multiplicity[l] * lam for l, lam in self.block_spectra.items()]
        return np.sort(np.concatenate(parts))[::-1]

    def spectrum_for(self, convention: str = "shell") -> np.ndarray:
        if convention == "shell":
            return self.shell_spectrum
        if convention == "orbital":
            return self.spectrum
        raise ValueError(f"unknown spectrum convention {convention!r}; use one of {CONVENTIONS}")


def radial_coefficient_matrices(coefficients, configs: Sequence[Configuration],
                                sizes: Mapping[int, int]) -> dict[int, np.ndarray]:
    """Pair-function coefficients D_l[i, j] on the product basis f_i(r1) f_j(r2)."""
    offsets, u = symmetrizer(configs, sizes)
    flat = u @ np.asarray(coefficients, dtype=float)
    out = {}
    for off, l in zip(offsets, sorted(sizes)):
        n = sizes[l]
        out[l] = flat[off: off + n * n].reshape(n, n)
    return out


def reduced_density(state: CiState, configs: Sequence[Configuration],
                    bases: Mapping[int, OrthonormalRadialBasis] | Mapping[int, int]) -> ReducedDensity:
    """Partial trace over electron 2 of |Psi><Psi|.

    ``bases`` may be the radial bases themselves or just their sizes per l.
    """
    c = np.asarray(state.coefficients, dtype=float)
    norm = float(c @ c)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (|c|^2 = {norm:.3e})")
    shells = sorted({cfg.l for cfg in configs})
    sizes = {l: (b if isinstance(b, (int, np.integer)) else b.retained)
             for l, b in bases.items() if l in shells}
    d = radial_coefficient_matrices(c, configs, sizes)
    blocks, mult, spectra, parts = {}, {}, {}, []
    for l in shells:
        mult[l] = 2 * l + 1
        blocks[l] = d[l] @ d[l].T / mult[l]
        lam = np.linalg.eigvalsh(blocks[l])[::-1]
        spectra[l] = lam
        parts.append(np.repeat(lam, mult[l]))
    spectrum = np.sort(np.concatenate(parts))[::-1]
    return ReducedDensity(blocks, mult, spectrum, spectra)


def _checked(spectrum) -> np.ndarray:
    lam = np.asarray(spectrum, dtype=float)
    if lam.size == 0:
        raise ConsistencyError("empty spectrum")
    if lam.min() < -NEGATIVE_TOL:
        raise ConsistencyError(f"negative eigenvalue {lam.min():.3e}")
    if abs(lam.sum() - 1.0) > TRACE_TOL:
        raise ConsistencyError(f"trace {lam.sum():.15f} differs from 1")
    return lam


def von_neumann_entropy(spectrum) -> float:
    """-sum lambda log2 lambda in bits; eigenvalues below 1e-14 contribute nothing."""
    lam = _checked(spectrum)
    lam = lam[lam >= ZERO_CUTOFF]
    return float(-(lam * np.log2(lam)).sum())


def linear_entropy(spectrum) -> float:
    """1 - Tr(rho^2)."""
    lam = _checked(spectrum)
    return float(1.0 - (lam * lam).sum())


def reference_entropy(state: CiState) -> int:
    """Entropy (0 or 1 bit) of the non-interacting state the eigenstate is closest to.

    Doubly occupied symmetric configurations are product states (0 bits);
    every other configuration is a symmetrized or antisymmetrized pair (1 bit).
    """
    if state.dominant is None:
        raise AmbiguousReferenceError("state has no dominant configuration; label it first")
    if state.dominant_weight < 0.5:
        raise AmbiguousReferenceError(
            f"dominant weight {state.dominant_weight:.3f} < 0.5 for {state.label or state.ordinal}"
        )
    cfg = state.dominant
    if state.sector is SpatialSector.SYMMETRIC and cfg.n1 == cfg.n2:
        return 0
    return 1


def entanglement_measure(s_vn: float, s0: float) -> float:
    """Distance |S - S0| between the entropy and its non-interacting reference."""
    if s0 not in (0, 1):
        raise ValueError(f"reference entropy must be 0 or 1, got {s0}")
    return abs(s_vn - s0)


def dehesa_measure(spectrum, sector) -> float:
    """1 - 2 Tr(R1^2) with R1 the full (orbital x spin) one-electron density.

    Tr(R1^2) = Tr(rho1^2) Tr(rho_spin^2).  The one-electron spin purity is
    1/2 for the singlet and for the m_s = 0 triplet component, which is the
    component used here, so the measure reduces to the linear entropy in both
    sectors.
    """
    SpatialSector.parse(sector)
    purity = float((np.asarray(spectrum, dtype=float) ** 2).sum())
    return 1.0 - 2.0 * purity * SPIN_PURITY


def inverse_participation_ratio(spectrum) -> float:
    """1 / sum lambda_k^2 of the one-electron spectrum."""
    lam = np.asarray(spectrum, dtype=float)
    return float(1.0 / (lam * lam).sum())


@dataclass
class EntropyReport:
    label: str
    energy: float
    spectrum: np.ndarray = field(repr=False)
    s_vn: float
    s_lin: float
    s0: int
    entanglement: float
    comparison_dehesa: float
    comparison_ipr: float

    @property
    def shifted_entropy(self) -> float:
        """S - 1, the measure used for antisymmetric wavefunctions (informational)."""
        return self.s_vn - 1.0


def entropy_report(state: CiState, configs, bases, convention: str = "shell") -> EntropyReport:
    """All entropy measures of ``state`` from the chosen spectrum convention."""
    rho = reduced_density(state, configs, bases)
    lam = rho.spectrum_for(convention)
    s = von_neumann_entropy(lam)
    s0 = reference_entropy(state)
    return EntropyReport(
        label=state.label, energy=state.energy, spectrum=lam,
        s_vn=s, s_lin=linear_entropy(lam), s0=s0,
        entanglement=entanglement_measure(s, s0),
        comparison_dehesa=dehesa_measure(lam, state.sector),
        comparison_ipr=inverse_participation_ratio(lam),
    )


def write_spectrum(spectrum, path) -> None:
    """Two-column ``k lambda_k`` text, descending, k starting at 1."""
    lam = np.sort(np.asarray(spectrum, dtype=float))[::-1]
    with open(path, "w", newline="\n") as fh:
        for k, value in enumerate(lam, start=1):
            fh.write(f"{k} {value:.12e}\n")
