"""Basis specifications and the end-to-end solve of one exchange sector."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ci import (CiState, Configuration, SpatialSector, assemble_hamiltonian, build_integral_table,
                 check_lower_bound, diagonalize, enumerate_configurations, label_states, spectroscopic_orbitals)
from .entanglement import EntropyReport, entropy_report
from .sto import DEFAULT_DROP_THRESHOLD, OrthonormalRadialBasis, StoOrbital, even_tempered, orthonormalize

EVEN_TEMPERED = "even-tempered"
EXPLICIT = "explicit"
DEFAULT_ALPHA = 2.0
DEFAULT_BETA = 0.6


@dataclass(frozen=True)
class BasisSpec:
    """Slater exponents for every shell l = 0..l_max.

    In even-tempered mode shell l uses ``n_max[l]`` orbitals with exponents
    ``alpha[l] * beta[l]**(n - 1)``.  In explicit mode ``exponents[l]`` lists
    the exponents directly and fixes the orbital count.
    """

    l_max: int
    n_max: tuple[int, ...]
    mode: str = EVEN_TEMPERED
    alpha: tuple[float, ...] = ()
    beta: tuple[float, ...] = ()
    exponents: tuple[tuple[float, ...], ...] = ()
    drop_threshold: float = DEFAULT_DROP_THRESHOLD

    def __post_init__(self):
        if self.l_max < 0:
            raise ValueError(f"l_max must be non-negative, got {self.l_max}")
        if self.mode == EVEN_TEMPERED:
            nl = self.l_max + 1
            for name in ("n_max", "alpha", "beta"):
                if len(getattr(self, name)) != nl:
                    raise ValueError(f"{name} needs {nl} entries (one per l), got {len(getattr(self, name))}")
            if min(self.n_max) < 1:
                raise ValueError("every n_max must be at least 1")
            if min(self.alpha) <= 0 or min(self.beta) <= 0:
                raise ValueError("even-tempered alpha and beta must be positive")
        elif self.mode == EXPLICIT:
            if len(self.exponents) != self.l_max + 1:
                raise ValueError(f"exponents needs {self.l_max + 1} lists, got {len(self.exponents)}")
            if any(len(x) == 0 or min(x) <= 0 for x in self.exponents):
                raise ValueError("explicit exponents must be non-empty and positive")
            object.__setattr__(self, "n_max", tuple(len(x) for x in self.exponents))
        else:
            raise ValueError(f"unknown exponent mode {self.mode!r}")

    @classmethod
    def even(cls, l_max: int, n_max, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA, **kw) -> "BasisSpec":
        """Even-tempered spec; scalars are broadcast over shells."""
        def per_l(v, cast):
            return tuple(cast(x) for x in (np.broadcast_to(v, l_max + 1) if np.ndim(v) == 0 else v))
        return cls(l_max, per_l(n_max, int), EVEN_TEMPERED, per_l(alpha, float), per_l(beta, float), **kw)

    @classmethod
    def explicit(cls, exponents: Sequence[Sequence[float]], **kw) -> "BasisSpec":
        ex = tuple(tuple(float(x) for x in row) for row in exponents)
        return cls(len(ex) - 1, tuple(len(r) for r in ex), EXPLICIT, exponents=ex, **kw)

    def orbitals(self, l: int) -> list[StoOrbital]:
        if self.mode == EVEN_TEMPERED:
            return even_tempered(l, self.n_max[l], self.alpha[l], self.beta[l])
        return [StoOrbital(n, l, xi) for n, xi in enumerate(self.exponents[l], start=1)]

    def bases(self) -> dict[int, OrthonormalRadialBasis]:
        return {l: orthonormalize(self.orbitals(l), self.drop_threshold) for l in range(self.l_max + 1)}

    def smallest_overlap_eigenvalue(self) -> float:
        """Conditioning of the worst shell: smallest retained normalized-overlap eigenvalue."""
        return min(float(b.overlap_spectrum[: b.retained].min()) for b in self.bases().values())

    def parameters(self) -> np.ndarray:
        """Free variational parameters: (alpha_l, beta_l) pairs, or all exponents."""
        if self.mode == EVEN_TEMPERED:
            return np.ravel(np.column_stack([self.alpha, self.beta]))
        return np.concatenate([np.asarray(x) for x in self.exponents])

    def with_parameters(self, values) -> "BasisSpec":
        values = np.asarray(values, dtype=float)
        if values.shape != self.parameters().shape:
            raise ValueError(f"expected {self.parameters().size} parameters, got {values.size}")
        if self.mode == EVEN_TEMPERED:
            return replace(self, alpha=tuple(values[0::2].tolist()), beta=tuple(values[1::2].tolist()))
        rows, start = [], 0
        for n in self.n_max:
            rows.append(tuple(values[start:start + n].tolist()))
            start += n
        return replace(self, exponents=tuple(rows))

    def describe(self) -> dict:
        out = {"l_max": self.l_max, "n_max": list(self.n_max), "mode": self.mode,
               "drop_threshold": self.drop_threshold}
        if self.mode == EVEN_TEMPERED:
            out.update(alpha=list(self.alpha), beta=list(self.beta))
        else:
            out["exponents"] = [list(x) for x in self.exponents]
        return out


@dataclass
class SectorSolution:
    """Eigenstates of one exchange sector together with the basis that produced them."""

    spec: BasisSpec
    sector: SpatialSector
    bases: dict[int, OrthonormalRadialBasis]
    configs: list[Configuration]
    eigenvalues: np.ndarray
    states: list[CiState] = field(default_factory=list)

    def report(self, state: CiState, convention: str = "shell") -> EntropyReport:
        return entropy_report(state, self.configs, self.bases, convention)

    def find(self, label: str) -> CiState:
        for st in self.states:
            if st.label == label or st.label.split()[0] == label:
                return st
        raise KeyError(label)


def sector_energies(spec: BasisSpec, sector, Z: float = 2.0, workers: int = 1,
                    precision: str = "auto") -> np.ndarray:
    """Ascending CI eigenvalues only (the optimizer's cheap path)."""
    sector = SpatialSector.parse(sector)
    bases = spec.bases()
    configs = enumerate_configurations([bases[l].retained for l in sorted(bases)], spec.l_max, sector)
    if not configs:
        return np.array([])
    table = build_integral_table(bases, Z, workers=workers, precision=precision)
    w = np.linalg.eigvalsh(assemble_hamiltonian(configs, bases, Z, table=table))
    check_lower_bound(w, Z)
    return w


def solve_sector(spec: BasisSpec, sector, Z: float = 2.0, count: int | None = None,
                 interaction: bool = True, workers: int = 1, precision: str = "auto") -> SectorSolution:
    """Build, diagonalize and label the lowest ``count`` states of one sector.

    Radial functions are first rotated to orbital-like combinations so that the
    dominant configurations read as (1s)², 1s2s, ...
    """
    sector = SpatialSector.parse(sector)
    bases = spectroscopic_orbitals(spec.bases(), Z)
    configs = enumerate_configurations([bases[l].retained for l in sorted(bases)], spec.l_max, sector)
    if not configs:
        raise ValueError(f"no {sector.value} configurations: every shell has a single radial function")
    table = build_integral_table(bases, Z, interaction, workers=workers, precision=precision)
    w, v = diagonalize(assemble_hamiltonian(configs, bases, Z, interaction, table=table))
    check_lower_bound(w, Z)
    return SectorSolution(spec, sector, bases, configs, w, label_states(w, v, configs, count))
