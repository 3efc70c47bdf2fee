"""Configuration-interaction Hamiltonian for L = 0 states of two-electron atoms.

Configurations are symmetrized (singlet) or antisymmetrized (triplet) products
of orthonormal radial functions f_i, f_j sharing an angular momentum ``l``,
multiplied by the L = 0 coupled angular function of the pair.  The Hamiltonian
is first built on the plain product space f_i(r1) f_j(r2) of each ``l`` and
then projected with an explicit symmetrizer, so the normalization factors of
the symmetrized radial functions appear in exactly one place.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import integrals
from .special import angular_coupling_coefficient
from .sto import OrthonormalRadialBasis

L_LETTERS = "spdfghik"
SYMMETRY_TOL = 1e-12
# Shells whose smallest retained overlap eigenvalue falls below this value
# get their two-electron integrals in extended precision: roundoff in the
# four-index transform grows like eps / lambda_min**2.
EXTENDED_BELOW = 1e-3
PRECISIONS = ("auto", "double", "extended")


class VariationalBoundError(ArithmeticError):
    """An eigenvalue fell below the exact lower bound -Z**2, so the basis is numerically broken."""


class SpatialSector(str, enum.Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"

    @property
    def sign(self) -> int:
        return 1 if self is SpatialSector.SYMMETRIC else -1

    @property
    def spin_label(self) -> str:
        return "¹S" if self is SpatialSector.SYMMETRIC else "³S"

    @classmethod
    def parse(cls, value) -> "SpatialSector":
        if isinstance(value, cls):
            return value
        aliases = {"singlet": cls.SYMMETRIC, "triplet": cls.ANTISYMMETRIC,
                   "symmetric": cls.SYMMETRIC, "antisymmetric": cls.ANTISYMMETRIC}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown sector {value!r}") from None


@dataclass(frozen=True, order=True)
class Configuration:
    """Pair of radial functions (1-based indices ``n1 <= n2``) in shell ``l``."""

    l: int
    n1: int
    n2: int
    sector: SpatialSector = field(compare=False)

    def __post_init__(self):
        if not 1 <= self.n1 <= self.n2:
            raise ValueError(f"need 1 <= n1 <= n2, got ({self.n1}, {self.n2})")
        if self.sector is SpatialSector.ANTISYMMETRIC and self.n1 == self.n2:
            raise ValueError("antisymmetric configuration needs n1 < n2")

    def orbital_names(self) -> tuple[str, str]:
        return orbital_name(self.n1, self.l), orbital_name(self.n2, self.l)

    def __str__(self) -> str:
        a, b = self.orbital_names()
        return f"({a})²" if a == b else f"{a}{b}"


def orbital_name(index: int, l: int) -> str:
    """Spectroscopic name of the ``index``-th (1-based) radial function of shell ``l``."""
    letter = L_LETTERS[l] if l < len(L_LETTERS) else f"[l={l}]"
    return f"{index + l}{letter}"


def enumerate_configurations(n_max, l_max: int, sector) -> list[Configuration]:
    """All configurations for radial counts ``n_max`` (scalar or one per l)."""
    sector = SpatialSector.parse(sector)
    counts = _per_l(n_max, l_max)
    configs = []
    for l, n in enumerate(counts):
        for n1 in range(1, n + 1):
            start = n1 if sector is SpatialSector.SYMMETRIC else n1 + 1
            configs.extend(Configuration(l, n1, n2, sector) for n2 in range(start, n + 1))
    return configs


def _per_l(n_max, l_max: int) -> list[int]:
    if np.ndim(n_max) == 0:
        return [int(n_max)] * (l_max + 1)
    counts = [int(n) for n in n_max]
    if len(counts) < l_max + 1:
        raise ValueError(f"need {l_max + 1} radial counts, got {len(counts)}")
    return counts[: l_max + 1]


def spectroscopic_orbitals(bases: Mapping[int, OrthonormalRadialBasis], Z: float) -> dict[int, OrthonormalRadialBasis]:
    """Rotate each shell so its radial functions resemble atomic orbitals.

    The first s function becomes the hydrogenic 1s of charge ``Z``; all other
    functions diagonalize the one-electron operator screened by that 1s
    electron.  This only fixes which radial index carries which name (and hence
    the dominant-configuration labels); spans, energies and entropies are
    unchanged.
    """
    if 0 not in bases:
        return dict(bases)
    h0 = integrals.one_electron_matrix(bases[0], Z)
    _, vecs = np.linalg.eigh(h0)
    core = vecs[:, :1]
    density = core @ core.T
    out = {}
    for l, basis in bases.items():
        f = integrals.one_electron_matrix(basis, Z) + integrals.coulomb_matrix(density, bases[0], basis)
        if l == 0:
            # complement of the core, then diagonalize the screened operator there
            q, _ = np.linalg.qr(np.hstack([core, np.eye(basis.retained)]))
            comp = q[:, 1:basis.retained]
            _, w = np.linalg.eigh(comp.T @ f @ comp)
            rotation = np.hstack([core, comp @ w])
        else:
            _, rotation = np.linalg.eigh(f)
        idx = np.argmax(np.abs(rotation), axis=0)
        rotation = rotation * np.sign(rotation[idx, np.arange(rotation.shape[1])])
        out[l] = basis.rotated(rotation)
    return out


@dataclass
class IntegralTable:
    """One-electron matrices per l and multipole-summed pair interactions per (l, l')."""

    one_body: dict[int, np.ndarray]
    pair: dict[tuple[int, int], np.ndarray]


def needs_extended(basis: OrthonormalRadialBasis) -> bool:
    return float(basis.overlap_spectrum[: basis.retained].min()) < EXTENDED_BELOW


def build_integral_table(bases: Mapping[int, OrthonormalRadialBasis], Z: float,
                         interaction: bool = True, workers: int = 1,
                         precision: str = "auto") -> IntegralTable:
    """Precompute every integral needed by :func:`assemble_hamiltonian`.

    ``pair[(l, lp)][i, j, i', j']`` is <f_i f_j Theta_l | 1/r12 | f_i' f_j' Theta_lp>
    for l <= lp.  With ``workers > 1`` the Slater tensors are evaluated in a
    thread pool; they are summed in a fixed order either way, so the result
    does not depend on ``workers``.  ``precision="auto"`` uses extended
    precision only for shell pairs that contain a poorly conditioned shell.
    """
    if precision not in PRECISIONS:
        raise ValueError(f"precision must be one of {PRECISIONS}, got {precision!r}")
    ls = sorted(bases)
    one_body = {l: integrals.one_electron_matrix(bases[l], Z) for l in ls}
    pair = {}
    if not interaction:
        return IntegralTable(one_body, pair)
    jobs = []
    for a, l in enumerate(ls):
        for lp in ls[a:]:
            for k in range(abs(l - lp), l + lp + 1, 2):
                coef = angular_coupling_coefficient(k, l, lp)
                if coef:
                    jobs.append((l, lp, k, coef))

    def run(job):
        l, lp, k, _ = job
        if precision == "auto":
            extended = needs_extended(bases[l]) or needs_extended(bases[lp])
        else:
            extended = precision == "extended"
        return integrals.slater_tensor(k, bases[l], bases[lp], extended)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tensors = list(pool.map(run, jobs))
    else:
        tensors = [run(job) for job in jobs]
    for (l, lp, _, coef), t in zip(jobs, tensors):
        # slater_tensor is indexed [i, i', j, j']; reorder to [i, j, i', j']
        term = coef * t.transpose(0, 2, 1, 3)
        pair[(l, lp)] = pair[(l, lp)] + term if (l, lp) in pair else term
    return IntegralTable(one_body, pair)


def symmetrizer(configs: Sequence[Configuration], sizes: Mapping[int, int]) -> tuple[list[int], np.ndarray]:
    """Map configuration coefficients onto the plain product space.

    Returns the product-space block offsets per l (in ``sorted(sizes)`` order)
    and a matrix U with ``psi_product = U @ c``.
    """
    ls = sorted(sizes)
    offsets, total = {}, 0
    for l in ls:
        offsets[l] = total
        total += sizes[l] ** 2
    u = np.zeros((total, len(configs)))
    for col, cfg in enumerate(configs):
        n = sizes[cfg.l]
        i, j = cfg.n1 - 1, cfg.n2 - 1
        if j >= n:
            raise ValueError(f"configuration {cfg} exceeds the {n} radial functions of l={cfg.l}")
        base = offsets[cfg.l]
        if i == j:
            u[base + i * n + i, col] = 1.0
        else:
            u[base + i * n + j, col] = np.sqrt(0.5)
            u[base + j * n + i, col] = cfg.sector.sign * np.sqrt(0.5)
    return [offsets[l] for l in ls], u


def product_hamiltonian(table: IntegralTable, sizes: Mapping[int, int]) -> np.ndarray:
    ls = sorted(sizes)
    offsets, total = {}, 0
    for l in ls:
        offsets[l] = total
        total += sizes[l] ** 2
    h = np.zeros((total, total))
    for l in ls:
        n = sizes[l]
        eye = np.eye(n)
        hl = table.one_body[l][:n, :n]
        block = np.kron(hl, eye) + np.kron(eye, hl)
        s = slice(offsets[l], offsets[l] + n * n)
        h[s, s] += block
    for (l, lp), v in table.pair.items():
        if l not in sizes or lp not in sizes:
            continue
        n, m = sizes[l], sizes[lp]
        block = v[:n, :n, :m, :m].reshape(n * n, m * m)
        r = slice(offsets[l], offsets[l] + n * n)
        c = slice(offsets[lp], offsets[lp] + m * m)
        h[r, c] += block
        if l != lp:
            h[c, r] += block.T
    return h


def assemble_hamiltonian(configs: Sequence[Configuration], bases: Mapping[int, OrthonormalRadialBasis],
                         Z: float = 2.0, interaction: bool = True,
                         table: IntegralTable | None = None) -> np.ndarray:
    """CI matrix <Phi_P|H|Phi_Q> over ``configs`` (hartree)."""
    needed = {cfg.l for cfg in configs}
    missing = needed - set(bases)
    if missing:
        raise ValueError(f"no radial basis for l = {sorted(missing)}")
    sizes = {l: bases[l].retained for l in sorted(needed)}
    if table is None:
        table = build_integral_table({l: bases[l] for l in sizes}, Z, interaction)
    _, u = symmetrizer(configs, sizes)
    h = u.T @ product_hamiltonian(table, sizes) @ u
    upper = np.triu(h)
    return upper + np.triu(h, 1).T


def check_lower_bound(eigenvalues, Z: float, tol: float = 1e-8) -> None:
    """Raise if the spectrum violates E >= -Z**2 (the bare-nucleus two-electron bound)."""
    if len(eigenvalues) and eigenvalues[0] < -Z * Z - tol:
        raise VariationalBoundError(
            f"eigenvalue {eigenvalues[0]:.6f} below the exact bound {-Z * Z:.6f}; "
            "the radial basis is too close to linear dependence"
        )


def diagonalize(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric matrix."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    scale = max(np.abs(h).max(), 1.0) if h.size else 1.0
    if np.abs(h - h.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh(h)
    # deterministic phase: largest component positive
    idx = np.argmax(np.abs(v), axis=0)
    v = v * np.sign(v[idx, np.arange(v.shape[1])])
    return w, v


@dataclass
class CiState:
    energy: float
    coefficients: np.ndarray
    sector: SpatialSector
    ordinal: int
    label: str = ""
    dominant: Configuration | None = None
    dominant_weight: float = 0.0


def label_states(eigenvalues, eigenvectors, configs: Sequence[Configuration],
                 count: int | None = None) -> list[CiState]:
    """Attach spectroscopic labels from each state's dominant configuration."""
    if not configs:
        return []
    sector = configs[0].sector
    count = len(eigenvalues) if count is None else min(count, len(eigenvalues))
    keys = [(c.n1, c.n2, c.l) for c in configs]
    states = []
    for k in range(count):
        c = np.asarray(eigenvectors[:, k], dtype=float)
        weights = c**2
        top = weights.max()
        # ties resolved towards the lexicographically lowest (n1, n2, l)
        candidates = [p for p in range(len(configs)) if weights[p] >= top - 1e-12]
        best = min(candidates, key=lambda p: keys[p])
        cfg = configs[best]
        a, b = cfg.orbital_names()
        body = f"({a})²" if a == b else f"{a}{b}"
        states.append(CiState(
            energy=float(eigenvalues[k]), coefficients=c, sector=sector, ordinal=k,
            label=f"{body} {sector.spin_label}", dominant=cfg, dominant_weight=float(weights[best]),
        ))
    return states
