"""Slater-type radial orbitals and orthonormal radial bases.

A raw orbital is ``r**(n + l - 1) * exp(-xi * r)``; integrals use the radial
measure ``r**2 dr``.  All one-dimensional integrals reduce to

    int_0^inf r**a exp(-b r) dr = a! / b**(a + 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .special import factorial_exact

DEFAULT_DROP_THRESHOLD = 1e-10


class DegenerateBasisError(ValueError):
    """Raised when orthonormalization leaves no usable radial function."""


@dataclass(frozen=True, order=True)
class StoOrbital:
    n: int
    l: int
    xi: float

    def __post_init__(self):
        if self.n < 1 or self.l < 0:
            raise ValueError(f"invalid quantum numbers n={self.n}, l={self.l}")
        if not self.xi > 0:
            raise ValueError(f"Slater exponent must be positive, got {self.xi}")

    @property
    def power(self) -> int:
        """Power of r in the raw orbital."""
        return self.n + self.l - 1

    def norm(self) -> float:
        """Normalization constant N such that N * orbital has unit norm."""
        p = self.power
        return (2.0 * self.xi) ** (p + 1.5) / math.sqrt(factorial_exact(2 * p + 2))


def radial_moment_integral(a: int, b: float) -> float:
    """Return ``a! / b**(a+1)``, the integral of r**a exp(-b r) over [0, inf)."""
    if a < 0:
        raise ValueError(f"moment order must be non-negative, got {a}")
    if not b > 0:
        raise ValueError(f"decay rate must be positive, got {b}")
    return math.exp(math.lgamma(a + 1) - (a + 1) * math.log(b)) if a > 150 else factorial_exact(a) / b ** (a + 1)


def overlap(o1: StoOrbital, o2: StoOrbital) -> float:
    """Unnormalized overlap <o1|o2> with measure r**2 dr."""
    if o1.l != o2.l:
        raise ValueError(f"overlap between different l ({o1.l}, {o2.l})")
    return radial_moment_integral(o1.power + o2.power + 2, o1.xi + o2.xi)


def normalized_overlap(o1: StoOrbital, o2: StoOrbital) -> float:
    """Overlap of the normalized orbitals, evaluated without large intermediates."""
    if o1.l != o2.l:
        raise ValueError(f"overlap between different l ({o1.l}, {o2.l})")
    pa, pb = o1.power, o2.power
    m = pa + pb + 2
    f = math.factorial
    ratio = Fraction(f(m) ** 2, f(2 * pa + 2) * f(2 * pb + 2))
    geo = 2.0 * math.sqrt(o1.xi * o2.xi) / (o1.xi + o2.xi)
    return math.sqrt(ratio) * geo ** (m + 1) * (o1.xi / o2.xi) ** (0.5 * (pa - pb))


def even_tempered(l: int, count: int, alpha: float, beta: float) -> list[StoOrbital]:
    """Orbitals n = 1..count with exponents xi_n = alpha * beta**(n-1)."""
    return [StoOrbital(n, l, alpha * beta ** (n - 1)) for n in range(1, count + 1)]


@dataclass(frozen=True)
class OrthonormalRadialBasis:
    """Orthonormal radial functions f_i = sum_a transform[a, i] * raw_a.

    ``norm_transform`` acts on the *normalized* raw orbitals instead; it is the
    form used by the integral code.
    """

    l: int
    orbitals: tuple[StoOrbital, ...]
    norm_transform: np.ndarray
    overlap_spectrum: np.ndarray = field(repr=False)

    @property
    def retained(self) -> int:
        return self.norm_transform.shape[1]

    @property
    def norms(self) -> np.ndarray:
        return np.array([o.norm() for o in self.orbitals])

    @property
    def transform(self) -> np.ndarray:
        return self.norms[:, None] * self.norm_transform

    @property
    def powers(self) -> np.ndarray:
        return np.array([o.power for o in self.orbitals])

    @property
    def exponents(self) -> np.ndarray:
        return np.array([o.xi for o in self.orbitals])

    def rotated(self, rotation: np.ndarray) -> "OrthonormalRadialBasis":
        """Same span, functions recombined by an orthogonal ``rotation``."""
        return OrthonormalRadialBasis(
            self.l, self.orbitals, self.norm_transform @ rotation, self.overlap_spectrum
        )

    def evaluate(self, r) -> np.ndarray:
        """Values of all retained functions at radii ``r``; shape (len(r), retained)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        raw = np.power(r[:, None], self.powers[None, :]) * np.exp(-np.outer(r, self.exponents))
        return (raw * self.norms[None, :]) @ self.norm_transform


def normalized_overlap_matrix(orbitals: Sequence[StoOrbital]) -> np.ndarray:
    k = len(orbitals)
    s = np.eye(k)
    for a in range(k):
        for b in range(a + 1, k):
            s[a, b] = s[b, a] = normalized_overlap(orbitals[a], orbitals[b])
    return s


def raw_overlap_matrix(orbitals: Sequence[StoOrbital]) -> np.ndarray:
    return np.array([[overlap(a, b) for b in orbitals] for a in orbitals])


def orthonormalize(
    orbitals: Sequence[StoOrbital], drop_threshold: float = DEFAULT_DROP_THRESHOLD
) -> OrthonormalRadialBasis:
    """Canonical orthonormalization of Slater orbitals sharing one ``l``.

    Eigenvectors of the normalized overlap matrix with eigenvalue below
    ``drop_threshold`` are discarded; the rest are scaled by 1/sqrt(eigenvalue).
    Retained functions are ordered by decreasing overlap eigenvalue, each with
    its largest coefficient made positive.
    """
    orbitals = tuple(orbitals)
    if not orbitals:
        raise ValueError("cannot orthonormalize an empty orbital list")
    ls = {o.l for o in orbitals}
    if len(ls) != 1:
        raise ValueError(f"orbitals mix angular momenta {sorted(ls)}")
    s = normalized_overlap_matrix(orbitals)
    w, u = np.linalg.eigh(s)
    w, u = w[::-1], u[:, ::-1]
    keep = w > drop_threshold
    if not keep.any():
        raise DegenerateBasisError(
            f"all overlap eigenvalues below drop threshold {drop_threshold:g}"
        )
    u = u[:, keep]
    signs = np.sign(u[np.argmax(np.abs(u), axis=0), np.arange(u.shape[1])])
    t = u * signs / np.sqrt(w[keep])
    return OrthonormalRadialBasis(ls.pop(), orbitals, t, w)


def evaluate_radial(basis: OrthonormalRadialBasis, index: int, r) -> np.ndarray | float:
    """Value of the ``index``-th orthonormal radial function at ``r``."""
    if not 0 <= index < basis.retained:
        raise IndexError(f"radial index {index} outside [0, {basis.retained})")
    scalar = np.ndim(r) == 0
    if np.any(np.asarray(r) < 0):
        raise ValueError("radius must be non-negative")
    values = basis.evaluate(r)[:, index]
    return float(values[0]) if scalar else values


def dump_radial_functions(basis: OrthonormalRadialBasis, path, r_max: float = 40.0, points: int = 801):
    """Write ``r f_0(r) f_1(r) ...`` columns as plain text for plotting."""
    r = np.linspace(0.0, r_max, points)
    table = np.column_stack([r, basis.evaluate(r)])
    header = "r " + " ".join(f"f{i}" for i in range(basis.retained))
    np.savetxt(Path(path), table, header=header, fmt="%.10e")
