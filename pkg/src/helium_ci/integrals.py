"""Closed-form radial integrals over Slater-type orbitals.

The Slater integral of multipole order k splits into the two orderings
r2 < r1 and r1 < r2.  Each ordering is a double integral

    W(p, q; a, b) = int_0^inf dx x**p e^{-a x} int_0^x dy y**q e^{-b y}
                  = p! * sum_{j=0}^{p} (q + j)! / (j! a**(p+1-j) (a+b)**(q+j+1))

which is a finite sum of positive terms (no cancellation).  Batched evaluation
runs in float64 by default; ``extended=True`` switches to ``numpy.longdouble``
for nearly linearly dependent orbital sets, where the orthonormal transform
has large coefficients.
"""

from __future__ import annotations

import math

import numpy as np

from .sto import OrthonormalRadialBasis, StoOrbital

_EXT = np.longdouble
_LOG_FACTORIAL_EXT = np.concatenate(
    [[_EXT(0)], np.cumsum(np.log(np.arange(1, 400, dtype=_EXT)))]
)
_LOG_FACTORIAL = {np.dtype(_EXT): _LOG_FACTORIAL_EXT,
                  np.dtype(np.float64): _LOG_FACTORIAL_EXT.astype(np.float64)}


def _log_norm(power, xi):
    """log of the normalization constant of r**power exp(-xi r) (measure r**2 dr)."""
    power = np.asarray(power)
    xi = np.asarray(xi, dtype=_EXT)
    return (power + 1.5) * np.log(2 * xi) - 0.5 * _LOG_FACTORIAL_EXT[2 * power + 2]


def _ordered_sum(p, q, a, b, log_scale):
    """Batched W(p, q; a, b) * exp(log_scale) for integer arrays p >= 0, q >= 0."""
    p, q, a, b, log_scale = np.broadcast_arrays(p, q, a, b, log_scale)
    lf = _LOG_FACTORIAL[a.dtype]
    term = np.exp(lf[p] + lf[q] - (p + 1) * np.log(a) - (q + 1) * np.log(a + b) + log_scale)
    total = term.copy()
    x = a / (a + b)
    # all terms are positive, so running past a short row only needs masking
    for j in range(int(p.max(initial=0))):
        term *= (q + j + 1) * x / (j + 1)
        total += np.where(p > j, term, 0)
    return total


def normalized_slater_batch(k, power1, zeta1, power2, zeta2, log_norm):
    """R^k for electron densities r**power * exp(-zeta r) (r**2 already folded into power).

    Arguments broadcast; ``power1 - k - 1`` and ``power2 - k - 1`` must be
    non-negative.  Arithmetic runs in the floating type of ``zeta1``, and the
    result is scaled by exp(log_norm).
    """
    power1 = np.asarray(power1)
    power2 = np.asarray(power2)
    if np.any(power1 - k - 1 < 0) or np.any(power2 - k - 1 < 0):
        raise ValueError("multipole order too large for the finite-sum form")
    zeta1 = np.asarray(zeta1)
    if zeta1.dtype not in _LOG_FACTORIAL:
        zeta1 = zeta1.astype(np.float64)
    dtype = zeta1.dtype
    zeta2 = np.asarray(zeta2, dtype=dtype)
    log_norm = np.asarray(log_norm, dtype=dtype)
    inner = _ordered_sum(power1 - k - 1, power2 + k, zeta1, zeta2, log_norm)
    outer = _ordered_sum(power2 - k - 1, power1 + k, zeta2, zeta1, log_norm)
    return inner + outer


def _ordered_series(p, q, a, b, tol=1e-17, max_terms=20000):
    """W(p, q; a, b) by its infinite series; valid for any p with p + q + 1 >= 0."""
    s = p + q + 1
    term = math.exp(math.lgamma(s + 1) - math.log(q + 1) - (s + 1) * math.log(a + b))
    total = term
    for j in range(max_terms):
        term *= b * (s + j + 1) / ((q + j + 2) * (a + b))
        total += term
        if term < tol * total and j > s:
            break
    return total


def slater_radial_integral(k: int, a: StoOrbital, b: StoOrbital, c: StoOrbital, d: StoOrbital) -> float:
    """R^k(ab; cd) for raw (unnormalized) orbitals.

    R^k = int int a(r1) c(r1) r<**k / r>**(k+1) b(r2) d(r2) r1**2 r2**2 dr1 dr2
    """
    if k < 0:
        raise ValueError(f"multipole order must be non-negative, got {k}")
    p1 = a.power + c.power + 2
    p2 = b.power + d.power + 2
    z1 = a.xi + c.xi
    z2 = b.xi + d.xi
    if p1 - k - 1 >= 0 and p2 - k - 1 >= 0:
        return float(normalized_slater_batch(k, p1, _EXT(z1), p2, _EXT(z2), 0))
    # high multipoles: the ordered pieces no longer reduce to finite sums
    return _ordered_series(p1 - k - 1, p2 + k, z1, z2) + _ordered_series(p2 - k - 1, p1 + k, z2, z1)


def one_electron_raw(basis: OrthonormalRadialBasis, Z: float) -> tuple[np.ndarray, np.ndarray]:
    """Kinetic and nuclear-attraction matrices over the *normalized* raw orbitals."""
    p = basis.powers.astype(float)
    xi = basis.exponents
    ll = basis.l * (basis.l + 1)
    orbitals = basis.orbitals
    from .sto import normalized_overlap_matrix

    s = normalized_overlap_matrix(orbitals)
    pa, pb = p[:, None], p[None, :]
    xa, xb = xi[:, None], xi[None, :]
    zeta = xa + xb
    m = pa + pb + 2
    kinetic = 0.5 * s * ((pa * pb + ll) * zeta**2 / (m * (m - 1)) - (pa * xb + pb * xa) * zeta / m + xa * xb)
    nuclear = -Z * s * zeta / m
    return kinetic, nuclear


def one_electron_matrix(basis: OrthonormalRadialBasis, Z: float) -> np.ndarray:
    """Radial one-electron Hamiltonian -1/2 nabla^2 - Z/r over the orthonormal functions."""
    kinetic, nuclear = one_electron_raw(basis, Z)
    t = basis.norm_transform
    h = t.T @ (kinetic + nuclear) @ t
    return 0.5 * (h + h.T)


def one_electron_matrix_element(basis: OrthonormalRadialBasis, i: int, j: int, Z: float) -> float:
    """<f_i| -1/2 (d2/dr2 + 2/r d/dr - l(l+1)/r2) - Z/r |f_j>."""
    n = basis.retained
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"radial indices ({i}, {j}) outside [0, {n})")
    return float(one_electron_matrix(basis, Z)[i, j])


def _pair_list(basis_a: OrthonormalRadialBasis, basis_b: OrthonormalRadialBasis, same: bool):
    """Distinct orbital products (a, b); only a <= b when both come from one basis."""
    na, nb = len(basis_a.orbitals), len(basis_b.orbitals)
    ia, ib = np.triu_indices(na) if same else np.indices((na, nb)).reshape(2, -1)
    pa, pb = basis_a.powers, basis_b.powers
    xa, xb = basis_a.exponents, basis_b.exponents
    power = pa[ia] + pb[ib] + 2
    zeta = xa[ia] + xb[ib]
    log_norm = _log_norm(pa[ia], xa[ia]) + _log_norm(pb[ib], xb[ib])
    return ia, ib, power, zeta, log_norm


def raw_slater_tensor(k: int, basis_l: OrthonormalRadialBasis, basis_lp: OrthonormalRadialBasis,
                      extended: bool = False) -> np.ndarray:
    """R^k over normalized raw orbitals, indexed ``[a, c, b, d]``.

    Electron 1 carries a (from ``basis_l``) times c (from ``basis_lp``), and
    electron 2 carries b times d from the same two bases.  Only the distinct
    orbital products and one ordering of the two electrons are evaluated.
    """
    dtype = _EXT if extended else np.float64
    same = basis_l is basis_lp or basis_l.orbitals == basis_lp.orbitals
    ia, ib, power, zeta, log_norm = _pair_list(basis_l, basis_lp, same)
    npair = power.size
    u, v = np.triu_indices(npair)
    values = normalized_slater_batch(
        k, power[u], zeta[u].astype(dtype), power[v], zeta[v].astype(dtype),
        (log_norm[u] + log_norm[v]).astype(dtype),
    )
    table = np.zeros((npair, npair), dtype=dtype)
    table[u, v] = values
    table[v, u] = values
    na, nb = len(basis_l.orbitals), len(basis_lp.orbitals)
    slot = np.empty((na, nb), dtype=int)
    slot[ia, ib] = np.arange(npair)
    if same:
        slot[ib, ia] = np.arange(npair)
    return table[slot[:, :, None, None], slot[None, None, :, :]]


def slater_tensor(k: int, basis_l: OrthonormalRadialBasis, basis_lp: OrthonormalRadialBasis,
                  extended: bool = False) -> np.ndarray:
    """R^k over orthonormal functions, indexed ``[i, i', j, j']``.

    Electron 1 carries the density f_i f_i' (i from ``basis_l``, i' from
    ``basis_lp``), electron 2 the density f_j f_j' from the same bases.
    """
    raw = raw_slater_tensor(k, basis_l, basis_lp, extended)
    dtype = raw.dtype
    t1 = basis_l.norm_transform.astype(dtype)
    t2 = basis_lp.norm_transform.astype(dtype)
    out = np.tensordot(raw, t2, axes=([3], [0]))
    out = np.tensordot(out, t1, axes=([2], [0]))
    out = np.tensordot(out, t2, axes=([1], [0]))
    out = np.tensordot(out, t1, axes=([0], [0]))
    # axes are now (j', j, i', i)
    return np.ascontiguousarray(out.transpose(3, 2, 1, 0)).astype(float)


def coulomb_matrix(density: np.ndarray, basis_core: OrthonormalRadialBasis,
                   basis: OrthonormalRadialBasis) -> np.ndarray:
    """Spherical Coulomb potential of a radial density, as a matrix over ``basis``.

    ``density`` is a one-electron density matrix over the orthonormal
    functions of ``basis_core``; only its monopole (k = 0) field is used.
    """
    pc, zc, nc = (x.reshape(-1) for x in _full_pairs(basis_core))
    pb, zb, nb = (x.reshape(-1) for x in _full_pairs(basis))
    raw = normalized_slater_batch(
        0, pc[:, None], zc[:, None], pb[None, :], zb[None, :], nc[:, None] + nb[None, :]
    )
    n0, n1 = len(basis_core.orbitals), len(basis.orbitals)
    raw = raw.reshape(n0, n0, n1, n1)
    tc = basis_core.norm_transform
    raw_density = tc @ density @ tc.T
    j = np.einsum("ab,abcd->cd", raw_density, raw)
    t = basis.norm_transform
    j = t.T @ j @ t
    return 0.5 * (j + j.T)


def _full_pairs(basis: OrthonormalRadialBasis):
    p, xi = basis.powers, basis.exponents
    power = p[:, None] + p[None, :] + 2
    zeta = xi[:, None] + xi[None, :]
    ln = _log_norm(p, xi).astype(np.float64)
    return power, zeta, ln[:, None] + ln[None, :]
