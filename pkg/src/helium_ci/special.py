"""Exact combinatorial and angular-momentum kernels.

The two-electron configurations used throughout the package are coupled to
total orbital angular momentum L = 0.  For a pair of electrons that share the
orbital quantum number ``l`` the coupled angular function is

    Theta_l(1, 2) = (-1)**l * sum_m cg_zero_coupling(l, m) Y_lm(1) Y_l,-m(2)
                  = sqrt(2l + 1) / (4 pi) * P_l(cos theta_12)

The extra ``(-1)**l`` phase makes every angular coupling coefficient
non-negative; it has no effect on energies or entropies.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

FACTORIAL_LIMIT = 170


def factorial_exact(a: int) -> int:
    """Return ``a!`` as an exact Python integer.

    The guard ``a <= 170`` keeps the result representable as a float, since
    callers eventually convert it.
    """
    if isinstance(a, bool) or not isinstance(a, int):
        raise TypeError(f"factorial argument must be an integer, got {a!r}")
    if a < 0 or a > FACTORIAL_LIMIT:
        raise ValueError(f"factorial argument out of range [0, {FACTORIAL_LIMIT}]: {a}")
    return math.factorial(a)


def cg_zero_coupling(l: int, m: int) -> float:
    """Clebsch-Gordan coefficient <l m, l -m | 0 0> = (-1)**(l-m) / sqrt(2l+1)."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid (l, m) = ({l}, {m})")
    return (-1.0) ** ((l - m) % 2) / math.sqrt(2 * l + 1)


def coupled_angular_weight(l: int, m: int) -> float:
    """Weight of Y_lm(1) Y_l,-m(2) inside ``Theta_l``: (-1)**m / sqrt(2l+1)."""
    return (-1.0) ** (l % 2) * cg_zero_coupling(l, m)


def threej_zero_squared(l1: int, l2: int, l3: int) -> Fraction:
    """Square of the 3j symbol (l1 l2 l3; 0 0 0) as an exact rational."""
    big_j = l1 + l2 + l3
    if min(l1, l2, l3) < 0 or big_j % 2:
        return Fraction(0)
    if l3 > l1 + l2 or l3 < abs(l1 - l2):
        return Fraction(0)
    g = big_j // 2
    f = math.factorial
    num = f(big_j - 2 * l1) * f(big_j - 2 * l2) * f(big_j - 2 * l3)
    ratio = Fraction(f(g), f(g - l1) * f(g - l2) * f(g - l3))
    return Fraction(num, f(big_j + 1)) * ratio * ratio


@lru_cache(maxsize=None)
def angular_coupling_coefficient(k: int, l: int, lp: int) -> float:
    """Angular factor of the multipole ``k`` of 1/r12 between ``Theta_l`` and ``Theta_lp``.

    <Theta_l| P_k(cos theta_12) |Theta_lp> = sqrt((2l+1)(2lp+1)) (l k lp; 0 0 0)**2

    Zero whenever the parity or triangle rule fails.
    """
    if min(k, l, lp) < 0:
        raise ValueError(f"negative angular momentum in ({k}, {l}, {lp})")
    w = threej_zero_squared(l, k, lp)
    if w == 0:
        return 0.0
    # (2l+1)(2lp+1) * w**2 is rational; one square root at the end
    return math.sqrt(float((2 * l + 1) * (2 * lp + 1) * w * w))
