"""Shared scalar search primitives: bracketed roots, monotone inverses, golden section."""

from __future__ import annotations

import math
from typing import Callable, Tuple

from scipy.optimize import brentq

#: inverse golden ratio, the contraction factor of the section search
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


class BracketError(RuntimeError):
    """Raised when a sign-changing bracket cannot be established."""


def root_with_expanding_bracket(
    f: Callable[[float], float],
    hi: float = 1.0,
    max_doublings: int = 200,
    rtol: float = 1e-12,
) -> float:
    """Root of ``f`` on (0, inf) for f negative near 0 and eventually positive.

    Doubles ``hi`` until ``f(hi) > 0`` (at most ``max_doublings`` times), then
    solves on the bracket to an absolute tolerance of ``rtol * hi``.
    """
    if hi <= 0:
        hi = 1.0
    for _ in range(max_doublings):
        if f(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise BracketError(
            f"no sign change found after {max_doublings} doublings (hi={hi:.3g}); "
            "the function may never cross zero"
        )
    # keep the lower end strictly positive: f may vanish again at 0
    lo = hi / 2.0
    for _ in range(4000):
        if f(lo) < 0.0:
            break
        lo /= 2.0
        if lo < 1e-300:
            raise BracketError("no strictly negative bracket end above 0")
    else:
        raise BracketError("no strictly negative bracket end above 0")
    return float(brentq(f, lo, hi, xtol=max(rtol * hi, 5e-324), rtol=8.9e-16))


def inverse_increasing(
    f: Callable[[float], float],
    target: float,
    hi: float = 1.0,
    max_doublings: int = 200,
) -> float:
    """Solve ``f(x) = target`` for a strictly increasing ``f`` with f(0) <= target."""
    if target <= f(0.0):
        return 0.0
    return root_with_expanding_bracket(lambda x: f(x) - target, hi=hi, max_doublings=max_doublings)


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    max_iter: int = 200,
) -> Tuple[float, float, int]:
    """Maximize a scalar function on [lo, hi] by golden-section search.

    Assumes ``f`` is unimodal on the bracket (callers establish this with a
    coarse grid first). Returns ``(x_best, f(x_best), evaluations)``.
    """
    a, b = float(lo), float(hi)
    if b <= a:
        return a, f(a), 1
    h = b - a
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc = f(c)
    fd = f(d)
    evals = 2
    for _ in range(max_iter):
        if h <= xtol:
            break
        h *= _INVPHI
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * h
            fd = f(d)
        evals += 1
    if fc >= fd:
        return c, fc, evals
    return d, fd, evals
