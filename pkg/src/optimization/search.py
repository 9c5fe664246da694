"""One-dimensional search primitives shared by the solvers."""

import logging
import math
from typing import Callable, Optional, Tuple

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_iter: int = 500,
) -> Tuple[float, float]:
    """
    Minimize a unimodal function on [a, b] by golden-section search.

    Interior evaluations are reused between iterations, so each step costs
    one call to ``f``. The search stops once the bracket is no wider than
    ``tol``; the endpoints themselves are never evaluated.

    Returns:
        (x, f(x)) for the best point evaluated
    """
    if b < a:
        a, b = b, a
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = f(c)
    fd = f(d)
    best = (c, fc) if fc <= fd else (d, fd)

    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            if fc <= best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            if fd < best[1]:
                best = (d, fd)
    else:
        logger.warning(f"Golden-section search stopped at max_iter with bracket {b - a:.3e}")

    return best


def bisect_last_true(
    predicate: Callable[[float], bool],
    lo: float,
    hi: float,
    tol: float = 1e-6,
    max_iter: int = 200,
) -> float:
    """
    Largest x in [lo, hi] with ``predicate(x)`` true, to within ``tol``.

    ``predicate`` must hold at ``lo`` and switch from true to false at most once.
    """
    if predicate(hi):
        return hi
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo


def expand_bracket(
    f: Callable[[float], float],
    x0: float,
    step: float,
    lower: Optional[float] = None,
    upper: Optional[float] = None,
    max_doublings: int = 60,
) -> Optional[Tuple[float, float]]:
    """
    Grow [x0 - step, x0 + step] geometrically until ``f`` changes sign.

    The bracket is clamped to [lower, upper] when given. Returns None when
    no sign change is found.
    """
    lo_bound = -math.inf if lower is None else lower
    hi_bound = math.inf if upper is None else upper
    for _ in range(max_doublings):
        a = max(x0 - step, lo_bound)
        b = min(x0 + step, hi_bound)
        fa, fb = f(a), f(b)
        if fa == 0.0:
            return a, a
        if fb == 0.0:
            return b, b
        if (fa < 0) != (fb < 0):
            return a, b
        if a == lo_bound and b == hi_bound:
            return None
        step *= 2.0
    return None
