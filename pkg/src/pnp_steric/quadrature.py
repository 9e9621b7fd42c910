"""Adaptive Simpson quadrature.

Kept deliberately independent of scipy's integrators so the two excess
current routes (grid quadrature in x versus adaptive quadrature in
sigma) share no code.
"""

__all__ = ["adaptive_simpson"]


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _recurse(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    half = 0.5 * tol
    return (
        _recurse(f, a, fa, m, fm, lm, flm, left, half, depth - 1)
        + _recurse(f, m, fm, b, fb, rm, frm, right, half, depth - 1)
    )


def adaptive_simpson(f, a, b, rel_tol=1e-8, abs_floor=1e-12, max_depth=40):
    """Integrate f from a to b with Richardson-accelerated Simpson panels.

    The per-panel tolerance is the larger of abs_floor and rel_tol times
    a running magnitude estimate from the initial whole-interval panel;
    recursion stops at max_depth.  Orientation-aware: swapped bounds
    negate the result, equal bounds give 0.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, rel_tol, abs_floor, max_depth)
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    tol = max(abs_floor, rel_tol * abs(whole))
    return _recurse(f, a, fa, b, fb, m, fm, whole, tol, max_depth)
