"""Chi-square survival function via the regularized incomplete gamma."""

import math
import sys

__all__ = ["chi_square_sf", "regularized_gamma_q", "format_p_value", "UNDERFLOW_P"]

UNDERFLOW_P = sys.float_info.min  # 2.2250738585072014e-308

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _gamma_p_series(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"series for P({a}, {x}) did not converge")
    log_pre = -x + a * math.log(x) - math.lgamma(a)
    return total * math.exp(log_pre)


def _gamma_q_cf(a: float, x: float) -> float:
    # Modified Lentz evaluation of the Legendre continued fraction for Q(a, x).
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"continued fraction for Q({a}, {x}) did not converge")
    log_pre = -x + a * math.log(x) - math.lgamma(a)
    return math.exp(log_pre) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).

    Uses the power series for P = 1 - Q when ``x < a + 1`` and a continued
    fraction otherwise. Very large arguments underflow to 0.0.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_p_series(a, x)))
    return min(1.0, max(0.0, _gamma_q_cf(a, x)))


def chi_square_sf(x: float, df: int) -> float:
    """P(X >= x) for X ~ chi-square with `df` degrees of freedom.

    Parameters
    ----------
    x : float
        Statistic, must be >= 0.
    df : int
        Degrees of freedom, >= 1.

    Returns
    -------
    float
        p-value in [0, 1]. Values below ``UNDERFLOW_P`` mean the true value
        is not representable; use :func:`format_p_value` for display.
    """
    if df < 1 or int(df) != df:
        raise ValueError(f"df must be a positive integer, got {df!r}")
    if not x >= 0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    return regularized_gamma_q(df / 2.0, x / 2.0)


def format_p_value(p: float):
    """Return `p` unchanged, or the string ``"< 2.2e-308"`` if it underflowed."""
    if p < UNDERFLOW_P:
        return "< 2.2e-308"
    return p
