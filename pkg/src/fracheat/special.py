"""Special functions used by the fractional-diffusion kernels and solvers.

Provides log-gamma, exponentially scaled modified Bessel functions of
integer order (all orders at once via backward recurrence), the two
parameter Mittag-Leffler function for real arguments, and the Wright
probability density on [0, inf).

All routines are pure functions of their arguments and can be called
concurrently from any number of threads.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

import mpmath

__all__ = [
    "SeriesConvergenceError",
    "log_gamma",
    "bessel_i_scaled",
    "bessel_i_scaled_row",
    "mittag_leffler",
    "wright_phi",
]


class SeriesConvergenceError(RuntimeError):
    """A series or recurrence failed to reach the requested tolerance."""


def log_gamma(x):
    """Return ln Gamma(x) for x > 0.

    Relative error is at the 1e-15 level (well inside the 1e-13 budget
    of the kernel routines built on top of it).  Negative arguments are
    rejected; the kernel code handles them through explicit reflection.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return float(gammaln(x))


# ---------------------------------------------------------------------------
# Scaled modified Bessel functions e^{-x} I_n(x)
# ---------------------------------------------------------------------------

_BESSEL_X_MAX = 5.0e7  # recurrence cost is O(x); refuse absurd arguments
_RESCALE = 1.0e250


def bessel_i_scaled_row(n_max, x):
    """Return the array [e^{-x} I_0(x), ..., e^{-x} I_{n_max}(x)].

    Uses Miller's backward recurrence normalized by the generating
    function identity sum_n I_n(x) = e^x, so every entry lies in [0, 1]
    and no unscaled Bessel value is ever formed.  The start order is
    raised until a doubling of the safety offset changes nothing beyond
    1e-14, which in practice gives close to machine accuracy.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    x = float(x)
    if x < 0.0:
        raise ValueError(f"bessel_i_scaled requires x >= 0, got {x}")
    if x > _BESSEL_X_MAX:
        raise ValueError(f"argument {x} too large for the backward recurrence")
    if x == 0.0:
        row = np.zeros(n_max + 1)
        row[0] = 1.0
        return row

    base = max(n_max, int(x))
    offset = 40 + 2 * int(math.sqrt(base + 40.0))
    prev = None
    for _ in range(12):
        row = _miller_row(n_max, x, base + offset)
        if prev is not None and np.max(np.abs(row - prev)) <= 1e-14:
            return row
        prev = row
        offset *= 2
    raise SeriesConvergenceError(
        f"Bessel backward recurrence did not stabilize for x={x}, n_max={n_max}"
    )


def _miller_row(n_max, x, start):
    out = np.zeros(n_max + 1)
    p_next = 0.0      # trial value at order k+1
    p = 1e-280        # trial value at order k
    high_sum = 0.0    # sum of trial values over orders 1..start
    two_over_x = 2.0 / x
    for k in range(start, 0, -1):
        if k <= n_max:
            out[k] = p
        high_sum += p
        p_prev = p_next + two_over_x * k * p
        p_next, p = p, p_prev
        # rescale to dodge overflow; only ratios matter before normalization
        if p > _RESCALE:
            p /= _RESCALE
            p_next /= _RESCALE
            high_sum /= _RESCALE
            out /= _RESCALE
    out[0] = p
    # generating function: e^{-x}(I_0 + 2 sum_{k>=1} I_k) = 1
    return out / (p + 2.0 * high_sum)


def bessel_i_scaled(n, x):
    """Return e^{-x} I_n(x) for integer order n (symmetric in n <-> -n)."""
    n = abs(int(n))
    return float(bessel_i_scaled_row(n, x)[n])


# ---------------------------------------------------------------------------
# Mittag-Leffler function E_{alpha,beta}(z), real z
# ---------------------------------------------------------------------------

_ML_CANCEL_MAX = 3.0      # largest |z|^(1/alpha) the float series tolerates
_ML_MAX_TERMS = 200_000


@lru_cache(maxsize=65536)
def mittag_leffler(alpha, z, beta=1.0):
    """Evaluate the two-parameter Mittag-Leffler function E_{alpha,beta}(z).

    Parameters
    ----------
    alpha : float in (0, 2)
    z : float
        Real argument; strongly negative z is the main use (decay
        profiles of fractional relaxation).
    beta : float > 0, optional
        Second parameter; the solvers use beta = 1 and beta = alpha.

    Notes
    -----
    The series of an alternating argument cancels down from a largest
    term of size ~e^{|z|^{1/alpha}}, so the safe branch depends on that
    scale rather than on z alone.  While it stays small the power series
    is summed with compensated (fsum) accumulation; otherwise it is
    summed in extended precision (mpmath) with the working precision
    matched to the cancellation; arguments with |z|^{1/alpha} > 2000 are
    rejected as out of the supported range.
    """
    alpha = float(alpha)
    beta = float(beta)
    z = float(z)
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if z >= 0.0 or abs(z) ** (1.0 / alpha) <= _ML_CANCEL_MAX:
        return _ml_series_float(alpha, beta, z)
    return _ml_series_mp(alpha, beta, z)


def _ml_series_float(alpha, beta, z):
    if z == 0.0:
        return math.exp(-gammaln(beta))
    log_az = math.log(abs(z))
    sgn = 1.0 if z > 0.0 else -1.0
    # index after which terms decrease monotonically
    n_peak = (abs(z) ** (1.0 / alpha) - beta) / alpha + 2.0
    terms = []
    prev_mag = math.inf
    n = 0
    while n < _ML_MAX_TERMS:
        log_mag = n * log_az - gammaln(alpha * n + beta)
        mag = math.exp(log_mag) if log_mag < 700.0 else math.inf
        if math.isinf(mag):
            raise SeriesConvergenceError(
                f"Mittag-Leffler series overflowed at n={n} for z={z}"
            )
        terms.append((sgn ** n) * mag)
        if n > n_peak and mag < prev_mag and mag < 1e-17 * max(abs(math.fsum(terms)), 1e-300):
            return math.fsum(terms)
        prev_mag = mag
        n += 1
    raise SeriesConvergenceError(f"Mittag-Leffler series did not converge for z={z}")


def _ml_series_mp(alpha, beta, z):
    scale = abs(z) ** (1.0 / alpha)
    if scale > 2000.0:
        raise SeriesConvergenceError(
            f"|z|^(1/alpha) = {scale:.3g} exceeds the supported range"
        )
    dps = 25 + int(0.45 * scale)
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        zz = mpmath.mpf(z)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        n_peak = (abs(z) ** (1.0 / alpha) - beta) / alpha + 2.0
        prev_mag = mpmath.inf
        for n in range(_ML_MAX_TERMS):
            term = power / mpmath.gamma(a * n + b)
            total += term
            mag = abs(term)
            if n > n_peak and mag < prev_mag and mag < mpmath.mpf(10) ** (-dps) * max(
                abs(total), mpmath.mpf(10) ** (-dps)
            ):
                return float(total)
            prev_mag = mag
            power *= zz
    raise SeriesConvergenceError(f"Mittag-Leffler series did not converge for z={z}")


# ---------------------------------------------------------------------------
# Wright function Phi_alpha(x) on x >= 0
# ---------------------------------------------------------------------------

_WRIGHT_FLOAT_DPS = 43    # <= 3 digits of cancellation: float series is safe
_WRIGHT_X_MAX = 200.0
_WRIGHT_MAX_TERMS = 100_000


@lru_cache(maxsize=65536)
def wright_phi(alpha, x):
    """Evaluate the Wright subordination density Phi_alpha(x) on x >= 0.

    Phi_alpha(x) = sum_k (-x)^k / (k! Gamma(1 - alpha - alpha k)) is the
    probability density on [0, inf) with moments
    integral Phi_alpha(t) t^p dt = Gamma(p+1)/Gamma(alpha p + 1); it ties
    the time-fractional evolution to the spatial semigroup.  For
    alpha = 1/2 it reduces to exp(-x^2/4)/sqrt(pi).

    The series is summed directly with term-ratio stopping (next terms
    below 1e-16 of the partial sum); for x > 4 the summation runs in
    extended precision because the alternating terms grow large before
    the super-exponentially small value emerges.  Supported range:
    0 <= x <= 200, which comfortably covers the tau-quadrature
    (Phi_alpha falls below 1e-14 long before).
    """
    alpha = float(alpha)
    x = float(x)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if x < 0.0:
        raise ValueError(f"wright_phi requires x >= 0, got {x}")
    if x > _WRIGHT_X_MAX:
        raise SeriesConvergenceError(f"x={x} beyond the supported series range")
    if x == 0.0:
        return 1.0 / math.gamma(1.0 - alpha)
    dps, log10_val = _wright_dps(alpha, x)
    if dps is None:
        return 0.0  # value below the double-precision underflow threshold
    if dps <= _WRIGHT_FLOAT_DPS:
        return _wright_series_float(alpha, x)
    return _wright_series_mp(alpha, x, dps)


def _sinpi(y):
    """sin(pi * y) with exact zeros at integer y (reflection helper)."""
    n = math.floor(y)
    frac = y - n
    if frac == 0.0:
        return 0.0
    val = math.sin(math.pi * frac)
    return -val if n % 2 else val


def _wright_series_float(alpha, x):
    # terms are built in log space: 1/Gamma(y) = sin(pi y) Gamma(1-y) / pi
    # avoids overflow of the reciprocal gamma at large negative arguments
    log_x = math.log(x)
    log_pi = math.log(math.pi)
    terms = []
    quiet = 0
    for k in range(_WRIGHT_MAX_TERMS):
        y = 1.0 - alpha - alpha * k
        sp = _sinpi(y)
        if sp == 0.0:
            terms.append(0.0)
            term_mag = 0.0
        else:
            log_mag = (
                k * log_x
                - gammaln(k + 1.0)
                + math.log(abs(sp))
                + gammaln(1.0 - y)
                - log_pi
            )
            term_mag = math.exp(log_mag)
            sign = (1.0 if k % 2 == 0 else -1.0) * math.copysign(1.0, sp)
            terms.append(sign * term_mag)
        if term_mag < 1e-16 * max(abs(math.fsum(terms)), 1e-300):
            quiet += 1
            if quiet >= 4:
                return math.fsum(terms)
        else:
            quiet = 0
    raise SeriesConvergenceError(f"Wright series did not converge for x={x}")


_LN10 = math.log(10.0)


def _wright_dps(alpha, x):
    """Working precision for the extended-precision Wright series.

    The value decays like exp(-B x^{1/(1-alpha)}) with
    B = (1-alpha) alpha^{alpha/(1-alpha)} while the alternating terms
    first grow; the precision must cover both the size of the largest
    term and the smallness of the result.  Returns (dps, log10_value);
    log10_value below the float underflow threshold means the caller
    should just return 0.
    """
    b = (1.0 - alpha) * alpha ** (alpha / (1.0 - alpha))
    log10_val = -b * x ** (1.0 / (1.0 - alpha)) / _LN10
    if log10_val < -320.0:
        return None, log10_val
    # scan for the largest term magnitude, bounding |sin(pi y)| by 1
    max_log10 = 0.0
    log10_x = math.log10(x)
    prev = -math.inf
    for k in range(1, _WRIGHT_MAX_TERMS):
        cur = (
            k * log10_x
            - gammaln(k + 1.0) / _LN10
            + gammaln(alpha + alpha * k) / _LN10
            - math.log10(math.pi)
        )
        max_log10 = max(max_log10, cur)
        if cur < prev and cur < max_log10 - 40.0 + log10_val:
            break
        prev = cur
    return 40 + int(max_log10 - log10_val), log10_val


def _wright_series_mp(alpha, x, dps):
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        xx = mpmath.mpf(x)
        total = mpmath.mpf(0)
        coeff = mpmath.mpf(1)  # (-x)^k / k!
        tiny = mpmath.mpf(10) ** (-dps + 5)
        quiet = 0
        for k in range(_WRIGHT_MAX_TERMS):
            term = coeff * mpmath.rgamma(1 - a - a * k)
            total += term
            if abs(term) < tiny * max(abs(total), mpmath.mpf(10) ** (-dps)):
                quiet += 1
                if quiet >= 4:
                    return float(total)
            else:
                quiet = 0
            coeff *= -xx / (k + 1)
    raise SeriesConvergenceError(f"Wright series did not converge for x={x}")
