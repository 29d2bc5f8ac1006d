"""Special functions behind Borel-type summation.

Gamma helpers, the Mittag-Leffler family E_beta(z) = sum z^n / Gamma(1+beta*n),
the Ecalle summation kernel C_alpha, and the moment integrals that tie the
kernel to gamma ratios.  Everything here is a pure function; the engines call
into this module but no state flows back.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import GammaPoleError, NonConvergenceError

SQRT_PI = math.sqrt(math.pi)

# Radius below which the defining power series is summed directly in float64.
ML_SERIES_RADIUS = 30.0

_MAX_SERIES_TERMS = 20000


@dataclass(frozen=True)
class KernelParams:
    """Parameters of the order-q summation kernel.

    q > 1 is the kernel order, k = 1/(q-1) the dual Gevrey index,
    alpha = (k+1)/k = q the series order of the Ecalle kernel, and
    c_q = (k+1)**(k+1) * k**(-k) the decay constant in the kernel bound
    |C_q(tau)| <= C * exp(-tau**(k+1) / c_q).
    """

    q: Fraction
    k: Fraction
    alpha: Fraction
    c_q: float

    @classmethod
    def from_q(cls, q) -> "KernelParams":
        q = Fraction(q)
        if q <= 1:
            raise ValueError(f"kernel order q must exceed 1, got {q}")
        k = 1 / (q - 1)
        c_q = float(k + 1) ** float(k + 1) * float(k) ** (-float(k))
        return cls(q=q, k=k, alpha=q, c_q=c_q)

    def __post_init__(self):
        if self.q <= 1 or self.k <= 0 or self.c_q <= 0:
            raise ValueError("invalid kernel parameters")


def gamma_real(x: float) -> float:
    """Gamma(x) for real x away from the poles at 0, -1, -2, ..."""
    if x <= 0 and x == math.floor(x):
        raise GammaPoleError(f"gamma pole at x={x}")
    if x > 170:
        return float(mpmath.gamma(x))
    return math.gamma(x)


def _roots_of_unity(p: int) -> np.ndarray:
    return np.exp(2j * math.pi * np.arange(p) / p)


def _series_sum_float(terms):
    """fsum a finite complex term list; also report sum of |term| (the
    roundoff proxy: each term carries ~1e-16 relative error of its own)."""
    re = math.fsum(t.real for t in terms)
    im = math.fsum(t.imag for t in terms)
    asum = math.fsum(abs(t) for t in terms)
    return complex(re, im), asum


def mittag_leffler(order, z, tol: float = 1e-12) -> complex:
    """E_beta(z) = sum_n z^n / Gamma(1 + beta*n).

    Inside |z| <= ML_SERIES_RADIUS the series is summed with compensated
    summation, retrying in mpmath when cancellation eats the accuracy budget.
    Beyond that, positive integer orders use the exact exponential-sum form
    E_p(z) = (1/p) * sum_{w^p=1} exp(w * z^(1/p)); other orders are rejected
    rather than silently degraded.
    """
    beta = float(order)
    if beta <= 0:
        raise ValueError(f"Mittag-Leffler order must be positive, got {order}")
    z = complex(z)
    p = int(round(beta))
    is_integer = abs(beta - p) < 1e-12 and p >= 1

    if abs(z) <= ML_SERIES_RADIUS:
        terms = []
        running = 0j
        zn = 1.0 + 0j
        streak = 0
        for n in range(_MAX_SERIES_TERMS):
            lg = float(gammaln(1.0 + beta * n))
            if lg < 700.0:
                t = zn * math.exp(-lg)
            else:
                azn = abs(zn)
                if azn > 0.0 and math.log(azn) - lg > -745.0:
                    t = (zn / azn) * math.exp(math.log(azn) - lg)
                else:
                    t = 0j
            terms.append(t)
            running += t
            if abs(t) < tol * max(abs(running), 1e-300):
                streak += 1
                if streak >= 3:
                    break
            else:
                streak = 0
            zn *= z
            if not abs(zn) < 1e300:
                raise NonConvergenceError(
                    f"Mittag-Leffler series overflows float range at |z|={abs(z):.3g}"
                )
        else:
            raise NonConvergenceError(f"Mittag-Leffler series stalled at |z|={abs(z):.3g}")
        value, asum = _series_sum_float(terms)
        if asum * 2e-15 <= tol * max(abs(value), 1e-300):
            return value
        return _mittag_leffler_mp(beta, z, tol, asum)

    if is_integer:
        root = z ** (1.0 / p)
        return complex(np.mean(np.exp(_roots_of_unity(p) * root)))
    raise NonConvergenceError(
        f"E_beta at |z|={abs(z):.3g} needs the integer-order exponential form; "
        f"order {order} is not a positive integer"
    )


def _mittag_leffler_mp(beta, z, tol, peak):
    digits = int(30 + math.log10(max(peak, 1.0)))
    with mpmath.workdps(digits):
        zz = mpmath.mpc(z)
        total = mpmath.mpc(0)
        zn = mpmath.mpc(1)
        streak = 0
        for n in range(_MAX_SERIES_TERMS):
            t = zn * mpmath.rgamma(1 + beta * n)
            total += t
            if abs(t) < tol * max(abs(total), mpmath.mpf("1e-300")):
                streak += 1
                if streak >= 3:
                    return complex(total)
            else:
                streak = 0
            zn *= zz
    raise NonConvergenceError(f"Mittag-Leffler series stalled at |z|={abs(z):.3g}")


def _derivative_weights(q: int, m: int) -> list[float]:
    """Coefficients c_i with (d/dx)^m exp(w*x^(1/q)) = exp(u) x^(-m) sum_i c_i u^i,
    where u = w*x^(1/q).  Built by the product-rule recurrence over m."""
    c = [1.0]
    for mm in range(m):
        nxt = [0.0] * (len(c) + 1)
        for i, ci in enumerate(c):
            nxt[i] += (i / q - mm) * ci
            nxt[i + 1] += ci / q
        c = nxt
    return c


def ml_derivative_kernel(q: int, beta: int, x) -> complex:
    """(x^(beta-1)/(beta-1)!) * (d/dx)^(beta-1) E_q(x) for integer q >= 2.

    Equals sum_n binom(n, beta-1) x^n / (q n)!, the kernel obtained by pushing
    a scaled t-derivative of order beta-1 through E_q(t*y).  Small |x| sums
    the series; large |x| uses the exact exponential-sum form.
    """
    if q < 2 or int(q) != q:
        raise ValueError("ml_derivative_kernel requires integer q >= 2")
    if beta < 1 or int(beta) != beta:
        raise ValueError("beta must be a positive integer")
    q, beta = int(q), int(beta)
    x = complex(x)
    if abs(x) <= ML_SERIES_RADIUS:
        terms = []
        running = 0j
        xn = x ** (beta - 1)
        streak = 0
        for n in range(beta - 1, beta - 1 + _MAX_SERIES_TERMS):
            lb = gammaln(n + 1.0) - gammaln(float(beta)) - gammaln(n - beta + 2.0)
            ex = lb - gammaln(1.0 + q * n)
            t = xn * math.exp(ex) if ex > -745.0 else 0j
            terms.append(t)
            running += t
            if abs(t) < 1e-16 * max(abs(running), 1e-300):
                streak += 1
                if streak >= 3:
                    break
            else:
                streak = 0
            xn *= x
        value, asum = _series_sum_float(terms)
        if abs(x) < 1e-6 or asum * 2e-15 <= 1e-11 * max(abs(value), 1e-280):
            return value
        # fall through: exponential form is exact and stable away from 0
    weights = _derivative_weights(q, beta - 1)
    u = _roots_of_unity(q) * (x ** (1.0 / q))
    poly = np.zeros_like(u)
    for w in reversed(weights):
        poly = poly * u + w
    return complex(np.sum(np.exp(u) * poly) / (q * math.factorial(beta - 1)))


# -- Ecalle kernel ---------------------------------------------------------

_rgamma_cache: dict = {}


def _rgamma_table(alpha_key: Fraction, dps: int, count: int):
    key = (alpha_key, dps)
    table = _rgamma_cache.get(key)
    if table is None:
        table = []
        _rgamma_cache[key] = table
    if len(table) < count:
        with mpmath.workdps(dps):
            a = mpmath.mpf(alpha_key.numerator) / alpha_key.denominator
            for n in range(len(table), count):
                table.append(mpmath.rgamma(1 - (n + 1) / a))
    return table


def ecalle_kernel(alpha, tau, tol: float = 1e-12) -> complex:
    """Summation kernel C_alpha(tau) = sum_n (-tau)^n / (n! Gamma(1-(n+1)/alpha)).

    Terms whose gamma argument hits a nonpositive integer vanish (1/Gamma
    continues to zero there).  The series alternates and loses digits for
    large |tau|, so it is summed in adaptive-precision arithmetic: working
    precision is raised until the roundoff floor sits below `tol` relative
    to the result.
    """
    alpha_key = Fraction(alpha).limit_denominator(10**9)
    if alpha_key <= 1:
        raise ValueError(f"Ecalle kernel needs alpha > 1, got {alpha}")
    tau = complex(tau)
    dps = 30
    for _ in range(6):
        value, peak, converged = _ecalle_series(alpha_key, tau, tol, dps)
        if converged:
            floor = max(abs(value), 1e-300)
            if peak * 10.0 ** (2 - dps) <= tol * floor:
                return value
            dps = int(dps + math.log10(max(peak / floor, 1.0)) + 15)
        else:
            dps += 20
    raise NonConvergenceError(f"Ecalle kernel series stalled at tau={tau}")


def _ecalle_series(alpha_key, tau, tol, dps):
    with mpmath.workdps(dps):
        total = mpmath.mpc(0)
        term_base = mpmath.mpc(1)  # (-tau)^n / n!
        mtau = mpmath.mpc(-tau)
        peak = mpmath.mpf(0)
        streak = 0
        table = _rgamma_table(alpha_key, dps, 64)
        for n in range(_MAX_SERIES_TERMS):
            if n >= len(table):
                table = _rgamma_table(alpha_key, dps, 2 * len(table))
            t = term_base * table[n]
            total += t
            at = abs(t)
            if at > peak:
                peak = at
            if at < tol * max(abs(total), mpmath.mpf("1e-300")):
                streak += 1
                if streak >= 3:
                    return complex(total), float(peak), True
            else:
                streak = 0
            term_base = term_base * mtau / (n + 1)
        return complex(total), float(peak), False


def ecalle_kernel_q2(tau):
    """Closed form of the order-2 kernel: C_2(tau) = exp(-tau^2/4)/sqrt(pi).

    Vectorized; used as the fast path when q = 2.  Agreement with the series
    definition is pinned by the acceptance suite.
    """
    tau = np.asarray(tau, dtype=complex)
    out = np.exp(-(tau**2) / 4.0) / SQRT_PI
    return out if out.ndim else complex(out)


def kernel_values(params: KernelParams, taus, tol: float = 1e-12, force_series: bool = False):
    """Evaluate C_q over an array of real tau values.

    q = 2 dispatches to the closed form unless `force_series` is set.
    """
    taus = np.asarray(taus, dtype=float)
    if params.alpha == 2 and not force_series:
        return np.real(ecalle_kernel_q2(taus))
    alpha = params.alpha
    flat = [ecalle_kernel(alpha, t, tol).real for t in taus.ravel()]
    return np.array(flat).reshape(taus.shape)


def kernel_decay_envelope(params: KernelParams, taus):
    """exp(-tau^(k+1)/c_q), the decay profile C_q is bounded by."""
    taus = np.asarray(taus, dtype=float)
    return np.exp(-(taus ** float(params.k + 1)) / params.c_q)


# -- Moments ---------------------------------------------------------------


def gamma_moment(l: int, q, t_abs: float, theta: float) -> complex:
    """Gamma(1+q*l)/l! * t_abs^l * exp(-i*theta*l).

    The weighted-kernel moment of the monomial s^l: the summation integral
    applied to s^l returns t^l with exactly this coefficient.
    """
    if l < 0 or int(l) != l:
        raise ValueError("moment index l must be a nonnegative integer")
    l = int(l)
    qf = float(q)
    if l == 0:
        return 1.0 + 0j
    log_mag = float(gammaln(1.0 + qf * l) - gammaln(l + 1.0)) + l * math.log(t_abs)
    return math.exp(log_mag) * cmath.exp(-1j * theta * l)


def kernel_moment_quadrature(
    params: KernelParams, l: int, tol: float = 1e-10, force_series: bool = True
) -> float:
    """Independent moment oracle: integral_0^inf C_q(sigma) sigma^(q*l) dsigma.

    Composite Gauss-Legendre with node doubling; must agree with
    Gamma(1+q*l)/l!.  The kernel defaults to its series definition so the
    check stays independent of the closed-form fast path.
    """
    qf = float(params.q)
    kp1 = float(params.k + 1)
    # upper cutoff: kernel decay beats the sigma^(q l) weight by tol*1e-2
    sigma_max = 10.0
    for _ in range(40):
        w = -math.log(tol * 1e-2) + qf * l * max(0.0, math.log(sigma_max))
        new = (params.c_q * w) ** (1.0 / kp1)
        if abs(new - sigma_max) < 1e-9:
            break
        sigma_max = new

    cache: dict = {}

    def kern(sigma: float) -> float:
        v = cache.get(sigma)
        if v is None:
            if force_series or params.alpha != 2:
                v = ecalle_kernel(params.alpha, sigma, tol * 1e-2).real
            else:
                v = float(np.real(ecalle_kernel_q2(sigma)))
            cache[sigma] = v
        return v

    def estimate(n_panels: int) -> float:
        edges = np.linspace(0.0, sigma_max, n_panels + 1)
        x16, w16 = np.polynomial.legendre.leggauss(16)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = (a + b) / 2.0, (b - a) / 2.0
            pts = mid + half * x16
            total += half * sum(
                wi * kern(float(p)) * float(p) ** (qf * l) for p, wi in zip(pts, w16)
            )
        return total

    n = max(8, int(sigma_max))
    prev = estimate(n)
    for _ in range(8):
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise NonConvergenceError(f"kernel moment quadrature stalled for l={l}")
