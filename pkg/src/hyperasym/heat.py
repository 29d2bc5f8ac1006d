"""Level-n hyperasymptotic expansion of the heat-equation solution
u_t = u_zz, u(0, z) = phi(z), for t -> 0 along a ray avoiding the Stokes
directions of the datum.

The solution is a Gaussian line integral; rotating it onto the positive axis
turns it into a weighted integral of the Borel germ

    f0(s, z) = (phi(z + e^{i theta/2} sqrt(s)) + phi(z - e^{i theta/2} sqrt(s))) / 2

against exp(-s/(4|t|)) / (2 sqrt(pi |t| s)).  Truncating the Taylor series of
f0 optimally and re-expanding the remainder around the successive integrand
maxima sigma_1 < sigma_2 < ... gives the level-n expansion; each level's
correction terms reduce to exact gamma-ratio moments of the polynomial
prefix, and the leftover remainder is integrable by direct quadrature.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import gammaln

from .contour import ExpansionGeometry
from .datum import AnalyticDatum, Direction
from .errors import ScheduleError
from .expansion import FTower, HyperExpansion, RemainderReport, TruncationSchedule

SQRT_PI = math.sqrt(math.pi)
DEFAULT_SCAN_FACTOR = 4.0


def make_geometry(datum: AnalyticDatum, direction: Direction,
                  eps: float | None = None,
                  eps_tilde: float | None = None) -> ExpansionGeometry:
    return ExpansionGeometry(datum, direction, q=2, lam=1.0,
                             eps=eps, eps_tilde=eps_tilde)


def f0(s, z, theta: float, datum: AnalyticDatum):
    """Borel germ of the rotated solution: the symmetrized datum average.

    Even in sqrt(s), so the branch choice is immaterial and the result is
    analytic in s away from the images of the singular rays.
    """
    rot = cmath.exp(1j * theta / 2.0)
    s_arr = np.asarray(s, dtype=complex)
    root = np.sqrt(s_arr)
    out = 0.5 * (datum.eval(z + rot * root) + datum.eval(z - rot * root))
    return out if getattr(out, "ndim", 0) else complex(out)


def f0_taylor(z, theta: float, datum: AnalyticDatum, count: int) -> np.ndarray:
    """Taylor coefficients of s -> f0(s, z) at s = 0:
    c_k = phi^(2k)(z) e^{i k theta} / (2k)!."""
    base = datum.taylor_coefficients(z, 2 * count)
    phases = np.exp(1j * theta * np.arange(count))
    return base[0:2 * count:2] * phases


def level0_counts(r_eff: float, decay_rate: float) -> tuple[int, float]:
    """Optimal leading truncation: N_0 = floor(r_eff * L + 1/2) and
    sigma_1 = (N_0 - 1/2)/L, where L = 1/(4|t|) - B_tilde."""
    if decay_rate <= 0:
        raise ScheduleError("need 1/(4|t|) > B_tilde for a decaying remainder")
    n0 = math.floor(r_eff * decay_rate + 0.5)
    if n0 < 1:
        raise ScheduleError(
            f"|t| too large: optimal N_0 = {n0} < 1 at r_eff={r_eff}, L={decay_rate}"
        )
    return n0, (n0 - 0.5) / decay_rate


def level0_schedule(t_abs: float, geometry: ExpansionGeometry,
                    b_tilde: float = 0.0) -> TruncationSchedule:
    r_eff = geometry.base_radius - geometry.eps
    decay = 1.0 / (4.0 * t_abs) - b_tilde
    n0, sigma1 = level0_counts(r_eff, decay)
    return TruncationSchedule(r_eff=r_eff, eps=geometry.eps, B_tilde=b_tilde,
                              t_abs=t_abs, sigmas=(sigma1,), Ns=(n0,))


def _log_integrand_envelope(schedule: TruncationSchedule,
                            geometry: ExpansionGeometry, s, n_terms: int | None = None):
    """log of the remainder-bound integrand
    e^{-sL} s^{N_0-1/2} / r_eff^{N_0} * prod |s-sigma_k|^{N_k} / D_k^{N_k}."""
    s = np.asarray(s, dtype=float)
    L = 1.0 / (4.0 * schedule.t_abs) - schedule.B_tilde
    n_terms = len(schedule.Ns) if n_terms is None else n_terms
    out = -s * L + (schedule.Ns[0] - 0.5) * np.log(np.maximum(s, 1e-300))
    out -= schedule.Ns[0] * math.log(schedule.r_eff)
    for k in range(1, n_terms):
        dk = geometry.big_radius(k, schedule.sigmas[k - 1])
        out += schedule.Ns[k] * (
            np.log(np.maximum(np.abs(s - schedule.sigmas[k - 1]), 1e-300)) - math.log(dk)
        )
    return out


def _condition_residual(s: float, schedule: TruncationSchedule, n_extra: int) -> float:
    """L - (N_0 - 1/2)/s - sum N_k/(s - sigma_k), with a trailing candidate
    term n_extra/(s - sigma_last)."""
    L = 1.0 / (4.0 * schedule.t_abs) - schedule.B_tilde
    val = L - (schedule.Ns[0] - 0.5) / s
    for k in range(1, len(schedule.Ns)):
        val -= schedule.Ns[k] / (s - schedule.sigmas[k - 1])
    val -= n_extra / (s - schedule.sigmas[-1])
    return val


def condition_roots(schedule: TruncationSchedule, n_extra: int) -> list[float]:
    """All roots of the saddle condition, one per gap (interlacing with the
    sigmas); the last one is the candidate sigma_{n+1}."""
    pts = [0.0] + list(schedule.sigmas)
    roots = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        roots.append(_bisect_root(schedule, n_extra, lo, hi))
    roots.append(_bisect_root(schedule, n_extra, pts[-1], None))
    return roots


def _bisect_root(schedule, n_extra, lo, hi):
    span = max(schedule.sigmas[-1], 1.0)
    a = lo + 1e-13 * span
    if hi is None:
        b = schedule.sigmas[-1] + span
        while _condition_residual(b, schedule, n_extra) < 0:
            b = schedule.sigmas[-1] + 2 * (b - schedule.sigmas[-1])
            if b > 1e12 * span:
                raise ScheduleError("saddle condition has no root right of sigma_n")
    else:
        b = hi - 1e-13 * span
    fa = _condition_residual(a, schedule, n_extra)
    fb = _condition_residual(b, schedule, n_extra)
    if fa > 0 or fb < 0:
        # interior intervals: residual runs from -inf up to +inf left to right
        # of each pole pair; swap the orientation if needed
        if fa < 0 and fb < 0 or fa > 0 and fb > 0:
            raise ScheduleError("no sign change while bracketing the saddle condition")
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = _condition_residual(mid, schedule, n_extra)
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
        if b - a <= 1e-15 * max(1.0, b):
            break
    return 0.5 * (a + b)


def next_truncation(schedule: TruncationSchedule, geometry: ExpansionGeometry,
                    scan_cap: int | None = None) -> tuple[int, float, list]:
    """Choose (N_n, sigma_{n+1}) for the next level: for each candidate N the
    saddle condition is solved for its largest root, the bound integrand is
    evaluated there, and the N minimizing it wins.  Returns the choice plus
    the scan table [(N, root, log_integrand)] for diagnostics."""
    if scan_cap is None:
        scan_cap = max(8, math.ceil(DEFAULT_SCAN_FACTOR * schedule.Ns[0]))
    scan = []
    best = None
    for cand in range(1, scan_cap + 1):
        root = _bisect_root(schedule, cand, schedule.sigmas[-1], None)
        trial = schedule.extended(cand, root)
        lng = float(_log_integrand_envelope(trial, geometry, root))
        scan.append((cand, root, lng))
        if best is None or lng < best[2]:
            best = (cand, root, lng)
    if best[0] == scan_cap:
        raise ScheduleError(
            f"no interior minimum in the N-scan up to {scan_cap}; "
            f"tail of scan: {scan[-3:]}"
        )
    return best[0], best[1], scan


def build_schedule(t_abs: float, geometry: ExpansionGeometry, level: int,
                   b_tilde: float = 0.0, scan_cap: int | None = None) -> TruncationSchedule:
    schedule = level0_schedule(t_abs, geometry, b_tilde)
    for _ in range(level):
        n_next, sigma_next, _ = next_truncation(schedule, geometry, scan_cap)
        schedule = schedule.extended(n_next, sigma_next)
    return schedule


def eta_value(n: int, schedule: TruncationSchedule, geometry: ExpansionGeometry) -> float:
    """Decay constant of the level-n remainder bound: eta_0 = sigma_1, and for
    n >= 1 the log of the bound integrand at its minimizing saddle sigma_{n+1},
    scaled by L."""
    if n == 0:
        return schedule.sigmas[0]
    if schedule.level < n:
        raise ScheduleError(f"schedule only reaches level {schedule.level}")
    L = 1.0 / (4.0 * schedule.t_abs) - schedule.B_tilde
    lng = float(_log_integrand_envelope(schedule, geometry, schedule.sigmas[n],
                                        n_terms=n + 1))
    return -lng / L


def remainder_bound(n: int, t_abs: float, schedule: TruncationSchedule,
                    geometry: ExpansionGeometry, a_fit: float = 1.0) -> float:
    """A_n * exp(-eta_n * (1/(4|t|) - B)) / sqrt(1 - 4 B |t|)."""
    L = 1.0 / (4.0 * t_abs) - schedule.B_tilde
    eta = eta_value(n, schedule, geometry)
    return a_fit * math.exp(-eta * L) / math.sqrt(1.0 - 4.0 * schedule.B_tilde * t_abs)


# -- partial sums and assembly ----------------------------------------------


def partial_sum_level0(t, z, n0: int, datum: AnalyticDatum) -> complex:
    """sum_{k<N_0} phi^(2k)(z) t^k / k!."""
    t = complex(t)
    coeffs = datum.taylor_coefficients(z, 2 * n0)
    total = np.clongdouble(0)
    tk = np.clongdouble(1)
    for k in range(n0):
        ratio = math.exp(gammaln(2 * k + 1.0) - gammaln(k + 1.0))
        total += np.clongdouble(coeffs[2 * k] * ratio) * tk
        tk *= t
    return complex(total)


def _moment_factors(theta: float, count: int) -> np.ndarray:
    """(2l)!/l! * e^{-i theta l} for l < count: the Gaussian-weight moments."""
    ls = np.arange(count)
    mags = np.exp(gammaln(2.0 * ls + 1.0) - gammaln(ls + 1.0))
    return mags * np.exp(-1j * theta * ls)


def assemble_psi(schedule: TruncationSchedule, tower: FTower, theta: float,
                 z, datum: AnalyticDatum) -> HyperExpansion:
    """Collapse the level corrections into the coefficients psi_l.

    psi_l = [l < N_0] phi^(2l)(z)/l!
          + sum_{m=1}^{n} sum_{j<N_m} b_{m,j} a_{m-1,j,l} (2l)!/l! e^{-i theta l},

    where sum_l a_{m-1,j,l} s^l = s^{N_0} (s-sigma_1)^{N_1} ... (s-sigma_m)^j.
    """
    n = schedule.level
    total = schedule.total_terms
    psi = np.zeros(total, dtype=np.clongdouble)
    moments = _moment_factors(theta, total).astype(np.clongdouble)

    n0 = schedule.Ns[0]
    coeffs = datum.taylor_coefficients(z, 2 * n0)
    for l in range(n0):
        ratio = math.exp(gammaln(2 * l + 1.0) - gammaln(l + 1.0))
        psi[l] += np.clongdouble(coeffs[2 * l] * ratio)

    b_map: dict = {}
    a_map: dict = {}
    prefix = np.zeros(n0 + 1, dtype=np.longdouble)
    prefix[n0] = 1.0  # s^{N_0}
    for m in range(1, n + 1):
        b_m = tower.b(m, schedule.Ns[m])
        cur = prefix.copy()
        sig_m = schedule.sigmas[m - 1]
        for j in range(schedule.Ns[m]):
            b_map[(m, j)] = complex(b_m[j])
            for l, al in enumerate(cur):
                if al != 0.0:
                    a_map[(m - 1, j, l)] = float(al)
            ln = len(cur)
            psi[:ln] += np.clongdouble(b_m[j]) * cur.astype(np.clongdouble) * moments[:ln]
            cur = np.convolve(cur, np.array([-sig_m, 1.0], dtype=np.longdouble))
        # extend the prefix with the full (s - sigma_m)^{N_m} factor
        factor = np.array([-sig_m, 1.0], dtype=np.longdouble)
        for _ in range(schedule.Ns[m]):
            prefix = np.convolve(prefix, factor)

    return HyperExpansion(level=n, theta=theta, b=b_map, a=a_map,
                          psi=psi.astype(complex))


# -- remainder quadrature ----------------------------------------------------


def _tail_cutoff(schedule: TruncationSchedule, geometry: ExpansionGeometry,
                 tol: float) -> float:
    """s beyond which the bound integrand has dropped tol*1e-2 below its peak."""
    hi = schedule.sigmas[-1] + 10.0
    grid = np.linspace(1e-6, hi, 400)
    env = _log_integrand_envelope(schedule, geometry, grid)
    peak = float(env.max())
    target = peak + math.log(tol * 1e-2)
    s = float(grid[-1])
    while float(_log_integrand_envelope(schedule, geometry, s)) > target:
        s *= 1.5
        if s > 1e6 * hi:
            raise ScheduleError("remainder tail does not decay; check B_tilde")
    return s


def remainder_quadrature(n: int, t, z, schedule: TruncationSchedule,
                         geometry: ExpansionGeometry, tower: FTower,
                         tol: float = 1e-10) -> complex:
    """R at level n by direct quadrature:
    (1/(2 sqrt(pi |t|))) integral_0^inf e^{-s/4|t|} s^{-1/2} T_n(s) ds,
    with T_n the stable tail form (no divided-difference blowup near the
    sigma_k, since the polynomial factors are kept multiplied through)."""
    t_abs = abs(complex(t))
    s_max = _tail_cutoff(schedule, geometry, tol)
    x16, w16 = np.polynomial.legendre.leggauss(16)

    def estimate(n_panels: int) -> complex:
        edges = np.linspace(0.0, s_max, n_panels + 1)
        mids = (edges[:-1] + edges[1:]) / 2.0
        halves = (edges[1:] - edges[:-1]) / 2.0
        pts = (mids[:, None] + halves[:, None] * x16[None, :]).ravel()
        weights = (halves[:, None] * w16[None, :]).ravel()
        tail = tower.tail(n, pts.astype(complex))
        vals = np.exp(-pts / (4.0 * t_abs)) / np.sqrt(pts) * tail
        return complex(np.sum(vals * weights)) / (2.0 * SQRT_PI * math.sqrt(t_abs))

    n_panels = max(16, int(s_max * (1.0 / (4.0 * t_abs)) / 8.0))
    prev = estimate(n_panels)
    for _ in range(7):
        n_panels *= 2
        cur = estimate(n_panels)
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300) + 1e-16:
            return cur
        prev = cur
    return cur


# -- top level ---------------------------------------------------------------


def calibrate_remainder_constant(n: int, datum: AnalyticDatum, direction: Direction,
                                 geometry: ExpansionGeometry, z,
                                 t_cal: float = 1.0 / 30.0,
                                 b_tilde: float = 0.0,
                                 scan_cap: int | None = None) -> float:
    """Fit A_n once: ratio of the quadrature remainder to the bound shape at a
    calibration |t|."""
    schedule = build_schedule(t_cal, geometry, n, b_tilde, scan_cap)
    tower = FTower(
        lambda s: f0(s, z, direction.theta, datum),
        f0_taylor(z, direction.theta, datum, schedule.Ns[0]),
        schedule, geometry,
    )
    t_c = t_cal * cmath.exp(1j * direction.theta)
    value = remainder_quadrature(n, t_c, z, schedule, geometry, tower)
    shape = remainder_bound(n, t_cal, schedule, geometry, a_fit=1.0)
    return abs(value) / shape


def hyper_expand(t, z, level: int, datum: AnalyticDatum, direction: Direction,
                 geometry: ExpansionGeometry | None = None,
                 b_tilde: float = 0.0,
                 a_fit: float = 1.0,
                 scan_cap: int | None = None,
                 tol: float = 1e-10) -> tuple[HyperExpansion, RemainderReport]:
    """Full level-n pipeline at one (t, z); t must sit on the direction's ray."""
    t = complex(t)
    t_abs = abs(t)
    if t_abs == 0:
        raise ValueError("t = 0 has no expansion; the series value is phi(z)")
    if abs((cmath.phase(t) - direction.theta + math.pi) % (2 * math.pi) - math.pi) > 1e-8:
        raise ValueError(f"arg t = {cmath.phase(t):.6g} is off the ray theta = {direction.theta:.6g}")
    if geometry is None:
        geometry = make_geometry(datum, direction)
    if abs(complex(z)) >= geometry.eps_tilde:
        raise ValueError(f"|z| must stay below eps_tilde = {geometry.eps_tilde}")

    schedule = build_schedule(t_abs, geometry, level, b_tilde, scan_cap)
    tower = FTower(
        lambda s: f0(s, z, direction.theta, datum),
        f0_taylor(z, direction.theta, datum, schedule.Ns[0]),
        schedule, geometry, tol=min(tol, 1e-11),
    )
    expansion = assemble_psi(schedule, tower, direction.theta, z, datum)
    value = remainder_quadrature(level, t, z, schedule, geometry, tower, tol)
    report = RemainderReport(
        value=value,
        bound=remainder_bound(level, t_abs, schedule, geometry, a_fit),
        eta_n=eta_value(level, schedule, geometry),
    )
    return expansion, report
