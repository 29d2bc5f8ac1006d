"""Level machinery shared by the expansion engines.

Holds the truncation-schedule and expansion containers plus FTower, the
evaluator for the nested remainder functions f_m produced by repeatedly
re-expanding an optimally truncated series: f_0 is the Borel-plane germ,
and each f_{m+1} collects what is left of f_m after removing its degree-N_m
Taylor polynomial at sigma_m,

    f_m(s) = sum_{j<N_m} b_{m,j} (s - sigma_m)^j + (s - sigma_m)^{N_m} f_{m+1}(s).

Two evaluation routes are kept live: the divided-difference form of the
identity above (cheap, exact away from sigma_m) and Cauchy-integral contour
quadrature (stable near sigma_m, where the divided difference cancels
catastrophically).  The auto mode switches between them per point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .contour import ContourSpec, ExpansionGeometry, integrate
from .errors import ScheduleError

# fraction of the enclosing contour radius below which the divided-difference
# form of f_m has lost too many digits and the Cauchy route takes over
SWITCH_FRACTION = 0.5

# relative closeness to sigma_{m-1} that triggers a cancellation warning when
# the caller forces divided-difference mode
DIVIDED_WARN_FRACTION = 0.05


@dataclass(frozen=True)
class TruncationSchedule:
    """Optimal truncation data through some level n.

    Ns = (N_0, ..., N_n) term counts, sigmas = (sigma_1, ..., sigma_{n+1})
    the re-expansion points, with sigma_0 = 0 implicit.  r_eff is the base
    contour radius minus the margin eps; B_tilde the growth constant of the
    datum; t_abs the |t| the schedule was built for.
    """

    r_eff: float
    eps: float
    B_tilde: float
    t_abs: float
    sigmas: tuple[float, ...]
    Ns: tuple[int, ...]

    def __post_init__(self):
        if len(self.sigmas) != len(self.Ns):
            raise ScheduleError("need exactly one sigma per level (sigma_1..sigma_{n+1})")
        if any(n < 1 for n in self.Ns):
            raise ScheduleError(f"every N_m must be >= 1, got {self.Ns}")
        if any(b >= a for a, b in zip(self.sigmas[1:], self.sigmas)):
            raise ScheduleError(f"sigmas must increase, got {self.sigmas}")
        if self.sigmas and self.sigmas[0] > self.r_eff * (1 + 1e-12):
            raise ScheduleError(
                f"sigma_1={self.sigmas[0]} exceeds r_eff={self.r_eff}"
            )

    @property
    def level(self) -> int:
        return len(self.Ns) - 1

    def sigma(self, m: int) -> float:
        return 0.0 if m == 0 else self.sigmas[m - 1]

    def extended(self, N_next: int, sigma_next: float) -> "TruncationSchedule":
        return replace(self, sigmas=self.sigmas + (sigma_next,), Ns=self.Ns + (N_next,))

    @property
    def total_terms(self) -> int:
        return sum(self.Ns)


@dataclass
class HyperExpansion:
    """Assembled level-n expansion: value is sum_l psi[l] * t^l."""

    level: int
    theta: float
    b: dict  # (m, j) -> b_{m,j}, 1 <= m <= level, j < N_m
    a: dict  # (n, j, l) -> coefficient of s^l in s^{N_0} prod (s-sigma_k)^{N_k} (s-sigma_{n+1})^j
    psi: np.ndarray

    def series_value(self, t) -> complex:
        t = complex(t)
        acc = np.clongdouble(0)
        tl = np.clongdouble(1)
        for p in self.psi:
            acc += np.clongdouble(p) * tl
            tl *= t
        return complex(acc)


@dataclass
class RemainderReport:
    """Quadrature value of the level-n remainder next to its analytic bound."""

    value: complex
    bound: float
    eta_n: float


class FTower:
    """Nested remainder functions over a fixed schedule and geometry.

    f0 must accept numpy arrays of complex s.  taylor holds the Taylor
    coefficients of f0 at 0 (at least N_0 of them); they double as the
    level-0 "b" coefficients.
    """

    def __init__(self, f0, taylor, schedule: TruncationSchedule,
                 geometry: ExpansionGeometry, tol: float = 1e-12):
        self.f0 = f0
        self.schedule = schedule
        self.geometry = geometry
        self.tol = tol
        self._b: dict[int, np.ndarray] = {0: np.asarray(taylor, dtype=complex)}
        self._circles: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        if len(self._b[0]) < schedule.Ns[0]:
            raise ValueError("need at least N_0 Taylor coefficients of f0")

    # -- schedule helpers ---------------------------------------------------

    def sigma(self, m: int) -> float:
        return self.schedule.sigma(m)

    def N(self, m: int) -> int:
        return self.schedule.Ns[m]

    def big_radius(self, m: int) -> float:
        return self.geometry.big_radius(m, self.sigma(m))

    # -- coefficients -------------------------------------------------------

    def b(self, m: int, count: int | None = None) -> np.ndarray:
        """b_{m,j} for j < count (default N_m); m = 0 returns Taylor data."""
        if count is None:
            count = self.N(m)
        have = self._b.get(m)
        if have is not None and len(have) >= count:
            return have[:count]
        if m == 0:
            raise ValueError("level-0 coefficients are fixed at construction")
        coeffs = self._cauchy_taylor(m, count)
        self._b[m] = coeffs
        return coeffs[:count]

    def _cauchy_taylor(self, m: int, count: int) -> np.ndarray:
        """Taylor coefficients of f_m at sigma_m via FFT'd Cauchy integrals on
        the circle of half the level-m contour radius."""
        sig = self.sigma(m)
        radius = 0.5 * self.big_radius(m)
        mm = 64
        while mm < 4 * count:
            mm *= 2

        def fourier(nodes: int) -> np.ndarray:
            psi = 2.0 * math.pi * np.arange(nodes) / nodes
            w = sig + radius * np.exp(1j * psi)
            vals = self.f(m, w)
            return np.fft.fft(vals)[:count] / nodes

        prev = fourier(mm)
        for _ in range(8):
            mm *= 2
            cur = fourier(mm)
            scale = max(float(np.max(np.abs(cur))), 1e-300)
            if np.max(np.abs(cur - prev)) <= self.tol * scale:
                prev = cur
                break
            prev = cur
        return prev / radius ** np.arange(count)

    # -- evaluation ---------------------------------------------------------

    def f(self, m: int, s, mode: str = "auto"):
        """Evaluate f_m at s (scalar or array)."""
        scalar = np.isscalar(s) or getattr(s, "ndim", 0) == 0
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = self._f_array(m, s, mode)
        return complex(out[0]) if scalar else out

    def _f_array(self, m: int, s: np.ndarray, mode: str) -> np.ndarray:
        if m == 0:
            return np.asarray(self.f0(s), dtype=complex)
        sig = self.sigma(m - 1)
        radius = self.big_radius(m - 1)
        dist = np.abs(s - sig)
        if mode == "divided":
            if np.any(dist < DIVIDED_WARN_FRACTION * max(abs(sig), radius)):
                warnings.warn(
                    f"divided-difference evaluation of f_{m} within "
                    f"{DIVIDED_WARN_FRACTION:.0%} of sigma_{m-1}; cancellation "
                    "likely, contour mode recommended",
                    RuntimeWarning,
                    stacklevel=3,
                )
            return self._divided(m, s)
        if mode == "contour":
            return np.array([self._omega_integral(m, complex(v)) for v in s])
        if mode != "auto":
            raise ValueError(f"unknown mode {mode!r}")
        out = np.empty(len(s), dtype=complex)
        near = dist < SWITCH_FRACTION * radius
        if np.any(~near):
            out[~near] = self._divided(m, s[~near])
        if np.any(near):
            out[near] = self._cached_cauchy(m, s[near])
        return out

    def _divided(self, m: int, s: np.ndarray) -> np.ndarray:
        sig = self.sigma(m - 1)
        n_prev = self.N(m - 1)
        prev = self._f_array(m - 1, s, "auto")
        coeffs = self.b(m - 1, n_prev)
        ds = s - sig
        poly = np.zeros_like(s)
        for c in coeffs[::-1]:
            poly = poly * ds + c
        return (prev - poly) / ds**n_prev

    def _circle(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and f_m values on the Cauchy circle used to evaluate f_{m+1}
        near sigma_m.  The circle sits at 0.8 of the contour radius: the
        integral is deformation-invariant inside the analyticity disc, and
        backing away from its edge keeps the trapezoid rate geometric."""
        cached = self._circles.get(m)
        if cached is not None:
            return cached
        sig = self.sigma(m)
        radius = 0.8 * self.big_radius(m)
        nodes = 128
        probes = sig + np.array([0.3, -0.2 + 0.25j, 0.1 - 0.4j]) * radius

        def build(nn):
            w = sig + radius * np.exp(2j * math.pi * np.arange(nn) / nn)
            return w, self.f(m, w)

        w, vals = build(nodes)
        prev = self._cauchy_from(w, vals, m, probes)
        for _ in range(6):
            nodes *= 2
            w, vals = build(nodes)
            cur = self._cauchy_from(w, vals, m, probes)
            scale = max(float(np.max(np.abs(cur))), 1e-300)
            if np.max(np.abs(cur - prev)) <= self.tol * scale:
                break
            prev = cur
        self._circles[m] = (w, vals)
        return self._circles[m]

    def _cauchy_from(self, w: np.ndarray, vals: np.ndarray, m: int,
                     s: np.ndarray) -> np.ndarray:
        """(1/2 pi i) oint f_m(w) / ((w-sigma_m)^{N_m} (w-s)) dw on cached nodes."""
        sig = self.sigma(m)
        n = self.N(m)
        kern = vals * (w - sig) ** (1 - n)
        return (kern[None, :] / (w[None, :] - s[:, None])).sum(axis=1) / len(w)

    def _cached_cauchy(self, m: int, s: np.ndarray) -> np.ndarray:
        w, vals = self._circle(m - 1)
        return self._cauchy_from(w, vals, m - 1, s)

    def _omega_integral(self, m: int, s: complex) -> complex:
        """f_m(s) over the literal two-disc union boundary (the dual route)."""
        sig = self.sigma(m - 1)
        n = self.N(m - 1)
        omega = self.geometry.omega(m - 1, sig, s)

        def integrand(w):
            return self.f(m - 1, w) / ((w - sig) ** n * (w - s))

        value, _ = integrate(omega, integrand, tol=self.tol)
        return value / (2j * math.pi)

    # -- stable tail --------------------------------------------------------

    def tail(self, n: int, s: np.ndarray) -> np.ndarray:
        """T_n(s) = s^{N_0} prod_{k=1..n} (s-sigma_k)^{N_k} f_{n+1}(s), computed
        without the division so the remainder integrand stays stable near the
        sigma_k and near 0."""
        s = np.asarray(s, dtype=complex)
        out = np.asarray(self.f0(s), dtype=complex).copy()
        prefix = np.ones_like(s)
        for m in range(n + 1):
            sig = self.sigma(m)
            coeffs = self.b(m, self.N(m))
            ds = s - sig
            poly = np.zeros_like(s)
            for c in coeffs[::-1]:
                poly = poly * ds + c
            out -= prefix * poly
            prefix = prefix * ds ** self.N(m)
        return out
