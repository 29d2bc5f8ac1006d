"""Contours bounding unions of two discs, their quadrature, and the
singularity-clearance check for nested contour chains.

The re-expansion machinery integrates Cauchy-type kernels over boundaries
of (big disc around sigma_n) union (small disc around the evaluation point).
Closed circles get spectral trapezoid quadrature; two-arc unions fall back to
per-arc composite Gauss-Legendre because the corners kill the trapezoid rate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .datum import AnalyticDatum, Direction, singular_distance, positive_axis_clearance
from .errors import DegenerateContourError, NonConvergenceError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    start: float  # start angle
    sweep: float  # positive, counterclockwise

    def point(self, psi):
        return self.center + self.radius * np.exp(1j * psi)

    @property
    def closed(self) -> bool:
        return abs(self.sweep - TWO_PI) < 1e-12


@dataclass(frozen=True)
class ContourSpec:
    """Positively oriented boundary of a union of (at most) two discs."""

    arcs: tuple[Arc, ...]

    @classmethod
    def circle(cls, center, radius) -> "ContourSpec":
        if radius <= 0:
            raise DegenerateContourError(f"circle radius {radius} <= 0")
        return cls(arcs=(Arc(complex(center), float(radius), 0.0, TWO_PI),))

    @classmethod
    def two_disc_union(cls, c1, r1, c2, r2) -> "ContourSpec":
        c1, c2 = complex(c1), complex(c2)
        r1, r2 = float(r1), float(r2)
        if r1 <= 0 or r2 <= 0:
            raise DegenerateContourError(f"disc radii must be positive, got {r1}, {r2}")
        d = abs(c2 - c1)
        if d + r2 <= r1:
            return cls.circle(c1, r1)
        if d + r1 <= r2:
            return cls.circle(c2, r2)
        if d >= r1 + r2:
            return cls(arcs=cls.circle(c1, r1).arcs + cls.circle(c2, r2).arcs)
        phi1 = cmath.phase(c2 - c1)
        alpha1 = math.acos(min(1.0, max(-1.0, (d * d + r1 * r1 - r2 * r2) / (2 * d * r1))))
        phi2 = cmath.phase(c1 - c2)
        alpha2 = math.acos(min(1.0, max(-1.0, (d * d + r2 * r2 - r1 * r1) / (2 * d * r2))))
        return cls(arcs=(
            Arc(c1, r1, phi1 + alpha1, TWO_PI - 2 * alpha1),
            Arc(c2, r2, phi2 + alpha2, TWO_PI - 2 * alpha2),
        ))

    @property
    def is_single_circle(self) -> bool:
        return len(self.arcs) == 1 and self.arcs[0].closed

    def contains(self, w) -> bool:
        w = complex(w)
        return any(abs(w - a.center) < a.radius for a in self.arcs)


_GL_NODES: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(n: int):
    if n not in _GL_NODES:
        _GL_NODES[n] = np.polynomial.legendre.leggauss(n)
    return _GL_NODES[n]


def _arc_quadrature(arc: Arc, f, level: int) -> complex:
    if arc.closed:
        m = 64 << level
        psi = arc.start + TWO_PI * np.arange(m) / m
        pts = arc.point(psi)
        vals = np.asarray(f(pts), dtype=complex)
        return complex(np.sum(vals * 1j * (pts - arc.center)) * (TWO_PI / m))
    panels = max(4, int(math.ceil(arc.sweep / (math.pi / 4)))) << level
    x16, w16 = _leggauss(16)
    edges = arc.start + arc.sweep * np.arange(panels + 1) / panels
    mids = (edges[:-1] + edges[1:]) / 2.0
    halves = (edges[1:] - edges[:-1]) / 2.0
    psi = (mids[:, None] + halves[:, None] * x16[None, :]).ravel()
    pts = arc.point(psi)
    vals = np.asarray(f(pts), dtype=complex)
    weights = (halves[:, None] * w16[None, :]).ravel()
    return complex(np.sum(vals * 1j * (pts - arc.center) * weights))


def integrate(contour: ContourSpec, f, tol: float = 1e-11,
              max_doublings: int = 8) -> tuple[complex, float]:
    """Quadrature of f along the contour with node doubling.

    Returns (value, error_estimate); raises NonConvergenceError if successive
    doublings never agree to `tol` (relative to max(|value|, 1)).
    """
    prev = sum(_arc_quadrature(a, f, 0) for a in contour.arcs)
    for level in range(1, max_doublings + 1):
        cur = sum(_arc_quadrature(a, f, level) for a in contour.arcs)
        err = abs(cur - prev)
        if err <= tol * max(abs(cur), 1.0):
            return cur, err
        prev = cur
    raise NonConvergenceError(
        f"contour quadrature did not converge after {max_doublings} doublings "
        f"(last delta {abs(cur - prev):.3g})"
    )


def taylor_via_cauchy(f, center, radius: float, count: int,
                      tol: float = 1e-12, max_doublings: int = 7) -> np.ndarray:
    """First `count` Taylor coefficients of f at `center` via Cauchy integrals
    over the circle of the given radius, using FFT on equispaced samples."""
    center = complex(center)
    if radius <= 0:
        raise DegenerateContourError(f"Cauchy circle radius {radius} <= 0")
    m = 64
    while m < 4 * count:
        m *= 2

    def fourier(mm: int) -> np.ndarray:
        psi = TWO_PI * np.arange(mm) / mm
        vals = np.asarray(f(center + radius * np.exp(1j * psi)), dtype=complex)
        return np.fft.fft(vals)[:count] / mm

    prev = fourier(m)
    scale = max(np.max(np.abs(prev)), 1e-300)
    for _ in range(max_doublings):
        m *= 2
        cur = fourier(m)
        scale = max(np.max(np.abs(cur)), 1e-300)
        if np.max(np.abs(cur - prev)) <= tol * scale:
            prev = cur
            break
        prev = cur
    else:
        raise NonConvergenceError("Cauchy coefficient extraction did not converge")
    powers = radius ** np.arange(count)
    return prev / powers


class ExpansionGeometry:
    """Datum + direction + symbol bundle with the derived contour geometry.

    Holds the margin eps, the shrunken inner radius, and memoized distances
    d(w) from Borel-plane points to the image of the singular rays.  All
    contour radii used by the expansion engines come from here.
    """

    def __init__(self, datum: AnalyticDatum, direction: Direction,
                 q=2, lam: complex = 1.0,
                 eps: float | None = None, eps_tilde: float | None = None):
        self.datum = datum
        self.direction = direction
        self.q = q
        self.lam = complex(lam)
        self.eps_tilde = datum.holomorphy_radius if eps_tilde is None else float(eps_tilde)
        r = datum.r
        if math.isfinite(r):
            if self.eps_tilde >= r:
                raise ValueError("eps_tilde must stay below the inner singularity radius")
            self.r_inner = r - self.eps_tilde
            self.base_radius = self.r_inner ** float(q) / abs(self.lam)
        else:
            self.r_inner = math.inf
            self.base_radius = math.inf
        if eps is None:
            eps = self.default_eps()
        self.eps = float(eps)
        if math.isfinite(self.base_radius):
            if not 0.0 < self.eps < self.base_radius / 2:
                raise ValueError(
                    f"eps={self.eps} outside the admissible range "
                    f"(0, {self.base_radius / 2:.6g})"
                )
        self._dist_cache: dict[complex, float] = {}

    def default_eps(self) -> float:
        """Half of the tighter of: half the base radius, half the clearance of
        the singular images from the positive axis."""
        if not math.isfinite(self.base_radius):
            return 1e-2
        clear = positive_axis_clearance(
            self.datum, self.direction.theta, self.q, self.lam, self.eps_tilde
        )
        return 0.5 * min(self.base_radius / 2.0, 0.5 * clear)

    def distance(self, w) -> float:
        """d(w, theta), memoized."""
        w = complex(w)
        if w == 0:
            return self.base_radius
        if w not in self._dist_cache:
            self._dist_cache[w] = singular_distance(
                w, self.direction.theta, self.datum, self.q, self.lam, self.eps_tilde
            )
        return self._dist_cache[w]

    @staticmethod
    def rho(n: int) -> float:
        return 2.0 - 2.0 ** (-n)

    def big_radius(self, n: int, sigma_n) -> float:
        d = self.base_radius if n == 0 else self.distance(sigma_n)
        radius = d - self.rho(n) * self.eps
        if radius <= 0:
            raise DegenerateContourError(
                f"level-{n} disc radius {radius:.3g} <= 0 (d={d:.3g}, eps={self.eps:.3g})"
            )
        return radius

    def small_radius(self, n: int) -> float:
        return 2.0 ** (-n - 1) * self.eps

    def omega(self, n: int, sigma_n, s) -> ContourSpec:
        return build_omega(n, sigma_n, s, self.eps, self)


def build_omega(level: int, sigma_n, s, eps: float,
                geometry: ExpansionGeometry) -> ContourSpec:
    """Boundary of (big disc around sigma_n) union (small disc around s).

    The big radius is d(sigma_n, theta) - rho_n*eps (base radius at level 0)
    and the small radius 2^(-n-1)*eps.  A small disc swallowed by the big one
    degenerates to the big circle alone.
    """
    if abs(eps - geometry.eps) > 1e-15 * max(1.0, geometry.eps):
        raise ValueError("eps must match the geometry it was validated against")
    big = geometry.big_radius(level, sigma_n)
    small = geometry.small_radius(level)
    return ContourSpec.two_disc_union(complex(sigma_n), big, complex(s), small)


def clearance_check(chain, eps: float, geometry: ExpansionGeometry,
                    slack: float = 1e-9) -> bool:
    """True iff the innermost chain point keeps distance >= eps from the
    singular-ray image (up to numerical slack; the worst admissible chains
    attain eps exactly)."""
    x0 = complex(chain[0])
    return geometry.distance(x0) >= eps - slack * max(1.0, eps)


def sample_admissible_chain(rng, sigmas, s, geometry: ExpansionGeometry,
                            max_tries: int = 200) -> list[complex]:
    """Random chain x_0..x_{n+1}, x_{n+1} = s, with x_k on the boundary of the
    level-k two-disc union around (sigma_k, x_{k+1}).  sigmas = [sigma_0..sigma_n].
    Every hop lands on either the big or the small circle, restricted to the
    part that actually belongs to the union boundary."""
    chain = [complex(s)]
    for k in range(len(sigmas) - 1, -1, -1):
        center_big = complex(sigmas[k])
        r_big = geometry.big_radius(k, sigmas[k])
        r_small = geometry.small_radius(k)
        target = chain[-1]
        for _ in range(max_tries):
            if rng.random() < 0.5:
                cand = center_big + r_big * cmath.exp(1j * rng.uniform(0.0, TWO_PI))
                if abs(cand - target) >= r_small:
                    break
            else:
                cand = target + r_small * cmath.exp(1j * rng.uniform(0.0, TWO_PI))
                if abs(cand - center_big) >= r_big:
                    break
        else:
            raise RuntimeError("could not sample a boundary point; degenerate geometry?")
        chain.append(cand)
    chain.reverse()
    return chain
