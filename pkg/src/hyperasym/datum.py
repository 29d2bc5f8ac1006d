"""Cauchy datum: finite sums of complex poles plus a polynomial part.

Covers evaluation, exact Taylor recurrences, the singular-ray geometry that
drives contour placement (Stokes directions, distance from a point in the
Borel plane to the image of the singular rays), and growth-envelope checks.

Branch-point data is out of scope: restricting to poles keeps every Taylor
coefficient an exact recurrence and makes the zero-growth-constant envelope
valid, which is what the downstream oracle comparisons rely on.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GrowthBoundError, SingularityError, StokesViolationError

TWO_PI = 2.0 * math.pi


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class PoleTerm:
    """One term c / (a - z)^m."""

    coefficient: complex
    location: complex
    order: int = 1

    def __post_init__(self):
        if self.order < 1 or int(self.order) != self.order:
            raise ValueError("pole order must be a positive integer")
        if self.location == 0:
            raise ValueError("pole at the origin is not admissible")


@dataclass(frozen=True)
class Ray:
    angle: float
    radii: tuple[float, ...]  # strictly increasing moduli on this ray


@dataclass(frozen=True)
class SingularitySet:
    rays: tuple[Ray, ...]

    @classmethod
    def from_points(cls, points, angle_tol: float = 1e-12) -> "SingularitySet":
        groups: dict[float, list[float]] = {}
        for a in points:
            ang = cmath.phase(a) % TWO_PI
            for key in groups:
                if _circ_dist(key, ang) < angle_tol:
                    ang = key
                    break
            groups.setdefault(ang, []).append(abs(a))
        rays = tuple(
            Ray(angle=ang, radii=tuple(sorted(set(groups[ang]))))
            for ang in sorted(groups)
        )
        return cls(rays=rays)

    @property
    def K(self) -> int:
        return len(self.rays)

    @property
    def points(self) -> tuple[complex, ...]:
        return tuple(
            r * cmath.exp(1j * ray.angle) for ray in self.rays for r in ray.radii
        )

    @property
    def r(self) -> float:
        """Modulus of the innermost singular point; inf when there is none."""
        if not self.rays:
            return math.inf
        return min(ray.radii[0] for ray in self.rays)

    @property
    def ray_anchors(self) -> tuple[complex, ...]:
        """Innermost point of each ray; the singular rays are {anchor*t, t>=1}."""
        return tuple(
            ray.radii[0] * cmath.exp(1j * ray.angle) for ray in self.rays
        )


@dataclass(frozen=True)
class AnalyticDatum:
    """phi(z) = sum of pole terms + polynomial(z), holomorphic off the rays H."""

    poles: tuple[PoleTerm, ...] = ()
    polynomial: tuple[complex, ...] = ()  # coefficients, low order first
    eps_tilde: float | None = None  # holomorphy-disc radius; default 0.1*r

    singularities: SingularitySet = field(init=False)

    def __post_init__(self):
        sing = SingularitySet.from_points([p.location for p in self.poles])
        object.__setattr__(self, "singularities", sing)
        if self.eps_tilde is not None:
            if self.eps_tilde <= 0:
                raise ValueError("eps_tilde must be positive")
            if self.eps_tilde >= sing.r:
                raise ValueError(
                    f"eps_tilde={self.eps_tilde} must stay below the inner "
                    f"singularity radius r={sing.r}"
                )

    @property
    def r(self) -> float:
        return self.singularities.r

    @property
    def holomorphy_radius(self) -> float:
        if self.eps_tilde is not None:
            return self.eps_tilde
        return 0.1 * self.r if math.isfinite(self.r) else 1.0

    # -- evaluation ---------------------------------------------------------

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """phi(z); accepts scalars or numpy arrays."""
        z = np.asarray(z, dtype=complex)
        scale = max((abs(p.location) for p in self.poles), default=1.0)
        out = np.zeros_like(z)
        for p in self.poles:
            dz = p.location - z
            if np.any(np.abs(dz) < 1e-13 * scale):
                raise SingularityError(f"evaluation at pole {p.location}")
            out = out + p.coefficient / dz**p.order
        if self.polynomial:
            acc = np.zeros_like(z)
            for c in reversed(self.polynomial):
                acc = acc * z + c
            out = out + acc
        return out if out.ndim else complex(out)

    def derivative(self, p_order: int, z) -> complex:
        """phi^(p)(z) by the exact pole recurrences; p_order kept moderate."""
        z = complex(z)
        total = 0j
        for p in self.poles:
            rising = 1.0
            for i in range(p_order):
                rising *= p.order + i
            total += p.coefficient * rising / (p.location - z) ** (p.order + p_order)
        for i, c in enumerate(self.polynomial):
            if i >= p_order:
                fall = 1.0
                for j in range(p_order):
                    fall *= i - j
                total += c * fall * z ** (i - p_order)
            elif i == p_order:
                total += c * math.factorial(i)
        return total

    def taylor_coefficients(self, z0, count: int) -> np.ndarray:
        """First `count` Taylor coefficients phi^(n)(z0)/n! via shift recurrences."""
        z0 = complex(z0)
        if abs(z0) >= self.holomorphy_radius and self.poles:
            raise SingularityError(
                f"|z0|={abs(z0):.3g} outside the holomorphy disc "
                f"(radius {self.holomorphy_radius:.3g})"
            )
        coeffs = np.zeros(count, dtype=complex)
        for p in self.poles:
            b = p.location - z0
            cur = p.coefficient / b**p.order
            for n in range(count):
                coeffs[n] += cur
                cur *= (n + p.order) / ((n + 1) * b)
        for i, c in enumerate(self.polynomial):
            for n in range(min(i, count - 1) + 1):
                coeffs[n] += c * math.comb(i, n) * z0 ** (i - n)
        return coeffs

    # -- geometry -----------------------------------------------------------

    def stokes_directions(self, q=2, arg_lambda: float = 0.0) -> list[float]:
        """Sorted directions q*angle_i - arg(lambda) mod 2*pi, one per singular ray."""
        qf = float(q)
        raw = [(qf * ray.angle - arg_lambda) % TWO_PI for ray in self.singularities.rays]
        out: list[float] = []
        for v in sorted(raw):
            if not out or _circ_dist(out[-1], v) > 1e-12:
                out.append(v)
        if len(out) > 1 and _circ_dist(out[0], out[-1]) <= 1e-12:
            out.pop()
        return out

    def direction(self, theta: float, delta: float, q=2, arg_lambda: float = 0.0) -> "Direction":
        return Direction(theta=theta, delta=delta,
                         stokes=tuple(self.stokes_directions(q, arg_lambda)))


@dataclass(frozen=True)
class Direction:
    """A summation direction theta kept delta-away from every Stokes direction."""

    theta: float
    delta: float
    stokes: tuple[float, ...] = ()

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        bad = [s for s in self.stokes if _circ_dist(self.theta, s) < self.delta]
        if bad:
            raise StokesViolationError(
                f"theta={self.theta:.6g} within delta={self.delta:.3g} of "
                f"Stokes direction(s) {bad}"
            )


# -- Borel-plane distance ---------------------------------------------------


def _ray_image(anchor: complex, taus, zs, theta: float, q, lam: complex):
    """e^{-i theta} (anchor*tau - z)^q / lam over broadcastable tau, z grids."""
    zeta = anchor * np.asarray(taus, dtype=complex)
    return np.exp(-1j * theta) * (zeta - np.asarray(zs, dtype=complex)) ** float(q) / lam


def _golden_min(f, a: float, b: float, iters: int = 60):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv * (b - a)
    x2 = a + inv * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 > f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = f(x1)
    return (a + b) / 2.0, min(f1, f2)


def singular_distance(
    w,
    theta: float,
    datum: AnalyticDatum,
    q=2,
    lam: complex = 1.0,
    eps_tilde: float | None = None,
    refine: bool = True,
) -> float:
    """Distance from w to the Borel-plane image of the singular rays.

    inf over z in the closed holomorphy disc and zeta on the rays H of
    |w - e^{-i theta} (zeta - z)^q / lam|.  For fixed zeta the target is the
    modulus of a function analytic in z, so the infimum over the disc sits on
    its boundary unless a zero lies inside; the zero case is detected exactly
    (it needs a q-th root of w*lam*e^{i theta} within eps_tilde of a ray) and
    the rest is a ray sweep composed with a boundary sweep plus golden-section
    refinement.
    """
    w = complex(w)
    lam = complex(lam)
    qf = float(q)
    et = datum.holomorphy_radius if eps_tilde is None else eps_tilde
    anchors = datum.singularities.ray_anchors
    if not anchors:
        return math.inf

    # interior-zero test: some branch root of w*lam*e^{i theta} within et of a ray
    if w != 0:
        base = w * lam * cmath.exp(1j * theta)
        mag = abs(base) ** (1.0 / qf)
        args = [(cmath.phase(base) + TWO_PI * j) / qf for j in range(int(round(qf)))]
        for anchor in anchors:
            for arg in args:
                root = mag * cmath.exp(1j * arg)
                # distance from root to the ray {anchor*t : t >= 1}
                t_star = max(1.0, (root * anchor.conjugate()).real / abs(anchor) ** 2)
                if abs(root - anchor * t_star) <= et:
                    return 0.0

    best = math.inf
    n_phi = 64
    phis = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    for anchor in anchors:
        # tau range: beyond tau_max the image modulus alone exceeds any current best
        a_eff = max(abs(anchor) - et, 1e-12)
        cap = abs(w) + 10.0 + (best if math.isfinite(best) else 0.0)
        tau_max = max(2.0, (abs(lam) * cap) ** (1.0 / qf) / a_eff)
        taus = np.geomspace(1.0, tau_max, 160)
        zs = et * np.exp(1j * phis)
        img = _ray_image(anchor, taus[:, None], zs[None, :], theta, qf, lam)
        dist = np.abs(w - img)
        idx = np.unravel_index(np.argmin(dist), dist.shape)
        best = min(best, float(dist[idx]))
        if refine:
            i, j = int(idx[0]), int(idx[1])

            def on_ray(tau, _j=j, _anchor=anchor):
                return abs(w - complex(_ray_image(_anchor, tau, zs[_j], theta, qf, lam)))

            lo = taus[max(0, i - 1)]
            hi = taus[min(len(taus) - 1, i + 1)]
            tau_best, val = _golden_min(on_ray, lo, hi)
            best = min(best, val)

            def on_circle(phi, _tau=tau_best, _anchor=anchor):
                z = et * cmath.exp(1j * phi)
                return abs(w - complex(_ray_image(_anchor, _tau, z, theta, qf, lam)))

            span = TWO_PI / n_phi
            _, val = _golden_min(on_circle, phis[j] - span, phis[j] + span)
            best = min(best, val)
    return best


def positive_axis_clearance(
    datum: AnalyticDatum, theta: float, q=2, lam: complex = 1.0,
    eps_tilde: float | None = None,
) -> float:
    """inf over z in the holomorphy disc and singular points a of
    dist(e^{-i theta}(a - z)^q / lam, R_+); feeds the contour margin choice."""
    qf = float(q)
    et = datum.holomorphy_radius if eps_tilde is None else eps_tilde
    points = datum.singularities.points
    if not points:
        return math.inf
    zs = np.concatenate([
        et * np.exp(1j * np.linspace(0, TWO_PI, 256, endpoint=False)),
        [0.0],
    ])
    best = math.inf
    for a in points:
        img = np.exp(-1j * theta) * (a - zs) ** qf / lam
        d = np.where(img.real > 0, np.abs(img.imag), np.abs(img))
        best = min(best, float(d.min()))
    return best


def growth_bound(
    datum: AnalyticDatum,
    p: float = 2.0,
    claimed: tuple[float, float] | None = None,
    xi: float | None = None,
    n_samples: int = 2000,
    seed: int = 0,
) -> tuple[float, float]:
    """Growth envelope (C, B) with |phi(z)| <= C*exp(B*|z|^p) off the fattened rays.

    Pole-plus-polynomial data admits B = 0 with C taken from a calibration
    sample (poles decay at infinity; a polynomial tail is absorbed by bumping
    C over the sampled region, which is all downstream consumers need).  When
    `claimed` is given the sampled values are checked against it instead and
    a violation raises GrowthBoundError with the worst offender.
    """
    r = datum.r if math.isfinite(datum.r) else 1.0
    xi = 0.5 * datum.holomorphy_radius if xi is None else xi
    rng = np.random.default_rng(seed)
    zs = (rng.uniform(-4 * r, 4 * r, n_samples)
          + 1j * rng.uniform(-4 * r, 4 * r, n_samples))
    anchors = datum.singularities.ray_anchors
    if anchors:
        keep = np.ones(len(zs), dtype=bool)
        for anchor in anchors:
            t = np.maximum(1.0, (zs * np.conj(anchor)).real / abs(anchor) ** 2)
            keep &= np.abs(zs - anchor * t) >= xi
        zs = zs[keep]
    vals = np.abs(datum.eval(zs))
    if claimed is not None:
        c_claim, b_claim = claimed
        envelope = c_claim * np.exp(b_claim * np.abs(zs) ** p)
        bad = vals > envelope
        if np.any(bad):
            i = int(np.argmax(vals / envelope))
            raise GrowthBoundError(
                f"|phi({zs[i]:.4g})| = {vals[i]:.4g} exceeds claimed envelope "
                f"{envelope[i]:.4g} (C={c_claim}, B={b_claim}, p={p})"
            )
        return claimed
    return (float(vals.max()) * 1.5, 0.0)
