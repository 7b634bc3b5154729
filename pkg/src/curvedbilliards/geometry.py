"""Surface profiles, contours, curvatures and the scalar coefficient fields.

Everything downstream (classical dynamics, finite differences, basis
expansion) consumes the quantities defined here: the height profile f(r)
with its first two radial derivatives, the induced metric factors, the
principal curvatures, and the derived fields

    xi    = 1 / (1 + f'^2)          kinetic-energy attenuation
    kappa = xi^2 f' f''             radial first-derivative coefficient
    zeta  = 1 - xi                  centrifugal enhancement
    u_sigma = -(hbar^2/8 mu)(k_r - k_phi)^2   geometry-induced potential

Units: hbar = mu = 1 throughout; lengths are in units of the contour scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HBAR = 1.0
MASS = 1.0

# Profile kinds
FLAT = "flat"
CONE = "cone"
GAUSSIAN_BUMP = "gaussian_bump"

CONFINING_FORMS = ("derived", "paper")


class SingularPointError(ValueError):
    """Raised when a field is requested at a genuine singular point (cone apex)."""


class QuadratureError(RuntimeError):
    """Raised when an integral fails to reach the requested tolerance."""


@dataclass(frozen=True)
class SurfaceProfile:
    """Radially symmetric height profile z = f(r) placed at ``center``.

    kind is one of flat / cone / gaussian_bump.  For a cone, f0 is the apex
    height and r_base the base radius (f = 0 beyond the base).  For a
    Gaussian bump, v0 is the volume-like amplitude and sigma the width.
    """

    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    f0: float = 0.0
    r_base: float = 1.0
    v0: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in (FLAT, CONE, GAUSSIAN_BUMP):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == CONE:
            if self.f0 < 0:
                raise ValueError("cone height f0 must be >= 0")
            if self.r_base <= 0:
                raise ValueError("cone base radius must be > 0")
        if self.kind == GAUSSIAN_BUMP:
            if self.v0 <= 0:
                raise ValueError("gaussian amplitude v0 must be > 0")
            if self.sigma <= 0:
                raise ValueError("gaussian width sigma must be > 0")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def flat(center=(0.0, 0.0)) -> "SurfaceProfile":
        return SurfaceProfile(FLAT, center=tuple(center))

    @staticmethod
    def cone(f0, r_base, center=(0.0, 0.0)) -> "SurfaceProfile":
        return SurfaceProfile(CONE, center=tuple(center), f0=float(f0),
                              r_base=float(r_base))

    @staticmethod
    def gaussian_bump(v0, sigma, center=(0.0, 0.0)) -> "SurfaceProfile":
        return SurfaceProfile(GAUSSIAN_BUMP, center=tuple(center),
                              v0=float(v0), sigma=float(sigma))

    # -- height and radial derivatives --------------------------------------

    def f(self, r):
        """Height f(r)."""
        r = np.asarray(r, dtype=float)
        if self.kind == FLAT:
            return np.zeros_like(r)
        if self.kind == CONE:
            return np.where(r < self.r_base, self.f0 * (1.0 - r / self.r_base), 0.0)
        amp = self.v0 / (2.0 * np.pi * self.sigma**2)
        return amp * np.exp(-r * r / (2.0 * self.sigma**2))

    def df(self, r):
        """First radial derivative f'(r) (pointwise; cone flank value for r < r_base)."""
        r = np.asarray(r, dtype=float)
        if self.kind == FLAT:
            return np.zeros_like(r)
        if self.kind == CONE:
            return np.where(r < self.r_base, -self.f0 / self.r_base, 0.0)
        amp = self.v0 / (2.0 * np.pi * self.sigma**4)
        return -amp * r * np.exp(-r * r / (2.0 * self.sigma**2))

    def d2f(self, r):
        """Second radial derivative f''(r) (zero on cone flank and beyond base)."""
        r = np.asarray(r, dtype=float)
        if self.kind in (FLAT, CONE):
            return np.zeros_like(r)
        amp = self.v0 / (2.0 * np.pi * self.sigma**4)
        return -amp * (1.0 - r * r / self.sigma**2) * np.exp(-r * r / (2.0 * self.sigma**2))

    def df_over_r(self, r):
        """f'(r)/r, with the exact analytic r -> 0 limit where one exists.

        For the Gaussian bump f'(r)/r = -v0/(2 pi sigma^4) exp(-r^2/2sigma^2)
        at every r, so the axis is perfectly regular.  The cone apex is a
        genuine singular point.
        """
        r = np.asarray(r, dtype=float)
        if self.kind == FLAT:
            return np.zeros_like(r)
        if self.kind == GAUSSIAN_BUMP:
            amp = self.v0 / (2.0 * np.pi * self.sigma**4)
            return -amp * np.exp(-r * r / (2.0 * self.sigma**2))
        if np.any(r <= 0):
            raise SingularPointError("cone apex: f'/r undefined at r = 0")
        return self.df(r) / r

    def interface_radii(self):
        """Radii where the slope is discontinuous (integrators refine crossings)."""
        if self.kind == CONE:
            return (self.r_base,)
        return ()

    @property
    def xi0(self):
        """Constant xi on a cone flank, 1/(1+(f0/r_base)^2); 1.0 for flat."""
        if self.kind == CONE:
            return 1.0 / (1.0 + (self.f0 / self.r_base) ** 2)
        if self.kind == FLAT:
            return 1.0
        raise ValueError("xi0 is only a constant for flat/cone profiles")


# -- contours ---------------------------------------------------------------


@dataclass(frozen=True)
class Circle:
    """Circular contour of radius R centered at the origin."""

    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be > 0")

    @property
    def area(self):
        return np.pi * self.radius**2

    @property
    def perimeter(self):
        return 2.0 * np.pi * self.radius

    @property
    def scale(self):
        return self.radius

    def contains(self, x, y):
        return np.hypot(x, y) < self.radius

    def signed_distance(self, x, y):
        """Positive inside, zero on the wall."""
        return self.radius - np.hypot(x, y)


@dataclass(frozen=True)
class Rectangle:
    """Rectangular contour [0, lx] x [0, ly]."""

    lx: float
    ly: float

    def __post_init__(self):
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("rectangle sides must be > 0")

    @property
    def area(self):
        return self.lx * self.ly

    @property
    def perimeter(self):
        return 2.0 * (self.lx + self.ly)

    @property
    def scale(self):
        return max(self.lx, self.ly)

    def contains(self, x, y):
        return (x > 0) & (x < self.lx) & (y > 0) & (y < self.ly)

    def signed_distance(self, x, y):
        return np.minimum(np.minimum(x, self.lx - x), np.minimum(y, self.ly - y))


# -- metric and coefficient fields ------------------------------------------


@dataclass(frozen=True)
class MetricData:
    """Diagonal surface metric at radius r: a11 = 1+f'^2, a22 = r^2."""

    a11: np.ndarray
    a22: np.ndarray
    sqrt_a: np.ndarray


@dataclass(frozen=True)
class CoefficientFields:
    """The scalar fields xi, kappa, zeta and the confining potential at r."""

    xi: np.ndarray
    kappa: np.ndarray
    zeta: np.ndarray
    u_sigma: np.ndarray


def metric_data(profile: SurfaceProfile, r) -> MetricData:
    r = np.asarray(r, dtype=float)
    fp = profile.df(r)
    a11 = 1.0 + fp * fp
    a22 = r * r
    return MetricData(a11=a11, a22=a22, sqrt_a=r * np.sqrt(a11))


def gaussian_curvature(profile: SurfaceProfile, r):
    """Gaussian curvature K(r) = f' f'' / (r [1 + f'^2]^2).

    Equal to the product of the principal curvatures (tested identity).
    The cone apex is singular; the Gaussian bump axis takes its analytic
    limit (v0/(2 pi sigma^4))^2.
    """
    r = np.asarray(r, dtype=float)
    if profile.kind == CONE and np.any(r <= 0):
        raise SingularPointError("cone apex is a singular point of K")
    fpp = profile.d2f(r)
    fp_over_r = profile.df_over_r(r)
    fp = profile.df(r)
    xi = 1.0 / (1.0 + fp * fp)
    return fp_over_r * fpp * xi * xi


def principal_curvatures(profile: SurfaceProfile, r):
    """(k_r, k_phi): meridian curvature f'' xi^(3/2) and parallel (f'/r) xi^(1/2)."""
    r = np.asarray(r, dtype=float)
    if profile.kind == CONE and np.any(r <= 0):
        raise SingularPointError("cone apex is a singular point")
    fp = profile.df(r)
    xi = 1.0 / (1.0 + fp * fp)
    k_r = profile.d2f(r) * xi**1.5
    k_phi = profile.df_over_r(r) * np.sqrt(xi)
    return k_r, k_phi


def confining_potential(profile: SurfaceProfile, r, confining_form="derived"):
    """Geometry-induced potential -(hbar^2/8 mu)(k_r - k_phi)^2.

    The cone admits two closed forms that disagree by one power of xi0:
    'derived' substitutes the principal curvatures directly, giving
    -(hbar^2/8mu)(f0/R)^2 xi0 / r^2 on the flank, while 'paper' carries an
    extra xi0.  For flat and Gaussian profiles the two coincide.
    """
    if confining_form not in CONFINING_FORMS:
        raise ValueError(f"confining_form must be one of {CONFINING_FORMS}")
    r = np.asarray(r, dtype=float)
    if profile.kind == CONE and confining_form == "paper":
        slope2 = (profile.f0 / profile.r_base) ** 2
        xi0 = profile.xi0
        inside = r < profile.r_base
        with np.errstate(divide="ignore"):
            val = -(HBAR**2 / (8.0 * MASS)) * slope2 * xi0**2 / (r * r)
        return np.where(inside, val, 0.0)
    k_r, k_phi = principal_curvatures(profile, r)
    return -(HBAR**2 / (8.0 * MASS)) * (k_r - k_phi) ** 2


def coefficient_fields(profile: SurfaceProfile, r, confining_form="derived") -> CoefficientFields:
    """xi, kappa, zeta and u_sigma at radius r (vectorized)."""
    r = np.asarray(r, dtype=float)
    fp = profile.df(r)
    fpp = profile.d2f(r)
    xi = 1.0 / (1.0 + fp * fp)
    kappa = xi * xi * fp * fpp
    zeta = 1.0 - xi
    u_sigma = confining_potential(profile, r, confining_form)
    return CoefficientFields(xi=xi, kappa=kappa, zeta=zeta, u_sigma=u_sigma)


# -- surface area -----------------------------------------------------------


def _gl_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _quad_1d(func, a, b, tol=1e-12, max_depth=40):
    """Adaptive Gauss-Legendre on [a, b]; compares 16- vs 32-node panels."""
    x16, w16 = _gl_nodes(16)
    x32, w32 = _gl_nodes(32)

    def panel(lo, hi, nodes, weights):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return half * np.sum(weights * func(mid + half * nodes))

    total = 0.0
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        coarse = panel(lo, hi, x16, w16)
        fine = panel(lo, hi, x32, w32)
        if abs(fine - coarse) <= tol * max(1.0, abs(fine)) or depth >= max_depth:
            if depth >= max_depth:
                raise QuadratureError("1d quadrature did not converge")
            total += fine
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    return total


def _quad_2d(func, ax, bx, ay, by, tol=1e-10, max_depth=24):
    """Adaptive tensor Gauss-Legendre on a rectangle (12 vs 20 nodes per axis)."""
    xa, wa = _gl_nodes(12)
    xb, wb = _gl_nodes(20)

    def panel(x0, x1, y0, y1, nodes, weights):
        mx, hx = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
        my, hy = 0.5 * (y0 + y1), 0.5 * (y1 - y0)
        X = mx + hx * nodes[:, None]
        Y = my + hy * nodes[None, :]
        vals = func(X, Y)
        return hx * hy * np.einsum("i,j,ij->", weights, weights, vals)

    total = 0.0
    stack = [(ax, bx, ay, by, 0)]
    while stack:
        x0, x1, y0, y1, depth = stack.pop()
        coarse = panel(x0, x1, y0, y1, xa, wa)
        fine = panel(x0, x1, y0, y1, xb, wb)
        if abs(fine - coarse) <= tol * max(1.0, abs(fine)):
            total += fine
        elif depth >= max_depth:
            raise QuadratureError("2d quadrature did not converge")
        else:
            xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            stack.append((x0, xm, y0, ym, depth + 1))
            stack.append((xm, x1, y0, ym, depth + 1))
            stack.append((x0, xm, ym, y1, depth + 1))
            stack.append((xm, x1, ym, y1, depth + 1))
    return total


def surface_area(profile: SurfaceProfile, contour, tol=1e-10):
    """Area of the surface patch over the billiard domain.

    Integrates sqrt(1 + f'^2) over the contour interior.  A full cone with
    matching circular contour reduces to the closed form pi R sqrt(R^2+f0^2).
    """
    if profile.kind == FLAT:
        return contour.area

    cx, cy = profile.center

    if isinstance(contour, Circle) and abs(cx) < 1e-15 and abs(cy) < 1e-15:
        # concentric case: 1d radial integral, split at slope kinks
        R = contour.radius

        def integrand(r):
            fp = profile.df(r)
            return 2.0 * np.pi * r * np.sqrt(1.0 + fp * fp)

        cuts = sorted({0.0, R} | {b for b in profile.interface_radii() if b < R})
        return sum(_quad_1d(integrand, lo, hi, tol=tol)
                   for lo, hi in zip(cuts[:-1], cuts[1:]))

    def density(x, y):
        r = np.hypot(x - cx, y - cy)
        fp = profile.df(r)
        return np.sqrt(1.0 + fp * fp)

    if isinstance(contour, Rectangle):
        return _quad_2d(density, 0.0, contour.lx, 0.0, contour.ly, tol=tol)

    # off-center profile in a circle: integrate in polar coordinates about
    # the contour center, where the domain is the rectangle [0,R] x [0,2pi]
    def polar_density(rho, theta):
        x = rho * np.cos(theta)
        y = rho * np.sin(theta)
        return rho * density(x, y)

    return _quad_2d(polar_density, 0.0, contour.radius, 0.0, 2.0 * np.pi, tol=tol)
