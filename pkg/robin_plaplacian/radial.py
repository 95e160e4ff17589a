"""Ball quantities in dimension N: the generalized pi, Dirichlet eigenfunctions of the
radial p-Laplacian by shooting, reverse Hölder constants and the Hersch-type bound.

The radial problem is solved once per (p, N) at unit eigenvalue; any other
radius follows from the scaling :math:`\\lambda(R) = (z_1/R)^p`, where
:math:`z_1` is the first zero of the unit-eigenvalue profile.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterable

import numpy as np
from scipy import integrate, optimize, special

from .eigensolve import SolverError
from .fem import check_exponent

logger = logging.getLogger(__name__)

_START_OFFSET = 1e-6
_SHOOTING_RTOL = 1e-12
_SHOOTING_ATOL = 1e-14
_SHOOTING_REACH = 100.0
_PROFILE_POINTS = 201


class RadialShootingError(SolverError):
    pass


class InvalidExponentError(ValueError):
    pass


def pi_p(p: float) -> float:
    """Half period of the one-dimensional p-sine, :math:`2\\pi / (p \\sin(\\pi/p))`."""
    if not p > 1:
        raise InvalidExponentError(f"pi_p needs p > 1, got {p}")
    return 2.0 * math.pi / (p * math.sin(math.pi / p))


def sphere_measure(dimension: int) -> float:
    """Surface measure of the unit sphere in dimension N, :math:`2\\pi^{N/2}/\\Gamma(N/2)`."""
    return 2.0 * math.pi ** (dimension / 2.0) / math.gamma(dimension / 2.0)


@dataclass(frozen=True)
class _UnitShot:
    """Profile with v(0) = 1 at eigenvalue 1, defined up to its first zero."""

    p: float
    dimension: int
    zero: float
    start: float
    solution: Callable[[np.ndarray], np.ndarray]

    def profile(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        values = np.empty_like(s)
        near = s < self.start
        coefficient = (self.p - 1.0) / self.p * (1.0 / self.dimension) ** (1.0 / (self.p - 1.0))
        values[near] = 1.0 - coefficient * s[near] ** (self.p / (self.p - 1.0))
        inside = ~near & (s < self.zero)
        if np.any(inside):
            values[inside] = self.solution(s[inside])[0]
        values[s >= self.zero] = 0.0
        return values

    def moment(self, q: float) -> float:
        """:math:`\\int_0^{z_1} |v(s)|^q s^{N-1} ds`."""
        n = self.dimension
        head = self.start ** n / n

        def integrand(s):
            return abs(float(self.solution(s)[0])) ** q * s ** (n - 1)

        body, _ = integrate.quad(integrand, self.start, self.zero, limit=200, epsabs=0.0, epsrel=1e-12)
        return head + body


@lru_cache(maxsize=None)
def _unit_shot(p: float, dimension: int) -> _UnitShot:
    """Integrate :math:`v' = \\mathrm{sign}(w)|w|^{1/(p-1)}`, :math:`w' = -|v|^{p-2}v - (N-1)w/r` to the first zero of v.

    Here :math:`w = |v'|^{p-2}v'`; the singular origin is skipped with the
    leading-order series :math:`v \\approx 1 - c r^{p'}`, :math:`w \\approx -r/N`.
    """
    n = dimension
    start = _START_OFFSET
    coefficient = (p - 1.0) / p * (1.0 / n) ** (1.0 / (p - 1.0))
    y0 = [1.0 - coefficient * start ** (p / (p - 1.0)), -start / n]

    def rhs(r, y):
        v, w = y
        return [
            math.copysign(abs(w) ** (1.0 / (p - 1.0)), w),
            -math.copysign(abs(v) ** (p - 1.0), v) - (n - 1) * w / r,
        ]

    def first_zero(r, y):
        return y[0]

    first_zero.terminal = True
    first_zero.direction = -1

    sol = integrate.solve_ivp(
        rhs,
        (start, _SHOOTING_REACH),
        y0,
        method="DOP853",
        rtol=_SHOOTING_RTOL,
        atol=_SHOOTING_ATOL,
        dense_output=True,
        events=first_zero,
    )
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise RadialShootingError(
            f"Radial profile for p={p}, N={n} has no zero before r={_SHOOTING_REACH}: {sol.message}"
        )
    zero = float(sol.t_events[0][0])
    logger.debug(f"Unit-eigenvalue radial profile for p={p}, N={n} vanishes at r={zero:.15g}")
    return _UnitShot(p=p, dimension=n, zero=zero, start=start, solution=sol.sol)


@dataclass(frozen=True)
class RadialEigen:
    """First Dirichlet eigenfunction of the ball of radius R, normalized by v(0) = 1.

    Attributes:
        dimension: space dimension N
        p: exponent
        radius: ball radius R
        eigenvalue: :math:`\\lambda_p^D(B_R)`
        radii: uniform grid on [0, R]
        profile: v sampled on :code:`radii`
        norms: :math:`\\|v\\|_{L^q(B_R)}` for q in {1, p-1, p}
    """

    dimension: int
    p: float
    radius: float
    eigenvalue: float
    radii: np.ndarray
    profile: np.ndarray
    norms: Dict[float, float]
    _shot: _UnitShot = field(repr=False, compare=False)

    def norm(self, q: float) -> float:
        """:math:`\\|v\\|_{L^q(B_R)} = (\\omega_{N-1}\\int_0^R |v|^q r^{N-1} dr)^{1/q}`."""
        if not q > 0:
            raise InvalidExponentError(f"Norm exponent must be positive, got {q}")
        if q in self.norms:
            return self.norms[q]
        scale = self.radius / self._shot.zero
        integral = sphere_measure(self.dimension) * scale ** self.dimension * self._shot.moment(q)
        return integral ** (1.0 / q)

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self._shot.profile(np.asarray(r, dtype=float) * self._shot.zero / self.radius)


def ball_dirichlet_eigen(p: float, dimension: int, radius: float) -> RadialEigen:
    """First Dirichlet eigenpair of the p-Laplacian on the N-ball of the given radius.

    Example:
        ::

            ball_dirichlet_eigen(2, 3, 1.0).eigenvalue  # pi**2

    Args:
        p: exponent in [1.1, 10]
        dimension: space dimension N >= 1
        radius: ball radius

    Returns:
        RadialEigen: eigenvalue, sampled profile and the norms for q in {1, p-1, p}

    Raises:
        RadialShootingError: the shooting profile never reaches zero

    """
    p = check_exponent(p)
    if dimension < 1:
        raise ValueError(f"Dimension must be at least 1, got {dimension}")
    if not radius > 0:
        raise ValueError(f"Radius must be positive, got {radius}")

    shot = _unit_shot(p, int(dimension))
    radii = np.linspace(0.0, radius, _PROFILE_POINTS)
    profile = shot.profile(radii * shot.zero / radius)
    profile[-1] = 0.0

    eigen = RadialEigen(
        dimension=int(dimension),
        p=p,
        radius=float(radius),
        eigenvalue=(shot.zero / radius) ** p,
        radii=radii,
        profile=profile,
        norms={},
        _shot=shot,
    )
    for q in _unique((1.0, p - 1.0, p)):
        eigen.norms[q] = eigen.norm(q)
    return eigen


def _unique(values: Iterable[float]):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def unit_ball_eigenvalue(p: float, dimension: int) -> float:
    return _unit_shot(check_exponent(p), int(dimension)).zero ** p


def reverse_holder_constant(p: float, q: float, r: float, lambda_target: float, dimension: int = 2) -> float:
    """:math:`\\tilde K = \\|v\\|_r / \\|v\\|_q` for the eigenfunction of the ball with eigenvalue :code:`lambda_target`.

    Args:
        p: exponent in [1.1, 10]
        q: lower norm exponent, 0 < q
        r: upper norm exponent, q <= r
        lambda_target: Dirichlet eigenvalue the ball is matched to
        dimension: space dimension N

    Returns:
        float: the reverse Hölder constant, 1 when r == q

    Raises:
        InvalidExponentError: q <= 0 or q > r

    """
    if r == q and q > 0:
        return 1.0
    if not 0 < q < r:
        raise InvalidExponentError(f"Reverse Hölder constant needs 0 < q < r, got q={q}, r={r}")
    if not lambda_target > 0:
        raise ValueError(f"lambda_target must be positive, got {lambda_target}")
    radius = (unit_ball_eigenvalue(p, dimension) / lambda_target) ** (1.0 / p)
    eigen = ball_dirichlet_eigen(p, dimension, radius)
    return eigen.norm(r) / eigen.norm(q)


def kbar(p: float, lambda_target: float, dimension: int = 2) -> float:
    """:math:`\\bar K = \\tilde K^p` with r = p and q = p - 1."""
    return reverse_holder_constant(p, p - 1.0, p, lambda_target, dimension) ** p


def hersch_lower_bound(p: float, beta: float, inradius: float) -> float:
    """Hersch-type lower bound :math:`(p-1)(\\pi_p/2)^p / (R + (\\pi_p/2)\\beta^{-1/(p-1)})^p` for convex domains."""
    if not inradius > 0:
        raise ValueError(f"Inradius must be positive, got {inradius}")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    half = pi_p(p) / 2.0
    return (p - 1.0) * half ** p / (inradius + half * beta ** (-1.0 / (p - 1.0))) ** p


def disk_robin_eigenvalue(beta: float, radius: float = 1.0) -> float:
    """p = 2 Robin eigenvalue of a disk, from :math:`x J_1(x) = \\beta R J_0(x)` with :math:`x = \\sqrt{\\lambda} R`.

    Negative beta gives a negative eigenvalue, from the modified Bessel functions.
    """
    if not radius > 0:
        raise ValueError(f"Radius must be positive, got {radius}")
    if beta == 0:
        return 0.0
    scaled = beta * radius
    if beta > 0:
        upper = special.jn_zeros(0, 1)[0]
        x = optimize.brentq(lambda t: t * special.j1(t) - scaled * special.j0(t), 0.0, upper, xtol=1e-15)
        return (x / radius) ** 2

    def condition(t):
        return t * special.i1(t) + scaled * special.i0(t)

    upper = 1.0
    while condition(upper) < 0:
        upper *= 2.0
    x = optimize.brentq(condition, 0.0, upper, xtol=1e-15)
    return -((x / radius) ** 2)


def disk_neumann_eigenvalue(radius: float = 1.0) -> float:
    """First nontrivial Neumann eigenvalue of a disk, :math:`(j'_{1,1}/R)^2`."""
    return (special.jnp_zeros(1, 1)[0] / radius) ** 2
