"""First eigenvalues and source problems of the p-Laplacian on P1 meshes.

Every problem is a minimization of a convex (or, for negative Robin
parameters, shifted) energy

.. math::

    \\frac{1}{p}\\Big(\\int_\\Omega |\\nabla u|^p + \\beta \\int_{\\partial\\Omega} |u|^p
    + s \\int_\\Omega |u|^p\\Big) - \\langle \\ell, u \\rangle

solved by damped Newton on the regularization
:math:`|\\nabla u|^{p} \\to (|\\nabla u|^2 + \\varepsilon^2)^{p/2}` with
:math:`\\varepsilon` decreasing geometrically. For :code:`p == 2` the energy is
quadratic and a single sparse factorization replaces the Newton loop.

Example:
    ::

        from robin_plaplacian import eigensolve, mesh

        disk = mesh.generate_mesh(mesh.DomainSpec.parse("disk:1", target_h=0.05))
        result = eigensolve.robin_eigenvalue(disk, p=2, beta=1.0)
        print(result.eigenvalue)  # close to 1.5787
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from . import config
from .fem import (
    EDGE_QUADRATURE_POINTS,
    Operators,
    ScalarField,
    VectorField,
    check_exponent,
    conjugate_exponent,
    integrate,
    operators,
    p_dirichlet_energy,
    rayleigh_quotient,
)
from .mesh import Mesh

logger = logging.getLogger(__name__)

_EPSILON_FLOOR = 1e-14
_EPSILON_DECAY = 0.1
_NEWTON_TOLERANCE = 1e-14
_ARMIJO_SLOPE = 1e-4
_MIN_STEP = 1e-12
_RIDGE = 1e-14
_NEGATIVE_TOLERANCE = 1e-12
_PERTURBATION = 1e-3


class SourceError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


class IndefiniteFormError(SolverError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and caps shared by all solvers.

    Args:
        tol: relative eigenvalue tolerance between outer iterations
        max_outer: cap on outer (inverse power) iterations
        max_inner: cap on Newton steps per regularization level
        epsilon_reg: final gradient regularization
        seed: seed of the initial-guess perturbation
        epsilon_start: first gradient regularization
        residual_tol: relative weak-residual tolerance for eigenpairs
        quotient_floor: eigenvalues below this abort with :class:`IndefiniteFormError`
    """

    tol: float = 1e-8
    max_outer: int = 300
    max_inner: int = 60
    epsilon_reg: float = 1e-10
    seed: int = 0
    epsilon_start: float = 1e-2
    residual_tol: float = 1e-4
    quotient_floor: float = -100.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError(f"Iteration caps must be at least 1, got {self.max_outer} and {self.max_inner}")
        if self.epsilon_reg < 0:
            raise ValueError(f"epsilon_reg must be nonnegative, got {self.epsilon_reg}")
        if not self.epsilon_start > 0:
            raise ValueError(f"epsilon_start must be positive, got {self.epsilon_start}")

    @classmethod
    def from_config(cls, **overrides) -> "SolverOptions":
        """Options from the user (or builtin) config, keyword arguments that are not None take precedence."""
        settings = {
            "tol": config.getSetting("tolerance"),
            "max_outer": config.getSetting("maxOuterIterations"),
            "max_inner": config.getSetting("maxInnerIterations"),
            "epsilon_reg": config.getSetting("epsilonRegularization"),
            "seed": config.getSetting("seed"),
            "epsilon_start": config.getSetting("epsilonStart"),
            "residual_tol": config.getSetting("residualTolerance"),
            "quotient_floor": config.getSetting("quotientFloor"),
        }
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)

    def epsilon_schedule(self, p: float) -> List[float]:
        if p == 2:
            return [0.0]
        final = max(self.epsilon_reg, _EPSILON_FLOOR)
        epsilon = max(self.epsilon_start, final)
        schedule = [epsilon]
        while epsilon > final:
            epsilon = max(epsilon * _EPSILON_DECAY, final)
            schedule.append(epsilon)
        return schedule

    def final_epsilon(self, p: float) -> float:
        return self.epsilon_schedule(p)[-1]


@dataclass(frozen=True)
class EigenResult:
    """First eigenpair, normalized so that :math:`\\int |u|^p = 1` and :math:`u \\geq 0`.

    :code:`beta` is :code:`math.inf` for Dirichlet problems.
    """

    eigenvalue: float
    eigenfunction: ScalarField
    residual: float
    iterations: int
    converged: bool
    p: float
    beta: float
    trace: Tuple[float, ...] = ()

    @property
    def is_dirichlet(self) -> bool:
        return math.isinf(self.beta)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "domain": self.eigenfunction.mesh.name,
            "boundary": "dirichlet" if self.is_dirichlet else "robin",
            "p": self.p,
            "beta": None if self.is_dirichlet else self.beta,
            "lambda": self.eigenvalue,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class RobinSolveResult:
    """Solution of a source problem and the quantities derived from its flux.

    Attributes:
        u_f: solution
        j_value: :math:`J_f(\\beta) = \\int f u_f`
        flux_pprime_norm: :math:`\\int_{\\partial\\Omega} |V\\cdot\\nu|^{p'}` of the variational boundary flux
        converged: Newton reached its tolerance on the final regularization level
        flux: :math:`V = |\\nabla u_f|^{p-2}\\nabla u_f` per triangle
        boundary_flux: :math:`V\\cdot\\nu = -\\beta|u_f|^{p-2}u_f` at the boundary quadrature points, shape (k, 3)
        recovered_flux: :math:`V\\cdot\\nu` from the gradient of the triangle owning each boundary edge
        recovered_flux_pprime_norm: p'-norm to the p'-th power of :code:`recovered_flux`
    """

    p: float
    beta: float
    u_f: ScalarField
    j_value: float
    flux_pprime_norm: float
    converged: bool
    flux: VectorField
    boundary_flux: np.ndarray
    recovered_flux: np.ndarray
    recovered_flux_pprime_norm: float
    residual: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class NeumannFluxResult:
    """Solution of the constant-flux problem, normalized to zero boundary mean."""

    p: float
    v: ScalarField
    flux_constant: float
    energy: float
    converged: bool
    flux: VectorField
    residual: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class TorsionResult:
    p: float
    u: ScalarField
    torsion: float
    energy: float
    relative_gap: float
    converged: bool
    iterations: int = 0


def _signed_power(values: np.ndarray, exponent: float) -> np.ndarray:
    return np.sign(values) * np.abs(values) ** exponent


def _regularized_curvature(values: np.ndarray, epsilon: float, p: float) -> np.ndarray:
    """Second derivative of :math:`(x^2+\\varepsilon^2)^{p/2}/p`."""
    if p == 2:
        return np.ones_like(values)
    squared = values * values + epsilon * epsilon
    return squared ** ((p - 4.0) / 2.0) * ((p - 1.0) * values * values + epsilon * epsilon)


@dataclass
class _Energy:
    """Regularized energy with a linear load, restricted to the free vertices."""

    ops: Operators
    p: float
    beta: float
    load: np.ndarray
    free: np.ndarray
    shift: float = 0.0
    boundary_in_hessian: bool = True

    def homogeneous(self, u: np.ndarray, epsilon: float) -> float:
        """p times the p-homogeneous part."""
        ops, p = self.ops, self.p
        gx, gy = ops.dx @ u, ops.dy @ u
        total = float(np.dot(ops.areas, (gx * gx + gy * gy + epsilon * epsilon) ** (p / 2.0)))
        if self.beta != 0.0:
            ub = ops.boundary @ u
            total += self.beta * float(np.dot(ops.boundary_weights, (ub * ub + epsilon * epsilon) ** (p / 2.0)))
        if self.shift != 0.0:
            uv = ops.volume @ u
            total += self.shift * float(np.dot(ops.volume_weights, (uv * uv + epsilon * epsilon) ** (p / 2.0)))
        return total

    def value(self, u: np.ndarray, epsilon: float) -> float:
        return self.homogeneous(u, epsilon) / self.p - float(np.dot(self.load, u))

    def operator(self, u: np.ndarray, epsilon: float) -> np.ndarray:
        """Derivative of the homogeneous part, the discrete p-Laplacian with Robin and shift terms."""
        ops, p = self.ops, self.p
        gx, gy = ops.dx @ u, ops.dy @ u
        weight = ops.areas * (gx * gx + gy * gy + epsilon * epsilon) ** ((p - 2.0) / 2.0)
        result = ops.dx.T @ (weight * gx) + ops.dy.T @ (weight * gy)
        if self.beta != 0.0:
            ub = ops.boundary @ u
            scale = ops.boundary_weights * (ub * ub + epsilon * epsilon) ** ((p - 2.0) / 2.0)
            result += self.beta * (ops.boundary.T @ (scale * ub))
        if self.shift != 0.0:
            uv = ops.volume @ u
            scale = ops.volume_weights * (uv * uv + epsilon * epsilon) ** ((p - 2.0) / 2.0)
            result += self.shift * (ops.volume.T @ (scale * uv))
        return result

    def gradient(self, u: np.ndarray, epsilon: float) -> np.ndarray:
        return self.operator(u, epsilon) - self.load

    def hessian(self, u: np.ndarray, epsilon: float) -> sparse.csc_matrix:
        ops, p = self.ops, self.p
        gx, gy = ops.dx @ u, ops.dy @ u
        squared = gx * gx + gy * gy + epsilon * epsilon
        weight = ops.areas * squared ** ((p - 2.0) / 2.0)
        if p == 2:
            hessian = ops.stiffness.copy()
        else:
            correction = ops.areas * (p - 2.0) * squared ** ((p - 4.0) / 2.0)
            hxx = sparse.diags(weight + correction * gx * gx)
            hyy = sparse.diags(weight + correction * gy * gy)
            cross = ops.dx.T @ sparse.diags(correction * gx * gy) @ ops.dy
            hessian = ops.dx.T @ hxx @ ops.dx + ops.dy.T @ hyy @ ops.dy + cross + cross.T
        if self.beta != 0.0 and self.boundary_in_hessian:
            ub = ops.boundary @ u
            curvature = ops.boundary_weights * _regularized_curvature(ub, epsilon, p)
            hessian = hessian + self.beta * (ops.boundary.T @ sparse.diags(curvature) @ ops.boundary)
        if self.shift != 0.0:
            uv = ops.volume @ u
            curvature = ops.volume_weights * _regularized_curvature(uv, epsilon, p)
            hessian = hessian + self.shift * (ops.volume.T @ sparse.diags(curvature) @ ops.volume)

        hessian = hessian.tocsr()
        if len(self.free) != len(self.load):
            hessian = hessian[self.free][:, self.free]
        diagonal = hessian.diagonal()
        ridge = _RIDGE * float(np.max(np.abs(diagonal))) if len(diagonal) else 0.0
        return (hessian + ridge * sparse.identity(hessian.shape[0])).tocsc()

    def linear_solution(self) -> np.ndarray:
        """Minimizer of the p = 2 energy with the same load, as a starting point."""
        ops = self.ops
        matrix = ops.stiffness
        if self.beta != 0.0:
            matrix = matrix + abs(self.beta) * ops.boundary_mass
        if self.shift != 0.0:
            matrix = matrix + self.shift * ops.mass
        matrix = matrix.tocsr()[self.free][:, self.free].tocsc()
        u = np.zeros(len(self.load))
        u[self.free] = splinalg.spsolve(matrix, self.load[self.free])
        return u

    def ray_scaled(self, u: np.ndarray, epsilon: float) -> np.ndarray:
        """Minimizer of the energy along the ray through u."""
        curvature = self.homogeneous(u, epsilon)
        slope = float(np.dot(self.load, u))
        if curvature <= 0.0 or slope <= 0.0:
            return u
        return u * (slope / curvature) ** (1.0 / (self.p - 1.0))


def _newton(energy: _Energy, start: np.ndarray, schedule: Sequence[float], max_inner: int) -> Tuple[np.ndarray, bool, int]:
    """Damped Newton with Armijo backtracking through a regularization schedule.

    Returns:
        the minimizer, whether the last level converged and the total Newton step count
    """
    u = start.copy()
    free = energy.free
    steps = 0
    converged = False
    for epsilon in schedule:
        converged = False
        for _ in range(max_inner):
            steps += 1
            gradient = energy.gradient(u, epsilon)[free]
            direction = splinalg.spsolve(energy.hessian(u, epsilon), -gradient)
            decrement = -float(np.dot(gradient, direction))
            if not np.all(np.isfinite(direction)) or decrement <= 0.0:
                direction = -gradient
                decrement = float(np.dot(gradient, gradient))

            current = energy.value(u, epsilon)
            scale = abs(current) + abs(float(np.dot(energy.load, u))) + 1e-300
            if 0.5 * decrement <= _NEWTON_TOLERANCE * scale:
                converged = True
                break

            step = 1.0
            trial = u.copy()
            while step >= _MIN_STEP:
                trial[free] = u[free] + step * direction
                if energy.value(trial, epsilon) <= current - _ARMIJO_SLOPE * step * decrement:
                    break
                step *= 0.5
            else:
                # no decrease left at rounding level
                converged = 0.5 * decrement <= 1e-8 * scale
                break
            u = trial
        logger.debug(f"Newton level epsilon={epsilon:.1e} finished after {steps} steps, converged={converged}")
    return u, converged, steps


def _normalized(ops: Operators, u: np.ndarray, p: float) -> np.ndarray:
    if np.dot(ops.volume_load, u) < 0:
        u = -u
    norm = float(np.dot(ops.volume_weights, np.abs(ops.volume @ u) ** p)) ** (1.0 / p)
    if norm == 0.0:
        raise SolverError("Iterate collapsed to the zero field")
    return u / norm


def _mass_operator(ops: Operators, u: np.ndarray, p: float) -> np.ndarray:
    """Derivative of :math:`\\frac{1}{p}\\int |u|^p`."""
    return ops.volume.T @ (ops.volume_weights * _signed_power(ops.volume @ u, p - 1.0))


def _relative_residual(operator_value: np.ndarray, target: np.ndarray, free: np.ndarray) -> float:
    difference = np.linalg.norm((operator_value - target)[free])
    scale = np.linalg.norm(operator_value[free]) + np.linalg.norm(target[free])
    return float(difference / scale) if scale > 0 else 0.0


def _clamped(values: np.ndarray, label: str) -> np.ndarray:
    lowest = float(np.min(values))
    if lowest < -_NEGATIVE_TOLERANCE:
        logger.warning(f"{label} eigenfunction has negative nodal values down to {lowest:.3g}, clamping to zero")
    return np.maximum(values, 0.0)


def _initial_guess(n: int, free: np.ndarray, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    u = np.zeros(n)
    u[free] = 1.0 + _PERTURBATION * rng.standard_normal(len(free))
    return u


def _linear_eigen(mesh: Mesh, beta: float, free: np.ndarray, opts: SolverOptions) -> Tuple[np.ndarray, float, float, int, bool, List[float]]:
    """Shifted inverse power iteration on the pencil (stiffness + beta boundary mass, mass)."""
    ops = operators(mesh)
    stiffness = ops.stiffness
    if not math.isinf(beta) and beta != 0.0:
        stiffness = stiffness + beta * ops.boundary_mass
    stiffness = stiffness.tocsr()[free][:, free]
    mass = ops.mass[free][:, free]
    ones = ops.volume_load[free]

    sigma = 0.0
    if beta < 0:
        ratio = float(np.sum(mesh.edge_lengths)) / float(np.sum(mesh.areas))
        sigma = min(0.0, 2.0 * beta * ratio) - 1.0

    for _ in range(4):
        try:
            factor = splinalg.splu((stiffness - sigma * mass).tocsc())
        except RuntimeError as e:
            raise SolverError(f"Shifted pencil is singular at sigma={sigma}: {e}") from e

        x = _initial_guess(mesh.num_vertices, free, opts.seed)[free]
        x /= math.sqrt(float(x @ (mass @ x)))
        eigenvalue = float(x @ (stiffness @ x))
        trace = [eigenvalue]
        residual, converged, iteration = math.inf, False, 0
        for iteration in range(1, opts.max_outer + 1):
            y = factor.solve(mass @ x)
            y /= math.sqrt(float(y @ (mass @ y)))
            if float(ones @ y) < 0:
                y = -y
            updated = float(y @ (stiffness @ y))
            if updated < opts.quotient_floor:
                raise IndefiniteFormError(
                    f"Rayleigh quotient {updated:.6g} dropped below the floor {opts.quotient_floor}, beta={beta} is too negative for this mesh"
                )
            residual = _relative_residual(stiffness @ y, updated * (mass @ y), np.arange(len(y)))
            change = abs(updated - eigenvalue)
            x, eigenvalue = y, updated
            trace.append(eigenvalue)
            if change <= opts.tol * max(abs(eigenvalue), 1.0) and residual <= opts.residual_tol:
                converged = True
                break

        if np.min(x) >= -1e-8 * np.max(np.abs(x)):
            break
        logger.info(f"Eigenvector at shift {sigma:.4g} changes sign, retrying with a lower shift")
        sigma = 2.0 * sigma - 1.0

    u = np.zeros(mesh.num_vertices)
    u[free] = x
    return u, eigenvalue, residual, iteration, converged, trace


def _nonlinear_eigen(
    mesh: Mesh, p: float, beta: float, free: np.ndarray, opts: SolverOptions
) -> Tuple[np.ndarray, float, float, int, bool, List[float]]:
    """Inverse power fixed point: solve the convex problem with load lambda_k |u_k|^{p-2} u_k, renormalize, repeat."""
    ops = operators(mesh)
    robin_beta = 0.0 if math.isinf(beta) else beta
    shift = 0.0
    if robin_beta < 0:
        ratio = float(np.sum(mesh.edge_lengths)) / float(np.sum(mesh.areas))
        shift = 2.0 * abs(robin_beta) * ratio + 1.0

    energy = _Energy(
        ops, p, robin_beta, np.zeros(mesh.num_vertices), free, shift=shift, boundary_in_hessian=robin_beta >= 0
    )
    schedule = opts.epsilon_schedule(p)
    final_epsilon = schedule[-1]
    plain = _Energy(ops, p, robin_beta, np.zeros(mesh.num_vertices), free)

    u = _normalized(ops, _initial_guess(mesh.num_vertices, free, opts.seed), p)
    eigenvalue = _quotient(mesh, u, p, robin_beta)
    trace = [eigenvalue]
    residual, converged, iteration = math.inf, False, 0
    for iteration in range(1, opts.max_outer + 1):
        coefficient = eigenvalue + shift
        if coefficient <= 0:
            raise IndefiniteFormError(
                f"Shifted eigenvalue {coefficient:.6g} is not positive, beta={beta} is too negative for this mesh"
            )
        energy.load = coefficient * _mass_operator(ops, u, p)
        levels = schedule if iteration == 1 else schedule[-1:]
        w, _, _ = _newton(energy, u, levels, opts.max_inner)
        w = _normalized(ops, w, p)

        updated = _quotient(mesh, w, p, robin_beta)
        if updated < opts.quotient_floor:
            raise IndefiniteFormError(
                f"Rayleigh quotient {updated:.6g} dropped below the floor {opts.quotient_floor}, beta={beta} is too negative for this mesh"
            )
        residual = _relative_residual(plain.operator(w, final_epsilon), updated * _mass_operator(ops, w, p), free)
        change = abs(updated - eigenvalue)
        u, eigenvalue = w, updated
        trace.append(eigenvalue)
        logger.debug(f"Outer iteration {iteration}: lambda={eigenvalue:.10g}, residual={residual:.3g}")
        if change <= opts.tol * max(abs(eigenvalue), 1.0) and residual <= opts.residual_tol:
            converged = True
            break
    return u, eigenvalue, residual, iteration, converged, trace


def _quotient(mesh: Mesh, u: np.ndarray, p: float, beta: float) -> float:
    return rayleigh_quotient(ScalarField(mesh, u), p, beta)


def _eigen_result(
    mesh: Mesh, p: float, beta: float, outcome: Tuple[np.ndarray, float, float, int, bool, List[float]]
) -> EigenResult:
    u, eigenvalue, residual, iterations, converged, trace = outcome
    label = "Dirichlet" if math.isinf(beta) else "Robin"
    u = _normalized(operators(mesh), _clamped(u, label), p)
    result = EigenResult(
        eigenvalue=eigenvalue,
        eigenfunction=ScalarField(mesh, u),
        residual=residual,
        iterations=iterations,
        converged=converged,
        p=p,
        beta=beta,
        trace=tuple(trace),
    )
    description = f"{label} eigenvalue on {mesh.name} (p={p:g}" + ("" if math.isinf(beta) else f", beta={beta:g}") + ")"
    if converged:
        logger.info(f"{description}: lambda={eigenvalue:.10g} after {iterations} iterations")
    else:
        logger.warning(
            f"{description} did not converge in {iterations} iterations: lambda={eigenvalue:.10g}, residual={residual:.3g}"
        )
    return result


def robin_eigenvalue(mesh: Mesh, p: float, beta: float, opts: Optional[SolverOptions] = None) -> EigenResult:
    """First Robin eigenvalue :math:`\\lambda_p(\\beta, \\Omega)`, the minimum of the Rayleigh quotient.

    For :code:`p == 2` a shifted inverse power iteration on the generalized
    pencil, otherwise an inverse power fixed point with convex inner problems.
    :code:`beta == 0` returns the exact answer, zero with a constant eigenfunction.

    Example:
        ::

            result = robin_eigenvalue(disk, p=3, beta=10.0)
            result.eigenvalue, result.converged

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        beta: Robin parameter, negative values only while the quotient stays bounded
        opts: solver options, defaults to :meth:`SolverOptions.from_config`

    Returns:
        EigenResult: eigenvalue and nonnegative eigenfunction with unit p-norm

    Raises:
        IndefiniteFormError: beta too negative for the discrete quotient to stay above the floor

    """
    p = check_exponent(p)
    if opts is None:
        opts = SolverOptions.from_config()
    beta = float(beta)
    if math.isinf(beta):
        return dirichlet_eigenvalue(mesh, p, opts)

    if beta == 0.0:
        constant = float(np.sum(mesh.areas)) ** (-1.0 / p)
        logger.info(f"Robin eigenvalue on {mesh.name} (p={p:g}, beta=0): lambda=0 with constant eigenfunction")
        return EigenResult(0.0, ScalarField.constant(mesh, constant), 0.0, 0, True, p, 0.0, (0.0,))

    free = np.arange(mesh.num_vertices)
    if p == 2:
        outcome = _linear_eigen(mesh, beta, free, opts)
    else:
        outcome = _nonlinear_eigen(mesh, p, beta, free, opts)
    return _eigen_result(mesh, p, beta, outcome)


def dirichlet_eigenvalue(mesh: Mesh, p: float, opts: Optional[SolverOptions] = None) -> EigenResult:
    """First Dirichlet eigenvalue :math:`\\lambda_p^D(\\Omega)`, boundary vertices held at zero.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        opts: solver options, defaults to :meth:`SolverOptions.from_config`

    Returns:
        EigenResult: eigenpair with :code:`beta = math.inf`

    """
    p = check_exponent(p)
    if opts is None:
        opts = SolverOptions.from_config()
    free = mesh.interior_vertices
    if len(free) == 0:
        raise SolverError(f"{mesh} has no interior vertices, refine it first")
    if p == 2:
        outcome = _linear_eigen(mesh, math.inf, free, opts)
    else:
        outcome = _nonlinear_eigen(mesh, p, math.inf, free, opts)
    return _eigen_result(mesh, p, math.inf, outcome)


def _check_source(f: ScalarField) -> None:
    if f.is_zero():
        raise SourceError("zero source: f vanishes identically")
    if np.any(f.values < 0):
        raise SourceError(f"Source has negative nodal values down to {float(np.min(f.values)):.3g}")


def _solve_source(energy: _Energy, p: float, opts: SolverOptions) -> Tuple[np.ndarray, bool, int]:
    u = energy.linear_solution()
    if p == 2:
        return u, True, 1
    schedule = opts.epsilon_schedule(p)
    return _newton(energy, energy.ray_scaled(u, schedule[0]), schedule, opts.max_inner)


def flux_field(u: ScalarField, p: float) -> VectorField:
    """:math:`|\\nabla u|^{p-2}\\nabla u` per triangle, zero where the gradient vanishes."""
    ops = operators(u.mesh)
    gx, gy = ops.dx @ u.values, ops.dy @ u.values
    magnitude = np.hypot(gx, gy)
    weight = np.zeros_like(magnitude)
    np.power(magnitude, p - 2.0, out=weight, where=magnitude > 0)
    return VectorField(u.mesh, np.column_stack([weight * gx, weight * gy]))


def recovered_boundary_flux(flux: VectorField) -> np.ndarray:
    """Normal component of the flux on each boundary edge, taken from the owning triangle."""
    mesh = flux.mesh
    return np.einsum("kd,kd->k", flux.values[mesh.boundary_triangles], mesh.normals)


def _edge_pprime_norm(mesh: Mesh, edge_flux: np.ndarray, p: float) -> float:
    return float(np.dot(mesh.edge_lengths, np.abs(edge_flux) ** conjugate_exponent(p)))


def weak_form_residual(
    u: ScalarField, p: float, beta: float, f: ScalarField, test: ScalarField, epsilon: float = _EPSILON_FLOOR
) -> float:
    """:math:`\\int |\\nabla u|^{p-2}\\nabla u\\cdot\\nabla\\varphi + \\beta\\int_{\\partial\\Omega}|u|^{p-2}u\\varphi - \\int f\\varphi`.

    Use :code:`beta = math.inf` for zero boundary values; the test field must
    then vanish on the boundary and the boundary term is dropped.
    """
    ops = operators(u.mesh)
    robin_beta = 0.0 if math.isinf(beta) else beta
    energy = _Energy(ops, p, robin_beta, np.zeros(u.mesh.num_vertices), np.arange(u.mesh.num_vertices))
    return float(np.dot(energy.operator(u.values, epsilon), test.values) - f.values @ (ops.mass @ test.values))


def robin_source_solve(
    mesh: Mesh, p: float, beta: float, f: ScalarField, opts: Optional[SolverOptions] = None
) -> RobinSolveResult:
    """Solve :math:`-\\Delta_p u = f` with :math:`|\\nabla u|^{p-2}\\partial_\\nu u + \\beta|u|^{p-2}u = 0`.

    Minimizes :math:`\\frac1p\\int|\\nabla u|^p + \\frac\\beta p\\int_{\\partial\\Omega}|u|^p - \\int f u`
    by damped Newton started from the rescaled p = 2 solution.

    :code:`flux_pprime_norm` integrates the variational boundary flux
    :math:`-\\beta|u|^{p-2}u` at the boundary quadrature points, the flux that
    makes the discrete duality exact. The flux recovered from the gradient of
    the triangle owning each edge is reported separately as
    :code:`recovered_flux_pprime_norm`.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        beta: positive Robin parameter
        f: nonnegative source, not identically zero
        opts: solver options, defaults to :meth:`SolverOptions.from_config`

    Returns:
        RobinSolveResult: solution, :math:`J_f(\\beta)` and boundary flux quantities

    Raises:
        SourceError: f is zero or has negative nodal values

    """
    p = check_exponent(p)
    if not beta > 0 or math.isinf(beta):
        raise ValueError(f"beta must be positive and finite, got {beta}")
    _check_source(f)
    if opts is None:
        opts = SolverOptions.from_config()

    ops = operators(mesh)
    load = ops.mass @ f.values
    energy = _Energy(ops, p, float(beta), load, np.arange(mesh.num_vertices))
    u, converged, iterations = _solve_source(energy, p, opts)

    u_f = ScalarField(mesh, u)
    flux = flux_field(u_f, p)
    ub = ops.boundary @ u
    boundary_flux = (-beta * _signed_power(ub, p - 1.0)).reshape(-1, EDGE_QUADRATURE_POINTS)
    recovered = recovered_boundary_flux(flux)
    residual = _relative_residual(energy.operator(u, opts.final_epsilon(p)), load, energy.free)

    if not converged:
        logger.warning(f"Robin source solve on {mesh.name} (p={p:g}, beta={beta:g}) did not converge")
    return RobinSolveResult(
        p=p,
        beta=float(beta),
        u_f=u_f,
        j_value=float(np.dot(load, u)),
        flux_pprime_norm=float(
            np.dot(ops.boundary_weights, np.abs(boundary_flux.ravel()) ** conjugate_exponent(p))
        ),
        converged=converged,
        flux=flux,
        boundary_flux=boundary_flux,
        recovered_flux=recovered,
        recovered_flux_pprime_norm=_edge_pprime_norm(mesh, recovered, p),
        residual=residual,
        iterations=iterations,
    )


def dirichlet_source_solve(
    mesh: Mesh, p: float, f: ScalarField, opts: Optional[SolverOptions] = None
) -> RobinSolveResult:
    """Solve :math:`-\\Delta_p u = f` with zero boundary values, the infinite-beta limit.

    The boundary flux is the per-edge gradient recovery, repeated at the
    quadrature points.
    """
    p = check_exponent(p)
    _check_source(f)
    if opts is None:
        opts = SolverOptions.from_config()
    free = mesh.interior_vertices
    if len(free) == 0:
        raise SolverError(f"{mesh} has no interior vertices, refine it first")

    ops = operators(mesh)
    load = ops.mass @ f.values
    energy = _Energy(ops, p, 0.0, load, free)
    u, converged, iterations = _solve_source(energy, p, opts)

    u_f = ScalarField(mesh, u)
    flux = flux_field(u_f, p)
    recovered = recovered_boundary_flux(flux)
    recovered_norm = _edge_pprime_norm(mesh, recovered, p)
    residual = _relative_residual(energy.operator(u, opts.final_epsilon(p)), load, free)
    if not converged:
        logger.warning(f"Dirichlet source solve on {mesh.name} (p={p:g}) did not converge")
    return RobinSolveResult(
        p=p,
        beta=math.inf,
        u_f=u_f,
        j_value=float(np.dot(load, u)),
        flux_pprime_norm=recovered_norm,
        converged=converged,
        flux=flux,
        boundary_flux=np.repeat(recovered[:, None], EDGE_QUADRATURE_POINTS, axis=1),
        recovered_flux=recovered,
        recovered_flux_pprime_norm=recovered_norm,
        residual=residual,
        iterations=iterations,
    )


def neumann_flux_solve(mesh: Mesh, p: float, f: ScalarField, opts: Optional[SolverOptions] = None) -> NeumannFluxResult:
    """Solve the constant-flux problem :math:`-\\Delta_p v = f`, :math:`|\\nabla v|^{p-2}\\partial_\\nu v = -\\frac{1}{P}\\int f`.

    The energy is invariant under constants; vertex 0 is pinned during the
    solve and the boundary mean is subtracted afterwards.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        f: nonnegative source, not identically zero
        opts: solver options, defaults to :meth:`SolverOptions.from_config`

    Returns:
        NeumannFluxResult: solution with zero boundary mean, flux constant and energy

    """
    p = check_exponent(p)
    _check_source(f)
    if opts is None:
        opts = SolverOptions.from_config()

    ops = operators(mesh)
    perimeter = float(np.sum(mesh.edge_lengths))
    flux_magnitude = integrate(f) / perimeter
    load = ops.mass @ f.values - flux_magnitude * ops.boundary_load
    energy = _Energy(ops, p, 0.0, load, np.arange(1, mesh.num_vertices))
    v, converged, iterations = _solve_source(energy, p, opts)
    residual = _relative_residual(energy.operator(v, opts.final_epsilon(p)), load, energy.free)
    v = v - float(np.dot(ops.boundary_load, v)) / perimeter

    field_v = ScalarField(mesh, v)
    if not converged:
        logger.warning(f"Constant-flux solve on {mesh.name} (p={p:g}) did not converge")
    return NeumannFluxResult(
        p=p,
        v=field_v,
        flux_constant=-flux_magnitude,
        energy=p_dirichlet_energy(field_v, p),
        converged=converged,
        flux=flux_field(field_v, p),
        residual=residual,
        iterations=iterations,
    )


def torsion_solve(mesh: Mesh, p: float, opts: Optional[SolverOptions] = None) -> TorsionResult:
    """Torsion function :math:`-\\Delta_p u = 1`, :math:`u = 0` on the boundary.

    The relative gap between :math:`\\int u` and :math:`\\int|\\nabla u|^p`
    (equal for the exact discrete minimizer) is reported as a quality indicator.
    """
    result = dirichlet_source_solve(mesh, p, ScalarField.constant(mesh, 1.0), opts)
    value = integrate(result.u_f)
    energy = p_dirichlet_energy(result.u_f, p)
    gap = abs(value - energy) / max(abs(value), 1e-300)
    logger.info(f"Torsional rigidity on {mesh.name} (p={p:g}): T={value:.10g}, relative gap {gap:.2e}")
    return TorsionResult(
        p=p,
        u=result.u_f,
        torsion=value,
        energy=energy,
        relative_gap=gap,
        converged=result.converged,
        iterations=result.iterations,
    )


def torsion(mesh: Mesh, p: float, opts: Optional[SolverOptions] = None) -> float:
    """p-torsional rigidity :math:`T_p(\\Omega) = \\int u`."""
    return torsion_solve(mesh, p, opts).torsion
