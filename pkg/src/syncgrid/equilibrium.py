"""Equilibrium computation for general topologies.

Solves the flow-balance fixed-point equations

    omega_i = sum_j a_ij sin(theta_i - theta_j)

with damped Newton iteration on the reduced system obtained by grounding
node 1 (removing the rotational null direction).  Inside the cohesive
region every converged solution is locally exponentially stable and unique
up to rotation, which the stability assessment verifies spectrally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    NoConvergenceError,
    NotAnEquilibriumError,
    SingularJacobianError,
)
from .graph import WeightedGraph, divergence, edge_differences, require_connected, solve_poisson

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
MAX_STEP_HALVINGS = 20
CONDITION_LIMIT = 1e12


def wrap_angles(theta) -> np.ndarray:
    """Reduce angles to (-pi, pi]."""
    theta = np.asarray(theta, dtype=float)
    return -(np.mod(-theta + np.pi, 2.0 * np.pi) - np.pi)


def geodesic_distances(g: WeightedGraph, theta) -> np.ndarray:
    """Per-edge geodesic distance on the circle, in [0, pi]."""
    diff = np.abs(wrap_angles(edge_differences(g, theta)))
    return diff


def phase_cohesiveness(theta, g: WeightedGraph) -> float:
    """Largest geodesic angle distance across any edge."""
    if g.m == 0:
        return 0.0
    return float(np.max(geodesic_distances(g, theta)))


def fixed_point_residual(g: WeightedGraph, omega, theta) -> np.ndarray:
    """B diag(a) sin(B^T theta) - omega, one component per node."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (g.n,):
        raise DimensionMismatchError(f"expected length-{g.n} omega, got {omega.shape}")
    return divergence(g, np.sin(edge_differences(g, theta))) - omega


def jacobian(g: WeightedGraph, theta) -> np.ndarray:
    """Jacobian of the coupling dynamics: -B diag(a cos(B^T theta)) B^T.

    Symmetric with zero row sums; equals -L at theta = 0.
    """
    c = g.weights * np.cos(edge_differences(g, theta))
    jac = np.zeros((g.n, g.n))
    s, t = g.sources, g.sinks
    np.add.at(jac, (s, s), -c)
    np.add.at(jac, (t, t), -c)
    np.add.at(jac, (s, t), c)
    np.add.at(jac, (t, s), c)
    return jac


@dataclass(frozen=True)
class EquilibriumSolution:
    """Converged phase equilibrium.

    theta is gauge fixed (theta_1 = 0) and reduced mod 2*pi; cohesiveness
    is the largest geodesic edge distance; residual is the infinity norm of
    the flow-balance equations at theta.
    """

    theta: np.ndarray
    cohesiveness: float
    stable: bool
    residual: float
    iterations: int = 0

    def is_cohesive(self, gamma: float, slack: float = 1e-12) -> bool:
        return self.cohesiveness <= gamma + slack


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    lambda2_of_minus_jacobian: float


def assess_stability(g: WeightedGraph, theta, omega=None, residual_tol: float = 1e-8) -> StabilityReport:
    """Spectral stability test at an equilibrium.

    -J(theta) always has one zero eigenvalue from rotational symmetry; the
    equilibrium manifold is exponentially stable iff the second-smallest
    eigenvalue is positive.  When omega is given the point is first checked
    to actually be an equilibrium.
    """
    if omega is not None:
        res = float(np.max(np.abs(fixed_point_residual(g, omega, theta))))
        if res > residual_tol:
            raise NotAnEquilibriumError(f"residual {res:.3e} exceeds {residual_tol:.1e}")
    evals = np.linalg.eigvalsh(-jacobian(g, theta))
    scale = max(1.0, float(np.max(np.abs(evals))))
    lam2 = float(evals[1])
    return StabilityReport(stable=lam2 > 1e-9 * scale, lambda2_of_minus_jacobian=lam2)


def _finalize(g: WeightedGraph, omega, theta, iterations: int) -> EquilibriumSolution:
    theta = np.asarray(theta, dtype=float) - float(theta[0])
    theta = wrap_angles(theta)
    theta = theta - theta[0]
    res = float(np.max(np.abs(fixed_point_residual(g, omega, theta))))
    coh = phase_cohesiveness(theta, g)
    stab = assess_stability(g, theta)
    return EquilibriumSolution(
        theta=theta,
        cohesiveness=coh,
        stable=stab.stable,
        residual=res,
        iterations=iterations,
    )


def solve_equilibrium(
    g: WeightedGraph,
    omega,
    theta0=None,
    gamma: float = math.pi / 2,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> EquilibriumSolution:
    """Damped Newton solve of the flow-balance equations.

    Node 1 is grounded during the iteration, which removes the rotational
    null direction and keeps the reduced Jacobian invertible inside the
    cohesive region.  The default seed is the solution of the linear system
    L theta = omega, i.e. the small-angle approximation.  gamma is carried
    for reporting only; cohesiveness of the result is always computed.
    """
    require_connected(g)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (g.n,):
        raise DimensionMismatchError(f"expected length-{g.n} omega, got {omega.shape}")
    omega = omega - omega.mean()
    if theta0 is None:
        theta = solve_poisson(g, omega)
    else:
        theta = np.array(theta0, dtype=float)
        if theta.shape != (g.n,):
            raise DimensionMismatchError(f"expected length-{g.n} theta0, got {theta.shape}")
        theta = theta.copy()
    theta = theta - theta[0]

    residual = fixed_point_residual(g, omega, theta)
    res_norm = float(np.max(np.abs(residual)))
    for iteration in range(1, max_iter + 1):
        if res_norm <= tol:
            return _finalize(g, omega, theta, iteration - 1)
        jac_red = -jacobian(g, theta)[1:, 1:]
        cond = np.linalg.cond(jac_red)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SingularJacobianError(f"reduced Jacobian condition number {cond:.3e}")
        try:
            step = np.linalg.solve(jac_red, -residual[1:])
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(str(exc)) from exc

        # Damping: halve the step until the residual norm decreases.
        scale = 1.0
        for _ in range(MAX_STEP_HALVINGS + 1):
            trial = theta.copy()
            trial[1:] += scale * step
            trial_res = fixed_point_residual(g, omega, trial)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < res_norm:
                break
            scale *= 0.5
        theta, residual, res_norm = trial, trial_res, trial_norm

    if res_norm <= tol:
        return _finalize(g, omega, theta, max_iter)
    raise NoConvergenceError(
        f"no convergence after {max_iter} iterations (residual {res_norm:.3e})",
        theta=theta,
        residual=res_norm,
    )
