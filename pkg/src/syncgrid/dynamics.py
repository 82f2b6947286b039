"""Time-domain simulation of mixed first/second-order oscillator networks.

The model couples rotational (second-order, inertia M and damping D) nodes
with kinematic (first-order, time constant D) nodes through sinusoidal
edge interactions:

    M_i theta_i'' + D_i theta_i' = omega_i - sum_j a_ij sin(theta_i - theta_j)   (V1)
                    D_i theta_i' = omega_i - sum_j a_ij sin(theta_i - theta_j)   (V2)

Integration is fixed-step RK4; the equations are smooth so adaptive
stepping buys nothing at the problem sizes handled here.  All defaults
are recorded in the trajectory metadata for reproducibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .equilibrium import phase_cohesiveness, solve_equilibrium
from .errors import (
    DimensionMismatchError,
    NoConvergenceError,
    NonFiniteStateError,
    NoSyncInBracketError,
    SingularJacobianError,
)
from .graph import WeightedGraph, divergence, edge_differences, require_connected, solve_poisson
from .rng import substream
from .sync import sync_margin

DEFAULT_STEP = 1e-3
DEFAULT_T_END = 100.0
STEADY_STATE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class OscillatorNetwork:
    """Graph plus node dynamics parameters.

    second_order lists the node ids (1-based) with inertial dynamics; all
    other nodes are first order.  M is only meaningful on second-order
    nodes; D must be positive everywhere.
    """

    graph: WeightedGraph
    omega: np.ndarray
    second_order: frozenset[int]
    M: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        n = self.graph.n
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        object.__setattr__(self, "M", np.asarray(self.M, dtype=float))
        object.__setattr__(self, "D", np.asarray(self.D, dtype=float))
        if self.omega.shape != (n,):
            raise DimensionMismatchError(f"omega must have length {n}")
        if self.M.shape != (n,) or self.D.shape != (n,):
            raise DimensionMismatchError(f"M and D must have length {n}")
        bad = [i for i in self.second_order if not 1 <= i <= n]
        if bad:
            raise ValueError(f"second-order ids outside 1..{n}: {bad}")
        v1 = self.v1_indices
        if np.any(self.M[v1] <= 0):
            raise ValueError("inertia must be positive on second-order nodes")
        if np.any(self.D <= 0):
            raise ValueError("damping must be positive on all nodes")

    @property
    def v1_indices(self) -> np.ndarray:
        return np.array(sorted(i - 1 for i in self.second_order), dtype=np.intp)

    @property
    def v2_indices(self) -> np.ndarray:
        v1 = set(self.second_order)
        return np.array([i for i in range(self.graph.n) if i + 1 not in v1], dtype=np.intp)

    @classmethod
    def first_order(cls, g: WeightedGraph, omega, damping: float | np.ndarray = 1.0) -> "OscillatorNetwork":
        d = np.full(g.n, float(damping)) if np.isscalar(damping) else np.asarray(damping, dtype=float)
        return cls(graph=g, omega=np.asarray(omega, dtype=float),
                   second_order=frozenset(), M=np.ones(g.n), D=d)

    @property
    def omega_sync(self) -> float:
        return float(np.sum(self.omega) / np.sum(self.D))


def rotating_frame(net: OscillatorNetwork) -> OscillatorNetwork:
    """Shift to the co-rotating frame: omega_i <- omega_i - D_i * omega_sync.

    Afterwards the synchronization frequency is zero and sum(omega) = 0.
    """
    shift = net.omega_sync
    return replace(net, omega=net.omega - net.D * shift)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled trajectory with integrator metadata."""

    times: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    integrator: dict = field(default_factory=dict)

    @property
    def final_theta(self) -> np.ndarray:
        return self.theta[-1]

    @property
    def final_theta_dot(self) -> np.ndarray:
        return self.theta_dot[-1]


def _torque(g: WeightedGraph, omega: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return omega - divergence(g, np.sin(edge_differences(g, theta)))


def rk4_integrate(
    g: WeightedGraph,
    omega: np.ndarray,
    v1: np.ndarray,
    v2: np.ndarray,
    m1: np.ndarray,
    damping: np.ndarray,
    theta0: np.ndarray,
    nu0: np.ndarray,
    t_end: float,
    step: float,
    record_stride: int = 1,
    steady_tol: float | None = None,
    steady_window: float = 1.0,
) -> Trajectory:
    """Raw fixed-step RK4 for the mixed-order system (no parameter checks).

    v1/v2 are 0-based index arrays; nu0 holds initial frequencies on v1.
    Damping may be zero on v1 nodes (conservative test configurations).
    When steady_tol is set, integration stops once ||theta_dot||_inf stayed
    below it throughout a full window of steady_window time units.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    n = g.n
    n1 = len(v1)
    d2 = damping[v2]

    def rhs(y: np.ndarray) -> np.ndarray:
        theta = y[:n]
        nu = y[n:]
        torque = _torque(g, omega, theta)
        dtheta = np.empty(n)
        if len(v2):
            dtheta[v2] = torque[v2] / d2
        dtheta[v1] = nu
        dnu = (torque[v1] - damping[v1] * nu) / m1
        return np.concatenate([dtheta, dnu])

    def full_theta_dot(y: np.ndarray) -> np.ndarray:
        return rhs(y)[:n]

    n_steps = max(1, int(round(t_end / step)))
    y = np.concatenate([np.asarray(theta0, dtype=float), np.asarray(nu0, dtype=float)])
    times = [0.0]
    thetas = [y[:n].copy()]
    dots = [full_theta_dot(y)]

    window_steps = max(1, int(round(steady_window / step)))
    window_max = 0.0
    in_window = 0

    for k in range(1, n_steps + 1):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * step * k1)
        k3 = rhs(y + 0.5 * step * k2)
        k4 = rhs(y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteStateError(f"state diverged at t = {k * step:.6g}")
        record = (k % record_stride == 0) or (k == n_steps)
        dot = None
        if record or steady_tol is not None:
            dot = full_theta_dot(y)
        if record:
            times.append(k * step)
            thetas.append(y[:n].copy())
            dots.append(dot)
        if steady_tol is not None:
            window_max = max(window_max, float(np.max(np.abs(dot))))
            in_window += 1
            if in_window >= window_steps:
                if window_max <= steady_tol:
                    if not record:
                        times.append(k * step)
                        thetas.append(y[:n].copy())
                        dots.append(dot)
                    break
                window_max = 0.0
                in_window = 0

    return Trajectory(
        times=np.array(times),
        theta=np.array(thetas),
        theta_dot=np.array(dots),
        integrator={"method": "rk4", "step": step, "t_end": t_end, "record_stride": record_stride},
    )


def simulate(
    net: OscillatorNetwork,
    theta0,
    theta_dot0=None,
    t_end: float = DEFAULT_T_END,
    step: float = DEFAULT_STEP,
    record_stride: int = 1,
    steady_tol: float | None = None,
) -> Trajectory:
    """Integrate the network from (theta0, theta_dot0).

    theta_dot0 applies to second-order nodes only (ordered by node id) and
    defaults to rest.
    """
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (net.graph.n,):
        raise DimensionMismatchError(f"theta0 must have length {net.graph.n}")
    v1 = net.v1_indices
    if theta_dot0 is None:
        nu0 = np.zeros(len(v1))
    else:
        nu0 = np.asarray(theta_dot0, dtype=float)
        if nu0.shape != (len(v1),):
            raise DimensionMismatchError(f"theta_dot0 must have length {len(v1)} (second-order nodes)")
    return rk4_integrate(
        net.graph, net.omega, v1, net.v2_indices, net.M[v1], net.D,
        theta0, nu0, t_end, step, record_stride=record_stride, steady_tol=steady_tol,
    )


def suggest_step(net: OscillatorNetwork, safety: float = 2.0) -> float:
    """Largest fixed step the RK4 stability region tolerates.

    Gershgorin bounds the linearized rates by 2*degree/D on first-order
    nodes and by max(D/M, sqrt(2*degree/M)) on second-order nodes; the step
    keeps step * rate below the given safety factor (RK4 admits ~2.8).
    """
    deg = net.graph.weighted_degrees()
    rates = [1e-9]
    v1 = net.v1_indices
    v2 = net.v2_indices
    if len(v2):
        rates.append(float(np.max(2.0 * deg[v2] / net.D[v2])))
    if len(v1):
        rates.append(float(np.max(net.D[v1] / net.M[v1])))
        rates.append(float(np.max(np.sqrt(2.0 * deg[v1] / net.M[v1]))))
    return min(DEFAULT_STEP * 10, safety / max(rates))


@dataclass(frozen=True)
class SyncDetection:
    freq_synced: bool
    cohesive: bool
    t_sync: float | None


def detect_sync(traj: Trajectory, tol_freq: float, gamma: float, g: WeightedGraph) -> SyncDetection:
    """Frequency-synchrony and cohesiveness verdicts for a trajectory.

    t_sync is the first sample time at which both the frequency spread is
    within tol_freq and the phases are gamma-cohesive.
    """
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    spreads = np.max(np.abs(traj.theta_dot - traj.theta_dot.mean(axis=1, keepdims=True)), axis=1)
    cohesivenesses = np.array([phase_cohesiveness(th, g) for th in traj.theta])
    ok = (spreads <= tol_freq) & (cohesivenesses <= gamma)
    t_sync = float(traj.times[int(np.argmax(ok))]) if bool(np.any(ok)) else None
    return SyncDetection(
        freq_synced=bool(spreads[-1] <= tol_freq),
        cohesive=bool(cohesivenesses[-1] <= gamma),
        t_sync=t_sync,
    )


def energy(net: OscillatorNetwork, theta) -> float:
    """Potential energy: sum_E a_ij (1 - cos(theta_i - theta_j)) - omega . theta."""
    theta = np.asarray(theta, dtype=float)
    g = net.graph
    return float(np.sum(g.weights * (1.0 - np.cos(edge_differences(g, theta)))) - net.omega @ theta)


def quadratic_energy(net: OscillatorNetwork, theta) -> float:
    """Small-angle approximation: sum_E a_ij (theta_i - theta_j)^2 / 2 - omega . theta."""
    theta = np.asarray(theta, dtype=float)
    g = net.graph
    return float(0.5 * np.sum(g.weights * edge_differences(g, theta) ** 2) - net.omega @ theta)


def kinetic_energy(net: OscillatorNetwork, theta_dot_v1) -> float:
    v1 = net.v1_indices
    return float(0.5 * np.sum(net.M[v1] * np.asarray(theta_dot_v1) ** 2))


@dataclass(frozen=True)
class KCriticalResult:
    """Smallest coupling gain that still yields a cohesive steady state."""

    k_min: float
    margin_normalizer: float
    ratio: float
    theta: np.ndarray | None = None


def _try_newton_cohesive(g: WeightedGraph, omega, gamma: float, seeds) -> np.ndarray | None:
    for seed in seeds:
        try:
            sol = solve_equilibrium(g, omega, theta0=seed, tol=1e-10)
        except (NoConvergenceError, SingularJacobianError):
            continue
        if sol.cohesiveness <= gamma + 1e-9:
            return sol.theta
    return None


def _simulate_to_equilibrium(g: WeightedGraph, omega, gamma: float, k_scale: float) -> np.ndarray | None:
    """First-order relaxation fallback; aborts early when the frequency
    spread stops contracting (incoherent drift)."""
    max_deg = float(np.max(g.weighted_degrees()))
    step = min(0.05, 1.0 / max(max_deg, 1e-9))
    theta = solve_poisson(g, omega)
    v1 = np.array([], dtype=np.intp)
    v2 = np.arange(g.n, dtype=np.intp)
    damping = np.ones(g.n)
    prev_spread = math.inf
    for _ in range(12):
        traj = rk4_integrate(
            g, omega, v1, v2, np.array([]), damping, theta, np.array([]),
            t_end=5.0, step=step, record_stride=10 ** 9,
            steady_tol=STEADY_STATE_TOL * max(1.0, float(np.max(np.abs(omega)))),
        )
        theta = traj.final_theta
        dot = traj.final_theta_dot
        spread = float(np.max(np.abs(dot - dot.mean())))
        if spread <= STEADY_STATE_TOL * max(1.0, float(np.max(np.abs(omega)))):
            refined = _try_newton_cohesive(g, omega, gamma, [theta])
            return refined
        if spread > 0.9 * prev_spread:
            return None
        prev_spread = spread
    return None


def critical_coupling_search(
    g: WeightedGraph,
    omega,
    gamma: float = math.pi / 2,
    rel_tol: float = 1e-3,
    seed: int = 0,
) -> KCriticalResult:
    """Bisection for the smallest gain K with a gamma-cohesive steady state.

    The graph must be unit weighted (gain-parametrized coupling K * a_ij).
    For each K the cohesive equilibrium is sought by Newton continuation
    from the previous solution, then from the linear seed and random
    restarts, then by relaxing the first-order dynamics.  The upper bracket
    starts at the margin normalizer ||Ldag omega||_{E,inf} and doubles up to
    2^10 times if needed.
    """
    if not np.allclose(g.weights, 1.0):
        raise ValueError("critical coupling search expects a unit-weight graph")
    require_connected(g)
    omega = np.asarray(omega, dtype=float)
    omega = omega - omega.mean()
    normalizer = sync_margin(g, omega).margin
    if normalizer < 1e-14:
        return KCriticalResult(k_min=0.0, margin_normalizer=normalizer, ratio=1.0, theta=np.zeros(g.n))

    rng = substream(seed, 0)
    best_theta: np.ndarray | None = None

    def exists(k: float) -> np.ndarray | None:
        gk = g.scaled(k)
        seeds = []
        if best_theta is not None:
            seeds.append(best_theta)
        seeds.append(None)  # linear seed inside solve_equilibrium
        seeds.extend(rng.uniform(-gamma / 2, gamma / 2, size=g.n) for _ in range(5))
        theta = _try_newton_cohesive(gk, omega, gamma, seeds)
        if theta is None:
            theta = _simulate_to_equilibrium(gk, omega, gamma, k)
        return theta

    k_hi = normalizer
    theta = exists(k_hi)
    doublings = 0
    while theta is None:
        doublings += 1
        if doublings > 10:
            raise NoSyncInBracketError(f"no cohesive sync up to K = {k_hi:.6g}")
        k_hi *= 2.0
        theta = exists(k_hi)
    best_theta = theta

    k_lo = k_hi / 2.0
    while k_lo > 1e-12 * normalizer:
        theta = exists(k_lo)
        if theta is None:
            break
        best_theta, k_hi = theta, k_lo
        k_lo /= 2.0
    else:
        k_lo = 0.0

    while k_hi - k_lo > rel_tol * k_hi:
        mid = 0.5 * (k_lo + k_hi)
        theta = exists(mid)
        if theta is None:
            k_lo = mid
        else:
            best_theta, k_hi = theta, mid

    return KCriticalResult(
        k_min=k_hi,
        margin_normalizer=normalizer,
        ratio=k_hi / normalizer,
        theta=best_theta,
    )


# --- serialization for network files ---

def network_to_dict(net: OscillatorNetwork) -> dict:
    from .graph import graph_to_dict

    return {
        "graph": graph_to_dict(net.graph),
        "omega": list(map(float, net.omega)),
        "second_order": sorted(net.second_order),
        "M": list(map(float, net.M)),
        "D": list(map(float, net.D)),
    }


def network_from_dict(d: dict) -> OscillatorNetwork:
    from .graph import graph_from_dict

    g = graph_from_dict(d["graph"])
    n = g.n
    omega = np.asarray(d["omega"], dtype=float)
    second = frozenset(int(i) for i in d.get("second_order", []))

    def expand(value, default):
        if value is None:
            return np.full(n, default)
        if np.isscalar(value):
            return np.full(n, float(value))
        return np.asarray(value, dtype=float)

    return OscillatorNetwork(
        graph=g,
        omega=omega,
        second_order=second,
        M=expand(d.get("M"), 1.0),
        D=expand(d.get("D"), 1.0),
    )
