"""Exact mean first-passage / absorption times on small lattices.

Each problem is a continuous-time (or discrete-time) Markov chain over an
explicitly enumerated product state space.  The expected hitting time tau
solves a sparse linear system: sum of rates * (tau(neighbour) - tau(state))
= -1 on every non-target state, tau = 0 on targets; for reaction problems the
target (collision) states instead stay transient and carry an extra
absorption rate.

These solves are ground truth for both the closed-form estimates and the
Monte Carlo samplers, so residuals are checked explicitly after every solve.

State indexing is row-major over walker coordinates, 0-based internally:
three walkers (u, v, w) on a K-chain pack to u*K^2 + v*K + w; a pair of 2D
walkers ((ax, ay), (bx, by)) packs to ((ax*K + ay)*K + bx)*K + by; a single
2D walker (x, y) packs to x*K + y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg, spsolve

from .model import (Dimension, DiffusionRates, DomainSpec, ReactionScheme,
                    ValidationError, propensity_single_triplet)

# State-space caps keep every solve comfortably within desktop memory and
# runtime; they bound K, not states, and mirror the documented packing.
CAP_3WALKER_K = 64          # K^3 states
CAP_PAIR_CHAIN_K = 512      # K^2 states
CAP_PAIR_SQUARE_FULL_K = 16     # K^4 states (reflective square pair)
CAP_PAIR_SQUARE_REDUCED_K = 512  # K^2 states (periodic relative walker)
CAP_DISCRETE_K = 256        # K^2 states
CAP_PSEUDO_K = 512          # K^2 states

#: Relative residual demanded of every solve, ||A tau - 1||_inf / ||1||_inf.
DEFAULT_TOLERANCE = 1e-10

#: Below this many unknowns a direct sparse factorization is used; above it,
#: conjugate gradients with Jacobi preconditioning (the systems are
#: symmetric positive definite).
_DIRECT_SOLVE_MAX = 20_000


class OracleCapError(RuntimeError):
    """The requested lattice exceeds the configured state-space cap."""


class ReachabilityError(ValidationError):
    """Some initial state cannot reach the target set."""


class SolverError(RuntimeError):
    """The linear solve failed to meet the residual tolerance."""


class InitMode(Enum):
    UNIFORM_ALL = "all"            # uniform over every state; targets count as 0
    UNIFORM_NON_TARGET = "noncollided"  # uniform over non-target states


@dataclass(frozen=True)
class OracleResult:
    expected_time: float
    residual_norm: float
    n_states: int

    def __post_init__(self) -> None:
        if self.expected_time < 0:
            raise SolverError(f"negative expected time {self.expected_time}")

    @property
    def expected_steps(self) -> float:
        """Alias for discrete-time problems, where the value is a step count."""
        return self.expected_time


@dataclass
class HittingTimeProblem:
    """An assembled hitting-time linear system.

    rows/cols/rates are COO transition entries (duplicates sum); diag is the
    total outflow per state.  For discrete-time problems rates are step
    probabilities and diag is identically 1.  When absorb_rate is positive,
    target states stay in the system with that extra absorption rate
    (mean-time-to-absorption); otherwise they are removed (tau = 0).
    """

    n_states: int
    rows: np.ndarray
    cols: np.ndarray
    rates: np.ndarray
    diag: np.ndarray
    target_mask: np.ndarray
    absorb_rate: float = 0.0
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        if not self.target_mask.any():
            raise ValidationError("target set is empty")
        if np.any(self.rates < 0):
            raise ValidationError("negative transition rate")

    def _check_reachability(self) -> None:
        data = np.ones(len(self.rows), dtype=np.int8)
        adj = sp.coo_matrix((data, (self.rows, self.cols)),
                            shape=(self.n_states, self.n_states)).tocsr()
        # transition rates here are symmetric, so undirected components suffice
        _, labels = connected_components(adj, directed=False)
        good = np.zeros(labels.max() + 1, dtype=bool)
        good[labels[self.target_mask]] = True
        if not good[labels].all():
            n_bad = int((~good[labels]).sum())
            raise ReachabilityError(
                f"{n_bad} states cannot reach the target set")

    def solve_vector(self) -> tuple[np.ndarray, float]:
        """Expected time from every state, plus the achieved residual norm."""
        self._check_reachability()
        if self.absorb_rate > 0:
            unknown = np.ones(self.n_states, dtype=bool)
            diag = self.diag + np.where(self.target_mask, self.absorb_rate, 0.0)
        else:
            unknown = ~self.target_mask
            diag = self.diag
        full = np.zeros(self.n_states)
        n_unknown = int(unknown.sum())
        if n_unknown == 0:
            return full, 0.0
        # A = diag(outflow) - R, restricted to unknown states; SPD here
        # because every chain below has symmetric rates.
        m = sp.coo_matrix(
            (np.concatenate([diag, -self.rates]),
             (np.concatenate([np.arange(self.n_states), self.rows]),
              np.concatenate([np.arange(self.n_states), self.cols]))),
            shape=(self.n_states, self.n_states)).tocsr()
        a = m[unknown][:, unknown]
        b = np.ones(n_unknown)
        if n_unknown <= _DIRECT_SOLVE_MAX:
            x = spsolve(a.tocsc(), b)
        else:
            inv_diag = 1.0 / a.diagonal()
            precond = sp.diags(inv_diag)
            x, info = cg(a, b, rtol=1e-12, atol=0.0, maxiter=20 * n_unknown, M=precond)
            if info != 0:
                raise SolverError(f"conjugate gradients did not converge (info={info})")
        residual = float(np.abs(a @ x - b).max())
        for _ in range(4):
            if residual <= self.tolerance:
                break
            dx, info = cg(a, b - a @ x, rtol=1e-10, atol=0.0,
                          maxiter=5 * n_unknown)
            if info != 0:
                break
            x = x + dx
            residual = float(np.abs(a @ x - b).max())
        if residual > self.tolerance:
            raise SolverError(
                f"residual {residual:.3e} above tolerance {self.tolerance:.3e}")
        full[unknown] = x
        return full, residual

    def solve(self, init_mode: InitMode = InitMode.UNIFORM_ALL) -> OracleResult:
        vec, residual = self.solve_vector()
        if init_mode is InitMode.UNIFORM_ALL:
            mean = float(vec.mean())
        else:
            non_target = ~self.target_mask
            if not non_target.any():
                mean = 0.0
            else:
                mean = float(vec[non_target].mean())
        return OracleResult(expected_time=mean, residual_norm=residual,
                            n_states=self.n_states)


# ---------------------------------------------------------------------------
# problem builders
# ---------------------------------------------------------------------------

def _chain_hop_entries(coord: np.ndarray, stride: int, K: int, rate: float,
                       periodic: bool, base: np.ndarray,
                       out: list, diag: np.ndarray | None) -> None:
    """Append the +/-1 hops of one walker coordinate to the COO lists.

    diag, when given, accumulates the outflow; discrete-time problems pass
    None because their diagonal is identically 1.
    """
    if rate == 0.0 or K == 1:
        return
    for step in (1, -1):
        if periodic:
            target = base + ((coord + step) % K - coord) * stride
            rows, cols = base, target
        else:
            ok = (coord + step >= 0) & (coord + step < K)
            rows = base[ok]
            cols = rows + step * stride
        out.append((rows, cols, rate))
        if diag is not None:
            np.add.at(diag, rows, rate)


def _assemble(n_states: int, entries: list, diag: np.ndarray,
              target_mask: np.ndarray, absorb_rate: float = 0.0,
              tolerance: float = DEFAULT_TOLERANCE) -> HittingTimeProblem:
    if entries:
        rows = np.concatenate([e[0] for e in entries])
        cols = np.concatenate([e[1] for e in entries])
        rates = np.concatenate([np.full(len(e[0]), e[2]) for e in entries])
    else:
        rows = cols = np.empty(0, dtype=np.int64)
        rates = np.empty(0)
    return HittingTimeProblem(n_states=n_states, rows=rows, cols=cols,
                              rates=rates, diag=diag, target_mask=target_mask,
                              absorb_rate=absorb_rate, tolerance=tolerance)


def _build_3walkers_1d(domain: DomainSpec, rates: DiffusionRates,
                       absorb_rate: float = 0.0,
                       tolerance: float = DEFAULT_TOLERANCE) -> HittingTimeProblem:
    K = domain.K
    if K > CAP_3WALKER_K:
        raise OracleCapError(f"K={K} exceeds the three-walker cap {CAP_3WALKER_K}")
    if domain.dimension is not Dimension.CHAIN_1D:
        raise ValidationError("three-walker problems are defined on a 1D chain")
    if rates.n_positive < 2:
        raise ValidationError("need at least two positive diffusion rates")
    du, dv, dw = rates.jump_rates(domain.h)
    n = K**3
    s = np.arange(n)
    u, v, w = s // (K * K), (s // K) % K, s % K
    diag = np.zeros(n)
    entries: list = []
    periodic = domain.periodic
    _chain_hop_entries(u, K * K, K, du, periodic, s, entries, diag)
    _chain_hop_entries(v, K, K, dv, periodic, s, entries, diag)
    _chain_hop_entries(w, 1, K, dw, periodic, s, entries, diag)
    target = (u == v) & (v == w)
    return _assemble(n, entries, diag, target, absorb_rate, tolerance)


def mfpt_collision_3walkers_1d(
    domain: DomainSpec,
    rates: DiffusionRates,
    init_mode: InitMode = InitMode.UNIFORM_ALL,
    tolerance: float = DEFAULT_TOLERANCE,
) -> OracleResult:
    """Exact mean time for three walkers on the chain to first share a
    compartment, averaged over the chosen initial distribution."""
    if domain.K == 1:
        return OracleResult(0.0, 0.0, 1)
    problem = _build_3walkers_1d(domain, rates, tolerance=tolerance)
    return problem.solve(init_mode)


def mean_reaction_time_3walkers_1d(
    domain: DomainSpec,
    rates: DiffusionRates,
    scheme: ReactionScheme,
    init_mode: InitMode = InitMode.UNIFORM_ALL,
    tolerance: float = DEFAULT_TOLERANCE,
) -> OracleResult:
    """Exact mean time until the trimolecular channel fires: collision states
    stay transient with absorption rate equal to the single-triplet
    propensity, competing with continued diffusion."""
    alpha = propensity_single_triplet(scheme, domain)
    if alpha <= 0:
        raise ValidationError("reaction propensity must be positive")
    if math.isinf(alpha):
        return mfpt_collision_3walkers_1d(domain, rates, init_mode, tolerance)
    if domain.K == 1:
        return OracleResult(1.0 / alpha, 0.0, 1)
    problem = _build_3walkers_1d(domain, rates, absorb_rate=alpha,
                                 tolerance=tolerance)
    return problem.solve(init_mode)


def _build_pair_chain(domain: DomainSpec, Da: float, Db: float,
                      tolerance: float) -> HittingTimeProblem:
    K = domain.K
    if K > CAP_PAIR_CHAIN_K:
        raise OracleCapError(f"K={K} exceeds the chain-pair cap {CAP_PAIR_CHAIN_K}")
    h2 = domain.h**2
    n = K * K
    s = np.arange(n)
    a, b = s // K, s % K
    diag = np.zeros(n)
    entries: list = []
    _chain_hop_entries(a, K, K, Da / h2, domain.periodic, s, entries, diag)
    _chain_hop_entries(b, 1, K, Db / h2, domain.periodic, s, entries, diag)
    return _assemble(n, entries, diag, a == b, tolerance=tolerance)


def _build_pair_square_full(domain: DomainSpec, Da: float, Db: float,
                            tolerance: float) -> HittingTimeProblem:
    K = domain.K
    if K > CAP_PAIR_SQUARE_FULL_K:
        raise OracleCapError(
            f"K={K} exceeds the full square-pair cap {CAP_PAIR_SQUARE_FULL_K}")
    h2 = domain.h**2
    n = K**4
    s = np.arange(n)
    coords = [(s // K**3) % K, (s // K**2) % K, (s // K) % K, s % K]
    strides = [K**3, K**2, K, 1]
    diag = np.zeros(n)
    entries: list = []
    for i, rate in ((0, Da / h2), (1, Da / h2), (2, Db / h2), (3, Db / h2)):
        _chain_hop_entries(coords[i], strides[i], K, rate, domain.periodic,
                           s, entries, diag)
    target = (coords[0] == coords[2]) & (coords[1] == coords[3])
    return _assemble(n, entries, diag, target, tolerance=tolerance)


def _build_pair_square_reduced(domain: DomainSpec, Da: float, Db: float,
                               tolerance: float) -> HittingTimeProblem:
    # periodic square pair: the relative coordinate is itself a walker that
    # hops in each of the four axis directions at rate (d_a + d_b)
    K = domain.K
    if K > CAP_PAIR_SQUARE_REDUCED_K:
        raise OracleCapError(
            f"K={K} exceeds the reduced square-pair cap {CAP_PAIR_SQUARE_REDUCED_K}")
    h2 = domain.h**2
    rate = (Da + Db) / h2
    n = K * K
    s = np.arange(n)
    x, y = s // K, s % K
    diag = np.zeros(n)
    entries: list = []
    _chain_hop_entries(x, K, K, rate, True, s, entries, diag)
    _chain_hop_entries(y, 1, K, rate, True, s, entries, diag)
    target = (x == 0) & (y == 0)
    return _assemble(n, entries, diag, target, tolerance=tolerance)


def mfpt_collision_2walkers(
    domain: DomainSpec,
    Da: float,
    Db: float,
    init_mode: InitMode = InitMode.UNIFORM_ALL,
    tolerance: float = DEFAULT_TOLERANCE,
    reduce_periodic: bool = True,
) -> OracleResult:
    """Exact mean first-collision time of two walkers on the chain or the
    square lattice.

    On the periodic square the pair is reduced to a single relative walker
    (set reduce_periodic=False to force the full product solve); the
    reflective square has no such reduction and is capped at a much smaller K.
    """
    if min(Da, Db) < 0 or Da + Db <= 0:
        raise ValidationError(f"need Da, Db >= 0 with Da+Db > 0, got ({Da}, {Db})")
    if domain.K == 1:
        return OracleResult(0.0, 0.0, 1)
    if domain.dimension is Dimension.CHAIN_1D:
        problem = _build_pair_chain(domain, Da, Db, tolerance)
    elif domain.periodic and reduce_periodic:
        problem = _build_pair_square_reduced(domain, Da, Db, tolerance)
    else:
        problem = _build_pair_square_full(domain, Da, Db, tolerance)
    return problem.solve(init_mode)


def mfpt_pseudo_walker_trimol(
    domain: DomainSpec,
    rates: DiffusionRates,
    init_mode: InitMode = InitMode.UNIFORM_ALL,
    tolerance: float = DEFAULT_TOLERANCE,
) -> OracleResult:
    """Mean hitting time of the origin for the difference walker
    (z1, z2) = (x_u - x_w, x_v - x_w) of the three-walker chain problem.

    A U hop moves z1, a V hop moves z2, and a W hop moves both together, so
    the walker takes axis steps at rates d_u and d_v and same-sign diagonal
    steps at rate d_w on the K-by-K torus.  The reduction is exact only for
    periodic chains, where it must reproduce the full three-walker solve.
    """
    if not domain.periodic:
        raise ValidationError("the difference-walker reduction requires periodic boundaries")
    K = domain.K
    if K > CAP_PSEUDO_K:
        raise OracleCapError(f"K={K} exceeds the difference-walker cap {CAP_PSEUDO_K}")
    if rates.n_positive < 2:
        raise ValidationError("need at least two positive diffusion rates")
    if K == 1:
        return OracleResult(0.0, 0.0, 1)
    du, dv, dw = rates.jump_rates(domain.h)
    n = K * K
    s = np.arange(n)
    x, y = s // K, s % K
    diag = np.zeros(n)
    entries: list = []
    _chain_hop_entries(x, K, K, du, True, s, entries, diag)
    _chain_hop_entries(y, 1, K, dv, True, s, entries, diag)
    if dw > 0:
        for step in (1, -1):
            cols = ((x + step) % K) * K + (y + step) % K
            entries.append((s, cols, dw))
            np.add.at(diag, s, dw)
    target = (x == 0) & (y == 0)
    problem = _assemble(n, entries, diag, target, tolerance=tolerance)
    return problem.solve(init_mode)


def expected_steps_discrete_2d(
    K: int,
    step_probabilities: tuple[float, float, float],
    init_mode: InitMode = InitMode.UNIFORM_NON_TARGET,
    start: tuple[int, int] | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> OracleResult:
    """Expected number of steps for a discrete-time walk on the periodic
    K-by-K lattice to first reach the origin.

    step_probabilities = (p_axis_x, p_axis_y, p_diagonal) are the summed
    weights of the three direction pairs (+1,0)/(-1,0), (0,+1)/(0,-1) and
    (+1,+1)/(-1,-1); they must sum to 1.  `start` overrides the uniform
    initial distribution with a single starting site.
    """
    if K < 2:
        raise ValidationError(f"need K >= 2, got {K}")
    if K > CAP_DISCRETE_K:
        raise OracleCapError(f"K={K} exceeds the discrete-walk cap {CAP_DISCRETE_K}")
    p1, p2, p3 = (float(p) for p in step_probabilities)
    if min(p1, p2, p3) < 0 or abs(p1 + p2 + p3 - 1.0) > 1e-12:
        raise ValidationError(
            f"step probabilities must be nonnegative and sum to 1, got {step_probabilities}")
    n = K * K
    s = np.arange(n)
    x, y = s // K, s % K
    diag = np.ones(n)
    entries: list = []
    if p1 > 0:
        _chain_hop_entries(x, K, K, p1 / 2.0, True, s, entries, None)
    if p2 > 0:
        _chain_hop_entries(y, 1, K, p2 / 2.0, True, s, entries, None)
    if p3 > 0:
        for step in (1, -1):
            cols = ((x + step) % K) * K + (y + step) % K
            entries.append((s, cols, p3 / 2.0))
    target = (x == 0) & (y == 0)
    problem = _assemble(n, entries, diag, target, tolerance=tolerance)
    if start is None:
        return problem.solve(init_mode)
    sx, sy = start
    if not (0 <= sx < K and 0 <= sy < K):
        raise ValidationError(f"start {start} outside the K={K} lattice")
    vec, residual = problem.solve_vector()
    return OracleResult(expected_time=float(vec[sx * K + sy]),
                        residual_norm=residual, n_states=n)
