"""Stochastic simulation of collision and reaction times.

Few-molecule samplers track walker positions directly (no lattice-sized
arrays); the general compartment simulator tracks per-compartment counts and
serves as an independent consistency check on the specialized samplers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .model import (Dimension, DiffusionRates, DomainSpec, ReactionScheme,
                    ValidationError, Variant, propensity_single_triplet)

#: Per-trial event budget; hitting it is reported, never silently truncated.
DEFAULT_EVENT_CAP = 10**10

_MASK64 = (1 << 64) - 1


class StopReason(Enum):
    COLLISION = "collision"
    REACTION = "reaction"
    CAP = "cap"
    T_END = "t_end"


_STATUS_TO_REASON = {
    _kernels.STATUS_COLLISION: StopReason.COLLISION,
    _kernels.STATUS_REACTION: StopReason.REACTION,
    _kernels.STATUS_CAP: StopReason.CAP,
    _kernels.STATUS_T_END: StopReason.T_END,
}

_VARIANT_CODE = {
    Variant.THREE_U: 0,
    Variant.TWO_U_PLUS_V: 1,
    Variant.U_PLUS_V_PLUS_W: 2,
}


@dataclass(frozen=True)
class RngStream:
    """One reproducible random stream: (master_seed, stream_index) determine
    the entire event sequence, independent of platform and thread layout."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if self.stream_index < 0:
            raise ValidationError(f"stream index must be >= 0, got {self.stream_index}")
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)

    def state(self) -> np.ndarray:
        return _kernels.stream_state(self.master_seed, self.stream_index)

    def child(self, offset: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index + offset)


@dataclass(frozen=True)
class FirstPassageSample:
    """One realized stopping time: the simulated time, diffusion jumps
    executed, and why sampling stopped."""

    time: float
    n_jumps: int
    stopped_on: StopReason

    def __post_init__(self) -> None:
        if self.time < 0:
            raise ValidationError(f"negative sample time {self.time}")


def _as_sample(t: float, jumps: int, status: int) -> FirstPassageSample:
    return FirstPassageSample(time=float(t), n_jumps=int(jumps),
                              stopped_on=_STATUS_TO_REASON[int(status)])


def sample_collision_2walkers_2d(
    domain: DomainSpec,
    Du: float,
    Dv: float,
    rng: RngStream,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> FirstPassageSample:
    """First time two walkers on the K-by-K lattice share a site, both
    started at independent uniformly random sites (coincident starts return
    time zero)."""
    if domain.dimension is not Dimension.SQUARE_2D:
        raise ValidationError("two-walker 2D sampling needs a SQUARE_2D domain")
    if min(Du, Dv) < 0 or Du + Dv <= 0:
        raise ValidationError(f"need Du, Dv >= 0 with Du+Dv > 0, got ({Du}, {Dv})")
    h2 = domain.h**2
    t, jumps, status = _kernels.collision_2walkers_2d(
        domain.K, Du / h2, Dv / h2, domain.periodic, event_cap, rng.state())
    return _as_sample(t, jumps, status)


def sample_collision_3walkers_1d(
    domain: DomainSpec,
    rates: DiffusionRates,
    rng: RngStream,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> FirstPassageSample:
    """First time three walkers on the chain share a compartment, all
    started at independent uniformly random compartments."""
    if domain.dimension is not Dimension.CHAIN_1D:
        raise ValidationError("three-walker sampling needs a CHAIN_1D domain")
    if rates.n_positive < 2:
        raise ValidationError("need at least two positive diffusion rates")
    du, dv, dw = rates.jump_rates(domain.h)
    t, jumps, status = _kernels.collision_3walkers_1d(
        domain.K, du, dv, dw, domain.periodic, event_cap, rng.state())
    return _as_sample(t, jumps, status)


def sample_reaction_time(
    domain: DomainSpec,
    rates: DiffusionRates,
    scheme: ReactionScheme,
    rng: RngStream,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> FirstPassageSample:
    """Time until the trimolecular channel fires for one tracked triplet.

    While the walkers share a compartment, the reaction (single-triplet
    propensity) competes with diffusion out of the compartment.  An infinite
    rate constant means reaction fires at first collision.
    """
    if domain.dimension is not Dimension.CHAIN_1D:
        raise ValidationError("reaction-time sampling needs a CHAIN_1D domain")
    if rates.n_positive < 2:
        raise ValidationError("need at least two positive diffusion rates")
    alpha = propensity_single_triplet(scheme, domain)
    if alpha <= 0:
        raise ValidationError("reaction propensity must be positive")
    du, dv, dw = rates.jump_rates(domain.h)
    if math.isinf(alpha):
        t, jumps, status = _kernels.collision_3walkers_1d(
            domain.K, du, dv, dw, domain.periodic, event_cap, rng.state())
        if status == _kernels.STATUS_COLLISION:
            status = _kernels.STATUS_REACTION
    else:
        t, jumps, status = _kernels.reaction_3walkers_1d(
            domain.K, du, dv, dw, alpha, domain.periodic, event_cap, rng.state())
    return _as_sample(t, jumps, status)


def sample_collision_2walkers_1d(
    domain: DomainSpec,
    Da: float,
    Db: float,
    rng: RngStream,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> FirstPassageSample:
    """First meeting time of two walkers on the chain (the two-molecule
    counterpart used by the 1D figure experiments)."""
    if domain.dimension is not Dimension.CHAIN_1D:
        raise ValidationError("two-walker 1D sampling needs a CHAIN_1D domain")
    if min(Da, Db) < 0 or Da + Db <= 0:
        raise ValidationError(f"need Da, Db >= 0 with Da+Db > 0, got ({Da}, {Db})")
    h2 = domain.h**2
    t, jumps, status = _kernels.collision_2walkers_1d(
        domain.K, Da / h2, Db / h2, domain.periodic, event_cap, rng.state())
    return _as_sample(t, jumps, status)


@dataclass(frozen=True)
class RdmeResult:
    """Final state of a compartment-system run plus its reaction event log."""

    t_final: float
    final_counts: np.ndarray          # (3, K) int64
    n_events: int
    reaction_times: np.ndarray        # times of recorded reaction firings
    reaction_compartments: np.ndarray
    stopped_on: StopReason


def run_ssa_rdme(
    domain: DomainSpec,
    rates: DiffusionRates,
    scheme: ReactionScheme | None,
    initial_counts: np.ndarray,
    t_end: float,
    rng: RngStream,
    max_events: int = DEFAULT_EVENT_CAP,
    max_recorded_reactions: int = 10_000,
) -> RdmeResult:
    """Direct-method simulation of the full reaction-diffusion compartment
    system until t_end.

    initial_counts is (3, K): copy numbers of U, V, W per compartment.
    scheme=None (or a zero rate) simulates diffusion only, which conserves
    every species count exactly.
    """
    if domain.dimension is not Dimension.CHAIN_1D:
        raise ValidationError("the compartment simulator runs on a CHAIN_1D domain")
    if t_end <= 0 or not math.isfinite(t_end):
        raise ValidationError(f"t_end must be positive and finite, got {t_end}")
    counts = np.ascontiguousarray(initial_counts, dtype=np.int64).copy()
    if counts.shape != (3, domain.K):
        raise ValidationError(
            f"initial counts must have shape (3, {domain.K}), got {counts.shape}")
    if (counts < 0).any():
        raise ValidationError("negative molecule count")
    if scheme is None:
        alpha = 0.0
        variant = 2
    else:
        alpha = propensity_single_triplet(scheme, domain)
        if math.isinf(alpha):
            raise ValidationError("the compartment simulator needs a finite rate constant")
        variant = _VARIANT_CODE[scheme.variant]
    du, dv, dw = rates.jump_rates(domain.h)
    rxn_times = np.empty(max_recorded_reactions)
    rxn_sites = np.empty(max_recorded_reactions, dtype=np.int64)
    t, n_events, n_rxn, status = _kernels.run_rdme(
        domain.K, counts, du, dv, dw, alpha, variant, domain.periodic,
        float(t_end), max_events, rxn_times, rxn_sites, rng.state())
    n_kept = min(int(n_rxn), max_recorded_reactions)
    return RdmeResult(
        t_final=float(t),
        final_counts=counts,
        n_events=int(n_events),
        reaction_times=rxn_times[:n_kept].copy(),
        reaction_compartments=rxn_sites[:n_kept].copy(),
        stopped_on=_STATUS_TO_REASON[int(status)],
    )


# ---------------------------------------------------------------------------
# batch execution (used by the experiment harness)
# ---------------------------------------------------------------------------

class SamplerModel(Enum):
    COLLISION_2W_2D = "collision-2w-2d"
    COLLISION_3W_1D = "collision-3w-1d"
    REACTION_3W_1D = "reaction-3w-1d"
    COLLISION_2W_1D = "collision-2w-1d"


_MODEL_CODE = {
    SamplerModel.COLLISION_2W_2D: _kernels._MODEL_COLLISION_2W_2D,
    SamplerModel.COLLISION_3W_1D: _kernels._MODEL_COLLISION_3W_1D,
    SamplerModel.REACTION_3W_1D: _kernels._MODEL_REACTION_3W_1D,
    SamplerModel.COLLISION_2W_1D: _kernels._MODEL_COLLISION_2W_1D,
}


def validate_batch_args(
    model: SamplerModel,
    domain: DomainSpec,
    rates: DiffusionRates,
    scheme: ReactionScheme | None,
) -> tuple[int, float, float, float, float, bool]:
    """Shared validation for batch runs; returns kernel arguments."""
    du, dv, dw = rates.jump_rates(domain.h)
    alpha = 0.0
    if model is SamplerModel.COLLISION_2W_2D:
        if domain.dimension is not Dimension.SQUARE_2D:
            raise ValidationError("two-walker 2D sampling needs a SQUARE_2D domain")
        if rates.Du + rates.Dv <= 0:
            raise ValidationError("need Du+Dv > 0")
    else:
        if domain.dimension is not Dimension.CHAIN_1D:
            raise ValidationError(f"{model.value} needs a CHAIN_1D domain")
    if model is SamplerModel.COLLISION_2W_1D:
        if rates.Dv + rates.Dw <= 0:
            raise ValidationError("need Dv+Dw > 0 for the 1D pair")
        du, dv, dw = dv, dw, 0.0
    if model in (SamplerModel.COLLISION_3W_1D, SamplerModel.REACTION_3W_1D):
        if rates.n_positive < 2:
            raise ValidationError("need at least two positive diffusion rates")
    if model is SamplerModel.REACTION_3W_1D:
        if scheme is None:
            raise ValidationError("reaction sampling requires a reaction scheme")
        alpha = propensity_single_triplet(scheme, domain)
        if alpha <= 0 or math.isinf(alpha):
            raise ValidationError("reaction propensity must be positive and finite")
    return (_MODEL_CODE[model], du, dv, dw, alpha, domain.periodic)


def run_batch_into(
    model: SamplerModel,
    domain: DomainSpec,
    rates: DiffusionRates,
    scheme: ReactionScheme | None,
    master_seed: int,
    stream_base: int,
    times: np.ndarray,
    jumps: np.ndarray,
    status: np.ndarray,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> None:
    """Run len(times) trials with streams stream_base, stream_base+1, ...
    filling the given slices; safe to call concurrently on disjoint slices."""
    code, du, dv, dw, alpha, periodic = validate_batch_args(
        model, domain, rates, scheme)
    _kernels.run_batch(code, domain.K, du, dv, dw, alpha, periodic,
                       event_cap, int(master_seed) & _MASK64, stream_base,
                       times, jumps, status)
