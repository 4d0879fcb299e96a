"""Shared domain types: lattice geometry, diffusion and reaction parameters.

All quantities are plain 64-bit floats. Compartments are indexed 1..K on each
axis, matching the usual chain notation U_1 ... U_K.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class ValidationError(ValueError):
    """Invalid model parameters or malformed inputs."""


class Dimension(Enum):
    CHAIN_1D = "chain1d"
    SQUARE_2D = "square2d"


class Boundary(Enum):
    PERIODIC = "periodic"
    REFLECTIVE = "reflective"


class Variant(Enum):
    """Trimolecular reactant combination."""

    THREE_U = "3U"
    TWO_U_PLUS_V = "2U+V"
    U_PLUS_V_PLUS_W = "U+V+W"


class RateScaling(Enum):
    """Units convention for the reaction rate constant.

    MACRO_3D: macroscopic constant k with units length^6/time; the
    single-triplet propensity is k/h^6.
    ONE_D: one-dimensional constant k_1D with units length^2/time; the
    single-triplet propensity is k_1D/h^2.  The two agree when
    k_1D = k/h^4.
    """

    MACRO_3D = "3d"
    ONE_D = "1d"


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class DomainSpec:
    """Lattice geometry: a length-L domain cut into K compartments per axis.

    The compartment width h = L/K is always derived, never stored.  A
    SQUARE_2D domain is a K-by-K lattice of N = K^2 sites.
    """

    L: float
    K: int
    dimension: Dimension = Dimension.CHAIN_1D
    boundary: Boundary = Boundary.REFLECTIVE

    def __post_init__(self) -> None:
        _require_finite("L", self.L)
        if self.L <= 0:
            raise ValidationError(f"domain length must be positive, got {self.L}")
        if not isinstance(self.K, int) or isinstance(self.K, bool):
            raise ValidationError(f"compartment count must be an integer, got {self.K!r}")
        if self.K < 1:
            raise ValidationError(f"compartment count must be >= 1, got {self.K}")
        if not isinstance(self.dimension, Dimension):
            raise ValidationError(f"bad dimension: {self.dimension!r}")
        if not isinstance(self.boundary, Boundary):
            raise ValidationError(f"bad boundary: {self.boundary!r}")

    @property
    def h(self) -> float:
        return self.L / self.K

    @property
    def n_sites(self) -> int:
        return self.K if self.dimension is Dimension.CHAIN_1D else self.K * self.K

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC


@dataclass(frozen=True)
class DiffusionRates:
    """Diffusion constants (length^2/time) for the species U, V, W.

    The per-direction compartment jump rate at width h is D/h^2.
    """

    Du: float
    Dv: float = 0.0
    Dw: float = 0.0

    def __post_init__(self) -> None:
        for name in ("Du", "Dv", "Dw"):
            value = _require_finite(name, getattr(self, name))
            if value < 0:
                raise ValidationError(f"{name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)
        if self.total == 0:
            raise ValidationError("at least one diffusion rate must be positive")

    @property
    def total(self) -> float:
        return self.Du + self.Dv + self.Dw

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.Du, self.Dv, self.Dw)

    def sorted_descending(self) -> tuple[float, float, float]:
        return tuple(sorted(self.as_tuple(), reverse=True))  # type: ignore[return-value]

    def jump_rates(self, h: float) -> tuple[float, float, float]:
        """Per-direction jump rates (d_u, d_v, d_w) = D/h^2."""
        if h <= 0:
            raise ValidationError(f"compartment width must be positive, got {h}")
        h2 = h * h
        return (self.Du / h2, self.Dv / h2, self.Dw / h2)

    @property
    def n_positive(self) -> int:
        return sum(1 for d in self.as_tuple() if d > 0)


@dataclass(frozen=True)
class ReactionScheme:
    """A trimolecular reaction channel: variant, rate constant and its scaling."""

    variant: Variant
    rate_value: float
    scaling: RateScaling = RateScaling.ONE_D

    def __post_init__(self) -> None:
        if not isinstance(self.variant, Variant):
            raise ValidationError(f"bad variant: {self.variant!r}")
        if not isinstance(self.scaling, RateScaling):
            raise ValidationError(f"bad scaling: {self.scaling!r}")
        value = float(self.rate_value)
        # math.inf is allowed: it models the react-instantly-on-collision limit.
        if math.isnan(value) or value < 0:
            raise ValidationError(f"rate constant must be >= 0, got {value}")
        object.__setattr__(self, "rate_value", value)

    def k_1d(self, h: float) -> float:
        """The rate constant expressed in the one-dimensional convention."""
        if self.scaling is RateScaling.ONE_D:
            return self.rate_value
        return self.rate_value / h**4


@dataclass(frozen=True)
class WalkerState:
    """Positions of individually tracked molecules, as 1-based compartment
    indices per axis: ((x,), ...) on a chain, ((x, y), ...) on a square."""

    positions: tuple[tuple[int, ...], ...]
    species: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.positions) != len(self.species):
            raise ValidationError("one species tag per molecule is required")
        if not self.positions:
            raise ValidationError("at least one molecule is required")
        axes = {len(p) for p in self.positions}
        if len(axes) != 1:
            raise ValidationError("all molecules must share the same axis count")
        for p in self.positions:
            if any((not isinstance(c, int)) or c < 1 for c in p):
                raise ValidationError(f"compartment indices must be integers >= 1: {p}")

    @property
    def collided(self) -> bool:
        """True when every tracked molecule shares one compartment index."""
        return len(set(self.positions)) == 1

    def check_in_domain(self, domain: DomainSpec) -> None:
        n_axes = 1 if domain.dimension is Dimension.CHAIN_1D else 2
        for p in self.positions:
            if len(p) != n_axes:
                raise ValidationError(
                    f"position {p} has {len(p)} axes, domain has {n_axes}")
            if any(c > domain.K for c in p):
                raise ValidationError(f"position {p} outside 1..{domain.K}")


def propensity_single_triplet(scheme: ReactionScheme, domain: DomainSpec) -> float:
    """Firing rate of the reaction channel in a compartment holding exactly
    one triplet of reactants: k/h^6 (MACRO_3D) or k_1D/h^2 (ONE_D)."""
    h = domain.h
    if h <= 0:
        raise ValidationError(f"compartment width must be positive, got {h}")
    if scheme.scaling is RateScaling.MACRO_3D:
        return scheme.rate_value / h**6
    return scheme.rate_value / h**2


def general_propensity(
    scheme: ReactionScheme,
    counts: tuple[int, int, int],
    domain: DomainSpec,
) -> float:
    """Combinatorial propensity for arbitrary copy numbers in one compartment.

    Counting distinct reactant combinations: alpha*u(u-1)(u-2)/6 for 3U,
    alpha*u(u-1)/2*v for 2U+V, alpha*u*v*w for U+V+W, where alpha is the
    single-triplet propensity.  Reduces to alpha for exactly one triplet.
    """
    u, v, w = counts
    for name, c in (("u", u), ("v", v), ("w", w)):
        if (not isinstance(c, int)) or c < 0:
            raise ValidationError(f"count {name} must be a nonnegative integer, got {c!r}")
    alpha = propensity_single_triplet(scheme, domain)
    if scheme.variant is Variant.THREE_U:
        combos = u * (u - 1) * (u - 2) / 6.0
    elif scheme.variant is Variant.TWO_U_PLUS_V:
        combos = u * (u - 1) / 2.0 * v
    else:
        combos = float(u * v * w)
    if combos == 0.0:
        return 0.0
    return alpha * combos
