"""Closed-form mean collision / reaction time estimates on compartment lattices.

Two families of results live here:

* asymptotic collision-time formulas for a pair of molecules on a 2D square
  lattice and for a triple of molecules on a 1D chain (the latter via the
  standard reduction to a single pseudo-walker on a 2D lattice), for both
  periodic and reflective boundaries;
* the generating-function coefficients behind those formulas (expected step
  counts of a lattice walk to the origin) and the continuum first-exit-time
  series on a square with absorbing edges.

Every function canonicalizes its diffusion-rate arguments by sorting them in
descending order before evaluating; the underlying expansions require the
largest rate to be labelled first, and the physical problem is label-symmetric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Boundary, DiffusionRates, RateScaling, ReactionScheme, ValidationError

EULER_GAMMA = 0.5772156649015329

#: Additive constant of the uniform-start expected step count on a periodic
#: 2D lattice for the simple (axis-only, equal-rate) walk.
SIMPLE_WALK_OFFSET = 0.1951

#: Additive constant (times L^2/(Du+Dv)) of the periodic-boundary pair
#: collision time; asymptotically SIMPLE_WALK_OFFSET/4.
BIMOL_PERIODIC_OFFSET = 4.878e-2

#: Empirical replacement for BIMOL_PERIODIC_OFFSET under reflective
#: boundaries, fitted to simulation data with the log-term slope held fixed.
BIMOL_REFLECTIVE_OFFSET = 1.4053

#: Empirical constant of the two-molecule 1D reflective collision time,
#: tau = PAIR_REFLECTIVE_COEFF * L^2/(Dv+Dw); equals twice the continuum
#: mean-exit-time coefficient of a square domain (~2 * 0.0351).
PAIR_REFLECTIVE_COEFF = 0.140

#: Empirical shift inside the logarithm of the reflective trimolecular
#: formula: log(REFLECTIVE_LOG_SHIFT + eta'/4) replaces log(1 + eta').
REFLECTIVE_LOG_SHIFT = 0.125

_TWO_OVER_PI_LOG = math.log(2.0 / math.pi)
_BRACKET_BASE = 2.0 * (EULER_GAMMA + _TWO_OVER_PI_LOG)

#: Hard cap on series summation indices (odd k only are visited).
SERIES_MAX_K = 10001


class SeriesConvergenceError(ArithmeticError):
    """A series evaluation hit SERIES_MAX_K before meeting its tolerance."""


# ---------------------------------------------------------------------------
# pair of molecules on a 2D square lattice
# ---------------------------------------------------------------------------

def nsteps_2d(n_sites: float) -> float:
    """Expected steps for a uniformly started simple walk on a periodic 2D
    lattice of N sites to first hit a marked site: N log(N)/pi + 0.1951 N."""
    if n_sites < 2:
        raise ValidationError(f"site count must be >= 2, got {n_sites}")
    n = float(n_sites)
    return n * math.log(n) / math.pi + SIMPLE_WALK_OFFSET * n


def nsteps_one_apart(n_sites: float) -> float:
    """Expected steps to the marked site when starting one site away: N - 1."""
    if n_sites < 2:
        raise ValidationError(f"site count must be >= 2, got {n_sites}")
    return float(n_sites) - 1.0


def _check_geometry(L: float, h: float) -> None:
    if not (L > 0 and math.isfinite(L)):
        raise ValidationError(f"domain length must be positive, got {L}")
    if not (0 < h <= L):
        raise ValidationError(f"compartment width must satisfy 0 < h <= L, got h={h}, L={L}")


def bimol_collision_2d(L: float, h: float, Du: float, Dv: float,
                       boundary: Boundary = Boundary.PERIODIC) -> float:
    """Mean first-collision time of two molecules, started uniformly on an
    L-by-L square lattice of compartment width h, asymptotic as h -> 0.

    The leading log(L/h) term is boundary-independent; the additive constant
    is BIMOL_PERIODIC_OFFSET or BIMOL_REFLECTIVE_OFFSET.
    """
    _check_geometry(L, h)
    dsum = Du + Dv
    if min(Du, Dv) < 0 or dsum <= 0:
        raise ValidationError(f"need Du, Dv >= 0 with Du+Dv > 0, got ({Du}, {Dv})")
    first = L * L * math.log(L / h) / (2.0 * math.pi * dsum)
    offset = (BIMOL_REFLECTIVE_OFFSET if boundary is Boundary.REFLECTIVE
              else BIMOL_PERIODIC_OFFSET)
    return first + offset * L * L / dsum


def bimol_reaction_2d(L: float, h: float, Du: float, Dv: float, k_b: float,
                      boundary: Boundary = Boundary.PERIODIC) -> float:
    """Mean reaction time of the pair: L^2/k_b plus the collision time.

    k_b is the bimolecular rate constant (length^2/time); k_b = inf gives the
    diffusion-limited (collision-time) value.
    """
    if math.isnan(k_b) or k_b <= 0:
        raise ValidationError(f"bimolecular rate must be positive, got {k_b}")
    return L * L / k_b + bimol_collision_2d(L, h, Du, Dv, boundary)


def anisotropic_collision_2d(L: float, h: float, Du: float, Dv: float) -> float:
    """Mean time for a single walker with axis rates Du (x) and Dv (y) on a
    periodic 2D lattice to first hit a marked site, started uniformly.

    Arguments are reordered so Du >= Dv; the smaller rate must be positive.
    """
    _check_geometry(L, h)
    big, small = (Du, Dv) if Du >= Dv else (Dv, Du)
    if small <= 0:
        raise ValidationError(f"both axis rates must be positive, got ({Du}, {Dv})")
    root = math.sqrt(big * small)
    first = L * L * math.log(L / h) / (2.0 * math.pi * root)
    second = L * L / (12.0 * small)
    third = L * L / (4.0 * math.pi * root) * (_BRACKET_BASE - math.log1p(big / small))
    return first + second + third


# ---------------------------------------------------------------------------
# triple of molecules on a 1D chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrimolRateSummary:
    """Combined diffusion scales of the three-molecule problem:
    hat_D = sqrt(DuDv + DuDw + DvDw) and eta' = Du^2/hat_D^2 with Du the
    largest rate."""

    hat_D: float
    eta_prime: float

    @classmethod
    def from_rates(cls, Du: float, Dv: float, Dw: float) -> "TrimolRateSummary":
        Du, Dv, Dw = sorted((Du, Dv, Dw), reverse=True)
        if Dw < 0:
            raise ValidationError("diffusion rates must be >= 0")
        hat_sq = Du * Dv + Du * Dw + Dv * Dw
        if hat_sq <= 0:
            raise ValidationError(
                "at least two diffusion rates must be positive, got "
                f"({Du}, {Dv}, {Dw})")
        hat_D = math.sqrt(hat_sq)
        return cls(hat_D=hat_D, eta_prime=Du * Du / hat_sq)


def _rates_tuple(rates: DiffusionRates | tuple[float, float, float]) -> tuple[float, float, float]:
    if isinstance(rates, DiffusionRates):
        return rates.as_tuple()
    return (float(rates[0]), float(rates[1]), float(rates[2]))


def trimol_collision(L: float, h: float,
                     rates: DiffusionRates | tuple[float, float, float],
                     boundary: Boundary = Boundary.PERIODIC) -> float:
    """Mean first time for three molecules, started uniformly on a chain of
    width-h compartments, to occupy a common compartment.

    After descending reorder Du >= Dv >= Dw, requires Dv + Dw > 0 (the
    estimate is singular when only one molecule moves).  Diverges like
    log(L/h) as h -> 0.
    """
    _check_geometry(L, h)
    Du, Dv, Dw = sorted(_rates_tuple(rates), reverse=True)
    if Dw < 0:
        raise ValidationError("diffusion rates must be >= 0")
    if Dv + Dw <= 0:
        raise ValidationError(
            f"need the two smaller rates to satisfy Dv+Dw > 0, got ({Du}, {Dv}, {Dw})")
    summary = TrimolRateSummary.from_rates(Du, Dv, Dw)
    first = L * L * math.log(L / h) / (2.0 * math.pi * summary.hat_D)
    if boundary is Boundary.REFLECTIVE:
        second = PAIR_REFLECTIVE_COEFF * L * L / (Dv + Dw)
        bracket = _BRACKET_BASE - math.log(REFLECTIVE_LOG_SHIFT + summary.eta_prime / 4.0)
    else:
        second = L * L / (12.0 * (Dv + Dw))
        bracket = _BRACKET_BASE - math.log1p(summary.eta_prime)
    return first + second + L * L / (4.0 * math.pi * summary.hat_D) * bracket


def trimol_reaction(L: float, h: float,
                    rates: DiffusionRates | tuple[float, float, float],
                    scheme: ReactionScheme,
                    boundary: Boundary = Boundary.PERIODIC) -> float:
    """Mean time until the trimolecular channel fires: a reaction-limited
    term plus the collision time.

    The reaction-limited term is L^2/k_1D under ONE_D scaling and
    L^2 h^4/k under MACRO_3D scaling (identical when k_1D = k/h^4).
    """
    if scheme.rate_value <= 0:
        raise ValidationError(f"reaction rate must be positive, got {scheme.rate_value}")
    tau_coll = trimol_collision(L, h, rates, boundary)
    if math.isinf(scheme.rate_value):
        return tau_coll
    if scheme.scaling is RateScaling.MACRO_3D:
        reaction_term = L * L * h**4 / scheme.rate_value
    else:
        reaction_term = L * L / scheme.rate_value
    return reaction_term + tau_coll


def bimol_1d_limit(L: float, Dv: float, Dw: float,
                   boundary: Boundary = Boundary.PERIODIC) -> float:
    """Mean collision time of two molecules on a 1D interval, i.e. the
    infinitely-fast-third-molecule limit of trimol_collision.  Independent
    of h: L^2/(12(Dv+Dw)) periodic, 0.140 L^2/(Dv+Dw) reflective."""
    if min(Dv, Dw) < 0 or Dv + Dw <= 0:
        raise ValidationError(f"need Dv, Dw >= 0 with Dv+Dw > 0, got ({Dv}, {Dw})")
    if boundary is Boundary.REFLECTIVE:
        return PAIR_REFLECTIVE_COEFF * L * L / (Dv + Dw)
    return L * L / (12.0 * (Dv + Dw))


# ---------------------------------------------------------------------------
# generating-function coefficients of the anisotropic lattice walk
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MontrollCoefficients:
    """Expansion coefficients of the expected step count to the origin for a
    2D lattice walk with axis steps (weights sigma1^2, sigma2^2) and one
    diagonal step pair (weight sigma3^2).

    The weights are the diffusion rates normalized to sum to one and sorted
    descending.  <n> ~ c1 N log N + c2 N + c3 for N sites.
    """

    sigma1_sq: float
    sigma2_sq: float
    sigma3_sq: float
    eta: float
    r: float
    hat_sigma: float
    c1: float
    c2: float
    c3: float

    @property
    def step_probabilities(self) -> tuple[float, float, float]:
        """(axis-x, axis-y, diagonal) single-step weights; each is split
        evenly between its +/- directions."""
        return (self.sigma1_sq, self.sigma2_sq, self.sigma3_sq)


def montroll_coefficients(Du: float, Dv: float, Dw: float) -> MontrollCoefficients:
    """Walk coefficients for normalized direction weights D_i/(Du+Dv+Dw),
    canonically sorted so sigma1 >= sigma2 >= sigma3.

    Requires at least two positive rates; with a single mover the control
    ratio r and the coefficients are undefined (the neglected remainder of
    the expansion blows up).
    """
    Du, Dv, Dw = sorted((float(Du), float(Dv), float(Dw)), reverse=True)
    if Dw < 0:
        raise ValidationError("diffusion rates must be >= 0")
    total = Du + Dv + Dw
    if total <= 0:
        raise ValidationError("diffusion rates are all zero")
    s1, s2, s3 = Du / total, Dv / total, Dw / total
    hat_sq = s1 * s2 + s1 * s3 + s2 * s3
    if hat_sq <= 0:
        raise ValidationError(
            f"at least two diffusion rates must be positive, got ({Du}, {Dv}, {Dw})")
    hat_sigma = math.sqrt(hat_sq)
    eta = s1 * s1 / hat_sq
    r = hat_sigma / (1.0 - s1)
    c1 = 1.0 / (2.0 * math.pi * hat_sigma)
    c2 = 1.0 / (6.0 * (1.0 - s1)) + c1 * (_BRACKET_BASE - math.log1p(eta))
    c3 = math.pi / (24.0 * hat_sigma) * (eta - 1.0 / 3.0)
    return MontrollCoefficients(
        sigma1_sq=s1, sigma2_sq=s2, sigma3_sq=s3,
        eta=eta, r=r, hat_sigma=hat_sigma, c1=c1, c2=c2, c3=c3)


def mean_steps_to_origin(n_sites: float, coeffs: MontrollCoefficients) -> float:
    """Expected steps to first reach the origin from a uniform start on a
    periodic 2D lattice of N sites: c1 N log N + c2 N + c3."""
    n = float(n_sites)
    return coeffs.c1 * n * math.log(n) + coeffs.c2 * n + coeffs.c3


def collision_from_steps(steps: float, h: float, rate_sum: float) -> float:
    """Convert an expected step count of the reduced 2D walk into physical
    time: steps * h^2 / (2 * rate_sum), where rate_sum is the summed
    diffusion constant of all moving molecules (each contributing two jump
    directions of rate D/h^2)."""
    if h <= 0 or rate_sum <= 0:
        raise ValidationError(f"need h > 0 and rate_sum > 0, got h={h}, rate_sum={rate_sum}")
    return steps * h * h / (2.0 * rate_sum)


# ---------------------------------------------------------------------------
# continuum first-exit times from a square with absorbing edges
# ---------------------------------------------------------------------------

def _sinh_ratio(a: float, b: float) -> float:
    """sinh(a)/sinh(b) for 0 <= a <= b, computed as an exp-difference ratio;
    naive sinh overflows once the argument passes ~710."""
    return (math.exp(a - b) - math.exp(-a - b)) / (1.0 - math.exp(-2.0 * b))


def exit_time_point(x: float, y: float, L: float, D: float,
                    tol: float = 1e-10) -> float:
    """Mean first exit time of a rate-D Brownian particle from the square
    (0,L)^2 with absorbing edges, started at (x, y).

    Evaluated from the odd-k sine/sinh eigenfunction series, truncated when a
    term moves the partial sum by less than tol in relative terms.
    """
    if D <= 0:
        raise ValidationError(f"diffusion rate must be positive, got {D}")
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    if not (0 <= x <= L and 0 <= y <= L):
        raise ValidationError(f"point ({x}, {y}) outside [0, {L}]^2")
    if x in (0.0, L) or y in (0.0, L):
        return 0.0
    parabola = x * (L - x) / (2.0 * D)
    prefactor = 4.0 * L * L / (D * math.pi**3)
    total = 0.0
    small_streak = 0
    for k in range(1, SERIES_MAX_K + 1, 2):
        kp = k * math.pi
        term = (math.sin(kp * x / L) / k**3
                * (_sinh_ratio(kp * y / L, kp) + _sinh_ratio(kp * (L - y) / L, kp)))
        total += term
        # interior points: the sinh ratios decay geometrically in k; a single
        # small term is not enough because sin(k pi x / L) has incidental
        # zeros at rational x, so demand two consecutive sub-tolerance terms
        if abs(term) < tol * max(abs(total), 1e-300):
            small_streak += 1
            if small_streak >= 2:
                return parabola - prefactor * total
        else:
            small_streak = 0
    raise SeriesConvergenceError(
        f"exit-time series did not converge within k <= {SERIES_MAX_K}")


def mean_exit_time_square(L: float, D: float, tol: float = 1e-12) -> float:
    """Mean first exit time from the absorbing square, averaged over a
    uniform start: L^2/(12 D) - (16 L^2/D) * sum over odd k of
    tanh(k pi / 2)/(pi^5 k^5); approximately 0.0351 L^2/D."""
    if L <= 0:
        raise ValidationError(f"domain length must be positive, got {L}")
    if D <= 0:
        raise ValidationError(f"diffusion rate must be positive, got {D}")
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    pi5 = math.pi**5
    total = 0.0
    for k in range(1, SERIES_MAX_K + 1, 2):
        # (cosh(k pi) - 1)/sinh(k pi) == tanh(k pi / 2), overflow-free
        term = math.tanh(k * math.pi / 2.0) / (pi5 * k**5)
        total += term
        if term < tol * total:
            return L * L / (12.0 * D) - 16.0 * L * L / D * total
    raise SeriesConvergenceError(
        f"mean-exit-time series did not converge within k <= {SERIES_MAX_K}")


def encounter_time_1d_equal_rates(L_theta: float, D: float) -> float:
    """Mean first encounter time of two rate-D molecules on a reflective
    interval of length L_theta.

    The two-molecule configuration diffuses in a triangle that unfolds into
    an absorbing square of side sqrt(2)*L_theta, so this is the uniform-start
    exit time of that square: ~0.0702 L_theta^2/D.
    """
    if L_theta < 0:
        raise ValidationError(f"interval length must be >= 0, got {L_theta}")
    if L_theta == 0:
        if D <= 0:
            raise ValidationError(f"diffusion rate must be positive, got {D}")
        return 0.0
    return mean_exit_time_square(math.sqrt(2.0) * L_theta, D)
