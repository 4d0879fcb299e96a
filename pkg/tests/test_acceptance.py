"""Acceptance suite: one test per numbered criterion, each printing a
PASS/FAIL line (run with -s to see them inline).

Criterion 8's first clause is expected to fail: the reflective two-walker
constant 1.4053 built into the pair formula is not reproduced by direct
simulation of that model (measured constant ~0.26; the exact solver, the
Monte Carlo sampler, dense brute-force solves, and a hand-solved K=2 case
all agree on the smaller value, while the periodic constant matches to
<0.3%).  The check runs faithfully and reports the measured value.
"""
import math

import pytest

from voxfpt.experiments import (SamplerSpec, estimate, fit_intercept)
from voxfpt.formulas import (bimol_collision_2d, collision_from_steps,
                             mean_exit_time_square, encounter_time_1d_equal_rates,
                             montroll_coefficients, nsteps_2d,
                             trimol_collision)
from voxfpt.model import (Boundary, DiffusionRates, Dimension, DomainSpec,
                          RateScaling, ReactionScheme, Variant)
from voxfpt.oracle import (InitMode, expected_steps_discrete_2d,
                           mean_reaction_time_3walkers_1d,
                           mfpt_collision_2walkers,
                           mfpt_collision_3walkers_1d,
                           mfpt_pseudo_walker_trimol)
from voxfpt.ssa import SamplerModel

PER = Boundary.PERIODIC
REF = Boundary.REFLECTIVE
SEED = 20240601
ACCEPTANCE_TRIALS = 100_000

SET_A = (0.1, 0.1, 0.1)
SET_B = (0.5, 0.2, 0.1)
SET_C = (2.5, 0.5, 0.1)


def chain(K, bc, L=1.0):
    return DomainSpec(L=L, K=K, dimension=Dimension.CHAIN_1D, boundary=bc)


def square(K, bc, L=1.0):
    return DomainSpec(L=L, K=K, dimension=Dimension.SQUARE_2D, boundary=bc)


def scheme_1d(k):
    return ReactionScheme(Variant.U_PLUS_V_PLUS_W, k, RateScaling.ONE_D)


def report(number, ok, detail):
    print(f"\nACCEPTANCE criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_1_formula_fixtures():
    checks = [
        (bimol_collision_2d(1, 0.01, 1, 1, PER), 0.390840),
        (bimol_collision_2d(1, 0.01, 1, 1, REF), 1.069100),
        (trimol_collision(1, 0.05, SET_B, PER), 1.30808),
        (trimol_collision(1, 0.05, SET_B, REF), 1.80817),
    ]
    devs = [abs(got - want) / want for got, want in checks]
    ok = all(d <= 1e-4 for d in devs)
    report(1, ok, f"four formula fixtures, worst relative deviation {max(devs):.2e} (tol 1e-4)")
    assert ok


def test_criterion_2_step_count_identity():
    import random
    rng = random.Random(SEED)
    worst = 0.0
    for _ in range(20):
        rates = sorted((rng.uniform(0.05, 4.0) for _ in range(3)), reverse=True)
        L = rng.uniform(0.5, 2.0)
        K = rng.choice([8, 16, 20, 32, 64, 128])
        h = L / K
        co = montroll_coefficients(*rates)
        n_sites = (L / h) ** 2
        extensive = co.c1 * n_sites * math.log(n_sites) + co.c2 * n_sites
        rebuilt = collision_from_steps(extensive, h, sum(rates))
        direct = trimol_collision(L, h, tuple(rates), PER)
        worst = max(worst, abs(rebuilt - direct) / direct)
    ok = worst <= 1e-12
    report(2, ok, f"step-count assembly vs closed form over 20 random sets, "
                  f"worst relative deviation {worst:.2e} (tol 1e-12)")
    assert ok


def test_criterion_3_exit_time_series():
    mean_exit = mean_exit_time_square(1.0, 1.0)
    encounter = encounter_time_1d_equal_rates(1.0, 1.0)
    ok_mean = abs(mean_exit - 0.03515) <= 5e-4
    ok_enc = abs(encounter - 0.0702) <= 1e-3
    ok = ok_mean and ok_enc
    report(3, ok, f"mean exit {mean_exit:.6f} (0.03515 +- 5e-4), "
                  f"encounter coefficient {encounter:.6f} (0.0702 +- 1e-3)")
    assert ok


def test_criterion_4_uniform_walk_step_counts():
    one_apart_dev = 0.0
    for K in (8, 16, 32):
        got = expected_steps_discrete_2d(K, (0.5, 0.5, 0.0), start=(1, 0)).expected_steps
        one_apart_dev = max(one_apart_dev, abs(got - (K * K - 1)) / (K * K - 1))
    uniform = expected_steps_discrete_2d(
        32, (0.5, 0.5, 0.0), init_mode=InitMode.UNIFORM_NON_TARGET).expected_steps
    asymptotic = nsteps_2d(1024)
    uniform_dev = abs(uniform - asymptotic) / asymptotic
    ok = one_apart_dev <= 1e-6 and uniform_dev <= 0.01
    report(4, ok, f"one-apart worst dev {one_apart_dev:.2e} (tol 1e-6); "
                  f"uniform start at N=1024 dev {uniform_dev:.4%} (tol 1%)")
    assert ok


def test_criterion_5_difference_walker_exactness():
    worst = 0.0
    for rates in (SET_A, SET_B, SET_C):
        r = DiffusionRates(*rates)
        for K in (4, 8, 16, 20):
            d = chain(K, PER)
            full = mfpt_collision_3walkers_1d(d, r).expected_time
            reduced = mfpt_pseudo_walker_trimol(d, r).expected_time
            worst = max(worst, abs(reduced - full) / full)
    ok = worst <= 1e-8
    report(5, ok, f"difference-walker vs three-walker solve over 12 cases, "
                  f"worst relative deviation {worst:.2e} (tol 1e-8)")
    assert ok


def test_criterion_6_mc_oracle_triangulation():
    r = DiffusionRates(*SET_B)
    rows = []
    worst_z = 0.0
    for bc in (PER, REF):
        d = chain(20, bc)
        exact = mfpt_collision_3walkers_1d(d, r).expected_time
        got = estimate(SamplerSpec(SamplerModel.COLLISION_3W_1D, d, r),
                       ACCEPTANCE_TRIALS, SEED, n_workers=2)
        z = abs(got.mean - exact) / got.std_error
        rows.append(f"coll/{bc.value}: z={z:.2f}")
        worst_z = max(worst_z, z)
        for k1d in (1.0, 5.0, 25.0):
            exact = mean_reaction_time_3walkers_1d(d, r, scheme_1d(k1d)).expected_time
            got = estimate(
                SamplerSpec(SamplerModel.REACTION_3W_1D, d, r, scheme_1d(k1d)),
                ACCEPTANCE_TRIALS, SEED, n_workers=2)
            z = abs(got.mean - exact) / got.std_error
            rows.append(f"rxn/{bc.value}/k={k1d:g}: z={z:.2f}")
            worst_z = max(worst_z, z)
    ok = worst_z <= 3.0
    report(6, ok, f"8 estimates at 10^5 trials, worst |z| = {worst_z:.2f} "
                  f"(limit 3); {'; '.join(rows)}")
    assert ok


def test_criterion_7_formula_validation():
    details = []
    ok = True
    for rates in (SET_A, SET_B):
        r = DiffusionRates(*rates)
        for K, tol in ((20, 0.10), (64, 0.05)):
            d = chain(K, PER)
            exact = mfpt_collision_3walkers_1d(d, r).expected_time
            formula = trimol_collision(1.0, d.h, rates, PER)
            dev = abs(formula - exact) / exact
            ok &= dev <= tol
            details.append(f"per/K={K}/{rates[0]:g}: {dev:.2%}<= {tol:.0%}")
    r = DiffusionRates(*SET_B)
    reflective_devs = {}
    for K in (20, 32, 64, 100):
        d = chain(K, REF)
        got = estimate(SamplerSpec(SamplerModel.COLLISION_3W_1D, d, r),
                       10_000, SEED, n_workers=2)
        formula = trimol_collision(1.0, d.h, SET_B, REF)
        dev = abs(formula - got.mean) / got.mean
        reflective_devs[K] = dev
        ok &= dev <= 0.10
        details.append(f"refl/K={K}: {dev:.2%}<=10%")
    # agreement must not degrade as the lattice refines (2% statistical slack)
    non_degrading = reflective_devs[100] <= reflective_devs[20] + 0.02
    ok &= non_degrading
    report(7, ok, "; ".join(details) + f"; non-degrading={non_degrading}")
    assert ok


def test_criterion_8_reflective_pair_constant_2d():
    # EXPECTED RED: simulating the stated model (two walkers, reflective
    # square, uniform starts, null-event walls) yields a fitted constant
    # near 0.25, far from the built-in 1.4053.  The periodic companion
    # fit recovering 0.04878 passes, isolating the reflective constant.
    L = 1.0
    fitted = {}
    for Du, Dv in ((1.0, 1.0), (2.0, 1.0), (1.0, 3.0)):
        points = []
        for K in (16, 32, 64, 100):
            d = square(K, REF, L)
            got = estimate(
                SamplerSpec(SamplerModel.COLLISION_2W_2D, d, DiffusionRates(Du, Dv)),
                10_000, SEED, n_workers=2)
            points.append((d.h, got.mean))
        slope = L * L / (2 * math.pi * (Du + Dv))
        fit = fit_intercept(points, L, slope, Du + Dv)
        fitted[(Du, Dv)] = fit.fitted_intercept_coefficient
    ok_2d = all(abs(b - 1.4053) <= 0.1 for b in fitted.values())
    summary = ", ".join(f"({Du:g},{Dv:g})->b={b:.4f}" for (Du, Dv), b in fitted.items())
    report("8a", ok_2d, f"reflective 2D pair fit {summary} (want 1.4053 +- 0.1; "
                        "known-unattainable for the simulated model, measured ~0.26)")
    assert ok_2d


def test_criterion_8_reflective_pair_constant_1d():
    d = chain(64, REF, L=0.1)
    got = mfpt_collision_2walkers(d, 0.5, 0.5).expected_time
    coefficient = got * (0.5 + 0.5) / d.L**2
    ok = abs(coefficient - 0.140) <= 0.02 * 0.140
    report("8b", ok, f"1D pair coefficient {coefficient:.5f} (0.140 +- 2%)")
    assert ok


def test_criterion_9_divergence_with_refinement():
    r = DiffusionRates(*SET_B)
    ok = True
    details = []
    for bc in (PER, REF):
        values = [mfpt_collision_3walkers_1d(chain(K, bc), r).expected_time
                  for K in (8, 16, 32, 64)]
        increasing = all(a < b for a, b in zip(values, values[1:]))
        ok &= increasing
        details.append(f"{bc.value}: " + " < ".join(f"{v:.4f}" for v in values))
    report(9, ok, "; ".join(details))
    assert ok


def test_criterion_10_reaction_time_decomposition():
    r = DiffusionRates(*SET_B)
    d = chain(20, REF)
    collision = mfpt_collision_3walkers_1d(d, r).expected_time
    ok = True
    details = []
    for k1d in (5.0, 25.0):
        reaction = mean_reaction_time_3walkers_1d(d, r, scheme_1d(k1d)).expected_time
        target = 1.0 / k1d  # L^2/k at L=1
        dev = abs((reaction - collision) - target) / target
        ok &= dev <= 0.10
        details.append(f"k={k1d:g}: diff={reaction - collision:.5f} vs {target:.5f} "
                       f"({dev:.2%} <= 10%)")
    report(10, ok, "; ".join(details))
    assert ok
