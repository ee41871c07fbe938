"""Feynman-Kac evolution: heat kernel, splitting order, partition functions."""

import math

import numpy as np
import pytest
from scipy import integrate

from fklab.model import ModelParams, constants, nu_coordinate_variance
from fklab.points import Box, HomogeneousIntensity, PointConfig, sample_homogeneous
from fklab.semigroup import (
    AnnealedEstimate,
    EvolutionSpec,
    GroundstateReport,
    annealed_partition,
    brownian_partition_mc,
    confinement_prob,
    default_box_radius,
    delta_field,
    fk_evolve,
    groundstate_transform_check,
    jackknife_mean,
    jackknife_ratio,
    make_grid,
    occupation_evolve,
    ones_field,
    oscillator_ground_state,
    ou_transition_density,
    pairwise_sum,
    quenched_partition,
    time_marginal,
)
from fklab.spectral import Grid, GridField, assemble, config_potential_field, smallest_eigs
from fklab.laplace import strategy_log_lower_bound

P12 = ModelParams(d=1, alpha=2.0, t=1.0)


def grid_1d(half, h):
    return Grid(Box.cube(1, half), h)


def test_heat_kernel_matches_gaussian():
    g = grid_1d(6.0, 0.01)
    V = GridField(g, np.zeros(g.shape))
    spec = EvolutionSpec(dt=1e-3)
    t = 0.25
    u = fk_evolve(V, spec, t)
    x = g.axis_nodes(0)
    gauss = np.exp(-x ** 2 / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    assert float(np.max(np.abs(u.values - gauss))) < 1e-4
    assert u.mass() == pytest.approx(1.0, abs=1e-8)


def test_constant_potential_factorizes():
    g = grid_1d(4.0, 0.02)
    spec = EvolutionSpec(dt=1e-3)
    t = 0.5
    free = fk_evolve(GridField(g, np.zeros(g.shape)), spec, t)
    c = 1.7
    killed = fk_evolve(GridField(g, np.full(g.shape, c)), spec, t)
    np.testing.assert_allclose(killed.values, math.exp(-c * t) * free.values,
                               rtol=1e-12, atol=1e-14)


def test_zero_time_returns_initial():
    g = grid_1d(2.0, 0.1)
    V = GridField(g, np.zeros(g.shape))
    init = delta_field(g, 0.3)
    out = fk_evolve(V, EvolutionSpec(dt=0.01), 0.0, initial=init)
    np.testing.assert_array_equal(out.values, init.values)


def test_strang_splitting_is_second_order():
    g = grid_1d(4.0, 0.02)
    x = g.axis_nodes(0)
    V = GridField(g, x ** 2)
    t = 0.5

    def mass_at(dt):
        return fk_evolve(V, EvolutionSpec(dt=dt), t).mass()

    ref = mass_at(1.0 / 2048.0)
    e1 = abs(mass_at(1.0 / 32.0) - ref)
    e2 = abs(mass_at(1.0 / 64.0) - ref)
    assert 3.0 < e1 / e2 < 5.0


def test_first_order_splitting_available():
    g = grid_1d(4.0, 0.05)
    x = g.axis_nodes(0)
    V = GridField(g, x ** 2)
    a = fk_evolve(V, EvolutionSpec(dt=1e-3, splitting="first"), 0.25).mass()
    b = fk_evolve(V, EvolutionSpec(dt=1e-3, splitting="strang"), 0.25).mass()
    assert a == pytest.approx(b, rel=1e-3)


def test_implicit_heat_step_matches_spectral():
    g = grid_1d(4.0, 0.02)
    x = g.axis_nodes(0)
    V = GridField(g, np.minimum(np.abs(x - 0.5), 1.0))
    spec_a = EvolutionSpec(dt=2e-4, heat_step="spectral")
    spec_b = EvolutionSpec(dt=2e-4, heat_step="implicit")
    ua = fk_evolve(V, spec_a, 0.2)
    ub = fk_evolve(V, spec_b, 0.2)
    assert float(np.max(np.abs(ua.values - ub.values))) < 1e-3 * float(np.max(ua.values))


def test_positivity_and_mass_decay():
    g = grid_1d(5.0, 0.05)
    cfg = sample_homogeneous(Box.cube(1, 5.0), 1.0, seed=3)
    V = config_potential_field(cfg.points, g, P12)
    spec = EvolutionSpec(dt=1e-3)
    final, snaps = fk_evolve(V, spec, 1.0, snapshot_times=(0.25, 0.5, 0.75))
    peak = float(np.max(final.values))
    assert np.all(final.values >= -1e-12 * peak)
    masses = [snaps[s].mass() for s in (0.25, 0.5, 0.75)] + [final.mass()]
    assert all(b < a for a, b in zip(masses, masses[1:]))


def test_monotone_in_potential():
    g = grid_1d(4.0, 0.05)
    x = g.axis_nodes(0)
    V = GridField(g, np.abs(np.sin(x)))
    W = GridField(g, V.values + 0.3 * np.exp(-x ** 2))
    spec = EvolutionSpec(dt=1e-3)
    uv = fk_evolve(V, spec, 0.5)
    uw = fk_evolve(W, spec, 0.5)
    assert np.all(uv.values >= uw.values - 1e-14)


def test_semigroup_property():
    g = grid_1d(4.0, 0.05)
    cfg = sample_homogeneous(Box.cube(1, 4.0), 1.0, seed=9)
    V = config_potential_field(cfg.points, g, P12)
    spec = EvolutionSpec(dt=1e-3)
    one_shot = fk_evolve(V, spec, 1.5)
    stage1 = fk_evolve(V, spec, 1.0)
    stage2 = fk_evolve(V, spec, 0.5, initial=stage1)
    np.testing.assert_allclose(stage2.values, one_shot.values, rtol=1e-12,
                               atol=1e-300)


def test_mass_decay_rate_approaches_lambda1():
    # -log <T_t 1, 1> / t converges to the ground-state eigenvalue of the
    # same discrete operator; the offset -log <phi1, 1>^2 / t decays like 1/t
    g = grid_1d(6.0, 0.05)
    cfg = sample_homogeneous(Box.cube(1, 6.0), 1.0, seed=17)
    V = config_potential_field(cfg.points, g, P12)
    lam1 = smallest_eigs(assemble(V)).lambda1
    spec = EvolutionSpec(dt=0.01)
    init = ones_field(g)
    _, snaps = fk_evolve(V, spec, 40.0, initial=init,
                         snapshot_times=(10.0, 20.0, 40.0))
    gaps = [abs(-math.log(snaps[t].mass()) / t - lam1) for t in (10.0, 20.0, 40.0)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.08


def test_occupation_constant_f_is_exact():
    g = grid_1d(4.0, 0.05)
    cfg = sample_homogeneous(Box.cube(1, 4.0), 1.0, seed=21)
    V = config_potential_field(cfg.points, g, P12)
    spec = EvolutionSpec(dt=1e-3)
    t = 0.75
    mass, (w1,) = occupation_evolve(V, spec, t, [np.ones(g.shape)])
    assert w1 == pytest.approx(t * mass, rel=1e-12)


def test_occupation_odd_f_vanishes_by_symmetry():
    g = grid_1d(4.0, 0.05)
    x = g.axis_nodes(0)
    V = GridField(g, x ** 2)
    spec = EvolutionSpec(dt=1e-3)
    mass, (wx,) = occupation_evolve(V, spec, 1.0, [x])
    assert abs(wx) < 1e-12 * mass


def test_occupation_second_moment_matches_ou():
    # Brownian path in the quadratic well c x^2 spends its time like the
    # stationary ground-state measure: second moment 1/(2 theta)
    c = constants(P12).C
    g = grid_1d(3.0, 0.02)
    x = g.axis_nodes(0)
    V = GridField(g, c * x ** 2)
    spec = EvolutionSpec(dt=2e-3)
    t = 24.0
    mass, (wx2,) = occupation_evolve(V, spec, t, [x ** 2])
    second = wx2 / (t * mass)
    want = 1.0 / (2.0 * math.sqrt(2.0 * c))
    assert second == pytest.approx(want, rel=1e-3)
    assert want == pytest.approx(nu_coordinate_variance(P12), rel=1e-12)


def test_groundstate_transform_identity():
    rep = groundstate_transform_check(constants(P12).C, 1.0, h=0.01, dt=4e-4)
    assert isinstance(rep, GroundstateReport)
    assert rep.sup_rel_err < 5e-3
    assert rep.mass_rel_err < 1e-4
    assert rep.lambda1 == pytest.approx(constants(P12).a2, rel=1e-12)


def test_ou_transition_density_normalizes():
    x = np.linspace(-5, 5, 4001)
    dens = ou_transition_density(x, 0.7, 0.8, 2.0)
    assert integrate.trapezoid(dens, x) == pytest.approx(1.0, abs=1e-10)
    mean = integrate.trapezoid(x * dens, x)
    assert mean == pytest.approx(0.7 * math.exp(-1.6), abs=1e-9)
    psi = oscillator_ground_state(x, 2.0)
    assert integrate.trapezoid(psi ** 2, x) == pytest.approx(1.0, abs=1e-10)


def test_time_marginal_free_motion():
    g = grid_1d(8.0, 0.02)
    V = GridField(g, np.zeros(g.shape))
    spec = EvolutionSpec(dt=1e-3)
    marg = time_marginal(V, spec, 1.0, [0.5])
    x = g.axis_nodes(0)
    dens = marg[0.5].values
    assert np.sum(dens) * 0.02 == pytest.approx(1.0, rel=1e-10)
    mean = np.sum(x * dens) * 0.02
    var = np.sum(x ** 2 * dens) * 0.02 - mean ** 2
    assert abs(mean) < 1e-8
    assert var == pytest.approx(0.5, rel=1e-3)
    with pytest.raises(ValueError):
        time_marginal(V, spec, 1.0, [1.5])


def test_brownian_mc_agrees_with_grid_evolution():
    pts = np.array([-0.5, 1.0])
    t = 2.0
    R = 5.0
    mc_mean, mc_se = brownian_partition_mc(pts, P12, t, R, n_paths=20000,
                                           seed=33, dt=1e-3)
    g = grid_1d(R, 0.01)
    V = config_potential_field(pts[:, None], g, P12)
    grid_val = fk_evolve(V, EvolutionSpec(dt=2.5e-4), t).mass()
    assert abs(mc_mean - grid_val) < 3.0 * mc_se + 2e-3


def test_quenched_partition_and_far_guard():
    grid = grid_1d(3.0, 0.05)
    box = Box.cube(1, 40.0)
    cfg = sample_homogeneous(box, 1.0, seed=41)
    spec = EvolutionSpec(dt=1e-2)
    z = quenched_partition(cfg, spec, P12, grid, t=2.0)
    assert 0.0 < z < 1.0
    tight = PointConfig(cfg.points, box, HomogeneousIntensity(1.0))
    with pytest.raises(ValueError):
        quenched_partition(tight, spec, P12, grid_1d(39.5, 0.05), t=2.0,
                           far_tol=0.01)


def test_annealed_partition_deterministic_and_above_strategy_bound():
    spec = EvolutionSpec(dt=1e-2)
    t = 2.0
    est1 = annealed_partition(P12, spec, n_samples=12, seed=55, t=t,
                              radius=4.0, h=0.1)
    est2 = annealed_partition(P12, spec, n_samples=12, seed=55, t=t,
                              radius=4.0, h=0.1)
    assert est1.mean == est2.mean and est1.se == est2.se
    assert isinstance(est1, AnnealedEstimate)
    assert est1.mean < 1.0
    bound = max(strategy_log_lower_bound(P12, rho, t=t) for rho in (1.0, 2.0, 3.0))
    assert math.log(est1.ci_high) > bound


def test_confinement_ratio_monotone_in_L():
    spec = EvolutionSpec(dt=1e-2)
    t = 4.0
    r2 = confinement_prob(P12, spec, 2.0, n_samples=6, seed=61, t=t,
                          full_radius=6.0, h=0.1)
    r4 = confinement_prob(P12, spec, 4.0, n_samples=6, seed=61, t=t,
                          full_radius=6.0, h=0.1)
    assert 0.0 < r2.ratio < r4.ratio <= 1.0 + 1e-12
    r6 = confinement_prob(P12, spec, 6.0, n_samples=6, seed=61, t=t,
                          full_radius=6.0, h=0.1)
    assert r6.ratio == pytest.approx(1.0, abs=1e-12)


def test_jackknife_and_pairwise_sum():
    vals = np.array([1.0, 2.0, 3.0, 4.0])
    mean, se = jackknife_mean(vals)
    assert mean == pytest.approx(2.5)
    assert se == pytest.approx(np.std(vals, ddof=1) / 2.0, rel=1e-12)
    num = 2.0 * vals
    ratio, rse = jackknife_ratio(num, vals)
    assert ratio == pytest.approx(2.0, rel=1e-12)
    assert rse == pytest.approx(0.0, abs=1e-12)
    assert pairwise_sum(vals) == 10.0


def test_spec_guards():
    with pytest.raises(ValueError):
        EvolutionSpec(dt=0.0)
    with pytest.raises(ValueError):
        EvolutionSpec(dt=0.01, splitting="bogus")
    with pytest.raises(ValueError):
        EvolutionSpec(dt=0.01, heat_step="bogus")
    spec = EvolutionSpec(dt=0.3)
    with pytest.raises(ValueError):
        spec.n_steps(1.0)  # dt does not divide t
    g = grid_1d(2.0, 0.1)
    V = GridField(g, np.zeros(g.shape))
    with pytest.raises(ValueError):
        fk_evolve(V, EvolutionSpec(dt=0.01), 1.0, snapshot_times=(0.005,))


def test_fields_and_radius_defaults():
    g = grid_1d(2.0, 0.1)
    assert delta_field(g, 0.0).mass() == pytest.approx(1.0)
    assert ones_field(g).mass() == pytest.approx(g.integrate(np.ones(g.shape)))
    radii = [default_box_radius(P12, t) for t in (4.0, 64.0, 1024.0)]
    assert radii[0] < radii[1] < radii[2]
    p2 = ModelParams(d=1, alpha=2.0, t=1024.0)
    assert make_grid(p2, 10.0, 0.25).box.half_widths[0] == pytest.approx(10.0)
