"""Poisson sampling, tilted measures, and config serialization."""

import math

import numpy as np
import pytest

from fklab.model import ModelParams
from fklab.points import (
    Box,
    DiscreteMeasure,
    HomogeneousIntensity,
    PointConfig,
    TiltedIntensity,
    dump_config,
    load_config,
    parse_config,
    sample_homogeneous,
    sample_tilted,
    save_config,
    stream,
    tilt_acceptance,
    tilt_log_weight,
)


def test_box_basics():
    b = Box.cube(2, 3.0)
    assert b.volume == pytest.approx(36.0)
    assert b.contains(np.array([[0.0, 0.0], [2.9, -2.9], [3.1, 0.0]])).tolist() == [
        True, True, False]
    shifted = b.shifted(np.array([1.0, 0.0]))
    assert shifted.contains(np.array([[3.5, 0.0]]))[0]
    with pytest.raises(ValueError):
        Box(center=(0.0,), half_widths=(-1.0,))


def test_stream_is_deterministic_and_path_sensitive():
    a = stream(42, 1, 2).standard_normal(5)
    b = stream(42, 1, 2).standard_normal(5)
    c = stream(42, 1, 3).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_homogeneous_counts_match_poisson_mean():
    box = Box.cube(1, 50.0)
    counts = [sample_homogeneous(box, 1.0, seed=100, path=(i,)).n
              for i in range(400)]
    mean = np.mean(counts)
    # Poisson(100): SE of the mean over 400 draws is 0.5
    assert abs(mean - box.volume) < 3.0 * math.sqrt(box.volume / 400.0)
    var = np.var(counts, ddof=1)
    assert 0.7 * box.volume < var < 1.3 * box.volume


def test_homogeneous_spatial_uniformity():
    box = Box.cube(1, 20.0)
    cfg = sample_homogeneous(box, 5.0, seed=7)
    pts = cfg.points[:, 0]
    left = np.sum(pts < 0.0)
    # binomial(n, 1/2) three-sigma band
    n = pts.size
    assert abs(left - n / 2) < 3.0 * math.sqrt(n / 4.0)


def test_tilt_weight_matches_shape():
    params = ModelParams(d=1, alpha=2.0, t=2.0)
    mu = DiscreteMeasure.delta(np.zeros(1))
    # candidate point inside the cap: acceptance e^{-t}
    assert tilt_log_weight(np.array([0.3]), mu, params)[0] == pytest.approx(-2.0)
    # at distance 2 the shape is 1/4: acceptance e^{-t/4}
    assert tilt_log_weight(np.array([2.0]), mu, params)[0] == pytest.approx(-0.5)
    # two-atom measure averages the shape over atoms
    mu2 = DiscreteMeasure(atoms=np.array([[0.0], [2.0]]),
                          weights=np.array([0.5, 0.5]))
    want = -2.0 * (0.5 * 1.0 + 0.5 * 0.25)
    assert tilt_log_weight(np.array([2.0]), mu2, params)[0] == pytest.approx(want)


def test_tilted_at_t_zero_equals_homogeneous():
    box = Box.cube(1, 8.0)
    params = ModelParams(d=1, alpha=2.0, t=1.0)
    mu = DiscreteMeasure.delta(np.zeros(1))
    plain = sample_homogeneous(box, 1.0, seed=11)
    tilted = sample_tilted(mu, params, box, seed=11, t=0.0)
    np.testing.assert_array_equal(plain.points, tilted.points)


def test_tilted_thinning_matches_density():
    # on a box where vhat == 1 everywhere, the tilted process is homogeneous
    # with rate exp(-t); check the count mean against that analytic value
    box = Box.cube(1, 1.0)
    params = ModelParams(d=1, alpha=2.0, t=1.5)
    mu = DiscreteMeasure.delta(np.zeros(1))
    counts = [sample_tilted(mu, params, box, seed=5, path=(i,)).n
              for i in range(2000)]
    mean = np.mean(counts)
    lam = math.exp(-1.5) * box.volume
    assert abs(mean - lam) < 3.0 * math.sqrt(lam / 2000.0)


def test_tilt_acceptance_bounds():
    params = ModelParams(d=1, alpha=2.0, t=3.0)
    mu = DiscreteMeasure.delta(np.zeros(1))
    x = np.array([[0.0], [2.0], [3.9]])
    acc = tilt_acceptance(x, mu, params)
    assert np.all(acc > 0.0) and np.all(acc <= 1.0)
    assert acc[0] == pytest.approx(math.exp(-3.0))
    assert acc[1] == pytest.approx(math.exp(-0.75))


def test_measure_invariants():
    atoms = np.array([[1.0], [3.0]])
    mu = DiscreteMeasure(atoms=atoms, weights=np.array([0.25, 0.75]))
    assert mu.barycenter[0] == pytest.approx(2.5)
    # centered second moment: 0.25*(1.5)^2 + 0.75*(0.5)^2
    assert mu.second_moment == pytest.approx(0.75)
    shifted = mu.translated(np.array([-2.5]))
    assert shifted.barycenter[0] == pytest.approx(0.0)
    assert shifted.second_moment == pytest.approx(mu.second_moment)
    with pytest.raises(ValueError):
        DiscreteMeasure(atoms=atoms, weights=np.array([0.5, 0.6]))


def test_gauss_hermite_measure_moments():
    mu = DiscreteMeasure.gauss_hermite(16, std=0.7, center=1.2)
    assert mu.barycenter[0] == pytest.approx(1.2, abs=1e-12)
    assert mu.second_moment == pytest.approx(0.49, rel=1e-10)


def test_config_round_trip(tmp_path):
    box = Box.cube(2, 6.0)
    cfg = sample_homogeneous(box, 0.5, seed=3)
    text = dump_config(cfg)
    back = parse_config(text)
    np.testing.assert_array_equal(cfg.points, back.points)
    assert back.box.center == cfg.box.center
    assert back.box.half_widths == cfg.box.half_widths
    path = tmp_path / "cfg.txt"
    save_config(cfg, path)
    again = load_config(path)
    np.testing.assert_array_equal(cfg.points, again.points)


def test_tilted_config_round_trip(tmp_path):
    box = Box.cube(1, 4.0)
    params = ModelParams(d=1, alpha=2.0, t=2.0)
    mu = DiscreteMeasure(atoms=np.array([[-1.0], [1.0]]),
                         weights=np.array([0.5, 0.5]))
    cfg = sample_tilted(mu, params, box, seed=9)
    back = parse_config(dump_config(cfg))
    np.testing.assert_array_equal(cfg.points, back.points)
    assert isinstance(back.intensity, TiltedIntensity)
    assert back.intensity.t == pytest.approx(2.0)
    np.testing.assert_allclose(back.intensity.mu.atoms, mu.atoms)


def test_parse_rejects_malformed():
    with pytest.raises(ValueError):
        parse_config("not a config\n")


def test_config_rejects_dimension_mismatch():
    box = Box.cube(2, 1.0)
    with pytest.raises(ValueError):
        PointConfig(np.array([[0.0]]), box, HomogeneousIntensity(1.0))
