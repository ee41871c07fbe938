"""Poisson environments: boxes, discrete measures, samplers, serialization.

Homogeneous configurations are unit-rate Poisson samples on a box.  Tilted
configurations realize the size-biased environment whose intensity is

    exp(-t * int vhat(x - y) mu(dx)) dy

for a finitely supported probability measure mu.  Since the exponent is
nonnegative, the tilted process is an exact thinning of a homogeneous sample:
a candidate point y survives with probability exp(-t * sum_i w_i vhat(x_i - y)).

Randomness comes from counter-based Philox streams keyed by (seed, path...),
so replica r of an experiment always draws from stream (base_seed, r)
regardless of scheduling.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, shape_vhat


def stream(seed: int, *path: int) -> np.random.Generator:
    """Deterministic splittable generator for (seed, path...)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by center and per-axis half widths."""

    center: tuple
    half_widths: tuple

    def __init__(self, center, half_widths):
        center = tuple(float(c) for c in np.atleast_1d(center))
        half_widths = tuple(float(h) for h in np.atleast_1d(half_widths))
        if len(center) != len(half_widths):
            raise ValueError("center and half_widths must have the same length")
        if any(h < 0 or not math.isfinite(h) for h in half_widths):
            raise ValueError(f"half widths must be nonnegative and finite, got {half_widths}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "half_widths", half_widths)

    @classmethod
    def cube(cls, d: int, radius: float, center: float = 0.0) -> "Box":
        return cls((center,) * int(d), (float(radius),) * int(d))

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        v = 1.0
        for h in self.half_widths:
            v *= 2.0 * h
        return v

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c = np.asarray(self.center)
        h = np.asarray(self.half_widths)
        return np.all(np.abs(pts - c) <= h + 1e-12, axis=-1)

    def shifted(self, vec) -> "Box":
        vec = np.atleast_1d(np.asarray(vec, dtype=float))
        return Box(tuple(np.asarray(self.center) + vec), self.half_widths)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure: atoms (n, d), positive weights."""

    atoms: np.ndarray
    weights: np.ndarray

    def __init__(self, atoms, weights):
        atoms = np.atleast_1d(np.asarray(atoms, dtype=float))
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        weights = np.asarray(weights, dtype=float)
        if atoms.shape[0] != weights.shape[0]:
            raise ValueError("atoms and weights must have matching lengths")
        if atoms.shape[0] == 0:
            raise ValueError("measure needs at least one atom")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        s = weights.sum()
        if abs(s - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1 (got {s!r}); normalize explicitly")
        object.__setattr__(self, "atoms", _readonly(atoms))
        object.__setattr__(self, "weights", _readonly(weights / s))

    @classmethod
    def delta(cls, point) -> "DiscreteMeasure":
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        return cls(pt[None, :], np.array([1.0]))

    @classmethod
    def from_unnormalized(cls, atoms, weights) -> "DiscreteMeasure":
        weights = np.asarray(weights, dtype=float)
        return cls(atoms, weights / weights.sum())

    @classmethod
    def gauss_hermite(cls, n: int, std: float, center: float = 0.0) -> "DiscreteMeasure":
        """n-atom Gauss-Hermite discretization of N(center, std^2) on the line.

        Exact for polynomial moments up to degree 2n - 1; in particular the
        second central moment of the returned measure is exactly std^2.
        """
        nodes, w = np.polynomial.hermite.hermgauss(n)
        atoms = center + math.sqrt(2.0) * std * nodes
        return cls(atoms[:, None], w / math.sqrt(math.pi))

    @property
    def d(self) -> int:
        return self.atoms.shape[1]

    @property
    def barycenter(self) -> np.ndarray:
        return self.weights @ self.atoms

    @property
    def second_moment(self) -> float:
        """Centered second moment int |x - m|^2 mu(dx)."""
        delta = self.atoms - self.barycenter
        return float(self.weights @ np.sum(delta * delta, axis=1))

    def translated(self, vec) -> "DiscreteMeasure":
        vec = np.atleast_1d(np.asarray(vec, dtype=float))
        return DiscreteMeasure(self.atoms + vec, self.weights)


@dataclass(frozen=True)
class HomogeneousIntensity:
    rate: float


@dataclass(frozen=True)
class TiltedIntensity:
    mu: DiscreteMeasure
    t: float
    ambient_rate: float = 1.0


@dataclass(frozen=True)
class PointConfig:
    """A sampled point configuration together with its sampling metadata."""

    points: np.ndarray
    box: Box
    intensity: object
    seed: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.size and pts.shape[1] != self.box.d:
            raise ValueError("point dimension does not match box dimension")
        if pts.size == 0:
            pts = pts.reshape(0, self.box.d)
        object.__setattr__(self, "points", _readonly(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.box.d


def sample_homogeneous(box: Box, rate: float, seed: int, *, path=()) -> PointConfig:
    """Poisson(rate * volume) points placed uniformly in the box."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if box.volume <= 0:
        raise ValueError("degenerate box: zero volume")
    rng = stream(seed, *path)
    n = rng.poisson(rate * box.volume)
    u = rng.uniform(-1.0, 1.0, size=(n, box.d))
    pts = np.asarray(box.center) + u * np.asarray(box.half_widths)
    return PointConfig(pts, box, HomogeneousIntensity(rate), seed)


def tilt_log_weight(y, mu: DiscreteMeasure, params: ModelParams, t: float | None = None):
    """log of the thinning acceptance: -t * sum_i w_i vhat(x_i - y).

    y is a point (d,) or batch (m, d); returns scalar or (m,).
    """
    if t is None:
        t = params.t
    y = np.asarray(y, dtype=float)
    single = y.ndim == 0 or (y.ndim == 1 and mu.d > 1)
    if y.ndim == 0:
        y2 = y.reshape(1, 1)
    elif y.ndim == 1:
        y2 = y[None, :] if mu.d > 1 else y[:, None]
    else:
        y2 = y
    # pairwise atoms (n, d) against points (m, d)
    diff = mu.atoms[None, :, :] - y2[:, None, :]
    phi = shape_vhat(diff, params) @ mu.weights
    out = -t * phi
    return float(out[0]) if single else out


def tilt_acceptance(y, mu: DiscreteMeasure, params: ModelParams, t: float | None = None):
    """Thinning acceptance probability exp(-t * int vhat(x - y) mu(dx)) in [0, 1]."""
    return np.exp(tilt_log_weight(y, mu, params, t))


def sample_tilted(mu: DiscreteMeasure, params: ModelParams, box: Box, seed: int,
                  t: float | None = None, *, path=()) -> PointConfig:
    """Exact sample of the tilted Poisson process by thinning a unit-rate sample.

    With t = 0 the acceptance is identically 1 and the returned points equal
    the homogeneous sample drawn from the same stream.
    """
    if t is None:
        t = params.t
    if mu.d != box.d:
        raise ValueError("measure dimension does not match box dimension")
    base = sample_homogeneous(box, 1.0, seed, path=path)
    rng = stream(seed, *path, 1)
    u = rng.random(base.n)
    if base.n:
        keep = u < tilt_acceptance(base.points, mu, params, t)
        pts = base.points[keep]
    else:
        pts = base.points
    return PointConfig(pts, box, TiltedIntensity(mu, t), seed)


# ---------------------------------------------------------------------------
# line-oriented text serialization

_FMT = "%.17g"


def dump_config(config: PointConfig) -> str:
    out = io.StringIO()
    out.write("# fklab-points 1\n")
    out.write("# seed %s\n" % ("none" if config.seed is None else int(config.seed)))
    out.write("# box %s | %s\n" % (
        " ".join(_FMT % c for c in config.box.center),
        " ".join(_FMT % h for h in config.box.half_widths)))
    gen = config.intensity
    if isinstance(gen, HomogeneousIntensity):
        out.write("# intensity homogeneous %s\n" % (_FMT % gen.rate))
    elif isinstance(gen, TiltedIntensity):
        out.write("# intensity tilted t=%s ambient=%s atoms=%d\n"
                  % (_FMT % gen.t, _FMT % gen.ambient_rate, gen.mu.atoms.shape[0]))
        for w, atom in zip(gen.mu.weights, gen.mu.atoms):
            out.write("# atom %s %s\n" % (_FMT % w, " ".join(_FMT % a for a in atom)))
    else:
        raise ValueError(f"unknown intensity {gen!r}")
    out.write("%d\n" % config.n)
    for p in config.points:
        out.write(" ".join(_FMT % x for x in p) + "\n")
    return out.getvalue()


def save_config(config: PointConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(dump_config(config))


def parse_config(text: str) -> PointConfig:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "# fklab-points 1":
        raise ValueError("not a points file (missing header)")
    seed = None
    box = None
    intensity = None
    atoms, weights, n_atoms = [], [], 0
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        parts = lines[i][1:].split()
        if parts[0] == "seed":
            seed = None if parts[1] == "none" else int(parts[1])
        elif parts[0] == "box":
            bar = parts.index("|")
            center = [float(x) for x in parts[1:bar]]
            hw = [float(x) for x in parts[bar + 1:]]
            box = Box(center, hw)
        elif parts[0] == "intensity":
            if parts[1] == "homogeneous":
                intensity = HomogeneousIntensity(float(parts[2]))
            elif parts[1] == "tilted":
                kv = dict(p.split("=") for p in parts[2:])
                n_atoms = int(kv["atoms"])
                intensity = ("tilted", float(kv["t"]), float(kv["ambient"]))
            else:
                raise ValueError(f"unknown intensity kind {parts[1]!r}")
        elif parts[0] == "atom":
            weights.append(float(parts[1]))
            atoms.append([float(x) for x in parts[2:]])
        else:
            raise ValueError(f"unknown header line {lines[i]!r}")
        i += 1
    if box is None or intensity is None:
        raise ValueError("missing box or intensity header")
    if isinstance(intensity, tuple):
        if len(atoms) != n_atoms:
            raise ValueError("atom count mismatch")
        mu = DiscreteMeasure(np.array(atoms), np.array(weights))
        intensity = TiltedIntensity(mu, intensity[1], intensity[2])
    n = int(lines[i])
    pts = []
    for row in lines[i + 1:i + 1 + n]:
        pts.append([float(x) for x in row.split()])
    if len(pts) != n:
        raise ValueError(f"expected {n} points, found {len(pts)}")
    arr = np.array(pts, dtype=float) if pts else np.empty((0, box.d))
    return PointConfig(arr, box, intensity, seed)


def load_config(path) -> PointConfig:
    with open(path) as fh:
        return parse_config(fh.read())
