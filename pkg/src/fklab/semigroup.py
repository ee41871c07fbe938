"""Feynman-Kac transfer-operator evolution with Dirichlet killing.

The quenched kernel u_s solves du/ds = 1/2 Lap u - V u, u_0 = initial, with
absorption on the box boundary, so that for a delta initial at 0

    <u_t, 1> = E_0[ exp(-int_0^t V(X_s) ds) : X stays in the box ].

Time stepping is operator splitting: the potential factor exp(-dt V) is exact,
and the heat step is either the exact spectral propagator of the discrete
Dirichlet Laplacian (sine transform; eigenvalues (1 - cos(k pi/(n+1)))/h^2)
or an unconditionally stable Crank-Nicolson / ADI solve.  Strang order gives
O(dt^2) splitting error; with V constant the factorization is exact.

In d = 1 the stepper accepts a stack of fields as columns of an (n, m) array,
evolving m independent problems in one sweep; if V is also (n, m) each column
carries its own potential, which is what the annealed batch drivers use.

Occupation functionals use Duhamel co-evolution: along with u we advance
w <- step(w + dt/2 f u) + dt/2 f u_new, a trapezoid rule for
w_t = int_0^t T_{t-s}(f u_s) ds that is exact for f = 1 (giving <w_t, 1> =
t <u_t, 1>) and O(dt^2) otherwise;  <w_t, 1> = E_0[e^{-int V} int_0^t f(X_s) ds].

The ground-state identity used for validation: for V = c x^2 (d = 1),

    u_T(y) = e^{-lambda1 T} psi(0) q_T(0, y) / psi(y),

with lambda1 = sqrt(c/2), psi the oscillator ground state, and q_T the
transition density of the OU process dY = -theta Y dt + dB, theta = sqrt(2c):
q_T(x, .) = N(x e^{-theta T}, (1 - e^{-2 theta T})/(2 theta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dst, dstn
from scipy.linalg import cho_solve_banded, cholesky_banded

from .model import ModelParams, constants, scale_r
from .points import Box, PointConfig, sample_homogeneous, stream
from .potential import PotentialView, evaluate_V
from .spectral import Grid, GridField, config_potential_field

_DST_KW = dict(type=1)


class FKInstabilityError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionSpec:
    dt: float
    splitting: str = "strang"
    heat_step: str = "spectral"

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if self.splitting not in ("first", "strang"):
            raise ValueError("splitting must be 'first' or 'strang'")
        if self.heat_step not in ("spectral", "implicit"):
            raise ValueError("heat_step must be 'spectral' or 'implicit'")

    def n_steps(self, t: float) -> int:
        n = round(t / self.dt)
        if n < 1 or abs(n * self.dt - t) > 1e-9 * max(t, 1.0):
            raise ValueError(f"dt = {self.dt} does not divide t = {t}")
        return n


def _dirichlet_eigenvalues(n: int, h: float) -> np.ndarray:
    """Eigenvalues of -1/2 * discrete Dirichlet Laplacian on n interior nodes."""
    k = np.arange(1, n + 1)
    return (1.0 - np.cos(k * np.pi / (n + 1))) / h ** 2


class _SpectralHeat1D:
    def __init__(self, n: int, h: float, tau: float):
        self.n = n
        self.mult = np.exp(-tau * _dirichlet_eigenvalues(n, h)) / (2.0 * (n + 1))

    def apply(self, u: np.ndarray) -> np.ndarray:
        coef = dst(u, axis=0, **_DST_KW)
        coef *= self.mult if u.ndim == 1 else self.mult[:, None]
        return dst(coef, axis=0, **_DST_KW)


class _SpectralHeat2D:
    def __init__(self, shape, h: float, tau: float):
        nx, ny = shape
        lx = _dirichlet_eigenvalues(nx, h)
        ly = _dirichlet_eigenvalues(ny, h)
        self.mult = np.exp(-tau * (lx[:, None] + ly[None, :]))
        self.mult /= 4.0 * (nx + 1) * (ny + 1)

    def apply(self, u: np.ndarray) -> np.ndarray:
        coef = dstn(u, axes=(0, 1), **_DST_KW)
        coef *= self.mult
        return dstn(coef, axes=(0, 1), **_DST_KW)


class _CrankNicolson1D:
    """(I + tau/2 K) u' = (I - tau/2 K) u with K = -1/2 discrete Laplacian."""

    def __init__(self, n: int, h: float, tau: float):
        c = tau / (4.0 * h ** 2)
        ab = np.zeros((2, n))
        ab[0, 1:] = -c
        ab[1, :] = 1.0 + 2.0 * c
        self._factor = cholesky_banded(ab, lower=False)
        self._c = c

    def _rhs(self, u):
        out = (1.0 - 2.0 * self._c) * u
        out[1:] += self._c * u[:-1]
        out[:-1] += self._c * u[1:]
        return out

    def apply(self, u: np.ndarray) -> np.ndarray:
        return cho_solve_banded((self._factor, False), self._rhs(u))


class _ADI2D:
    """Peaceman-Rachford alternating-direction step for the 2-d heat flow."""

    def __init__(self, shape, h: float, tau: float):
        self._sx = _CrankNicolson1D(shape[0], h, tau / 2.0)
        self._sy = _CrankNicolson1D(shape[1], h, tau / 2.0)

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = self._sx.apply(u)          # x-implicit sweep, columns together
        u = self._sy.apply(u.T).T      # y-implicit sweep
        return u


def _heat_solver(grid: Grid, tau: float, method: str):
    if grid.d == 1:
        n = grid.shape[0]
        return _SpectralHeat1D(n, grid.h, tau) if method == "spectral" \
            else _CrankNicolson1D(n, grid.h, tau)
    return _SpectralHeat2D(grid.shape, grid.h, tau) if method == "spectral" \
        else _ADI2D(grid.shape, grid.h, tau)


class FKStepper:
    """One-step evolution operator for fixed (grid, V, spec).

    V may be grid-shaped, or (n, m) in d = 1 for m column problems with
    per-column potentials; fields passed to step() must match that shape.
    """

    def __init__(self, grid: Grid, V: np.ndarray, spec: EvolutionSpec):
        self.grid = grid
        self.spec = spec
        V = np.asarray(V, dtype=float)
        if not np.all(np.isfinite(V)):
            raise ValueError("potential must be finite")
        self.V = V
        dt = spec.dt
        if spec.splitting == "strang":
            self._expV_half = np.exp(-0.5 * dt * V)
            self._expV_full = None
        else:
            self._expV_half = None
            self._expV_full = np.exp(-dt * V)
        self._heat = _heat_solver(grid, dt, spec.heat_step)

    def step(self, u: np.ndarray) -> np.ndarray:
        if self.spec.splitting == "strang":
            return self._expV_half * self._heat.apply(self._expV_half * u)
        return self._expV_full * self._heat.apply(u)


def delta_field(grid: Grid, at=0.0) -> GridField:
    """Discrete delta: 1/h^d at the node nearest `at`, zero elsewhere."""
    vals = np.zeros(grid.shape)
    at = np.atleast_1d(np.asarray(at, dtype=float))
    idx = []
    for axis in range(grid.d):
        nodes = grid.axis_nodes(axis)
        idx.append(int(np.argmin(np.abs(nodes - at[axis]))))
    vals[tuple(idx)] = grid.h ** (-grid.d)
    return GridField(grid, vals)


def ones_field(grid: Grid) -> GridField:
    return GridField(grid, np.ones(grid.shape))


def fk_evolve(V: GridField, spec: EvolutionSpec, t: float,
              initial: GridField | None = None,
              snapshot_times=(), check_stability: bool = True):
    """Evolve the killed Feynman-Kac kernel to time t.

    Returns the final GridField, or (final, {time: GridField}) when snapshot
    times are requested.  With V >= 0 the total mass must be nonincreasing;
    growth raises FKInstabilityError.
    """
    grid = V.grid
    if initial is None:
        initial = delta_field(grid)
    if t == 0:
        return (initial, {}) if snapshot_times else initial
    n = spec.n_steps(t)
    snap_steps = {}
    for ts in snapshot_times:
        k = round(ts / spec.dt)
        if abs(k * spec.dt - ts) > 1e-9 * max(t, 1.0) or not (0 < k <= n):
            raise ValueError(f"snapshot time {ts} not on the dt lattice within (0, t]")
        snap_steps[k] = ts
    stepper = FKStepper(grid, V.values, spec)
    u = initial.values.copy()
    monitor = check_stability and float(np.min(V.values)) >= 0.0
    mass = float(np.sum(u))
    snaps = {}
    for k in range(1, n + 1):
        u = stepper.step(u)
        if monitor and k % 16 == 0:
            m_new = float(np.sum(u))
            if m_new > mass * (1.0 + 1e-8) + 1e-300:
                raise FKInstabilityError(
                    f"mass grew from {mass:.6e} to {m_new:.6e} with V >= 0")
            mass = m_new
        if k in snap_steps:
            snaps[snap_steps[k]] = GridField(grid, u.copy())
    final = GridField(grid, u)
    return (final, snaps) if snapshot_times else final


# ---------------------------------------------------------------------------
# quenched and annealed partition functions

def default_box_radius(params: ModelParams, t: float | None = None) -> float:
    """Evolution box radius: the model's macro box (-t, t) capped at the
    localization scale 4 r(t) log t, below which the omitted mass is null."""
    if t is None:
        t = params.t
    r = scale_r(params.with_t(t)) if t > 0 else 1.0
    return float(min(t, max(4.0 * r * math.log(max(t, math.e)), 6.0 * r, 2.0)))


def make_grid(params: ModelParams, radius: float, h: float) -> Grid:
    half = max(round(radius / h), 2) * h
    return Grid(Box.cube(params.d, half), h)


def quenched_partition(config: PointConfig, spec: EvolutionSpec, params: ModelParams,
                       grid: Grid, *, t: float | None = None, far_tol: float = 0.1,
                       compensate: bool = False, initial: GridField | None = None) -> float:
    """<u_t, 1> for V evaluated from the config over the grid box."""
    if t is None:
        t = params.t
    view = PotentialView(config, grid.box, params, compensate=compensate,
                         max_far_bound=far_tol)
    if grid.d == 1:
        pts = grid.nodes()[:, None]
    else:
        pts = grid.nodes().reshape(-1, 2)
    V = GridField(grid, evaluate_V(view, pts).reshape(grid.shape))
    u = fk_evolve(V, spec, t, initial=initial)
    return u.mass()


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic pairwise reduction in index order (numpy's own pairwise
    summation already guarantees this for a fixed 1-d array)."""
    return float(np.sum(np.asarray(values, dtype=float)))


def jackknife_mean(values: np.ndarray):
    """(mean, standard error) by delete-one jackknife."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 2:
        return float(x.mean()), math.inf
    total = pairwise_sum(x)
    loo = (total - x) / (n - 1)
    mean = total / n
    se = math.sqrt((n - 1) / n * pairwise_sum((loo - loo.mean()) ** 2))
    return float(mean), float(se)


def jackknife_ratio(num: np.ndarray, den: np.ndarray):
    """(ratio of sums, standard error) by delete-one jackknife; paired arrays."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n = num.size
    sn, sd = pairwise_sum(num), pairwise_sum(den)
    ratio = sn / sd
    if n < 2:
        return float(ratio), math.inf
    loo = (sn - num) / (sd - den)
    se = math.sqrt((n - 1) / n * pairwise_sum((loo - loo.mean()) ** 2))
    return float(ratio), float(se)


@dataclass(frozen=True)
class AnnealedEstimate:
    mean: float
    se: float
    log_mean: float
    n_samples: int
    t: float

    @property
    def ci_low(self) -> float:
        return self.mean - 1.96 * self.se

    @property
    def ci_high(self) -> float:
        return self.mean + 1.96 * self.se


def annealed_partition(params: ModelParams, spec: EvolutionSpec, n_samples: int,
                       seed: int, *, t: float | None = None, radius: float | None = None,
                       h: float = 0.05, config_margin: float = 30.0,
                       compensate: bool = True) -> AnnealedEstimate:
    """Mean of quenched_partition over i.i.d. configs with jackknife CI.

    Config boxes extend config_margin beyond the grid so the far-field error
    is compensated by its deterministic mean; replicas use disjoint seed
    streams indexed by replica number and are reduced in index order.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if t is None:
        t = params.t
    if radius is None:
        radius = default_box_radius(params, t)
    grid = make_grid(params, radius, h)
    cfg_box = Box.cube(params.d, grid.box.half_widths[0] + config_margin)
    masses = np.empty(n_samples)
    for r in range(n_samples):
        cfg = sample_homogeneous(cfg_box, 1.0, seed, path=(r,))
        masses[r] = quenched_partition(cfg, spec, params, grid, t=t,
                                       compensate=compensate)
    mean, se = jackknife_mean(masses)
    return AnnealedEstimate(mean=mean, se=se, log_mean=float(math.log(mean)),
                            n_samples=n_samples, t=float(t))


@dataclass(frozen=True)
class ConfinementEstimate:
    ratio: float
    se: float
    L: float
    t: float
    n_samples: int


def confinement_prob(params: ModelParams, spec: EvolutionSpec, L: float,
                     n_samples: int, seed: int, *, t: float | None = None,
                     full_radius: float | None = None, h: float = 0.05,
                     config_margin: float = 30.0) -> ConfinementEstimate:
    """Annealed Q_t(sup_s |X_s| <= L): ratio of killed-in-B(0,L) mass to
    killed-in-full-box mass over paired configs (same environment in both)."""
    if t is None:
        t = params.t
    if full_radius is None:
        full_radius = default_box_radius(params, t)
    if L > full_radius:
        raise ValueError("L exceeds the full box radius")
    grid_full = make_grid(params, full_radius, h)
    grid_sub = make_grid(params, L, h)
    cfg_box = Box.cube(params.d, grid_full.box.half_widths[0] + config_margin)
    nums = np.empty(n_samples)
    dens = np.empty(n_samples)
    for r in range(n_samples):
        cfg = sample_homogeneous(cfg_box, 1.0, seed, path=(r,))
        dens[r] = quenched_partition(cfg, spec, params, grid_full, t=t, compensate=True)
        nums[r] = quenched_partition(cfg, spec, params, grid_sub, t=t, compensate=True)
    ratio, se = jackknife_ratio(nums, dens)
    return ConfinementEstimate(ratio=ratio, se=se, L=float(L), t=float(t),
                               n_samples=n_samples)


# ---------------------------------------------------------------------------
# occupation functionals (Duhamel co-evolution)

def occupation_evolve(V: GridField, spec: EvolutionSpec, t: float,
                      fs, initial: GridField | None = None):
    """Advance u and the Duhamel accumulators for each f in fs.

    Returns (mass, [<w_t^f, 1> ...]) where <w_t^f, 1> approximates
    E[ e^{-int V} int_0^t f(X_s) ds : stay ]; exact for constant f.
    """
    grid = V.grid
    if initial is None:
        initial = delta_field(grid)
    f_vals = [np.asarray(f.values if isinstance(f, GridField) else f, dtype=float)
              for f in fs]
    for fv in f_vals:
        if fv.shape != grid.shape:
            raise ValueError("f shape mismatch")
        if not np.all(np.isfinite(fv)):
            raise ValueError("f must be bounded")
    n = spec.n_steps(t)
    stepper = FKStepper(grid, V.values, spec)
    u = initial.values.copy()
    ws = [np.zeros(grid.shape) for _ in f_vals]
    half = 0.5 * spec.dt
    for _ in range(n):
        stacked = [w + half * fv * u for w, fv in zip(ws, f_vals)]
        u = stepper.step(u)
        ws = [stepper.step(s) + half * fv * u for s, fv in zip(stacked, f_vals)]
    mass = float(np.sum(u) * grid.h ** grid.d)
    wmasses = [float(np.sum(w) * grid.h ** grid.d) for w in ws]
    return mass, wmasses


def occupation_functional(f: GridField, config: PointConfig, spec: EvolutionSpec,
                          params: ModelParams, grid: Grid, *, t: float | None = None,
                          far_tol: float = 0.1, compensate: bool = False,
                          initial: GridField | None = None) -> float:
    """E_0[ e^{-int_0^t V} int_0^t f(X_s) ds : stay in box ] for a config."""
    if t is None:
        t = params.t
    view = PotentialView(config, grid.box, params, compensate=compensate,
                         max_far_bound=far_tol)
    pts = grid.nodes()[:, None] if grid.d == 1 else grid.nodes().reshape(-1, 2)
    V = GridField(grid, evaluate_V(view, pts).reshape(grid.shape))
    _, (wmass,) = occupation_evolve(V, spec, t, [f])
    return wmass


# ---------------------------------------------------------------------------
# ground-state / Girsanov identity for the quadratic well

def oscillator_ground_state(x, c: float):
    """psi(x) for -1/2 psi'' + c x^2 psi = lambda1 psi, L2-normalized."""
    theta = math.sqrt(2.0 * c)
    return (theta / math.pi) ** 0.25 * np.exp(-0.5 * theta * np.asarray(x) ** 2)


def ou_transition_density(y, x0: float, T: float, theta: float):
    """Density of the OU process dY = -theta Y dt + dB at time T from x0."""
    var = (1.0 - math.exp(-2.0 * theta * T)) / (2.0 * theta)
    mean = x0 * math.exp(-theta * T)
    y = np.asarray(y)
    return np.exp(-((y - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


@dataclass(frozen=True)
class GroundstateReport:
    sup_rel_err: float
    mass_rel_err: float
    lambda1: float
    theta: float
    T: float


def groundstate_transform_check(c: float, T: float, *, h: float = 0.005,
                                dt: float = 1e-4, box_radius: float = 4.0,
                                spec: EvolutionSpec | None = None) -> GroundstateReport:
    """Compare the evolved kernel for V = c x^2 with the analytic identity
    u_T(y) = e^{-lambda1 T} psi(0) q_T(0, y) / psi(y), plus the mass identity
    <u_T, 1> = e^{-lambda1 T} psi(0) E[1/psi(Y_T)] (OU expectation, quadrature).
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if spec is None:
        spec = EvolutionSpec(dt=dt, splitting="strang", heat_step="spectral")
    params = ModelParams(d=1, alpha=2.0, t=max(T, 1.0))
    grid = make_grid(params, box_radius, h)
    x = grid.axis_nodes(0)
    V = GridField(grid, c * x ** 2)
    u = fk_evolve(V, spec, T)
    theta = math.sqrt(2.0 * c)
    lam1 = math.sqrt(c / 2.0)
    psi = oscillator_ground_state(x, c)
    analytic = math.exp(-lam1 * T) * float(oscillator_ground_state(0.0, c)) \
        * ou_transition_density(x, 0.0, T, theta) / psi
    scale = float(np.max(analytic))
    mask = analytic > 1e-6 * scale
    sup_rel = float(np.max(np.abs(u.values[mask] - analytic[mask]) / analytic[mask]))
    # mass identity via Gauss-Hermite quadrature over the OU Gaussian
    var = (1.0 - math.exp(-2.0 * theta * T)) / (2.0 * theta)
    nodes, weights = np.polynomial.hermite.hermgauss(120)
    ys = nodes * math.sqrt(2.0 * var)
    expectation = float(np.sum(weights / oscillator_ground_state(ys, c)) / math.sqrt(math.pi))
    mass_rhs = math.exp(-lam1 * T) * float(oscillator_ground_state(0.0, c)) * expectation
    mass_rel = abs(u.mass() - mass_rhs) / mass_rhs
    return GroundstateReport(sup_rel_err=sup_rel, mass_rel_err=mass_rel,
                             lambda1=lam1, theta=theta, T=T)


def time_marginal(V: GridField, spec: EvolutionSpec, t: float, s_list,
                  initial: GridField | None = None):
    """Normalized law of X_s under the t-horizon quenched path measure:
    marginal_s(x) is proportional to u_s(x) * (T_{t-s} 1)(x)."""
    grid = V.grid
    s_list = sorted(s_list)
    if any(not (0 < s < t) for s in s_list):
        raise ValueError("marginal times must lie strictly inside (0, t)")
    _, fwd = fk_evolve(V, spec, t, initial=initial, snapshot_times=s_list)
    back_times = sorted({t - s for s in s_list})
    _, bwd = fk_evolve(V, spec, t, initial=ones_field(grid),
                       snapshot_times=back_times)
    out = {}
    for s in s_list:
        dens = fwd[s].values * bwd[t - s].values
        z = float(np.sum(dens) * grid.h ** grid.d)
        out[s] = GridField(grid, dens / z)
    return out


# ---------------------------------------------------------------------------
# independent path-sampling oracle

def brownian_partition_mc(points, params: ModelParams, t: float, box_radius: float,
                          n_paths: int, seed: int, dt: float = 5e-4,
                          batch: int = 20000):
    """Direct Monte Carlo of E_0[e^{-int V(X)} : stay] for d = 1 configs.

    Euler-exact Brownian increments; trapezoid quadrature of the potential
    along the path; absorption checked at step times.  Returns (mean, se).
    """
    if params.d != 1:
        raise NotImplementedError("path oracle implemented for d = 1")
    pts = np.asarray(points, dtype=float).reshape(-1)
    n_steps = round(t / dt)
    if abs(n_steps * dt - t) > 1e-9 * max(t, 1.0):
        raise ValueError("dt must divide t")
    rng = stream(seed, 901)
    alpha = params.alpha

    def V_of(x):
        if pts.size == 0:
            return np.zeros_like(x)
        r = np.abs(x[:, None] - pts[None, :])
        np.maximum(r, 1.0, out=r)
        return np.sum(r ** (-alpha), axis=1)

    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_paths:
        m = min(batch, n_paths - done)
        x = np.zeros(m)
        logw = np.zeros(m)
        alive = np.ones(m, dtype=bool)
        v_prev = V_of(x)
        sq_dt = math.sqrt(dt)
        for _ in range(n_steps):
            x = x + sq_dt * rng.standard_normal(m)
            alive &= np.abs(x) <= box_radius
            v_new = V_of(x)
            logw -= 0.5 * dt * (v_prev + v_new)
            v_prev = v_new
        w = np.where(alive, np.exp(logw), 0.0)
        total += float(np.sum(w))
        total_sq += float(np.sum(w ** 2))
        done += m
    mean = total / n_paths
    var = max(total_sq / n_paths - mean ** 2, 0.0)
    return mean, math.sqrt(var / n_paths)
