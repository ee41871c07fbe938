"""Discrete Schrodinger operators -1/2 Laplacian + V with Dirichlet walls.

Grids cover a box with uniform spacing h; only interior nodes are stored, so
Dirichlet rows never enter the linear algebra.  The Laplacian is the standard
second-order central-difference stencil, giving O(h^2) eigenvalue error.

Eigenpairs come from shifted inverse power iteration with a positive-definite
shift sigma < lambda1 (banded Cholesky in d = 1, sparse LU in d = 2); the
second eigenpair is obtained by deflating against phi1.  The residual contract
is ||A phi - lambda phi|| <= tol * |lambda| in the discrete l2 norm, up to a
floating-point floor proportional to ||A||.

The integrated density of states N(lambda) is estimated by counting Dirichlet
eigenvalues below lambda on Poisson samples and dividing by box volume.  The
finite-box Dirichlet counting is biased low relative to the infinite-volume
N(lambda); the bias is documented, not corrected, and box-doubling invariance
within CI is the self-consistency check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded, eigh, eigvalsh_tridiagonal
from scipy.sparse import identity as sparse_identity
from scipy.sparse import kron as sparse_kron
from scipy.sparse import diags
from scipy.sparse.linalg import splu

from .model import ModelParams, shape_vhat
from .points import Box, sample_homogeneous


@dataclass(frozen=True)
class Grid:
    """Uniform Dirichlet grid on a box; interior nodes only, d in {1, 2}."""

    box: Box
    h: float

    def __post_init__(self):
        if self.box.d not in (1, 2):
            raise ValueError("grids support d in {1, 2}")
        if not (self.h > 0):
            raise ValueError("spacing must be positive")
        for w in self.box.half_widths:
            ratio = 2.0 * w / self.h
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ValueError("box widths must be integer multiples of h")
            if round(ratio) < 2:
                raise ValueError("box too small for interior nodes")

    @property
    def d(self) -> int:
        return self.box.d

    @property
    def shape(self) -> tuple:
        return tuple(int(round(2.0 * w / self.h)) - 1 for w in self.box.half_widths)

    @property
    def n_total(self) -> int:
        n = 1
        for s in self.shape:
            n *= s
        return n

    def axis_nodes(self, axis: int = 0) -> np.ndarray:
        lo = self.box.center[axis] - self.box.half_widths[axis]
        n = self.shape[axis]
        return lo + self.h * np.arange(1, n + 1)

    def nodes(self) -> np.ndarray:
        """Interior node coordinates, shape (n,) for d=1 and (nx, ny, 2) for d=2."""
        if self.d == 1:
            return self.axis_nodes(0)
        xs, ys = np.meshgrid(self.axis_nodes(0), self.axis_nodes(1), indexing="ij")
        return np.stack([xs, ys], axis=-1)

    def integrate(self, values: np.ndarray) -> float:
        """h^d weighted sum; the discrete integral of a Dirichlet field."""
        return float(np.sum(values) * self.h ** self.d)


@dataclass(frozen=True)
class GridField:
    """Values on the interior nodes of a grid (boundary is implicitly zero)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    def mass(self) -> float:
        return self.grid.integrate(self.values)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2) * self.grid.h ** self.grid.d))


def potential_on_grid(grid: Grid, evaluate, chunk: int = 2 ** 20) -> GridField:
    """Evaluate a callable potential on all grid nodes; evaluate takes (m, d) points."""
    if grid.d == 1:
        pts = grid.nodes()[:, None]
    else:
        pts = grid.nodes().reshape(-1, 2)
    out = np.empty(pts.shape[0])
    for i in range(0, pts.shape[0], chunk):
        out[i:i + chunk] = evaluate(pts[i:i + chunk])
    return GridField(grid, out.reshape(grid.shape))


def config_potential_field(points: np.ndarray, grid: Grid, params: ModelParams) -> GridField:
    """V(x) = sum_i vhat(x - point_i) evaluated on the grid, no compensation."""
    pts = np.asarray(points, dtype=float).reshape(-1, grid.d)

    def ev(x):
        if pts.shape[0] == 0:
            return np.zeros(x.shape[0])
        diff = x[:, None, :] - pts[None, :, :]
        return np.sum(shape_vhat(diff, params), axis=1)

    return potential_on_grid(grid, ev)


class SchrodingerOperator:
    """Handle for A = -1/2 discrete Laplacian + diag(V), Dirichlet walls."""

    def __init__(self, V: GridField):
        if not np.all(np.isfinite(V.values)):
            raise ValueError("potential must be finite")
        self.grid = V.grid
        self.V = V.values
        self.h = V.grid.h
        self._inv2h2 = 1.0 / (2.0 * self.h ** 2)

    # -- matrix-free application -------------------------------------------
    def apply(self, x: np.ndarray) -> np.ndarray:
        g = self.grid
        x = x.reshape(g.shape)
        out = self.V * x
        c = self._inv2h2
        if g.d == 1:
            out = out + 2.0 * c * x
            out[1:] -= c * x[:-1]
            out[:-1] -= c * x[1:]
        else:
            out = out + 4.0 * c * x
            out[1:, :] -= c * x[:-1, :]
            out[:-1, :] -= c * x[1:, :]
            out[:, 1:] -= c * x[:, :-1]
            out[:, :-1] -= c * x[:, 1:]
        return out

    def norm_bound(self) -> float:
        return float(np.max(np.abs(self.V)) + 2.0 * self.grid.d / self.h ** 2)

    # -- factorized shifted solves ------------------------------------------
    def tridiag(self):
        """(diagonal, off-diagonal) of the d=1 matrix."""
        if self.grid.d != 1:
            raise ValueError("tridiag available only for d = 1")
        n = self.grid.n_total
        diag = self.V + 2.0 * self._inv2h2
        off = np.full(n - 1, -self._inv2h2)
        return diag, off

    def _sparse(self, sigma: float = 0.0):
        g = self.grid
        c = self._inv2h2
        if g.d == 1:
            n = g.n_total
            return diags(
                [np.full(n - 1, -c), self.V + 2.0 * c - sigma, np.full(n - 1, -c)],
                offsets=[-1, 0, 1], format="csc")
        nx, ny = g.shape
        lap1x = diags([np.full(nx - 1, -c), np.full(nx, 2.0 * c), np.full(nx - 1, -c)],
                      offsets=[-1, 0, 1])
        lap1y = diags([np.full(ny - 1, -c), np.full(ny, 2.0 * c), np.full(ny - 1, -c)],
                      offsets=[-1, 0, 1])
        lap = sparse_kron(lap1x, sparse_identity(ny)) + sparse_kron(sparse_identity(nx), lap1y)
        return (lap + diags(self.V.ravel() - sigma)).tocsc()

    def shifted_solver(self, sigma: float):
        """Returns solve(b) for (A - sigma I) x = b; requires A - sigma positive definite
        in d = 1 (Cholesky); d = 2 uses LU and tolerates indefinite shifts."""
        if self.grid.d == 1:
            diag, off = self.tridiag()
            ab = np.zeros((2, diag.size))
            ab[0, 1:] = off
            ab[1, :] = diag - sigma
            factor = cholesky_banded(ab, lower=False)
            return lambda b: cho_solve_banded((factor, False), b)
        lu = splu(self._sparse(sigma))
        return lambda b: lu.solve(b)

    def dense(self) -> np.ndarray:
        return self._sparse(0.0).toarray()


def assemble(V: GridField) -> SchrodingerOperator:
    return SchrodingerOperator(V)


def rayleigh_quotient(op: SchrodingerOperator, f: np.ndarray | GridField) -> float:
    vals = f.values if isinstance(f, GridField) else np.asarray(f, dtype=float)
    vals = vals.reshape(op.grid.shape)
    den = float(np.sum(vals ** 2))
    if den == 0.0:
        raise ValueError("Rayleigh quotient of the zero field")
    num = float(np.sum(vals * op.apply(vals)))
    return num / den


@dataclass(frozen=True)
class EigenResult:
    lambda1: float
    lambda2: float | None
    phi1: GridField
    residual1: float
    residual2: float | None
    iterations: int


class EigenSolveError(RuntimeError):
    pass


def _iterate(op: SchrodingerOperator, x0: np.ndarray, sigma0: float, tol: float,
             max_iter: int, project=None):
    """Inverse power iteration with guarded shift updates; returns (lam, x, res, iters)."""
    flat_shape = op.grid.n_total
    x = x0.ravel().astype(float).copy()
    if project is not None:
        x = project(x)
    x /= np.linalg.norm(x)
    sigma = sigma0
    solve = op.shifted_solver(sigma)
    # floating-point floor: residuals cannot beat eps * ||A|| no matter the tol
    scale_floor = 100.0 * np.finfo(float).eps * op.norm_bound()
    lam, res = math.inf, math.inf
    for it in range(1, max_iter + 1):
        y = solve(x.reshape(-1) if op.grid.d == 2 else x)
        y = np.asarray(y).ravel()
        if project is not None:
            y = project(y)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            raise EigenSolveError("inverse iteration produced a degenerate vector")
        x = y / ny
        Ax = op.apply(x.reshape(op.grid.shape)).ravel()
        lam = float(x @ Ax)
        res = float(np.linalg.norm(Ax - lam * x))
        if res <= tol * abs(lam) + scale_floor:
            return lam, x, res, it
        # shift acceleration: once roughly converged, move the shift close to
        # the Rayleigh value (kept strictly below it so Cholesky stays valid)
        if res < 0.05 * max(abs(lam - sigma), 1.0) and it % 4 == 0:
            new_sigma = lam - max(4.0 * res, 1e-8 * (1.0 + abs(lam)))
            if new_sigma > sigma:
                try:
                    solve = op.shifted_solver(new_sigma)
                    sigma = new_sigma
                except np.linalg.LinAlgError:
                    pass
    raise EigenSolveError(
        f"no convergence after {max_iter} iterations; residual {res:.3e}, "
        f"target {tol * abs(lam) + scale_floor:.3e}")


def smallest_eigs(op: SchrodingerOperator, k: int = 1, tol: float = 1e-10,
                  max_iter: int = 600, seed: int = 7) -> EigenResult:
    """Lowest k in {1, 2} eigenpairs; phi1 is nonnegative with unit discrete L2 norm."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = op.grid
    sigma0 = float(np.min(op.V)) - 1.0
    rng = np.random.default_rng(seed)
    x0 = np.ones(g.n_total) + 0.01 * rng.standard_normal(g.n_total)
    lam1, v1, res1, it1 = _iterate(op, x0, sigma0, tol, max_iter)
    if np.sum(v1) < 0:
        v1 = -v1
    # Perron ground state: clip tiny negative overshoot from finite tolerance
    v1 = np.where(v1 < 0, 0.0, v1)
    v1 /= np.linalg.norm(v1)
    phi1_vals = v1.reshape(g.shape) / math.sqrt(g.h ** g.d)
    phi1 = GridField(g, phi1_vals)
    lam2 = res2 = None
    iters = it1
    if k == 2:
        def project(y):
            return y - (v1 @ y) * v1
        x1 = rng.standard_normal(g.n_total)
        lam2, _, res2, it2 = _iterate(op, x1, sigma0, tol, max_iter, project=project)
        iters += it2
        if lam2 < lam1:
            raise EigenSolveError("deflated eigenvalue fell below the ground state")
    return EigenResult(lambda1=float(lam1), lambda2=lam2, phi1=phi1,
                       residual1=res1, residual2=res2, iterations=iters)


def count_below(V: GridField, lam: float) -> int:
    """Number of Dirichlet eigenvalues of -1/2 Lap + V below lam."""
    op = SchrodingerOperator(V)
    if V.grid.d == 1:
        diag, off = op.tridiag()
        evs = eigvalsh_tridiagonal(diag, off, select="v",
                                   select_range=(-np.inf, lam))
        return int(evs.size)
    n = V.grid.n_total
    if n > 6000:
        raise ValueError("d = 2 eigenvalue counting limited to small grids")
    evs = eigh(op.dense(), eigvals_only=True, subset_by_value=(-np.inf, lam))
    return int(evs.size)


def eigenvalues_below(V: GridField, lam: float) -> np.ndarray:
    """All Dirichlet eigenvalues below lam (d = 1 only; used for IDS curves)."""
    op = SchrodingerOperator(V)
    if V.grid.d == 1:
        diag, off = op.tridiag()
        return eigvalsh_tridiagonal(diag, off, select="v",
                                    select_range=(-np.inf, lam))
    n = V.grid.n_total
    if n > 6000:
        raise ValueError("d = 2 eigenvalue listing limited to small grids")
    return eigh(op.dense(), eigvals_only=True, subset_by_value=(-np.inf, lam))


@dataclass(frozen=True)
class IdsCurve:
    lambdas: np.ndarray
    n_hat: np.ndarray          # normalized counting function estimate per lambda
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_samples: int
    box_volume: float

    def rows(self):
        for i, lam in enumerate(self.lambdas):
            yield (float(lam), float(self.n_hat[i]),
                   float(self.ci_low[i]), float(self.ci_high[i]))


def ids_estimate(lambda_grid, params: ModelParams, box_size: float,
                 n_samples: int, seed: int, h: float = 0.25) -> IdsCurve:
    """MC estimate of N(lambda) = E[#{eigenvalues <= lambda}] / volume.

    Configs are sampled on the grid box itself (points outside would only
    raise V, so the finite-box estimate is biased low; doubling the box and
    checking invariance within CI is the documented control).
    """
    lambdas = np.sort(np.asarray(lambda_grid, dtype=float))
    if lambdas.size == 0:
        raise ValueError("empty lambda grid")
    box = Box.cube(params.d, box_size / 2.0)
    # snap the half width to the grid so Grid's multiple-of-h invariant holds
    half = round(box_size / 2.0 / h) * h
    box = Box.cube(params.d, half)
    grid = Grid(box, h)
    lam_max = float(lambdas[-1])
    counts = np.zeros((n_samples, lambdas.size))
    for r in range(n_samples):
        cfg = sample_homogeneous(box, 1.0, seed, path=(r,))
        V = config_potential_field(cfg.points, grid, params)
        evs = eigenvalues_below(V, lam_max)
        counts[r] = np.searchsorted(evs, lambdas, side="right")
    vol = box.volume
    mean = counts.mean(axis=0) / vol
    # replicate-based CI; for 0/1 counts this is the usual binomial Wald band
    sd = counts.std(axis=0, ddof=1) / vol if n_samples > 1 else np.zeros_like(mean)
    half_w = 1.96 * sd / math.sqrt(n_samples)
    return IdsCurve(lambdas=lambdas, n_hat=mean,
                    ci_low=np.maximum(mean - half_w, 0.0), ci_high=mean + half_w,
                    n_samples=n_samples, box_volume=vol)
