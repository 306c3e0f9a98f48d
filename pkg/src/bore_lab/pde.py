"""Method-of-lines evolution of the dissipative long-wave system.

The semidiscrete form uses a fourth-order central first difference for the
flux terms, a second-order central second difference for the dissipation,
and a direct solve of the elliptic operator (I - delta * D2) that the mixed
derivative term induces on u_t.  Time stepping is classical RK4; the
elliptic solve removes the third-derivative stiffness so the remaining CFL
restriction is advective.

A first-order finite-volume solver for the dispersionless shallow-water
reduction lives here as well, used as the classical-shock reference.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import ConfigError, NumericsError


class BoundaryKind(str, Enum):
    PERIODIC = "periodic"
    REFLECTIVE = "reflective"


class SystemKind(str, Enum):
    PEREGRINE_DISSIPATIVE = "peregrine-dissipative"
    PEREGRINE_INVISCID = "peregrine-inviscid"
    SHALLOW_WATER = "shallow-water"


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid.

    Periodic grids place nodes at x_min + i*dx with the right endpoint
    identified with the left; reflective grids use cell centers
    x_min + (i + 1/2)*dx with mirror walls at both ends.
    """

    x_min: float
    x_max: float
    n: int
    boundary: BoundaryKind = BoundaryKind.PERIODIC

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigError(f"empty domain [{self.x_min}, {self.x_max}]")
        if self.n < 16:
            raise ConfigError(f"grid needs n >= 16, got {self.n}")
        object.__setattr__(self, "boundary", BoundaryKind(self.boundary))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        offset = 0.0 if self.boundary is BoundaryKind.PERIODIC else 0.5
        return self.x_min + (np.arange(self.n) + offset) * self.dx


@dataclass
class FieldPair:
    """Surface elevation and velocity samples at one instant."""

    eta: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.eta.shape != self.u.shape or self.eta.ndim != 1:
            raise ValueError("eta and u must be 1-D arrays of equal length")

    def copy(self) -> "FieldPair":
        return FieldPair(self.eta.copy(), self.u.copy(), self.t)


@dataclass(frozen=True)
class SmoothedRiemann:
    """Step of height eta_left smoothed by a tanh ramp, u = 0."""

    eta_left: float
    ramp_width: float = 2.0


@dataclass(frozen=True)
class Gaussian:
    """Bump amplitude * exp(-(x/width)**2), u = 0."""

    amplitude: float
    width: float


InitialCondition = Union[SmoothedRiemann, Gaussian]


def make_initial(ic: InitialCondition, grid: Grid) -> FieldPair:
    """Sample an initial-condition spec on the grid at t = 0."""
    x = grid.x
    if isinstance(ic, SmoothedRiemann):
        if ic.eta_left <= -1.0:
            raise ConfigError(f"eta_left must exceed -1, got {ic.eta_left}")
        if not ic.ramp_width > 0.0:
            raise ConfigError(f"ramp_width must be positive, got {ic.ramp_width}")
        eta = 0.5 * ic.eta_left * (1.0 - np.tanh(x / ic.ramp_width))
    elif isinstance(ic, Gaussian):
        if ic.amplitude <= -1.0:
            raise ConfigError(f"amplitude must exceed -1, got {ic.amplitude}")
        if not ic.width > 0.0:
            raise ConfigError(f"width must be positive, got {ic.width}")
        eta = ic.amplitude * np.exp(-((x / ic.width) ** 2))
    else:
        raise ConfigError(f"unknown initial condition {ic!r}")
    return FieldPair(eta, np.zeros_like(eta), 0.0)


# ---------------------------------------------------------------------------
# difference operators

def _pad(y: np.ndarray, grid: Grid, parity: int, width: int) -> np.ndarray:
    if grid.boundary is BoundaryKind.PERIODIC:
        return np.concatenate([y[-width:], y, y[:width]])
    left = parity * y[width - 1 :: -1]
    right = parity * y[: -width - 1 : -1]
    return np.concatenate([left, y, right])


def first_difference(y: np.ndarray, grid: Grid, parity: int = 1) -> np.ndarray:
    """Fourth-order central d/dx.

    parity selects the mirror closure on reflective grids: +1 for fields
    even about the walls (eta), -1 for odd fields (u).  Ignored on
    periodic grids.
    """
    p = _pad(y, grid, parity, 2)
    n = y.size
    return (p[0:n] - 8.0 * p[1 : n + 1] + 8.0 * p[3 : n + 3] - p[4 : n + 4]) / (
        12.0 * grid.dx
    )


def second_difference(y: np.ndarray, grid: Grid, parity: int = 1) -> np.ndarray:
    """Second-order central d2/dx2 with the same closure convention."""
    p = _pad(y, grid, parity, 1)
    n = y.size
    return (p[0:n] - 2.0 * p[1 : n + 1] + p[2 : n + 2]) / (grid.dx * grid.dx)


# ---------------------------------------------------------------------------
# Helmholtz operator (I - delta * D2)

class _HelmholtzSolver:
    """Factorization of I - delta*D2, built once and reused every stage.

    The operator is symmetric positive definite (it dominates the
    identity), so a banded Cholesky factorization of the tridiagonal core
    is enough; the periodic wrap couples only the first and last unknowns
    and is restored by a rank-one Sherman-Morrison correction.
    """

    def __init__(self, delta: float, grid: Grid):
        n = grid.n
        q = delta / (grid.dx * grid.dx)
        self.q = q
        diag = np.full(n, 1.0 + 2.0 * q)
        # End diagonals are 1 + 3q either way: the periodic wrap is written
        # as T - q*w w^T with w = e_0 + e_{n-1} and restored by the rank-one
        # correction in solve(), while reflective grids use the odd mirror
        # closure (the solved field is velocity-like and vanishes at walls).
        diag[0] += q
        diag[-1] += q
        ab = np.zeros((2, n))
        ab[0, 1:] = -q
        ab[1] = diag
        self._cho = cholesky_banded(ab, check_finite=False)
        if grid.boundary is BoundaryKind.PERIODIC:
            w = np.zeros(n)
            w[0] = w[-1] = 1.0
            p = cho_solve_banded((self._cho, False), w, check_finite=False)
            self._p = p
            self._gain = q / (1.0 - q * (p[0] + p[-1]))
        else:
            self._p = None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        z = cho_solve_banded((self._cho, False), rhs, check_finite=False)
        if self._p is not None:
            z = z + (self._gain * (z[0] + z[-1])) * self._p
        return z


@lru_cache(maxsize=16)
def _helmholtz(delta: float, grid: Grid) -> _HelmholtzSolver:
    return _HelmholtzSolver(delta, grid)


def helmholtz_apply_inverse(rhs: np.ndarray, delta: float, grid: Grid) -> np.ndarray:
    """Solve z - delta * D2 z = rhs; delta = 0 returns rhs unchanged."""
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (grid.n,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({grid.n},)")
    if delta == 0.0:
        return rhs.copy()
    return _helmholtz(delta, grid).solve(rhs)


# ---------------------------------------------------------------------------
# semidiscrete rates

def _peregrine_rates(eta, u, delta, epsilon, grid):
    if np.min(eta) <= -1.0:
        raise NumericsError("vacuum state: 1 + eta reached zero")
    eta_rate = -first_difference(u + eta * u, grid, parity=-1)
    forcing = -first_difference(eta, grid, parity=1) - u * first_difference(
        u, grid, parity=-1
    )
    if epsilon != 0.0:
        forcing = forcing + epsilon * second_difference(u, grid, parity=-1)
    u_rate = helmholtz_apply_inverse(forcing, delta, grid)
    return eta_rate, u_rate


def semidiscrete_rhs_peregrine(
    state: FieldPair, delta: float, epsilon: float, grid: Grid
) -> Tuple[np.ndarray, np.ndarray]:
    """Time derivatives (eta_t, u_t) of the dispersive-dissipative system."""
    if state.eta.size != grid.n:
        raise ValueError("state does not match grid")
    return _peregrine_rates(state.eta, state.u, delta, epsilon, grid)


# ---------------------------------------------------------------------------
# run configuration

@dataclass(frozen=True)
class RunConfig:
    system: SystemKind
    grid: Grid
    ic: InitialCondition
    dt: float
    t_end: float
    delta: float = 0.0
    epsilon: float = 0.0
    snapshot_times: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "system", SystemKind(self.system))
        object.__setattr__(self, "snapshot_times", tuple(self.snapshot_times))
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0.0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        if self.delta < 0.0 or self.epsilon < 0.0:
            raise ConfigError("delta and epsilon must be >= 0")
        if self.system is SystemKind.PEREGRINE_INVISCID and self.epsilon != 0.0:
            raise ConfigError("the inviscid system has epsilon = 0 by definition")
        if self.system is SystemKind.SHALLOW_WATER and (
            self.delta != 0.0 or self.epsilon != 0.0
        ):
            raise ConfigError("the shallow-water system has delta = epsilon = 0")
        for ts in self.snapshot_times:
            if not 0.0 <= ts <= self.t_end + 0.5 * self.dt:
                raise ConfigError(f"snapshot time {ts} outside [0, t_end]")
        init = make_initial(self.ic, self.grid)
        bound = cfl_bound(init, self.grid)
        if self.dt > bound:
            raise ConfigError(
                f"dt = {self.dt} violates the advective bound {bound:.6g}"
            )


def cfl_bound(state: FieldPair, grid: Grid) -> float:
    """Largest admissible explicit step, 0.9*dx/(1 + max|u| + sqrt(1+max eta))."""
    speed = 1.0 + np.max(np.abs(state.u)) + math.sqrt(1.0 + max(np.max(state.eta), 0.0))
    return 0.9 * grid.dx / speed


# ---------------------------------------------------------------------------
# time stepping

def _rk4_step(state: FieldPair, config: RunConfig) -> FieldPair:
    grid, dt = config.grid, config.dt
    d, e = config.delta, config.epsilon
    eta, u = state.eta, state.u
    k1e, k1u = _peregrine_rates(eta, u, d, e, grid)
    k2e, k2u = _peregrine_rates(eta + 0.5 * dt * k1e, u + 0.5 * dt * k1u, d, e, grid)
    k3e, k3u = _peregrine_rates(eta + 0.5 * dt * k2e, u + 0.5 * dt * k2u, d, e, grid)
    k4e, k4u = _peregrine_rates(eta + dt * k3e, u + dt * k3u, d, e, grid)
    sixth = dt / 6.0
    return FieldPair(
        eta + sixth * (k1e + 2.0 * k2e + 2.0 * k3e + k4e),
        u + sixth * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        state.t + dt,
    )


def _sw_flux(eta, u):
    return u + eta * u, eta + 0.5 * u * u


def _rusanov_step(state: FieldPair, config: RunConfig) -> FieldPair:
    grid, dt = config.grid, config.dt
    eta, u = state.eta, state.u
    if np.min(eta) <= -1.0:
        raise NumericsError("vacuum state: 1 + eta reached zero")
    if grid.boundary is BoundaryKind.PERIODIC:
        eta_r, u_r = np.roll(eta, -1), np.roll(u, -1)
    else:
        eta_r = np.concatenate([eta[1:], eta[-1:]])
        u_r = np.concatenate([u[1:], -u[-1:]])
    f1_l, f2_l = _sw_flux(eta, u)
    f1_r, f2_r = _sw_flux(eta_r, u_r)
    a = np.maximum(
        np.abs(u) + np.sqrt(1.0 + eta), np.abs(u_r) + np.sqrt(1.0 + eta_r)
    )
    flux1 = 0.5 * (f1_l + f1_r) - 0.5 * a * (eta_r - eta)
    flux2 = 0.5 * (f2_l + f2_r) - 0.5 * a * (u_r - u)
    if grid.boundary is BoundaryKind.PERIODIC:
        d1 = flux1 - np.roll(flux1, 1)
        d2 = flux2 - np.roll(flux2, 1)
    else:
        # Wall flux on the left boundary: mirror state (eta, -u).
        eta_g, u_g = eta[0], -u[0]
        g1, g2 = _sw_flux(eta_g, u_g)
        a0 = np.abs(u[0]) + math.sqrt(1.0 + eta[0])
        w1 = 0.5 * (g1 + f1_l[0]) - 0.5 * a0 * (eta[0] - eta_g)
        w2 = 0.5 * (g2 + f2_l[0]) - 0.5 * a0 * (u[0] - u_g)
        d1 = flux1 - np.concatenate([[w1], flux1[:-1]])
        d2 = flux2 - np.concatenate([[w2], flux2[:-1]])
    lam = dt / grid.dx
    return FieldPair(eta - lam * d1, u - lam * d2, state.t + dt)


def step(state: FieldPair, config: RunConfig) -> FieldPair:
    """Advance one dt; raises NumericsError on blow-up or vacuum."""
    if config.system is SystemKind.SHALLOW_WATER:
        out = _rusanov_step(state, config)
    else:
        out = _rk4_step(state, config)
    if not (np.all(np.isfinite(out.eta)) and np.all(np.isfinite(out.u))):
        raise NumericsError(f"non-finite field values at t = {out.t:.6g}")
    return out


def evolve(config: RunConfig, initial: Optional[FieldPair] = None) -> List[FieldPair]:
    """Run to t_end, returning snapshots at the requested times.

    Each requested time is mapped to the nearest whole step; with no
    requested times the final state alone is returned.  Deterministic:
    the same config always produces bit-identical snapshots.  initial
    replaces the configured initial condition (used to seed a run with an
    interpolated traveling-wave profile); the caller then owns the CFL
    margin.
    """
    if initial is None:
        state = make_initial(config.ic, config.grid)
    else:
        if initial.eta.size != config.grid.n:
            raise ValueError("initial state does not match the grid")
        state = initial.copy()
        state.t = 0.0
    n_total = int(round(config.t_end / config.dt))
    requested = config.snapshot_times or (config.t_end,)
    targets = [min(max(int(round(ts / config.dt)), 0), n_total) for ts in requested]
    wanted = {}
    for pos, k in enumerate(targets):
        wanted.setdefault(k, []).append(pos)
    snapshots: List[Optional[FieldPair]] = [None] * len(targets)
    for pos in wanted.get(0, []):
        snapshots[pos] = state.copy()
    for k in range(1, n_total + 1):
        state = step(state, config)
        for pos in wanted.get(k, []):
            snapshots[pos] = state.copy()
    return snapshots


# ---------------------------------------------------------------------------
# diagnostics and norms

def discrete_mass(state: FieldPair, grid: Grid) -> float:
    """Integral of eta; exactly conserved on periodic grids."""
    return float(np.sum(state.eta) * grid.dx)


def energy_functional(state: FieldPair, grid: Grid, delta: float) -> float:
    """Integral of eta**2 + (1+eta) u**2 + delta u_x**2.

    Decays monotonically on every dissipative run we have checked, but it
    is a diagnostic, not a scheme guarantee; tests allow roundoff slack.
    """
    ux = first_difference(state.u, grid, parity=-1)
    dens = state.eta**2 + (1.0 + state.eta) * state.u**2 + delta * ux**2
    return float(np.sum(dens) * grid.dx)


def error_norm(a: FieldPair, b: FieldPair, grid: Grid) -> float:
    """sqrt(||h||^2 + ||w||^2 + ||w_x||^2) with discrete L2 norms."""
    if a.eta.size != grid.n or b.eta.size != grid.n:
        raise ValueError("states do not match the grid")
    if abs(a.t - b.t) > 1e-9:
        raise ValueError(f"states at different times {a.t} and {b.t}")
    h = a.eta - b.eta
    w = a.u - b.u
    wx = first_difference(w, grid, parity=-1)
    return math.sqrt(grid.dx * float(np.dot(h, h) + np.dot(w, w) + np.dot(wx, wx)))


@dataclass(frozen=True)
class ErrorSeries:
    """Deviation-from-inviscid history y(t) for one dissipation strength."""

    times: np.ndarray
    y: np.ndarray
    epsilon: float


@dataclass(frozen=True)
class ErrorFit:
    """Least-squares gain K of the law y(t) = K * epsilon * t."""

    epsilon: float
    gain: float
    window: Tuple[float, float]
    n_points: int


@dataclass(frozen=True)
class ErrorStudyResult:
    series: Tuple[ErrorSeries, ...]
    fits: Tuple[ErrorFit, ...]


def _run_for_study(config: RunConfig) -> List[FieldPair]:
    return evolve(config)


def error_study(
    base_config: RunConfig,
    epsilons: Sequence[float],
    workers: int = 1,
) -> ErrorStudyResult:
    """Deviation of dissipative runs from the epsilon = 0 run.

    All runs share the grid, step, and initial data of base_config; only
    epsilon varies.  The fitted gain uses the window t >= 1 with y below
    10% of the initial-data norm, before the linear law saturates.
    """
    if len(epsilons) == 0:
        raise ConfigError("error study needs at least one epsilon")
    if any(e <= 0.0 for e in epsilons):
        raise ConfigError("error-study epsilons must be positive")
    if not base_config.snapshot_times:
        raise ConfigError("error study needs snapshot_times in the base config")

    configs = [replace(base_config, epsilon=0.0)]
    configs += [replace(base_config, epsilon=float(e)) for e in epsilons]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_for_study, configs))
    else:
        runs = [evolve(c) for c in configs]
    reference, dissipative = runs[0], runs[1:]

    init = make_initial(base_config.ic, base_config.grid)
    zero = FieldPair(np.zeros(base_config.grid.n), np.zeros(base_config.grid.n), 0.0)
    ic_norm = error_norm(init, zero, base_config.grid)

    series = []
    fits = []
    times = np.array([s.t for s in reference])
    for eps, snaps in zip(epsilons, dissipative):
        y = np.array(
            [error_norm(a, b, base_config.grid) for a, b in zip(snaps, reference)]
        )
        series.append(ErrorSeries(times=times.copy(), y=y, epsilon=float(eps)))
        mask = (times >= 1.0) & (y > 0.0) & (y < 0.1 * ic_norm)
        if not np.any(mask):
            raise NumericsError(
                f"no usable fit window for epsilon = {eps}; "
                "request snapshots between onset and saturation"
            )
        xt = float(eps) * times[mask]
        gain = float(np.dot(y[mask], xt) / np.dot(xt, xt))
        fits.append(
            ErrorFit(
                epsilon=float(eps),
                gain=gain,
                window=(float(times[mask].min()), float(times[mask].max())),
                n_points=int(np.count_nonzero(mask)),
            )
        )
    return ErrorStudyResult(series=tuple(series), fits=tuple(fits))


# ---------------------------------------------------------------------------
# classical shock reference

def shallow_water_shock_reference(c: float) -> Tuple[float, float, float]:
    """Jump state (eta, u) and speed of the classical shock moving at c.

    The downstream state is rest; the upstream state is the same pair the
    traveling-wave tails approach, so the dispersive-dissipative front and
    the classical shock carry identical far fields.
    """
    if not c >= 1.0:
        raise ValueError(f"shock reference needs c >= 1, got {c}")
    u0 = 0.5 * (3.0 * c - math.sqrt(c * c + 8.0))
    return u0 / (c - u0), u0, c


# ---------------------------------------------------------------------------
# profile injection and front tracking

def sample_profile_on_grid(
    profile,
    grid: Grid,
    blend_center: Optional[float] = None,
    blend_width: float = 10.0,
) -> FieldPair:
    """Interpolate a traveling-wave profile onto a grid as initial data.

    Outside the sampled span the fields are held at their end values (the
    two constant tails).  On periodic grids the upstream plateau must be
    ramped back to zero somewhere far from the front: passing blend_center
    multiplies both fields by (1 + tanh((x - blend_center)/blend_width))/2.
    """
    x = grid.x
    xq = np.clip(x, profile.xi[0], profile.xi[-1])
    eta = CubicSpline(profile.xi, profile.eta)(xq)
    u = CubicSpline(profile.xi, profile.u)(xq)
    if blend_center is not None:
        ramp = 0.5 * (1.0 + np.tanh((x - blend_center) / blend_width))
        eta = eta * ramp
        u = u * ramp
    return FieldPair(eta, u, 0.0)


def front_position(state: FieldPair, grid: Grid, level: float) -> float:
    """x of the rightmost downward crossing of eta through level."""
    s = state.eta - level
    idx = np.nonzero((s[:-1] >= 0.0) & (s[1:] < 0.0))[0]
    if idx.size == 0:
        raise NumericsError(f"no downward crossing of eta = {level}")
    i = idx[-1]
    x = grid.x
    return float(x[i] + grid.dx * s[i] / (s[i] - s[i + 1]))


def shape_misfit(
    reference: FieldPair,
    evolved: FieldPair,
    grid: Grid,
    shift: float = 0.0,
    window: Optional[Tuple[float, float]] = None,
) -> float:
    """Discrete L2 distance between evolved and the shifted reference.

    The reference fields are spline-translated by shift before comparing,
    so a pure traveling wave scores near zero when shift = c*t.  window
    restricts the comparison to [lo, hi] in x.
    """
    x = grid.x
    mask = np.ones(grid.n, dtype=bool)
    if window is not None:
        mask = (x >= window[0]) & (x <= window[1])
    xs = np.clip(x[mask] - shift, x[0], x[-1])
    d_eta = evolved.eta[mask] - CubicSpline(x, reference.eta)(xs)
    d_u = evolved.u[mask] - CubicSpline(x, reference.u)(xs)
    return math.sqrt(grid.dx * float(np.dot(d_eta, d_eta) + np.dot(d_u, d_u)))


# ---------------------------------------------------------------------------
# export

def write_snapshot_csv(state: FieldPair, grid: Grid, path) -> None:
    x = grid.x
    with open(path, "w") as fh:
        fh.write("x,eta,u\n")
        for i in range(grid.n):
            fh.write(f"{x[i]:.17g},{state.eta[i]:.17g},{state.u[i]:.17g}\n")


def snapshot_manifest(config: RunConfig, state: FieldPair) -> dict:
    return {
        "system": config.system.value,
        "delta": config.delta,
        "epsilon": config.epsilon,
        "dx": config.grid.dx,
        "dt": config.dt,
        "t": state.t,
    }


def write_snapshot_manifest(config: RunConfig, state: FieldPair, path) -> None:
    with open(path, "w") as fh:
        json.dump(snapshot_manifest(config, state), fh, indent=2)
        fh.write("\n")


def write_error_series_csv(series: ErrorSeries, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,y\n")
        for t, y in zip(series.times, series.y):
            fh.write(f"{t:.17g},{y:.17g}\n")
