"""Computation and diagnosis of bore profiles of the dissipative system.

The profile system (see waveform)

    u' = v / (delta c)
    v' = c u + u / (u - c) - u**2 / 2 + epsilon v / (delta c)

connects the upstream equilibrium (u_tail, 0) at xi -> -inf to the rest
state (0, 0) at xi -> +inf.  The rest state is a saddle, so the orbit is
computed by seeding a point on its stable manifold a small offset away
from the origin and integrating backward in xi until the upstream
equilibrium is resolved; a short forward stretch captures the remaining
decay to zero.  Backward integration is the numerically benign direction:
transverse errors contract instead of exploding.

The forward stretch is deliberately short.  Riding the stable manifold
forward amplifies transverse noise like exp((lambda_plus - lambda_minus) xi),
so its span is capped where that amplification would reach one percent of
the decaying signal.

Sampling density is tied to the fastest linear rate of the problem so the
exported samples support trapezoid quadrature of the dissipation integral
to the documented 1e-3 and robust bracketing of extrema.  Extrema and
inflections are refined by secant iteration on a local cubic interpolant
through neighboring samples (tolerance 1e-12 on the bracket).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import IntegrationError, NumericsError
from .radau import RadauStepper
from .waveform import (
    ComplexConjugate,
    RealPair,
    RegimeKind,
    WaveParams,
    classify_regime,
    dissipated_energy,
    equilibria,
    lyapunov_value,
    saddle_eigenvalues,
    solitary_amplitude,
    surface_elevation,
    tail_eigenvalues,
)

# Sample spacing = _STEP_FRACTION / (fastest linear rate); keeps the
# trapezoid dissipation error below 1e-3 and gives ~40 samples per
# oscillation period.
_STEP_FRACTION = 0.04
_CORE_FACTOR = 10.0  # extrema/inflection counting ignores the last decades of tail
_FIT_CEILING = 1e-3  # tail fits use samples within this fraction of the jump
_REFINE_TOL = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    xi: float
    u: float
    v: float


@dataclass(frozen=True)
class ProfileOptions:
    """Knobs for integrate_profile; defaults reproduce the shipped figures.

    seed_offset: distance |u| of the stable-manifold seed from the origin;
    None picks 1e-8 * u_tail.  tail_tol is the upstream stopping tolerance,
    max_span aborts runaway sweeps, rtol/atol go to the integrator.
    """

    seed_offset: Optional[float] = None
    rtol: float = 1e-10
    atol: float = 1e-12
    max_span: float = 2000.0
    tail_tol: float = 1e-8


@dataclass
class Profile:
    """Sampled heteroclinic orbit, xi ascending, front crossing at xi = 0.

    u decays to 0 on the right and approaches u_tail on the left; eta is
    the reconstructed surface elevation u / (c - u).  seed_offset records
    the offset actually used.
    """

    params: WaveParams
    xi: np.ndarray
    u: np.ndarray
    v: np.ndarray
    eta: np.ndarray
    seed_offset: float
    options: ProfileOptions = field(default_factory=ProfileOptions)


@dataclass(frozen=True)
class ShapeReport:
    """Qualitative anatomy of a profile.

    maxima/minima are refined interior extrema as (xi, u) pairs, ordered by
    xi.  inflections are the xi locations of curvature sign changes of u.
    tail_decay_rate_plus is the fitted exponential rate of u as
    xi -> +inf (negative, approximately the stable saddle eigenvalue);
    tail_decay_rate_minus the fitted rate of |u - u_tail| (or of its
    oscillation envelope) as xi -> -inf (positive).  tail_frequency is the
    fitted oscillation frequency upstream; it is None for monotone
    profiles, and both upstream fits are None for oscillatory profiles so
    close to the damping threshold that too few peaks are resolved.
    """

    regime_observed: str
    maxima: List[Tuple[float, float]]
    minima: List[Tuple[float, float]]
    inflections: List[float]
    tail_decay_rate_plus: float
    tail_decay_rate_minus: Optional[float]
    tail_frequency: Optional[float]


@dataclass(frozen=True)
class BoundsCheck:
    """Result of a pointwise containment check along a profile."""

    passed: bool
    worst: float  # most negative margin observed (>= -slack when passed)
    slack: float


def vector_field(u, v, params: WaveParams):
    """Right-hand side (u', v') of the profile system; vectorized."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    dc = params.delta * params.c
    du = v / dc
    dv = params.c * u + u / (u - params.c) - 0.5 * u * u + params.epsilon * v / dc
    return du, dv


def _field(y, params):
    u, v = y[..., 0], y[..., 1]
    du, dv = vector_field(u, v, params)
    return np.stack([du, dv], axis=-1)


def _jacobian(y, params):
    u = y[0]
    dc = params.delta * params.c
    d = u - params.c
    return np.array(
        [
            [0.0, 1.0 / dc],
            [params.c - params.c / (d * d) - u, params.epsilon / dc],
        ]
    )


def manifold_seed(params: WaveParams, offset: float) -> PhasePoint:
    """Point on the stable manifold of the origin, a distance offset in u.

    The manifold is tangent to the eigenvector (1, delta c lambda_minus),
    so the seed is (offset, delta c lambda_minus offset): fourth quadrant,
    u > 0 > v.  offset must satisfy 0 < offset < 0.01 u_tail for the
    linearization to be trustworthy.
    """
    u_tail = equilibria(params).u_tail
    if not (0.0 < offset < 0.01 * u_tail):
        raise ValueError(
            f"seed offset must lie in (0, {0.01 * u_tail:.3e}), got {offset}"
        )
    lam_minus, _ = saddle_eigenvalues(params)
    return PhasePoint(xi=0.0, u=offset, v=params.delta * params.c * lam_minus * offset)


def _rate_scales(params: WaveParams):
    """(fastest rate, oscillation frequency or None) of the linearizations."""
    spec = tail_eigenvalues(params)
    if isinstance(spec.tail, ComplexConjugate):
        tail_rate = math.hypot(spec.tail.real, spec.tail.imag)
        freq = spec.tail.imag
    else:
        tail_rate = spec.tail.plus
        freq = None
    return max(abs(spec.lambda_minus), tail_rate), freq, spec


def integrate_profile(params: WaveParams, options: Optional[ProfileOptions] = None) -> Profile:
    """Compute the bore profile for params; see the module docstring.

    Raises ValueError for epsilon = 0 (the dissipationless system has no
    bore-type traveling wave: the orbit through the seed is homoclinic and
    never settles on the upstream state) and IntegrationError when the
    sweep exhausts max_span, the stepper breaks down, or the orbit strays
    next to the singular line u = c.
    """
    if params.epsilon <= 0.0:
        raise ValueError(
            "bore profiles need epsilon > 0; the dissipationless system has "
            "no traveling wave of bore type"
        )
    opts = options or ProfileOptions()
    eq = equilibria(params)
    u0 = eq.u_tail
    offset = opts.seed_offset if opts.seed_offset is not None else 1e-8 * u0
    seed = manifold_seed(params, offset)
    regime = classify_regime(params)
    rate, _, spec = _rate_scales(params)
    max_step = _STEP_FRACTION / rate
    y_seed = np.array([seed.u, seed.v])

    def f_back(t, y):
        return -_field(np.asarray(y, dtype=float), params)

    def j_back(t, y):
        return -_jacobian(y, params)

    def f_fwd(t, y):
        return _field(np.asarray(y, dtype=float), params)

    def j_fwd(t, y):
        return _jacobian(y, params)

    # Backward sweep: reversed field integrated forward in tau = -xi.
    stepper = RadauStepper(
        f_back, j_back, 0.0, y_seed, rtol=opts.rtol, atol=opts.atol,
        max_step=max_step, first_step=1e-3 / rate,
    )
    taus = [0.0]
    ys = [y_seed.copy()]
    dev_peaks: List[float] = []
    oscillatory = regime.kind is RegimeKind.OSCILLATORY
    while True:
        res = stepper.step()
        taus.append(res.t_new)
        ys.append(res.y_new)
        u_new, v_new = res.y_new
        if u_new > params.c - 1e-9 * params.c:
            raise IntegrationError(
                f"orbit approached the singular line u = c at xi = {-res.t_new}"
            )
        dev_new = abs(u_new - u0)
        if not oscillatory:
            if dev_new + abs(v_new) < opts.tail_tol:
                break
        else:
            if len(ys) >= 3:
                d2 = abs(ys[-2][0] - u0)
                d3 = abs(ys[-3][0] - u0)
                if d2 >= dev_new and d2 > d3:
                    dev_peaks.append(d2)
                    if (
                        len(dev_peaks) >= 3
                        and dev_peaks[-1] < opts.tail_tol
                        and dev_peaks[-3] > dev_peaks[-2] > dev_peaks[-1]
                    ):
                        break
        if res.t_new > opts.max_span:
            raise IntegrationError(
                f"upstream state not reached within max_span = {opts.max_span}; "
                f"|u - u_tail| = {dev_new:.3e} at xi = {-res.t_new:.1f}"
            )

    # Forward stretch: capped where transverse noise would reach 1% of the
    # decaying signal (growth ~ exp((lambda_plus - lambda_minus) xi)).
    lam_minus, lam_plus = spec.lambda_minus, spec.lambda_plus
    fwd_span = min(6.0 / abs(lam_minus), math.log(0.01 / opts.rtol) / (lam_plus - lam_minus))
    stepper_f = RadauStepper(
        f_fwd, j_fwd, 0.0, y_seed, rtol=opts.rtol, atol=opts.atol,
        max_step=min(max_step, fwd_span / 8.0), first_step=1e-3 / rate,
    )
    taus_f = []
    ys_f = []
    while fwd_span - stepper_f.t > 1e-9 / rate:
        if stepper_f.t + stepper_f.h > fwd_span:
            stepper_f.h = fwd_span - stepper_f.t
        res = stepper_f.step()
        if res.y_new[0] <= 0.0:
            break
        taus_f.append(res.t_new)
        ys_f.append(res.y_new)

    xi = np.concatenate([-np.array(taus[::-1]), np.array(taus_f)])
    y_all = np.vstack([np.array(ys[::-1]), np.array(ys_f)]) if ys_f else np.array(ys[::-1])
    u_arr = y_all[:, 0]
    v_arr = y_all[:, 1]

    # Normalize: xi = 0 at the rightmost crossing of u = u_tail / 2.
    half = 0.5 * u0
    shift = None
    for i in range(len(u_arr) - 2, -1, -1):
        if (u_arr[i] - half) * (u_arr[i + 1] - half) <= 0.0 and u_arr[i] != u_arr[i + 1]:
            f = _local_interpolant(xi, u_arr, i)
            shift = _refine_root(lambda x: f(x) - half, xi[i], xi[i + 1])
            break
    if shift is None:
        raise IntegrationError("profile never crosses half the upstream velocity")
    xi = xi - shift

    eta = surface_elevation(u_arr, params.c)
    return Profile(
        params=params,
        xi=xi,
        u=u_arr,
        v=v_arr,
        eta=np.asarray(eta, dtype=float),
        seed_offset=offset,
        options=opts,
    )


def _local_interpolant(x, y, i):
    """Cubic fit through the samples around the bracket (i, i+1)."""
    lo = max(0, i - 1)
    hi = min(len(x), i + 3)
    if hi - lo < 2:
        raise NumericsError("not enough samples to interpolate")
    deg = min(3, hi - lo - 1)
    x0 = x[i]
    coeffs = np.polyfit(x[lo:hi] - x0, y[lo:hi], deg)

    def f(t):
        return float(np.polyval(coeffs, t - x0))

    return f


def _refine_root(f, a, b, tol=_REFINE_TOL, max_iter=80):
    """Secant iteration with bisection fallback on the bracket [a, b]."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    x0, x1, f0, f1 = a, b, fa, fb
    for _ in range(max_iter):
        if f1 != f0:
            x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        else:
            x2 = 0.5 * (a + b)
        if not (min(a, b) <= x2 <= max(a, b)):
            x2 = 0.5 * (a + b)
        f2 = f(x2)
        if fa * f2 <= 0.0:
            b, fb = x2, f2
        else:
            a, fa = x2, f2
        if abs(x1 - x2) < tol or f2 == 0.0:
            return x2
        x0, f0, x1, f1 = x1, f1, x2, f2
    return 0.5 * (a + b)


def _core_mask(profile: Profile) -> np.ndarray:
    """Samples far enough from both tails to count features reliably."""
    u0 = equilibria(profile.params).u_tail
    cut = _CORE_FACTOR * profile.options.tail_tol
    dev_left = np.abs(profile.u - u0) + np.abs(profile.v)
    dev_right = np.abs(profile.u) + np.abs(profile.v)
    return (dev_left > cut) & (dev_right > cut)


def _refined_sign_changes(x, y, mask):
    """(location, refined y=0 crossing sign) for sign flips of y within mask."""
    out = []
    for i in range(len(x) - 1):
        if not (mask[i] and mask[i + 1]):
            continue
        if y[i] == 0.0 or y[i] * y[i + 1] >= 0.0:
            continue
        f = _local_interpolant(x, y, i)
        root = _refine_root(f, x[i], x[i + 1])
        out.append((root, i, -1.0 if y[i] > 0.0 else 1.0))
    return out


def shape_report(profile: Profile) -> ShapeReport:
    """Extrema, inflections, tail rates, and frequency of a profile.

    Feature counting is restricted to the core region (deviations above
    10 * tail_tol) so that roundoff wiggles in the resolved tails are not
    reported as structure.
    """
    params = profile.params
    u0 = equilibria(params).u_tail
    mask = _core_mask(profile)
    xi, u, v = profile.xi, profile.u, profile.v

    maxima: List[Tuple[float, float]] = []
    minima: List[Tuple[float, float]] = []
    for root, i, direction in _refined_sign_changes(xi, v, mask):
        fu = _local_interpolant(xi, u, i)
        if direction < 0.0:  # v goes + -> -: u has a maximum
            maxima.append((root, fu(root)))
        else:
            minima.append((root, fu(root)))

    _, dv = vector_field(u, v, params)
    inflections = [root for root, _, _ in _refined_sign_changes(xi, np.asarray(dv), mask)]

    rate_plus = _fit_right_tail(profile, u0)
    oscillatory = len(maxima) + len(minima) > 0
    if oscillatory:
        rate_minus, freq = _fit_oscillatory_tail(profile, u0, maxima, minima)
    else:
        rate_minus = _fit_monotone_tail(profile, u0)
        freq = None

    return ShapeReport(
        regime_observed="oscillatory" if oscillatory else "monotone",
        maxima=maxima,
        minima=minima,
        inflections=inflections,
        tail_decay_rate_plus=rate_plus,
        tail_decay_rate_minus=rate_minus,
        tail_frequency=freq,
    )


def _fit_right_tail(profile: Profile, u0: float) -> float:
    sel = (profile.u > 0.0) & (profile.u < _FIT_CEILING * u0) & (profile.xi > 0.0)
    if np.count_nonzero(sel) < 4:
        sel = (profile.u > 0.0) & (profile.u < 10.0 * _FIT_CEILING * u0) & (profile.xi > 0.0)
    if np.count_nonzero(sel) < 4:
        raise NumericsError("fewer than 4 samples in the downstream tail")
    return float(np.polyfit(profile.xi[sel], np.log(profile.u[sel]), 1)[0])


def _fit_monotone_tail(profile: Profile, u0: float) -> float:
    dev = np.abs(profile.u - u0)
    sel = (dev > 0.0) & (dev < _FIT_CEILING * u0) & (profile.xi < 0.0)
    if np.count_nonzero(sel) < 4:
        raise NumericsError("fewer than 4 samples in the upstream tail")
    return float(np.polyfit(profile.xi[sel], np.log(dev[sel]), 1)[0])


def _fit_oscillatory_tail(profile, u0, maxima, minima):
    """Envelope decay rate and crest frequency; either may be None when the
    spiral is so heavily damped that too few peaks rise above the noise."""
    peaks = sorted(maxima + minima)
    amps = np.array([abs(val - u0) for _, val in peaks])
    locs = np.array([loc for loc, _ in peaks])
    tail_tol = profile.options.tail_tol
    for ceiling in (0.05, 0.2, np.inf):
        band = (amps > 3.0 * tail_tol) & (amps < ceiling * u0)
        if np.count_nonzero(band) >= 4:
            break
    rate = None
    if np.count_nonzero(band) >= 2:
        rate = float(np.polyfit(locs[band], np.log(amps[band]), 1)[0])

    max_locs = np.array([loc for loc, val in sorted(maxima)])
    sel = np.array(
        [abs(val - u0) > 3.0 * tail_tol for loc, val in sorted(maxima)], dtype=bool
    )
    usable = max_locs[sel]
    if usable.size < 3:
        usable = max_locs
    freq = None
    if usable.size >= 2:
        freq = float(2.0 * math.pi / np.mean(np.diff(usable)))
    return rate, freq


def energy_identity_residual(profile: Profile) -> float:
    """Relative mismatch of epsilon * integral(u'**2) vs the closed form.

    Trapezoid quadrature over the profile samples; documented to stay
    below 1e-3 for tail_tol <= 1e-8 at the shipped sampling density.
    """
    params = profile.params
    du = profile.v / (params.delta * params.c)
    lhs = params.epsilon * float(np.trapezoid(du * du, profile.xi))
    rhs = dissipated_energy(params.c)
    return abs(lhs - rhs) / rhs


def check_triangle_confinement(profile: Profile) -> BoundsCheck:
    """Verify the orbit stays in the invariant triangle of monotone bores.

    The triangle is bounded by v = 0 above, u = 0 on the left, and the
    line v = slope (u - u_tail) below, slope = delta c Lambda_minus.  Only
    meaningful in the regularized regime; oscillatory parameters raise
    ValueError.  The slack absorbs integration error (10x tolerance).
    """
    params = profile.params
    regime = classify_regime(params)
    if regime.kind is not RegimeKind.REGULARIZED:
        raise ValueError("triangle confinement applies to regularized profiles only")
    spec = tail_eigenvalues(params)
    assert isinstance(spec.tail, RealPair)
    slope = spec.triangle_slope
    u0 = equilibria(params).u_tail
    v_scale = float(np.max(np.abs(profile.v))) if profile.v.size else 1.0
    slack = 10.0 * (profile.options.atol + profile.options.rtol * max(u0, v_scale))
    margins = np.minimum.reduce(
        [
            -profile.v,  # v <= 0
            profile.u,  # u >= 0
            u0 - profile.u,  # u <= u_tail
            profile.v - slope * (profile.u - u0),  # above the lower edge
        ]
    )
    worst = float(np.min(margins))
    return BoundsCheck(passed=worst >= -slack, worst=worst, slack=slack)


def check_derivative_bounds(profile: Profile) -> BoundsCheck:
    """Verify the a priori two-sided bounds on v = delta c u'.

    Lower bound -(delta c / epsilon)(2 - 3 c**(2/3) + c**2) (the global
    maximum of the conservative force times delta c / epsilon); upper bound
    (delta c / epsilon)(c / (c - u_bar) + c**2 / 2).  Requires epsilon > 0.
    """
    params = profile.params
    if params.epsilon <= 0.0:
        raise ValueError("derivative bounds require epsilon > 0")
    c = params.c
    dc_over_eps = params.delta * c / params.epsilon
    lower = -dc_over_eps * (2.0 - 3.0 * c ** (2.0 / 3.0) + c * c)
    u_bar = solitary_amplitude(c)
    upper = dc_over_eps * (c / (c - u_bar) + 0.5 * c * c)
    v_scale = float(np.max(np.abs(profile.v))) if profile.v.size else 1.0
    slack = 10.0 * (profile.options.atol + profile.options.rtol * v_scale)
    worst = float(min(np.min(profile.v - lower), np.min(upper - profile.v)))
    return BoundsCheck(passed=worst >= -slack, worst=worst, slack=slack)


def lyapunov_backstep(profile: Profile) -> float:
    """Largest decrease of the Lyapunov value between consecutive samples.

    Along an exact orbit V = v**2/2 + G(u) is nondecreasing in xi, so the
    return value is pure integration noise; zero when monotonicity holds
    exactly at sample resolution.
    """
    vals = lyapunov_value(profile.u, profile.v, profile.params)
    drops = np.diff(vals)
    worst = float(np.min(drops)) if drops.size else 0.0
    return max(0.0, -worst)


def polyline_self_intersections(x: np.ndarray, y: np.ndarray, max_points: int = 1500) -> int:
    """Count transversal self-intersections of a sampled planar curve.

    Decimates to at most max_points vertices, then checks every
    non-adjacent segment pair with a vectorized orientation test.  Used to
    confirm computed orbits are simple curves.
    """
    n = len(x)
    if n > max_points:
        idx = np.linspace(0, n - 1, max_points).astype(int)
        x, y = x[idx], y[idx]
        n = max_points
    p = np.column_stack([x, y])
    a = p[:-1]
    b = p[1:]
    m = len(a)

    def cross(o, d, q):
        return (d[..., 0] - o[..., 0]) * (q[..., 1] - o[..., 1]) - (
            d[..., 1] - o[..., 1]
        ) * (q[..., 0] - o[..., 0])

    count = 0
    chunk = 256
    for i0 in range(0, m, chunk):
        i1 = min(i0 + chunk, m)
        ai = a[i0:i1, None, :]
        bi = b[i0:i1, None, :]
        aj = a[None, :, :]
        bj = b[None, :, :]
        d1 = cross(ai, bi, aj)
        d2 = cross(ai, bi, bj)
        d3 = cross(aj, bj, ai)
        d4 = cross(aj, bj, bi)
        hit = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)
        jj = np.arange(m)[None, :]
        ii = np.arange(i0, i1)[:, None]
        hit &= jj > ii + 1  # skip self and adjacent pairs, count each pair once
        count += int(np.count_nonzero(hit))
    return count


def write_profile_csv(profile: Profile, path) -> None:
    """Write samples as CSV with header xi,u,v,eta at full double precision."""
    with open(path, "w") as fh:
        fh.write("xi,u,v,eta\n")
        for row in zip(profile.xi, profile.u, profile.v, profile.eta):
            fh.write(",".join(f"{val:.17g}" for val in row) + "\n")


def load_profile_csv(path) -> dict:
    """Read a profile CSV back into column arrays; schema-checked."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    expected = ("xi", "u", "v", "eta")
    if data.dtype.names != expected:
        raise ValueError(
            f"profile CSV must have columns {','.join(expected)}, got {data.dtype.names}"
        )
    return {name: np.atleast_1d(data[name]) for name in expected}


def shape_report_dict(report: ShapeReport) -> dict:
    """JSON-ready dictionary form of a ShapeReport."""
    return {
        "regime_observed": report.regime_observed,
        "maxima": [[float(a), float(b)] for a, b in report.maxima],
        "minima": [[float(a), float(b)] for a, b in report.minima],
        "inflections": [float(a) for a in report.inflections],
        "tail_decay_rate_plus": float(report.tail_decay_rate_plus),
        "tail_decay_rate_minus": None
        if report.tail_decay_rate_minus is None
        else float(report.tail_decay_rate_minus),
        "tail_frequency": None
        if report.tail_frequency is None
        else float(report.tail_frequency),
    }


def write_shape_report_json(report: ShapeReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(shape_report_dict(report), fh, indent=2)
        fh.write("\n")
