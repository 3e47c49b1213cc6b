"""Stationary points of rational potentials in up to four variables.

The gradient of a :class:`~lgmirror.laurent.RationalPotential` is cleared of
denominators and negative exponents, giving a square polynomial system whose
solutions away from the recorded excluded loci are the honest critical
points.  Three engines feed one candidate pool:

* batched multistart Newton from random points in two charts (plain
  coordinates and ``x = exp(z)``),
* for one or two variables, complete root enumeration by resultant
  elimination (Sylvester determinants sampled at Fourier nodes, coefficient
  recovery by FFT, companion-matrix roots, back-substitution), and
* total-degree homotopy continuation tracking every Bezout path from a
  random binomial start system, which is complete for the larger systems
  the resultant cannot reach.

Every candidate is polished, checked against the rational gradient,
deduplicated and classified by its Hessian determinant.  For systems small
enough to certify, the count of distinct torus roots found before the
excluded-locus discard is compared with the Bernstein bound computed from
Newton polytope areas.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .laurent import (
    LaurentPoly,
    RationalPotential,
    clear_denominators,
    compiled_evaluator,
)


class CriticalError(Exception):
    """Base class for solver errors."""


class DimensionTooLarge(CriticalError):
    """The potential has more variables than the solver supports."""


class NonConvergence(CriticalError):
    """Reserved for callers that want to escalate solver shortfall flags."""


class AmbiguousClustering(UserWarning):
    """Two value clusters are separated by less than ten tolerances."""


MAX_VARIABLES = 4


@dataclass(frozen=True)
class SearchConfig:
    """Multistart and acceptance parameters for ``stationary_points``.

    Multistart Newton runs in two charts: the plain coordinate chart (which
    can reach roots with zero coordinates) and an exponential chart
    ``x = exp(z)`` that pushes coordinate hyperplanes to infinity, which
    keeps degenerate origin roots from swallowing every start.  Each chart
    gets ``starts`` random initial points.
    """

    seed: int = 0
    starts: int = 400
    log_radius: float = 1.5
    torus_log_radius: float = 3.5
    newton_steps: int = 60
    residual_tol: float = 1e-8
    dedup_tol: float = 1e-6
    pole_tol: float = 1e-8
    workers: int = 1
    use_resultant: bool = True
    use_homotopy: bool = True
    homotopy_steps: int = 160
    max_paths: int = 4000


@dataclass(frozen=True)
class CriticalPoint:
    """An isolated stationary point with its classification data."""

    location: tuple[complex, ...]
    value: complex
    hessian_det: complex
    nondegenerate: bool
    residual: float


@dataclass(frozen=True)
class ValueCluster:
    """A group of stationary points sharing one critical value."""

    value: complex
    members: tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.members)


@dataclass
class StationaryResult:
    """Accepted points plus the solver's completeness diagnostics."""

    points: list[CriticalPoint]
    discarded: list[tuple[complex, ...]] = field(default_factory=list)
    torus_root_count: int = 0
    bernstein_bound: int | None = None
    flags: list[str] = field(default_factory=list)


def _arg_key(z: complex) -> float:
    if abs(z) == 0.0:
        return 0.0
    return cmath.phase(z) % (2.0 * math.pi)


def _point_sort_key(location, value):
    return (abs(value), _arg_key(value),
            tuple((z.real, z.imag) for z in location))


# ---------------------------------------------------------------------------
# cleared gradient systems


class _ClearedSystem:
    """Compiled polynomial gradient system with scale evaluators."""

    def __init__(self, potential: RationalPotential):
        self.potential = potential
        self.vars = potential.vars
        self.n = len(self.vars)
        self.gradient = potential.gradient()
        self.polys, self.excluded = clear_denominators(self.gradient)
        self.polys = [p.with_vars(self.vars) for p in self.polys]
        self.evals = [compiled_evaluator(p) for p in self.polys]
        self.scales = [compiled_evaluator(_abs_poly(p)) for p in self.polys]
        self.jac = [[compiled_evaluator(p.partial_derivative(v)) for v in self.vars]
                    for p in self.polys]
        self.excluded = [e.with_vars(self.vars) for e in self.excluded]
        self.excl_evals = [compiled_evaluator(e) for e in self.excluded]
        self.excl_scales = [compiled_evaluator(_abs_poly(e)) for e in self.excluded]

    def residuals(self, pts: np.ndarray) -> np.ndarray:
        """Componentwise |g_i| / max(1, scale_i), shape (batch,)."""
        out = np.zeros(pts.shape[:-1])
        with np.errstate(all="ignore"):
            for ev, sc in zip(self.evals, self.scales):
                scale = np.maximum(1.0, np.abs(sc(np.abs(pts).astype(complex))))
                out = np.maximum(out, np.abs(ev(pts)) / scale.real)
        return out

    def values(self, pts: np.ndarray) -> np.ndarray:
        return np.stack([ev(pts) for ev in self.evals], axis=-1)

    def jacobian(self, pts: np.ndarray) -> np.ndarray:
        rows = [np.stack([col(pts) for col in row], axis=-1) for row in self.jac]
        return np.stack(rows, axis=-2)

    def near_excluded(self, point: np.ndarray, tol: float) -> bool:
        pt = point[None, :]
        mag = np.abs(pt).astype(complex)
        for ev, sc in zip(self.excl_evals, self.excl_scales):
            scale = max(1.0, float(np.abs(sc(mag))[0]))
            if abs(ev(pt)[0]) <= tol * scale:
                return True
        return False


def _abs_poly(poly: LaurentPoly) -> LaurentPoly:
    return LaurentPoly(poly.vars, {e: abs(c) for e, c in poly.terms.items()})


def _batch_solve(jac: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a batch of square systems, falling back to pseudoinverse."""
    try:
        return np.linalg.solve(jac, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        jac = np.where(np.isfinite(jac), jac, 0.0)
        rhs = np.where(np.isfinite(rhs), rhs, 0.0)
        return (np.linalg.pinv(jac) @ rhs[..., None])[..., 0]


def _newton_refine(system: _ClearedSystem, pts: np.ndarray, steps: int) -> np.ndarray:
    pts = np.array(pts, dtype=complex)
    with np.errstate(all="ignore"):
        for _ in range(steps):
            f = system.values(pts)
            jac = system.jacobian(pts)
            delta = _batch_solve(jac, f)
            cap = 10.0 * (1.0 + np.abs(pts).max(axis=-1, keepdims=True))
            norm = np.abs(delta).max(axis=-1, keepdims=True)
            factor = np.minimum(1.0, cap / np.maximum(norm, 1e-30))
            pts = pts - delta * factor
            bad = ~np.isfinite(pts)
            if bad.any():
                pts[bad.any(axis=-1)] = np.inf
    return pts


def _newton_refine_log(system: _ClearedSystem, z0: np.ndarray, steps: int) -> np.ndarray:
    """Newton iteration in exponential coordinates x = exp(z)."""
    z = np.array(z0, dtype=complex)
    with np.errstate(all="ignore"):
        for _ in range(steps):
            x = np.exp(z)
            f = system.values(x)
            jac = system.jacobian(x) * x[..., None, :]
            delta = _batch_solve(jac, f)
            norm = np.abs(delta).max(axis=-1, keepdims=True)
            factor = np.minimum(1.0, 3.0 / np.maximum(norm, 1e-30))
            z = z - delta * factor
            z = np.clip(z.real, -40.0, 40.0) + 1j * z.imag
            bad = ~np.isfinite(z)
            if bad.any():
                z[bad.any(axis=-1)] = 40.0
    return np.exp(z)


# ---------------------------------------------------------------------------
# total-degree homotopy continuation


def _total_degree_homotopy(system: _ClearedSystem, config: SearchConfig,
                           rng: np.random.Generator,
                           flags: list[str]) -> np.ndarray:
    """Track all Bezout paths from a random start system to the gradient.

    The start system is ``x_i^{d_i} = b_i`` with random nonzero right sides,
    blended as ``(1-s) * gamma * G + s * F`` with a random complex ``gamma``
    so paths stay simple for ``s < 1`` with probability one.  Steps adapt
    per path: a step is accepted only when the correctors contract onto a
    point close to the tangent prediction, otherwise it is halved, which
    keeps paths from being captured by the large slow-shrinking root
    clusters that multiple roots of the target system grow in the endgame.
    Paths that blow up head to roots at infinity; their last good state is
    still returned (polish sorts survivors from strays).
    """
    n = system.n
    degrees = [max(sum(e) for e in p.terms) for p in system.polys]
    total = 1
    for d in degrees:
        total *= max(d, 1)
    if total > config.max_paths:
        flags.append(f"bezout_paths_capped:{total}>{config.max_paths}")
        return np.zeros((0, n), dtype=complex)
    targets = np.array([(0.5 + rng.random()) * np.exp(2j * np.pi * rng.random())
                        for _ in range(n)])
    gamma = np.exp(2j * np.pi * rng.random())
    # all combinations of d_i-th roots of b_i
    root_lists = []
    for i, d in enumerate(degrees):
        d = max(d, 1)
        base = targets[i] ** (1.0 / d)
        root_lists.append(base * np.exp(2j * np.pi * np.arange(d) / d))
    grids = np.meshgrid(*root_lists, indexing="ij")
    paths = np.stack([g.ravel() for g in grids], axis=-1)

    dvec = np.array(degrees, dtype=float)
    diag_idx = np.arange(n)

    def start_values(x):
        return x ** dvec - targets

    def blended(x, s):
        return ((1.0 - s)[:, None] * gamma * start_values(x)
                + s[:, None] * system.values(x))

    def blended_jacobian(x, s):
        jac = s[:, None, None] * system.jacobian(x)
        diag = (1.0 - s)[:, None] * gamma * dvec * x ** np.maximum(dvec - 1.0, 0.0)
        jac[:, diag_idx, diag_idx] += diag
        return jac

    count = len(paths)
    h_init = 1.0 / max(config.homotopy_steps, 8)
    s = np.zeros(count)
    h = np.full(count, h_init)
    stalled = np.zeros(count, dtype=bool)
    sweep_cap = 24 * max(config.homotopy_steps, 8)
    with np.errstate(all="ignore"):
        for _ in range(sweep_cap):
            active = ~stalled & (s < 1.0)
            if not active.any():
                break
            idx = np.flatnonzero(active)
            x = paths[idx]
            s0 = s[idx]
            s1 = np.minimum(s0 + h[idx], 1.0)
            ds = s1 - s0
            # Euler predictor along the Davidenko field, then correctors
            rhs = system.values(x) - gamma * start_values(x)
            velocity = _batch_solve(blended_jacobian(x, s0), rhs)
            predicted = x - ds[:, None] * velocity
            corrected = predicted
            for _ in range(2):
                f = blended(corrected, s1)
                corrected = corrected - _batch_solve(blended_jacobian(corrected, s1), f)
            final_step = _batch_solve(blended_jacobian(corrected, s1),
                                      blended(corrected, s1))
            corrected = corrected - final_step
            mag = np.abs(corrected).max(axis=-1)
            scale = 1.0 + np.where(np.isfinite(mag), mag, 0.0)
            settled = np.abs(final_step).max(axis=-1) <= 1e-9 * scale
            motion = np.abs(predicted - x).max(axis=-1)
            drift = np.abs(corrected - predicted).max(axis=-1)
            nearby = drift <= 2.0 * motion + 1e-6 * scale
            accept = np.isfinite(mag) & (mag <= 1e7) & settled & nearby
            good = idx[accept]
            paths[good] = corrected[accept]
            s[good] = s1[accept]
            h[good] = np.minimum(h[good] * 1.3, 4.0 * h_init)
            bad = idx[~accept]
            h[bad] *= 0.5
            stalled[bad] |= h[bad] < 1e-7
    mags = np.abs(paths).max(axis=-1)
    return paths[np.isfinite(mags) & (mags <= 1e7)]


# ---------------------------------------------------------------------------
# resultant enumeration for one and two variables


def _poly_coeff_vector(poly: LaurentPoly, var: str) -> list[LaurentPoly]:
    """Ascending coefficient list of a nonnegative-exponent poly in ``var``."""
    grouped = poly.coefficients_in(var)
    degree = max(grouped) if grouped else 0
    zero = LaurentPoly.zero(poly.vars)
    return [grouped.get(k, zero) for k in range(degree + 1)]


def _roots_of_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Roots from an ascending coefficient vector, trimming tiny leads."""
    coeffs = np.asarray(coeffs, dtype=complex)
    top = np.abs(coeffs).max() if coeffs.size else 0.0
    if top == 0.0:
        return np.zeros(0, dtype=complex)
    keep = coeffs.size
    while keep > 1 and abs(coeffs[keep - 1]) < 1e-10 * top:
        keep -= 1
    trimmed = coeffs[:keep]
    if trimmed.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(trimmed[::-1])


def _univariate_candidates(system: _ClearedSystem) -> np.ndarray:
    (poly,) = system.polys
    grouped = poly.coefficients_in(system.vars[0])
    degree = max(grouped) if grouped else 0
    coeffs = np.zeros(degree + 1, dtype=complex)
    for e, c in grouped.items():
        coeffs[e] = c.constant_value() if not c.is_zero() else 0.0
    roots = _roots_of_coeffs(coeffs)
    return roots[:, None]


def _bivariate_candidates(system: _ClearedSystem, flags: list[str]) -> np.ndarray:
    g1, g2 = system.polys
    tvar, uvar = system.vars
    c1 = _poly_coeff_vector(g1, uvar)
    c2 = _poly_coeff_vector(g2, uvar)
    d1, d2 = len(c1) - 1, len(c2) - 1
    if d1 == 0 or d2 == 0:
        # one equation does not involve the eliminated variable: solve it
        # directly in the kept variable, then back-substitute
        single = g1 if d1 == 0 else g2
        t_roots = _roots_of_coeffs(_scalar_coeffs(single, tvar))
        return _back_substitute(system, t_roots, tvar, uvar)
    deg_t = max(g1.degree_range(tvar)[1] * d2 + g2.degree_range(tvar)[1] * d1, 1)
    m = 1 << max(3, (deg_t + 1).bit_length())
    radius = 1.3
    nodes = radius * np.exp(2j * np.pi * np.arange(m) / m)
    size = d1 + d2
    sylvester = np.zeros((m, size, size), dtype=complex)
    vals1 = [compiled_evaluator(p.restrict_vars((tvar,)))(nodes[:, None]) for p in c1]
    vals2 = [compiled_evaluator(p.restrict_vars((tvar,)))(nodes[:, None]) for p in c2]
    for row in range(d2):
        for k in range(d1 + 1):
            sylvester[:, row, row + k] = vals1[d1 - k]
    for row in range(d1):
        for k in range(d2 + 1):
            sylvester[:, d2 + row, row + k] = vals2[d2 - k]
    dets = np.linalg.det(sylvester)
    # samples use e^{+2 pi i mk/M}, so the forward transform recovers c_k
    spectrum = np.fft.fft(dets) / m
    coeffs = spectrum[:deg_t + 1] / radius ** np.arange(deg_t + 1)
    top = np.abs(coeffs).max()
    if top == 0.0 or np.abs(dets).max() < 1e-12:
        flags.append("resultant_vanishes")
        return np.zeros((0, 2), dtype=complex)
    t_roots = _roots_of_coeffs(coeffs)
    return _back_substitute(system, t_roots, tvar, uvar)


def _scalar_coeffs(poly: LaurentPoly, var: str) -> np.ndarray:
    vec = _poly_coeff_vector(poly, var)
    return np.array([0.0 if p.is_zero() else p.constant_value() for p in vec],
                    dtype=complex)


def _back_substitute(system: _ClearedSystem, t_roots: np.ndarray,
                     tvar: str, uvar: str) -> np.ndarray:
    """Fiber roots over each resultant root, taken from both equations.

    Near a multiple resultant root one equation's fiber polynomial can
    degenerate to a tiny multiple of the wrong factor, so candidates are
    collected from both; polishing and the residual filter drop the
    spurious ones.
    """
    fiber_evals = []
    for poly in system.polys:
        coeff_polys = _poly_coeff_vector(poly, uvar)
        fiber_evals.append([compiled_evaluator(p.restrict_vars((tvar,)))
                            for p in coeff_polys])
    pairs = []
    for t0 in np.atleast_1d(t_roots):
        at_t0 = np.array([[t0]])
        for evals in fiber_evals:
            fiber = np.array([ev(at_t0)[0] for ev in evals])
            for u0 in _roots_of_coeffs(fiber):
                pairs.append((t0, u0))
    if not pairs:
        return np.zeros((0, 2), dtype=complex)
    return np.array(pairs, dtype=complex)


# ---------------------------------------------------------------------------
# Bernstein bound from Newton polytopes


def _hull(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _hull_area2(points: list[tuple[int, int]]) -> int:
    hull = _hull(points)
    if len(hull) < 3:
        return 0
    doubled = 0
    for (x1, y1), (x2, y2) in zip(hull, hull[1:] + hull[:1]):
        doubled += x1 * y2 - x2 * y1
    return abs(doubled)


def bernstein_bound(polys: list[LaurentPoly]) -> int | None:
    """Generic torus-root count of a square system in one or two variables.

    For one equation this is the length of the exponent range; for two it is
    the mixed area ``area(P+Q) - area(P) - area(Q)`` of the Newton polygons.
    Returns None for larger systems.
    """
    if len(polys) == 1:
        exps = [e[0] for e in polys[0].terms]
        return (max(exps) - min(exps)) if exps else 0
    if len(polys) != 2:
        return None
    supp_a = [tuple(e) for e in polys[0].terms]
    supp_b = [tuple(e) for e in polys[1].terms]
    if not supp_a or not supp_b:
        return 0
    summed = [(a[0] + b[0], a[1] + b[1]) for a in supp_a for b in supp_b]
    doubled = _hull_area2(summed) - _hull_area2(supp_a) - _hull_area2(supp_b)
    return doubled // 2


# ---------------------------------------------------------------------------
# hessians and classification


def hessian_matrix(potential: RationalPotential | LaurentPoly,
                   location) -> np.ndarray:
    """Second partials evaluated at a point, as a dense complex matrix."""
    pot = potential if isinstance(potential, RationalPotential) else RationalPotential(potential)
    n = len(pot.vars)
    grads = pot.gradient()
    matrix = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            entry = grads[i].partial_derivative(pot.vars[j]).eval(location)
            matrix[i, j] = entry
            matrix[j, i] = entry
    return matrix


def classify_hessian(potential: RationalPotential | LaurentPoly, location,
                     tol: float = 1e-8) -> tuple[complex, bool]:
    """(determinant, nondegenerate?) with a scale-aware degeneracy test."""
    matrix = hessian_matrix(potential, location)
    n = matrix.shape[0]
    det = complex(np.linalg.det(matrix))
    scale = float(np.linalg.norm(matrix) / math.sqrt(n)) if n else 0.0
    if scale == 0.0:
        return det, False
    return det, abs(det) > tol * scale ** n


# ---------------------------------------------------------------------------
# the solver


def _random_starts(rng: np.random.Generator, count: int, n: int,
                   log_radius: float) -> np.ndarray:
    mags = np.exp(rng.uniform(-log_radius, log_radius, size=(count, n)))
    args = rng.uniform(0.0, 2.0 * np.pi, size=(count, n))
    return mags * np.exp(1j * args)


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    """Cluster near-identical rows, keeping one representative per cluster."""
    if len(points) == 0:
        return points
    order = sorted(range(len(points)),
                   key=lambda i: tuple((z.real, z.imag) for z in points[i]))
    kept: list[np.ndarray] = []
    for i in order:
        candidate = points[i]
        scale = max(1.0, float(np.abs(candidate).max()))
        if all(np.abs(candidate - other).max() > tol * max(scale, float(np.abs(other).max()))
               for other in kept):
            kept.append(candidate)
    return np.array(kept)


def stationary_points(potential: RationalPotential | LaurentPoly,
                      config: SearchConfig | None = None) -> StationaryResult:
    """Locate, verify and classify the isolated critical points.

    Points within ``config.pole_tol`` of an excluded locus (denominator
    zeros, inverted coordinates) are reported in ``discarded`` rather than
    accepted, as are points whose rational gradient fails to vanish relative
    to the critical value even though the cleared system does.
    ``torus_root_count`` counts distinct roots of the cleared system with
    all coordinates nonzero, before those discards, which is the number the
    Bernstein bound speaks about.
    """
    config = config or SearchConfig()
    pot = potential if isinstance(potential, RationalPotential) else RationalPotential(potential)
    n = len(pot.vars)
    if n > MAX_VARIABLES:
        raise DimensionTooLarge(
            f"{n} variables exceeds the supported maximum of {MAX_VARIABLES}")
    if n == 0:
        return StationaryResult(points=[])
    system = _ClearedSystem(pot)
    flags: list[str] = []
    if any(p.is_zero() for p in system.polys):
        flags.append("zero_gradient_component")
        return StationaryResult(points=[], flags=flags)

    rng = np.random.default_rng(config.seed)
    candidates: list[np.ndarray] = []
    if config.use_resultant and n <= 2:
        enumerated = (_univariate_candidates(system) if n == 1
                      else _bivariate_candidates(system, flags))
        if len(enumerated):
            candidates.append(_newton_refine(system, enumerated, 30))
    if config.use_homotopy:
        tracked = _total_degree_homotopy(system, config, rng, flags)
        if len(tracked):
            candidates.append(_newton_refine(system, tracked, 30))
    if config.starts > 0:
        starts = _random_starts(rng, config.starts, n, config.log_radius)
        log_starts = (rng.uniform(-config.torus_log_radius, config.torus_log_radius,
                                  size=(config.starts, n))
                      + 1j * rng.uniform(0.0, 2.0 * np.pi, size=(config.starts, n)))
        chunk = max(1, math.ceil(config.starts / max(1, config.workers)))
        for begin in range(0, config.starts, chunk):
            batch = starts[begin:begin + chunk]
            candidates.append(_newton_refine(system, batch, config.newton_steps))
            log_batch = log_starts[begin:begin + chunk]
            candidates.append(_newton_refine_log(system, log_batch, config.newton_steps))

    if candidates:
        stacked = np.concatenate(candidates, axis=0)
    else:
        stacked = np.zeros((0, n), dtype=complex)
    finite = stacked[np.isfinite(stacked).all(axis=1)]
    if len(finite):
        res = system.residuals(finite)
        finite = finite[res < config.residual_tol]
    distinct = _dedup(finite, config.dedup_tol)

    torus_count = sum(1 for row in distinct if np.all(np.abs(row) > 1e-8))
    bound = bernstein_bound(system.polys) if n <= 2 else None
    if bound is not None and torus_count < bound:
        flags.append(f"torus_roots_below_bound:{torus_count}<{bound}")

    accepted: list[CriticalPoint] = []
    discarded: list[tuple[complex, ...]] = []
    for row in distinct:
        location = tuple(complex(z) for z in row)
        if system.near_excluded(row, config.pole_tol):
            discarded.append(location)
            continue
        point_map = dict(zip(system.vars, location))
        value = complex(pot.eval(point_map))
        grad_res = max(abs(g.eval(point_map)) for g in system.gradient)
        # the cleared equations can vanish spuriously where their leading
        # terms all degenerate, so the rational gradient is the arbiter
        if not cmath.isfinite(value) or \
                grad_res > config.residual_tol * max(1.0, abs(value)):
            discarded.append(location)
            continue
        det, nondeg = classify_hessian(pot, point_map)
        accepted.append(CriticalPoint(location, value, det, nondeg,
                                      float(grad_res)))
    accepted.sort(key=lambda p: _point_sort_key(p.location, p.value))
    return StationaryResult(points=accepted, discarded=discarded,
                            torus_root_count=torus_count,
                            bernstein_bound=bound, flags=flags)


def critical_values(points: list[CriticalPoint],
                    rel_tol: float = 1e-6) -> list[ValueCluster]:
    """Cluster the values of stationary points, ordered by (|v|, arg v).

    Emits :class:`AmbiguousClustering` when two clusters sit closer than ten
    tolerances, since their identity then depends on the chosen cutoff.
    """
    if not points:
        return []
    order = sorted(range(len(points)),
                   key=lambda i: (abs(points[i].value), _arg_key(points[i].value),
                                  points[i].value.real, points[i].value.imag))
    clusters: list[list[int]] = []
    centroids: list[complex] = []
    for i in order:
        v = points[i].value
        placed = False
        for c, centroid in enumerate(centroids):
            if abs(v - centroid) <= rel_tol * max(1.0, abs(centroid), abs(v)):
                clusters[c].append(i)
                members = [points[j].value for j in clusters[c]]
                centroids[c] = sum(members) / len(members)
                placed = True
                break
        if not placed:
            clusters.append([i])
            centroids.append(v)
    for a in range(len(centroids)):
        for b in range(a + 1, len(centroids)):
            gap = abs(centroids[a] - centroids[b])
            scale = max(1.0, abs(centroids[a]), abs(centroids[b]))
            if gap < 10.0 * rel_tol * scale:
                warnings.warn(
                    f"clusters {a} and {b} are within ten tolerances "
                    f"(gap {gap:.3e})", AmbiguousClustering)
    out = [ValueCluster(centroids[c], tuple(sorted(clusters[c])))
           for c in range(len(clusters))]
    out.sort(key=lambda cl: (abs(cl.value), _arg_key(cl.value)))
    return out
