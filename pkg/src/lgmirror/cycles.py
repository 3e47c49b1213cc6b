"""Vanishing-cycle geometry for two-variable superpotentials.

A two-variable rational superpotential whose fibers are quadratic in one
variable presents each fiber as a double cover of the other variable's
plane.  The cover is branched where the discriminant of the quadratic
vanishes, so a fiber is described, up to the cover data, by a finite set
of branch points moving in the base plane as the fiber value moves.

This module extracts vanishing cycles from that picture in four stages:

1. ``branch_polynomial`` computes the discriminant of the cleared fiber
   equation in the cover variable, a polynomial in the base variable whose
   roots are the branch points.
2. ``track_branch_points`` follows the branch points along an arc of fiber
   values with adaptive steps, keeping persistent indices by optimal
   nearest matching, and records which pair of branch points collides when
   the arc ends at a critical value.
3. ``pullback_arc`` drags a short segment between a colliding pair back to
   the reference fiber through a composition of localized bump moves, one
   per tracking step, producing the connecting arc whose double-cover lift
   is the vanishing cycle.
4. ``intersection_number`` counts geometric intersections of two cycles
   from their connecting arcs: a shared branch-point endpoint meets in the
   single ramification point above it, and each essential transverse
   crossing of the arcs meets in both sheet lifts, after empty bigons and
   endpoint lenses are removed so only essential crossings remain.

``vanishing_cycle_set`` drives the four stages for a whole critical locus
and ``quiver_matrix`` assembles the upper-triangular intersection matrix
in the configured cycle order (clockwise by argument of the critical value
around the reference fiber, ties broken by magnitude and branch pair).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .laurent import LaurentPoly, RationalPotential


class CycleError(Exception):
    """Base class for vanishing-cycle extraction failures."""


class NotQuadratic(CycleError):
    """The cleared fiber equation is not degree 2 in the cover variable."""


class TrackingAmbiguity(CycleError):
    """Branch-point matching could not be certified within the step budget."""


class UnexpectedCollision(CycleError):
    """Branch points collided strictly before the end of the arc."""


class NonTransverse(CycleError):
    """Connecting arcs overlap along a segment even after perturbation."""


# ---------------------------------------------------------------------------
# fiber specification and branch polynomial


@dataclass(frozen=True)
class FiberSpec:
    """A two-variable potential viewed as a family of double covers.

    ``cover_variable`` is the variable in which the cleared fiber equation
    ``numerator - value * denominator = 0`` is quadratic; fibers project to
    the ``base_variable`` plane as two-sheeted branched covers.
    """

    potential: RationalPotential
    cover_variable: str
    base_variable: str

    def __post_init__(self):
        pot = self.potential
        if isinstance(pot, LaurentPoly):
            pot = RationalPotential.from_poly(pot)
            object.__setattr__(self, "potential", pot)
        if len(pot.vars) != 2:
            raise CycleError(
                f"fiber potentials must use exactly two variables, got {pot.vars}")
        expected = {self.cover_variable, self.base_variable}
        if set(pot.vars) != expected or self.cover_variable == self.base_variable:
            raise CycleError(
                f"variables {pot.vars} do not match cover/base names {expected}")


def _value_operand(spec: FiberSpec, value):
    """Coerce a fiber value (number or polynomial) for clearing."""
    if isinstance(value, LaurentPoly):
        return value
    return complex(value)


def _cleared_quadratic(spec: FiberSpec, value):
    """Coefficients (A, B, C) of the cleared fiber equation in the cover.

    Negative cover exponents are shifted away first, which does not change
    the branch locus because the cover variable's zero locus is already
    excluded wherever it appears in a denominator or Laurent tail.
    """
    pot = spec.potential
    cover = spec.cover_variable
    cleared = pot.num - _value_operand(spec, value) * pot.den
    lo, _hi = cleared.degree_range(cover)
    if lo < 0:
        cleared = cleared * LaurentPoly.monomial(cleared.vars,
                                                 tuple(-lo if v == cover else 0
                                                       for v in cleared.vars))
    by_exp = cleared.coefficients_in(cover)
    degree = max(by_exp) if by_exp else 0
    if degree != 2 or by_exp[2].is_zero():
        raise NotQuadratic(
            f"cleared fiber equation has degree {degree} in {cover!r}, need 2")
    zero = LaurentPoly.zero(cleared.vars)
    return by_exp.get(2, zero), by_exp.get(1, zero), by_exp.get(0, zero)


def branch_polynomial(spec: FiberSpec, value) -> LaurentPoly:
    """Discriminant of the cleared fiber equation in the cover variable.

    The roots in the base variable are the branch points of the double
    cover at the given fiber ``value``.  ``value`` may be a number or a
    ``LaurentPoly`` in a fresh variable, in which case the result keeps
    that variable and can be compared coefficient by coefficient.

    Raises ``NotQuadratic`` when the cover degree is not exactly 2.
    """
    a, b, c = _cleared_quadratic(spec, value)
    disc = b * b - (a * c) * 4.0
    keep = tuple(v for v in disc.vars if v != spec.cover_variable)
    return disc.restrict_vars(keep)


def _coeff_profile(spec: FiberSpec):
    """Precompute the branch polynomial's coefficients as value-polynomials.

    Returns ``(exponents, coefficient polys, value name)`` so the tracker
    can produce a numeric coefficient array per fiber value with two small
    polynomial evaluations per coefficient instead of redoing the clearing
    algebra at every step.
    """
    name = "value"
    while name in spec.potential.vars:
        name += "_"
    sym = LaurentPoly.variable(name, (name,))
    disc = branch_polynomial(spec, sym)
    lo, hi = disc.degree_range(spec.base_variable)
    if lo < 0:
        shift = tuple(-lo if v == spec.base_variable else 0 for v in disc.vars)
        disc = disc * LaurentPoly.monomial(disc.vars, shift)
        lo, hi = disc.degree_range(spec.base_variable)
    by_exp = disc.coefficients_in(spec.base_variable)
    exps = sorted(by_exp, reverse=True)
    return exps, [by_exp[e] for e in exps], name


def _branch_coeff_array(profile, value: complex) -> np.ndarray:
    """Descending numeric coefficient array at one fiber value."""
    exps, polys, name = profile
    out = np.zeros(exps[0] + 1, dtype=complex)
    for e, poly in zip(exps, polys):
        point = {v: (value if v == name else 1.0) for v in poly.vars}
        out[exps[0] - e] = complex(poly.eval(point))
    return out


def _roots_trimmed(coeffs: np.ndarray, expected: int | None) -> np.ndarray:
    mags = np.abs(coeffs)
    top = mags.max()
    if top == 0.0:
        raise TrackingAmbiguity("branch polynomial vanished identically")
    keep = np.nonzero(mags > 1e-13 * top)[0]
    trimmed = coeffs[keep[0]:]
    if expected is not None and len(trimmed) - 1 != expected:
        raise TrackingAmbiguity(
            f"branch count changed from {expected} to {len(trimmed) - 1}; "
            "a branch point escaped to infinity along the arc")
    return np.roots(trimmed)


def base_punctures(spec: FiberSpec) -> np.ndarray:
    """Base-plane points over which the double cover degenerates.

    Collects roots of the leading cover coefficient (a sheet escapes to
    infinity there) and base values where numerator and denominator share
    a cover root (the cleared equation gains spurious solutions on the
    pole locus).  The latter come from the resultant in the cover
    variable, evaluated numerically on a sample circle and interpolated.
    """
    pot = spec.potential
    sym_name = "value"
    while sym_name in pot.vars:
        sym_name += "_"
    a, _b, _c = _cleared_quadratic(spec, LaurentPoly.variable(sym_name, (sym_name,)))
    if a.uses_var(sym_name):
        raise CycleError("cover degeneracy moves with the fiber value; "
                         "puncture set is not constant along arcs")
    found: list[complex] = []
    lead = a.restrict_vars((spec.base_variable,))
    found.extend(_poly_roots_safe(lead, spec.base_variable))
    if pot.den_factors:
        found.extend(_common_root_bases(pot.num, pot.den, spec))
    clusters: list[list[complex]] = []
    for z in sorted(found, key=lambda w: (round(w.real, 9), round(w.imag, 9))):
        for members in clusters:
            if abs(z - members[0]) < 1e-6 * (1.0 + abs(z)):
                members.append(z)
                break
        else:
            clusters.append([z])
    return np.array([sum(m) / len(m) for m in clusters], dtype=complex)


def _poly_roots_safe(poly: LaurentPoly, var: str) -> list[complex]:
    lo, hi = poly.degree_range(var)
    if hi <= max(lo, 0) or poly.is_zero():
        return []
    coeffs = np.zeros(hi - max(lo, 0) + 1, dtype=complex)
    for exps, c in poly.terms.items():
        e = exps[poly.vars.index(var)]
        if e >= max(lo, 0):
            coeffs[hi - e] = c
    return [complex(r) for r in _roots_trimmed(coeffs, None)]


def _common_root_bases(num: LaurentPoly, den: LaurentPoly, spec: FiberSpec) -> list[complex]:
    """Base values where numerator and denominator share a cover root.

    The resultant in the cover variable is a polynomial in the base
    variable; rather than expanding a symbolic Sylvester determinant it is
    evaluated at enough sample points and recovered by interpolation.
    """
    u, t = spec.cover_variable, spec.base_variable
    nd = {e: p for e, p in num.coefficients_in(u).items()}
    dd = {e: p for e, p in den.coefficients_in(u).items()}
    m = max(nd)
    n = max(dd)
    if min(min(nd), min(dd)) < 0:
        raise CycleError("negative cover exponents in numerator or denominator")
    deg_t = (num.degree_range(t)[1] * max(n, 0)
             + den.degree_range(t)[1] * max(m, 0)) + 1
    if n == 0:
        return _poly_roots_safe(den.restrict_vars((t,)), t)
    samples = 1.37 * np.exp(2j * np.pi * (np.arange(deg_t + 1) + 0.21) / (deg_t + 1))
    dets = np.empty(deg_t + 1, dtype=complex)
    for k, tv in enumerate(samples):
        point_n = [complex(nd.get(e, LaurentPoly.zero(num.vars)).eval(
            {v: (tv if v == t else 1.0) for v in num.vars})) for e in range(m + 1)]
        point_d = [complex(dd.get(e, LaurentPoly.zero(den.vars)).eval(
            {v: (tv if v == t else 1.0) for v in den.vars})) for e in range(n + 1)]
        syl = np.zeros((m + n, m + n), dtype=complex)
        for row in range(n):
            syl[row, row:row + m + 1] = point_n[::-1]
        for row in range(m):
            syl[n + row, row:row + n + 1] = point_d[::-1]
        dets[k] = np.linalg.det(syl)
    vander = np.vander(samples, deg_t + 1)
    coeffs = np.linalg.solve(vander, dets)
    mags = np.abs(coeffs)
    if mags.max() == 0.0:
        raise CycleError("numerator and denominator share a factor")
    keep = np.nonzero(mags > 1e-10 * mags.max())[0]
    if keep[0] == len(coeffs) - 1:
        return []
    return [complex(r) for r in np.roots(coeffs[keep[0]:])]


# ---------------------------------------------------------------------------
# arcs in the fiber-value plane


@dataclass(frozen=True)
class ArcSpec:
    """A path of fiber values from a reference fiber to a target.

    Kinds: ``straight`` interpolates linearly; ``arc_below_real`` adds a
    parabolic dip into the lower half plane whose depth scales with the
    endpoint separation, keeping the path speed bounded at both ends so
    adaptive tracking can enter and leave the arc; ``polyline`` walks the
    waypoints in order with arclength-proportional speed.
    """

    kind: str
    start: complex
    end: complex
    depth: float = 0.35
    waypoints: tuple = ()

    def __post_init__(self):
        if self.kind not in ("straight", "arc_below_real", "polyline"):
            raise CycleError(f"unknown arc kind {self.kind!r}")
        if self.kind == "polyline":
            nodes = (self.start, *self.waypoints, self.end)
            lengths = [abs(b - a) for a, b in zip(nodes, nodes[1:])]
            if sum(lengths) == 0.0:
                raise CycleError("polyline arcs need nonzero total length")
            cum = np.concatenate([[0.0], np.cumsum(lengths)])
            object.__setattr__(self, "_nodes", np.array(nodes, dtype=complex))
            object.__setattr__(self, "_knots", cum / cum[-1])

    def point(self, s: float) -> complex:
        s = min(max(float(s), 0.0), 1.0)
        if self.kind == "polyline":
            knots = self._knots
            nodes = self._nodes
            k = int(np.searchsorted(knots, s, side="right") - 1)
            k = min(k, len(nodes) - 2)
            width = knots[k + 1] - knots[k]
            frac = 0.0 if width == 0.0 else (s - knots[k]) / width
            return complex(nodes[k] + frac * (nodes[k + 1] - nodes[k]))
        base = self.start + (self.end - self.start) * s
        if self.kind == "straight":
            return base
        dip = self.depth * abs(self.end - self.start)
        return base - 4j * dip * s * (1.0 - s)


@dataclass(frozen=True)
class StepConfig:
    """Adaptive stepping and collision thresholds for branch tracking.

    ``collision_tol`` is the pair gap that counts as a collision while the
    arc is still in flight.  ``terminal_window`` is the looser gap used at
    the very end of the arc: a double root of the numeric branch
    polynomial splits by roughly the square root of machine epsilon, so
    demanding the in-flight tolerance at the endpoint would never fire.
    """

    initial_step: float = 1e-3
    max_step: float = 0.02
    growth: float = 1.5
    min_step: float = 1e-14
    collision_tol: float = 1e-5
    terminal_window: float = 1e-3
    zero_cutoff_ratio: float = 1e-4
    early_fraction: float = 0.95
    max_samples: int = 40000
    record_at: tuple = ()


@dataclass(frozen=True)
class Collision:
    """A branch-point pair that merged at the end of an arc."""

    pair: tuple[int, int]
    location: complex
    value: complex
    position: float


@dataclass
class BranchBraid:
    """Branch-point trajectories along one arc, with persistent indices.

    ``samples`` holds ``(s, fiber value, positions)`` triples; the
    positions array keeps one row per branch point in the index order
    fixed at the arc start (sorted by real then imaginary part).
    """

    arc: ArcSpec
    samples: list
    collisions: tuple
    punctures: np.ndarray
    recorded: dict = field(default_factory=dict)

    @property
    def start_points(self) -> np.ndarray:
        return self.samples[0][2]

    @property
    def end_points(self) -> np.ndarray:
        return self.samples[-1][2]

    @property
    def collision(self):
        """First recorded collision as ``(pair, value)``, or None."""
        if not self.collisions:
            return None
        first = self.collisions[0]
        return first.pair, first.value


def _pair_gaps(pts: np.ndarray) -> np.ndarray:
    return np.abs(pts[:, None] - pts[None, :]) + np.diag(np.full(len(pts), np.inf))


def track_branch_points(spec: FiberSpec, arc: ArcSpec,
                        step: StepConfig | None = None) -> BranchBraid:
    """Follow branch points along an arc of fiber values.

    Steps adapt per branch point: a step is rejected and halved whenever
    any point moves more than a third of its own nearest-neighbor gap
    (which certifies the optimal matching is the true continuation) or
    more than 0.3 times its distance to the nearest puncture (so linear
    interpolation between samples never cuts across a puncture).  Arcs
    ending at 0 stop at a small cutoff radius and extrapolate the limit
    configuration linearly.

    Collisions tighter than ``collision_tol`` before ``early_fraction`` of
    the arc raise ``UnexpectedCollision``; at the arc end every pair inside
    the terminal window is recorded, which captures several simultaneous
    collisions when distinct critical points share one critical value.
    Past ``early_fraction``, a pair already inside the terminal window also
    stops throttling the step size: its members are converging to one
    point, so certifying the matching between them adds nothing, and the
    terminal sweep settles their collision status from the final sample.
    """
    cfg = step or StepConfig()
    profile = _coeff_profile(spec)
    punctures = base_punctures(spec)
    start_value = arc.point(0.0)
    first = _roots_trimmed(_branch_coeff_array(profile, start_value), None)
    order = sorted(range(len(first)), key=lambda i: (first[i].real, first[i].imag))
    pts = first[order]
    count = len(pts)
    if count < 2:
        raise CycleError(f"need at least two branch points, found {count}")
    if _pair_gaps(pts).min() < cfg.collision_tol:
        raise CycleError("branch points already collide at the arc start")
    target_zero = abs(arc.end) < cfg.zero_cutoff_ratio * abs(arc.start)
    cutoff = cfg.zero_cutoff_ratio * abs(start_value)
    checkpoints = sorted(float(r) for r in cfg.record_at)
    recorded: dict = {}
    samples = [(0.0, start_value, pts.copy())]
    collided: dict[tuple[int, int], Collision] = {}
    fused: set[tuple[int, int]] = set()
    s = 0.0
    h = cfg.initial_step
    while s < 1.0:
        if len(samples) > cfg.max_samples:
            raise TrackingAmbiguity(
                f"sample budget {cfg.max_samples} exhausted at s={s:.6g}")
        s1 = min(s + h, 1.0)
        for cp in checkpoints:
            if s < cp <= s1:
                s1 = cp
                break
        value = arc.point(s1)
        if target_zero and abs(value) <= cutoff:
            lo, hi = s, s1
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if abs(arc.point(mid)) <= cutoff:
                    hi = mid
                else:
                    lo = mid
            s1 = hi
            value = arc.point(s1)
        fresh = _roots_trimmed(_branch_coeff_array(profile, value), count)
        cost = np.abs(pts[:, None] - fresh[None, :])
        rows, cols = linear_sum_assignment(cost)
        matched = fresh[cols[np.argsort(rows)]]
        move = np.abs(matched - pts)
        gaps = _pair_gaps(pts)
        for i, j in fused:
            # a pair converging to one limit no longer throttles the step
            # size; only its identity as a pair matters from here on
            gaps[i, j] = gaps[j, i] = np.inf
        caps = gaps.min(axis=1) / 3.0
        if len(punctures):
            pdist = np.abs(pts[:, None] - punctures[None, :]).min(axis=1)
            caps = np.minimum(caps, 0.3 * pdist)
        if (move > caps).any():
            if h <= cfg.min_step:
                raise TrackingAmbiguity(
                    f"step size exhausted at s={s:.6g}; branch motion cannot "
                    "be certified against the nearest-neighbor matching")
            h *= 0.5
            continue
        pts = matched
        s = s1
        samples.append((s, value, pts.copy()))
        if checkpoints and s in checkpoints:
            recorded[s] = pts.copy()
        h = min(h * cfg.growth, cfg.max_step)
        gaps = np.abs(pts[:, None] - pts[None, :])
        for i in range(count):
            for j in range(i + 1, count):
                if (i, j) in fused:
                    continue
                mid = 0.5 * (pts[i] + pts[j])
                if gaps[i, j] < cfg.collision_tol:
                    if s < cfg.early_fraction:
                        raise UnexpectedCollision(
                            f"pair {(i, j)} collided at s={s:.4g} "
                            f"(value {value:.6g}), before the arc end")
                    collided[(i, j)] = Collision((i, j), complex(mid),
                                                 value, s)
                    fused.add((i, j))
                elif (s >= cfg.early_fraction
                      and gaps[i, j] < cfg.terminal_window * (1.0 + abs(mid))):
                    # the pair is closing in on a terminal collision; stop
                    # throttling and let the final sweep judge its status
                    fused.add((i, j))
        if target_zero and abs(value) <= cutoff:
            break
    _terminal_collisions(samples, collided, cfg, target_zero, arc)
    ordered = tuple(sorted(collided.values(), key=lambda c: c.pair))
    return BranchBraid(arc, samples, ordered, punctures, recorded)


def _terminal_collisions(samples, collided, cfg: StepConfig,
                         target_zero: bool, arc: ArcSpec) -> None:
    """Record pairs that finish inside the terminal window.

    For zero targets the limit configuration is extrapolated linearly in
    the fiber value from the last two samples before applying the window.
    """
    if len(samples) < 2:
        return
    if target_zero:
        (_, va, pa), (_, vb, pb) = samples[-2], samples[-1]
        slope = (pb - pa) / (vb - va)
        final = pb - slope * vb
        value = 0j
    else:
        final = samples[-1][2]
        value = samples[-1][1]
    position = samples[-1][0]
    count = len(final)
    for i in range(count):
        for j in range(i + 1, count):
            if (i, j) in collided:
                continue
            mid = 0.5 * (final[i] + final[j])
            if abs(final[i] - final[j]) < cfg.terminal_window * (1.0 + abs(mid)):
                collided[(i, j)] = Collision((i, j), complex(mid),
                                             complex(arc.end if not target_zero
                                                     else 0.0), position)


# ---------------------------------------------------------------------------
# pulling connecting arcs back to the reference fiber


def _bump(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = (1.0 - r[inside] ** 2) ** 2
    return out


def pullback_arc(braid: BranchBraid, pair: tuple[int, int],
                 seed_vertices: int = 9, max_vertices: int = 20000) -> np.ndarray:
    """Drag the segment between a colliding pair back to the arc start.

    Each tracking step is undone by moving every vertex with compactly
    supported bump fields centered on the branch points.  A bump's radius
    is capped by 0.45 times the point's nearest-neighbor gap (so bumps of
    distinct points never overlap) and by 0.95 times its distance to the
    nearest puncture (so the move is an ambient isotopy of the punctured
    plane and the arc can never be dragged across a puncture).  Steps are
    split into substeps small relative to the radii, endpoints ride the
    pair exactly, and segments are refined by midpoint insertion wherever
    they are long relative to their clearance from branch points and
    punctures.
    """
    i, j = pair
    samples = braid.samples
    if len(samples) < 2:
        raise CycleError("braid too short to pull a connecting arc back")
    punctures = braid.punctures
    end = samples[-1][2]
    verts = end[i] + (end[j] - end[i]) * np.linspace(0.0, 1.0, seed_vertices)
    for k in range(len(samples) - 1, 0, -1):
        centers = samples[k][2].copy()
        target = samples[k - 1][2] - centers
        done = 0.0
        while done < 1.0 - 1e-12:
            radii = 0.45 * _pair_gaps(centers).min(axis=1)
            if len(punctures):
                pdist = np.abs(centers[:, None] - punctures[None, :]).min(axis=1)
                radii = np.minimum(radii, 0.95 * pdist)
            remaining = np.abs(target) * (1.0 - done)
            limit = np.max(remaining / (0.2 * radii))
            frac = (1.0 - done) if limit <= 1.0 else (1.0 - done) / limit
            delta = target * frac
            r = np.abs(verts[:, None] - centers[None, :]) / radii[None, :]
            verts = verts + (_bump(r) * delta[None, :]).sum(axis=1)
            centers = centers + delta
            done += frac
        prev = samples[k - 1][2]
        verts[0] = prev[i]
        verts[-1] = prev[j]
        anchors = np.concatenate([prev, punctures]) if len(punctures) else prev
        while len(verts) < max_vertices:
            mids = 0.5 * (verts[1:] + verts[:-1])
            clearance = np.abs(mids[:, None] - anchors[None, :]).min(axis=1)
            lengths = np.abs(verts[1:] - verts[:-1])
            needs = lengths > 0.5 * np.maximum(clearance, 1e-12)
            if not needs.any():
                break
            grown = np.empty(len(verts) + needs.sum(), dtype=complex)
            pos = 0
            for idx in range(len(verts) - 1):
                grown[pos] = verts[idx]
                pos += 1
                if needs[idx]:
                    grown[pos] = mids[idx]
                    pos += 1
            grown[pos] = verts[-1]
            verts = grown
        if len(verts) >= max_vertices:
            raise CycleError(
                f"connecting arc exceeded {max_vertices} vertices at step {k}")
    verts.flags.writeable = False
    return verts


# ---------------------------------------------------------------------------
# vanishing cycles and intersections


@dataclass(frozen=True)
class VanishingCycle:
    """A vanishing cycle presented by its connecting arc at the reference.

    The cycle itself is the full double-cover lift of ``connecting_arc``,
    a circle through the two ramification points above the matched branch
    points.  ``base_branch_points`` and ``punctures`` pin the reference
    fiber so intersection counts can verify two cycles are comparable.
    """

    label: str
    matched_pair: tuple[int, int]
    connecting_arc: np.ndarray
    source_critical_value: complex
    critical_point: tuple | None
    base_branch_points: np.ndarray
    punctures: np.ndarray

    @property
    def clearance(self) -> float:
        """Distance from the arc to the branch points it does not end on."""
        others = [w for idx, w in enumerate(self.base_branch_points)
                  if idx not in self.matched_pair]
        if not others:
            return math.inf
        return float(min(np.abs(self.connecting_arc - w).min() for w in others))


def _segment_crossings(P: np.ndarray, Q: np.ndarray, scale: float):
    """Transverse crossings of two polylines plus any collinear overlaps.

    Returns ``(crossings, overlap)`` where crossings are ``(u, v, point)``
    with fractional segment indices along each polyline, and ``overlap``
    flags a genuine shared segment of positive length.
    """
    p0, d1 = P[:-1], P[1:] - P[:-1]
    q0, d2 = Q[:-1], Q[1:] - Q[:-1]
    cross12 = d1.real[:, None] * d2.imag[None, :] - d1.imag[:, None] * d2.real[None, :]
    w = q0[None, :] - p0[:, None]
    floor = np.abs(d1)[:, None] * np.abs(d2)[None, :]
    transverse = np.abs(cross12) > 1e-13 * np.maximum(floor, 1e-300)
    wxd2 = w.real * d2.imag[None, :] - w.imag * d2.real[None, :]
    wxd1 = w.real * d1.imag[:, None] - w.imag * d1.real[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        su = np.where(transverse, wxd2 / cross12, np.nan)
        tv = np.where(transverse, wxd1 / cross12, np.nan)
    hits = transverse & (su >= -1e-12) & (su <= 1 + 1e-12) \
        & (tv >= -1e-12) & (tv <= 1 + 1e-12)
    found = []
    for a, b in zip(*np.nonzero(hits)):
        pt = p0[a] + su[a, b] * d1[a]
        found.append((a + su[a, b], b + tv[a, b], pt))
    found.sort(key=lambda c: c[0])
    deduped = []
    for c in found:
        if deduped and abs(c[2] - deduped[-1][2]) < 1e-11 * scale \
                and abs(c[0] - deduped[-1][0]) < 1.5:
            continue
        deduped.append(c)
    parallel = ~transverse \
        & (np.abs(wxd1) < 1e-10 * np.maximum(np.abs(d1)[:, None] ** 2, 1e-300))
    overlap = False
    for a, b in zip(*np.nonzero(parallel)):
        na = max(abs(d1[a]), 1e-300)
        t0 = ((q0[b] - p0[a]) / d1[a]).real
        t1 = ((q0[b] + d2[b] - p0[a]) / d1[a]).real
        lo, hi = min(t0, t1), max(t0, t1)
        if min(hi, 1.0) - max(lo, 0.0) > 1e-9 / na * scale:
            overlap = True
            break
    return deduped, overlap


def _winding(loop: np.ndarray, z: complex) -> float:
    shifted = np.append(loop, loop[0]) - z
    return float(np.angle(shifted[1:] / shifted[:-1]).sum() / (2.0 * np.pi))


def _piece(P: np.ndarray, u0: float, u1: float) -> np.ndarray:
    a0 = int(math.floor(u0))
    f0 = u0 - a0
    first = P[a0] + f0 * (P[min(a0 + 1, len(P) - 1)] - P[a0])
    pts = [first]
    a1 = int(math.floor(u1))
    pts.extend(P[a0 + 1:a1 + 1])
    f1 = u1 - a1
    if f1 > 1e-15 and a1 < len(P) - 1:
        pts.append(P[a1] + f1 * (P[a1 + 1] - P[a1]))
    return np.array(pts, dtype=complex)


def _region_empty(loop: np.ndarray, obstacles: np.ndarray, scale: float,
                  exclude: complex | None = None) -> bool:
    for z in obstacles:
        if exclude is not None and abs(z - exclude) < 1e-9 * (1.0 + abs(z)):
            continue
        if np.abs(loop - z).min() < 1e-10 * scale:
            return False
        if abs(_winding(loop, z)) > 0.5:
            return False
    return True


def _reduce_crossings(P, Q, crossings, shared_ends, obstacles, scale):
    """Remove empty bigons and endpoint lenses until only essential remain.

    A bigon is a pair of crossings adjacent along both arcs whose enclosed
    region contains no branch point or puncture; a lens is the innermost
    crossing next to a shared endpoint whose region against that endpoint
    is likewise empty (the endpoint itself sits on the region's boundary
    and is excluded from the test).
    """
    cr = list(crossings)
    changed = True
    while changed and cr:
        changed = False
        by_p = sorted(range(len(cr)), key=lambda k: cr[k][0])
        rank_q = {k: r for r, k in enumerate(
            sorted(range(len(cr)), key=lambda k: cr[k][1]))}
        for r in range(len(by_p) - 1):
            k1, k2 = by_p[r], by_p[r + 1]
            if abs(rank_q[k1] - rank_q[k2]) != 1:
                continue
            v0, v1 = sorted((cr[k1][1], cr[k2][1]))
            loop = np.concatenate([_piece(P, cr[k1][0], cr[k2][0]),
                                   _piece(Q, v0, v1)[::-1]])
            if _region_empty(loop, obstacles, scale):
                for k in sorted((k1, k2), reverse=True):
                    cr.pop(k)
                changed = True
                break
        if changed:
            continue
        for end_p, end_q in shared_ends:
            if not cr:
                break
            near_p = sorted(range(len(cr)), key=lambda k: cr[k][0],
                            reverse=(end_p == 1))
            near_q = sorted(range(len(cr)), key=lambda k: cr[k][1],
                            reverse=(end_q == 1))
            k = near_p[0]
            if near_q[0] != k:
                continue
            u_end = 0.0 if end_p == 0 else float(len(P) - 1)
            v_end = 0.0 if end_q == 0 else float(len(Q) - 1)
            u0, u1 = sorted((u_end, cr[k][0]))
            v0, v1 = sorted((v_end, cr[k][1]))
            loop = np.concatenate([_piece(P, u0, u1), _piece(Q, v0, v1)[::-1]])
            corner = P[0] if end_p == 0 else P[-1]
            if _region_empty(loop, obstacles, scale, exclude=complex(corner)):
                cr.pop(k)
                changed = True
                break
    return cr


def _same_reference(c1: VanishingCycle, c2: VanishingCycle) -> bool:
    a, b = c1.base_branch_points, c2.base_branch_points
    return len(a) == len(b) and bool(np.all(np.abs(a - b) < 1e-8 * (1.0 + np.abs(a))))


def intersection_number(c1: VanishingCycle, c2: VanishingCycle) -> int:
    """Geometric intersection count of two vanishing cycles.

    Cycles with the same critical value and the same matched pair are
    parallel copies over one connecting arc and count as disjoint.  Other
    pairs contribute one point per shared branch-point endpoint (the lifts
    meet exactly at the ramification point) and two per essential interior
    crossing (the lifts meet above it on both sheets), with removable
    crossings eliminated by the bigon and lens moves.

    Raises ``NonTransverse`` when the arcs share a segment of positive
    length and jittering one of them does not separate the overlap.
    """
    if not _same_reference(c1, c2):
        raise CycleError("cycles live over different reference fibers")
    pa, pb = c1.matched_pair, c2.matched_pair
    value_scale = 1.0 + max(abs(c1.source_critical_value), abs(c2.source_critical_value))
    if abs(c1.source_critical_value - c2.source_critical_value) < 1e-7 * value_scale \
            and tuple(pa) == tuple(pb):
        return 0
    shared = [(ep, eq) for ep in (0, 1) for eq in (0, 1) if pa[ep] == pb[eq]]
    obstacles = np.concatenate([c1.base_branch_points, c1.punctures])
    P = np.asarray(c1.connecting_arc)
    Q = np.asarray(c2.connecting_arc)
    scale = max(float(np.abs(P).max()), float(np.abs(Q).max()), 1e-30)
    for attempt in range(4):
        crossings, overlap = _segment_crossings(P, Q, scale)
        if not overlap:
            break
        jitter = 10.0 ** attempt * 1e-9 * scale
        phases = np.exp(1j * (0.7 + 2.399963 * np.arange(len(Q) - 2)))
        Q = Q.copy()
        Q[1:-1] = Q[1:-1] + jitter * phases
    else:
        raise NonTransverse("connecting arcs overlap along a segment; "
                            "perturbation attempts exhausted")
    ends = [P[0], P[-1], Q[0], Q[-1]]
    kept = [c for c in crossings
            if all(abs(c[2] - z) > 1e-9 * scale for z in ends)]
    essential = _reduce_crossings(P, Q, kept, shared, obstacles, scale)
    return len(shared) + 2 * len(essential)


# ---------------------------------------------------------------------------
# quiver assembly


@dataclass(frozen=True, eq=False)
class QuiverMatrix:
    """Upper-triangular intersection counts with unit diagonal."""

    labels: tuple
    entries: np.ndarray

    def __post_init__(self):
        n = len(self.labels)
        if self.entries.shape != (n, n):
            raise CycleError("quiver matrix shape does not match its labels")
        if not np.array_equal(np.diag(self.entries), np.ones(n, dtype=int)):
            raise CycleError("quiver matrix must have unit diagonal")
        if np.tril(self.entries, -1).any():
            raise CycleError("quiver matrix must vanish below the diagonal")

    @property
    def size(self) -> int:
        return len(self.labels)

    def __str__(self):
        body = "\n".join(" ".join(f"{v:d}" for v in row) for row in self.entries)
        return f"QuiverMatrix({', '.join(self.labels)})\n{body}"


def quiver_matrix(cycles) -> QuiverMatrix:
    """Pairwise intersection matrix in the given cycle order."""
    cycles = list(cycles)
    n = len(cycles)
    entries = np.eye(n, dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            entries[i, j] = intersection_number(cycles[i], cycles[j])
    return QuiverMatrix(tuple(c.label for c in cycles), entries)


# ---------------------------------------------------------------------------
# driving a whole critical locus


@dataclass
class CycleSystem:
    """All vanishing cycles of one potential over one reference fiber."""

    cycles: tuple
    braids: tuple
    base_point: complex
    branch_points: np.ndarray
    punctures: np.ndarray

    def quiver(self) -> QuiverMatrix:
        return quiver_matrix(self.cycles)


def _angle_key(value: complex, base_point: complex) -> float:
    raw = (-cmath.phase(value - base_point)) % (2.0 * math.pi)
    if raw < 1e-9 or raw > 2.0 * math.pi - 1e-9:
        return 2.0 * math.pi
    return raw


def arc_kind_for(value: complex, base_point: complex, others) -> str:
    """Pick a straight arc unless it passes too close to another value.

    The segment from the reference to the target is blocked by a critical
    value ``w`` when the distance from ``w`` to the segment is below 0.2
    times the smaller of ``|w - base|`` and ``|w - value|``; blocked
    targets get the below-axis dip.
    """
    a, b = base_point, value
    span = b - a
    length2 = abs(span) ** 2
    for w in others:
        if length2 == 0.0:
            break
        t = ((w - a).real * span.real + (w - a).imag * span.imag) / length2
        t = min(max(t, 0.0), 1.0)
        dist = abs(w - (a + t * span))
        if dist < 0.2 * min(abs(w - a), abs(w - b)):
            return "arc_below_real"
    return "straight"


def _as_point_records(spec: FiberSpec, critical_points) -> list:
    """Normalize critical-point input to ``(base, cover, value)`` triples."""
    order = spec.potential.vars
    records = []
    for entry in critical_points:
        if hasattr(entry, "location") and hasattr(entry, "value"):
            location, value = tuple(entry.location), complex(entry.value)
        else:
            location, value = entry
            location, value = tuple(location), complex(value)
        if len(location) != 2:
            raise CycleError(f"critical point {location!r} is not two-dimensional")
        coords = dict(zip(order, location))
        records.append((complex(coords[spec.base_variable]),
                        complex(coords[spec.cover_variable]), value))
    return records


def vanishing_cycle_set(spec: FiberSpec, critical_points, base_point: complex,
                        arcs="auto", step: StepConfig | None = None,
                        depth: float = 0.35) -> CycleSystem:
    """Extract every vanishing cycle of a critical locus.

    Critical points may be ``(location, value)`` pairs or objects with
    ``location`` and ``value`` attributes (locations in the potential's
    variable order).  Points are grouped by critical value; each group
    gets one arc from ``base_point`` (chosen by ``arc_kind_for`` when
    ``arcs="auto"``, or taken from an explicit sequence of ``ArcSpec``),
    one tracking run, and one pulled-back connecting arc per colliding
    pair.  A critical point is matched to the collision nearest its base
    coordinate, and points sharing both value and pair become parallel
    copies over the same arc.

    Cycles are labeled L1, L2, ... in clockwise order of their critical
    values around the reference fiber, with ties broken by value magnitude,
    matched pair, and cover coordinate.
    """
    cfg = step or StepConfig()
    base_point = complex(base_point)
    records = _as_point_records(spec, critical_points)
    if not records:
        raise CycleError("no critical points supplied")
    clusters: list[list] = []
    centers: list[complex] = []
    for rec in sorted(records, key=lambda r: (abs(r[2]), r[2].real, r[2].imag)):
        for idx, c in enumerate(centers):
            if abs(rec[2] - c) < 1e-7 * (1.0 + abs(c)):
                clusters[idx].append(rec)
                break
        else:
            centers.append(rec[2])
            clusters.append([rec])
    for c in centers:
        if abs(c - base_point) < 1e-7 * (1.0 + abs(c)):
            raise CycleError(f"reference fiber {base_point:.6g} is itself critical")
    if isinstance(arcs, str):
        if arcs != "auto":
            raise CycleError(f"unknown arc mode {arcs!r}")
        specs = [ArcSpec(arc_kind_for(c, base_point,
                                      [w for w in centers if w is not c]),
                         base_point, c, depth) for c in centers]
    else:
        specs = list(arcs)
        if len(specs) != len(centers):
            raise CycleError(f"{len(specs)} arcs supplied for {len(centers)} "
                             "critical values")
    braids = []
    built = []
    for center, cluster, arc in zip(centers, clusters, specs):
        braid = track_branch_points(spec, arc, cfg)
        braids.append((center, braid))
        if not braid.collisions:
            raise CycleError(f"no branch collision found for critical value "
                             f"{center:.6g}")
        pulled: dict[tuple[int, int], np.ndarray] = {}
        for t_c, u_c, value in cluster:
            best = min(braid.collisions, key=lambda col: abs(col.location - t_c))
            if abs(best.location - t_c) > 0.01 * (1.0 + abs(t_c)):
                raise CycleError(
                    f"no collision matches critical point at base {t_c:.6g} "
                    f"(nearest collision at {best.location:.6g})")
            if best.pair not in pulled:
                pulled[best.pair] = pullback_arc(braid, best.pair)
            built.append((value, best.pair, pulled[best.pair], (t_c, u_c)))
    start_pts = braids[0][1].start_points
    punctures = braids[0][1].punctures
    built.sort(key=lambda rec: (_angle_key(rec[0], base_point), abs(rec[0]),
                                rec[1], rec[3][1].real, rec[3][1].imag))
    cycles = tuple(
        VanishingCycle(f"L{k + 1}", pair, arcverts, value, point,
                       start_pts, punctures)
        for k, (value, pair, arcverts, point) in enumerate(built))
    return CycleSystem(cycles, tuple(braids), base_point, start_pts, punctures)
