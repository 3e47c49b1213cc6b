"""Stationary-point solving, Hessian classification, value clustering."""

import math

import numpy as np
import pytest

from lgmirror.critical import (
    AmbiguousClustering,
    CriticalPoint,
    DimensionTooLarge,
    SearchConfig,
    ValueCluster,
    bernstein_bound,
    classify_hessian,
    critical_values,
    hessian_matrix,
    stationary_points,
)
from lgmirror.laurent import RationalPotential, parse_poly
from lgmirror.mirror import builtin_model, eliminate


def deformed_potential(e=0.1):
    return builtin_model("delpezzo4_deformed", {"e": e}).potential


def match_point_sets(found, expected, tol=1e-8):
    """Pair every found location with a distinct expected one, and back."""
    assert len(found) == len(expected), (len(found), len(expected))
    remaining = list(expected)
    for loc in found:
        hits = [i for i, exp in enumerate(remaining)
                if max(abs(a - b) for a, b in zip(loc, exp)) <= tol * max(
                    1.0, max(abs(x) for x in exp))]
        assert hits, f"unexpected point {loc}"
        remaining.pop(hits[0])
    assert not remaining


def deformed_exact_points(e=0.1):
    s = math.sqrt(1.0 + e)
    roots = (-1.0 + s, -1.0 - s)
    corners = (0.0, e)
    points = [(t, u) for t in roots for u in roots]
    points += [(t, u) for t in corners for u in corners]
    return points


# ---------------------------------------------------------------------------
# the two-variable deformed model: complete, certified enumeration


def test_deformed_model_eight_points():
    e = 0.1
    result = stationary_points(deformed_potential(e))
    assert len(result.points) == 8
    match_point_sets([p.location for p in result.points], deformed_exact_points(e))
    assert all(p.residual < 1e-8 for p in result.points)
    assert all(p.nondegenerate for p in result.points)


def test_deformed_model_exact_values():
    e = 0.1
    s = math.sqrt(1.0 + e)
    result = stationary_points(deformed_potential(e))
    # the smallest nonzero value (s-1)^4 ~ 5.7e-6 sits within ten absolute
    # floors of the default tolerance, and the clustering says so
    with pytest.warns(AmbiguousClustering):
        clusters = critical_values(result.points)
    tight = critical_values(result.points, rel_tol=1e-9)
    assert [c.multiplicity for c in tight] == [4, 1, 2, 1]
    assert [c.multiplicity for c in clusters] == [4, 1, 2, 1]
    assert abs(clusters[0].value) < 1e-10
    assert clusters[1].value == pytest.approx((s - 1.0) ** 4, rel=1e-9)
    assert clusters[2].value == pytest.approx(e * e, rel=1e-9)
    assert clusters[3].value == pytest.approx((1.0 + s) ** 4, rel=1e-9)
    # the two extreme values multiply to e^4 exactly
    assert clusters[1].value * clusters[3].value == pytest.approx(e ** 4, rel=1e-9)


def test_deformed_model_discards_pole_roots():
    result = stationary_points(deformed_potential())
    assert len(result.discarded) == 5
    for loc in result.discarded:
        assert any(abs(z + 1.0) < 1e-6 for z in loc)


def test_deformed_model_meets_bernstein_bound():
    result = stationary_points(deformed_potential())
    assert result.bernstein_bound == 8
    assert result.torus_root_count == 8
    assert not any(f.startswith("torus_roots_below_bound") for f in result.flags)


def test_deformed_hessian_at_origin():
    e = 0.1
    pot = deformed_potential(e)
    det, nondeg = classify_hessian(pot, {"t": 0.0, "u": 0.0})
    assert nondeg
    assert det == pytest.approx(-(e ** 4), rel=1e-10)
    matrix = hessian_matrix(pot, {"t": 0.0, "u": 0.0})
    assert matrix[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert matrix[0, 1] == pytest.approx(e * e, rel=1e-10)


def test_deformed_engines_agree():
    pot = deformed_potential()
    resultant_only = stationary_points(pot, SearchConfig(starts=0, use_homotopy=False))
    homotopy_only = stationary_points(pot, SearchConfig(starts=0, use_resultant=False))
    newton_only = stationary_points(
        pot, SearchConfig(use_resultant=False, use_homotopy=False, starts=800))
    assert len(resultant_only.points) == 8
    assert len(homotopy_only.points) == 8
    assert len(newton_only.points) == 8
    match_point_sets([p.location for p in resultant_only.points],
                     [p.location for p in newton_only.points], tol=1e-7)
    match_point_sets([p.location for p in resultant_only.points],
                     [p.location for p in homotopy_only.points], tol=1e-7)


def test_seed_and_worker_invariance():
    pot = deformed_potential()
    base = stationary_points(pot, SearchConfig(seed=0, workers=1))
    reseeded = stationary_points(pot, SearchConfig(seed=17, workers=1))
    chunked = stationary_points(pot, SearchConfig(seed=0, workers=3))
    match_point_sets([p.location for p in base.points],
                     [p.location for p in reseeded.points], tol=1e-7)
    assert [p.location for p in base.points] == [p.location for p in chunked.points]


# ---------------------------------------------------------------------------
# three-variable models: multistart only


def test_quadrics_two_points():
    reduced = eliminate(builtin_model("quadrics_x4"))
    result = stationary_points(reduced, SearchConfig(starts=600))
    assert len(result.points) == 2
    by_value = sorted(result.points, key=lambda p: p.value.real)
    minus, plus = by_value
    assert plus.value == pytest.approx(8.0, rel=1e-8)
    assert minus.value == pytest.approx(-8.0, rel=1e-8)
    order = {v: i for i, v in enumerate(["x1", "x3", "x5"])}
    assert len(order) == len(reduced.vars)
    for point, x5 in ((plus, 4.0), (minus, -4.0)):
        loc = dict(zip(reduced.vars, point.location))
        assert loc["x1"] == pytest.approx(-0.5, rel=1e-8)
        assert loc["x3"] == pytest.approx(-0.5, rel=1e-8)
        assert loc["x5"] == pytest.approx(x5, rel=1e-8)
        assert point.nondegenerate


def genus2_exact(a1, a2):
    points = []
    for eps in (+1.0, -1.0):
        q = 1.0 + 2.0 * eps * math.sqrt(a2)
        x3 = q * q / (9.0 * a1)
        x1 = -x3 * q / 3.0
        x4 = eps * math.sqrt(a2) * x3
        points.append(((x1, x3, x4), q ** 3 / (27.0 * a1)))
    return points


def test_genus2_two_points_closed_form():
    a1, a2 = 0.01, 0.02
    reduced = eliminate(builtin_model("genus2", {"a1": a1, "a2": a2}))
    result = stationary_points(reduced, SearchConfig(starts=600))
    assert reduced.vars == ("x1", "x3", "x4")
    assert len(result.points) == 2
    expected = genus2_exact(a1, a2)
    match_point_sets([p.location for p in result.points],
                     [loc for loc, _ in expected], tol=1e-7)
    found_values = sorted(p.value.real for p in result.points)
    exact_values = sorted(v for _, v in expected)
    for got, want in zip(found_values, exact_values):
        assert got == pytest.approx(want, rel=1e-8)
    assert all(p.nondegenerate for p in result.points)


def test_genus2_homotopy_alone_finds_both_roots():
    reduced = eliminate(builtin_model("genus2", {"a1": 0.01, "a2": 0.02}))
    result = stationary_points(reduced, SearchConfig(starts=0))
    assert len(result.points) == 2
    match_point_sets([p.location for p in result.points],
                     [loc for loc, _ in genus2_exact(0.01, 0.02)], tol=1e-7)


def test_bezout_path_cap_is_flagged():
    reduced = eliminate(builtin_model("genus2", {"a1": 0.01, "a2": 0.02}))
    result = stationary_points(reduced, SearchConfig(starts=0, max_paths=4))
    assert any(f.startswith("bezout_paths_capped") for f in result.flags)
    assert result.points == []


@pytest.mark.parametrize("k", [4, 5])
def test_hyperelliptic_counts(k):
    a1, a2 = 0.01, 0.02
    model = builtin_model("hyperelliptic", {"k": k, "a1": a1, "a2": a2})
    reduced = eliminate(model)
    result = stationary_points(reduced, SearchConfig(starts=900, seed=3))
    assert len(result.points) == 2 * (k - 2)
    for point in result.points:
        loc = dict(zip(reduced.vars, point.location))
        lhs1 = loc["x1"] ** 2
        rhs1 = a1 * loc["x3"] ** k
        assert abs(lhs1 - rhs1) <= 1e-8 * max(1.0, abs(rhs1))
        lhs2 = loc["x4"] ** 2
        rhs2 = a2 * loc["x3"] ** 2
        assert abs(lhs2 - rhs2) <= 1e-8 * max(1.0, abs(rhs2))
        assert abs(point.value) > 1e-6  # no zero critical value in this chart
    clusters = critical_values(result.points)
    assert len(clusters) == 2 * (k - 2)


def test_dimension_cap():
    reduced = eliminate(builtin_model("weighted_N"))
    assert len(reduced.vars) == 5
    with pytest.raises(DimensionTooLarge):
        stationary_points(reduced)


# ---------------------------------------------------------------------------
# hessians


def fd_hessian(pot, location, h=1e-6):
    names = pot.vars
    grads = pot.gradient()
    n = len(names)
    out = np.zeros((n, n), dtype=complex)
    base = dict(location)
    for j, vj in enumerate(names):
        up = dict(base)
        down = dict(base)
        up[vj] = base[vj] + h
        down[vj] = base[vj] - h
        for i in range(n):
            out[i, j] = (grads[i].eval(up) - grads[i].eval(down)) / (2.0 * h)
    return out


@pytest.mark.parametrize("case", ["deformed", "genus2"])
def test_hessian_matches_finite_differences(case):
    if case == "deformed":
        pot = deformed_potential()
        s = math.sqrt(1.1)
        location = {"t": -1.0 + s, "u": -1.0 - s}
    else:
        pot = eliminate(builtin_model("genus2", {"a1": 0.01, "a2": 0.02}))
        (loc, _), _ = genus2_exact(0.01, 0.02)
        location = dict(zip(pot.vars, loc))
    analytic = hessian_matrix(pot, location)
    numeric = fd_hessian(pot, location)
    scale = np.abs(analytic).max()
    assert np.abs(analytic - numeric).max() <= 1e-4 * scale
    det_a = np.linalg.det(analytic)
    det_n = np.linalg.det(numeric)
    assert abs(det_a - det_n) <= 1e-3 * abs(det_a)


def test_degenerate_hessian_detected():
    cubed = parse_poly("x^3", ("x",))
    det, nondeg = classify_hessian(cubed, {"x": 0.0})
    assert det == 0.0
    assert not nondeg


# ---------------------------------------------------------------------------
# one-variable sanity and the value clustering contract


def test_univariate_potential():
    pot = parse_poly("x + x^-1", ("x",))
    result = stationary_points(RationalPotential(pot))
    assert len(result.points) == 2
    assert result.bernstein_bound == 2
    assert result.torus_root_count == 2
    values = sorted(p.value.real for p in result.points)
    assert values[0] == pytest.approx(-2.0, rel=1e-10)
    assert values[1] == pytest.approx(2.0, rel=1e-10)


def fake_point(value):
    return CriticalPoint((0j,), complex(value), 1.0 + 0j, True, 0.0)


def test_value_clustering_merges_and_orders():
    points = [fake_point(v) for v in
              [2.0, 1e-3, 1.0000004e-3, -2.0, 0.0, 2.0]]
    clusters = critical_values(points, rel_tol=1e-6)
    assert [c.multiplicity for c in clusters] == [1, 2, 2, 1]
    assert clusters[0].value == 0.0
    assert clusters[1].value == pytest.approx(1.0000002e-3, rel=1e-6)
    assert clusters[2].value == pytest.approx(2.0, rel=1e-6)   # arg 0 first
    assert clusters[3].value == pytest.approx(-2.0, rel=1e-6)  # then arg pi
    assert clusters[1].members == (1, 2)


def test_value_clustering_warns_when_tight():
    points = [fake_point(1.0), fake_point(1.0 + 5e-6)]
    with pytest.warns(AmbiguousClustering):
        clusters = critical_values(points, rel_tol=1e-6)
    assert len(clusters) == 2


def test_bernstein_bound_rectangle():
    names = ("t", "u")
    g1 = parse_poly("t^2*u^3 + t*u + u", names)
    g2 = parse_poly("t^3*u^2 + t*u + t", names)
    assert bernstein_bound([g1.with_vars(names), g2.with_vars(names)]) > 0
    line = parse_poly("x^5 + x^2", ("x",))
    assert bernstein_bound([line]) == 3
