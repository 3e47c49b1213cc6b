import numpy as np
import pytest

from lgmirror.laurent import (
    DimensionMismatch,
    LaurentError,
    LaurentPoly,
    ParseError,
    PoleError,
    RationalPotential,
    UnknownVariable,
    clear_denominators,
    compiled_evaluator,
    format_poly,
    parse_poly,
)


def random_poly(rng, variables, nterms=6, maxdeg=3):
    terms = {}
    for _ in range(nterms):
        exps = tuple(int(rng.integers(-maxdeg, maxdeg + 1)) for _ in variables)
        terms[exps] = complex(rng.standard_normal(), rng.standard_normal())
    return LaurentPoly(variables, terms)


def random_point(rng, n):
    radius = rng.uniform(0.6, 1.4, n)
    angle = rng.uniform(0.0, 2.0 * np.pi, n)
    return [complex(r * np.cos(a), r * np.sin(a)) for r, a in zip(radius, angle)]


def fd_partial(f, point, index, h=1e-6):
    hi = list(point)
    lo = list(point)
    hi[index] += h
    lo[index] -= h
    return (f.eval(hi) - f.eval(lo)) / (2.0 * h)


def test_eval_matches_naive_sum():
    rng = np.random.default_rng(11)
    for _ in range(25):
        p = random_poly(rng, ("x", "y", "z"))
        pt = random_point(rng, 3)
        naive = sum(c * pt[0] ** e[0] * pt[1] ** e[1] * pt[2] ** e[2]
                    for e, c in p.terms.items())
        assert p.eval(pt) == pytest.approx(naive, rel=1e-12, abs=1e-12)


def test_eval_accepts_mapping_and_scalar():
    p = parse_poly("x^2 + 2*x + 1")
    assert p.eval({"x": 3.0}) == pytest.approx(16.0)
    assert p.eval(3.0) == pytest.approx(16.0)
    assert p.eval([3.0]) == pytest.approx(16.0)


def test_ring_operations_by_evaluation():
    rng = np.random.default_rng(23)
    for _ in range(20):
        f = random_poly(rng, ("x", "y"))
        g = random_poly(rng, ("x", "y"))
        h = random_poly(rng, ("x", "y"))
        pt = random_point(rng, 2)
        fv, gv, hv = f.eval(pt), g.eval(pt), h.eval(pt)
        assert (f + g).eval(pt) == pytest.approx(fv + gv, rel=1e-10, abs=1e-10)
        assert (f - g).eval(pt) == pytest.approx(fv - gv, rel=1e-10, abs=1e-10)
        assert (f * g).eval(pt) == pytest.approx(fv * gv, rel=1e-10, abs=1e-10)
        assert (f * (g + h)).eval(pt) == pytest.approx(
            (f * g + f * h).eval(pt), rel=1e-10, abs=1e-10)


def test_integer_coefficient_products_are_exact():
    x = parse_poly("x + 1")
    y = parse_poly("x - 1")
    assert (x * y).terms == {(2,): 1.0 + 0j, (0,): -1.0 + 0j}
    assert (x * x).terms == {(2,): 1.0 + 0j, (1,): 2.0 + 0j, (0,): 1.0 + 0j}


def test_pow_matches_repeated_multiplication():
    rng = np.random.default_rng(31)
    f = random_poly(rng, ("x", "y"), nterms=4, maxdeg=2)
    pt = random_point(rng, 2)
    assert (f ** 3).eval(pt) == pytest.approx(f.eval(pt) ** 3, rel=1e-9)
    assert (f ** 0).eval(pt) == 1.0 + 0j
    assert (f ** 1).terms == f.terms


def test_negative_powers_of_monomials():
    m = LaurentPoly.monomial(("x", "y"), (2, -1), 2.0)
    inv = m ** -1
    assert inv.terms == {(-2, 1): 0.5 + 0j}
    assert (m ** -2).terms == {(-4, 2): 0.25 + 0j}
    with pytest.raises(LaurentError):
        parse_poly("x + 1") ** -1


def test_partial_derivative_matches_finite_difference():
    rng = np.random.default_rng(47)
    for _ in range(15):
        p = random_poly(rng, ("x", "y", "z"))
        pt = random_point(rng, 3)
        for i, v in enumerate(p.vars):
            exact = p.partial_derivative(v).eval(pt)
            approx = fd_partial(p, pt, i)
            assert exact == pytest.approx(approx, rel=2e-5, abs=2e-5)


def test_mixed_partials_commute():
    rng = np.random.default_rng(53)
    for _ in range(10):
        p = random_poly(rng, ("x", "y"))
        pt = random_point(rng, 2)
        xy = p.partial_derivative("x").partial_derivative("y")
        yx = p.partial_derivative("y").partial_derivative("x")
        assert xy.eval(pt) == pytest.approx(yx.eval(pt), rel=1e-10, abs=1e-12)


def test_derivative_kills_constants_and_lowers_exponents():
    p = parse_poly("3*x^2*y - 2*x^-1 + 5", variables=("x", "y"))
    dx = p.partial_derivative("x")
    assert dx.terms == {(1, 1): 6.0 + 0j, (-2, 0): 2.0 + 0j}
    with pytest.raises(UnknownVariable):
        p.partial_derivative("q")


def test_variable_alignment_and_union():
    f = parse_poly("x + 1")
    g = parse_poly("y - 1")
    s = f + g
    assert s.vars == ("x", "y")
    assert s.eval({"x": 2.0, "y": 5.0}) == pytest.approx(7.0)
    with pytest.raises(UnknownVariable):
        f.with_vars(("y", "z"))


def test_dimension_mismatch_on_eval_and_construction():
    p = parse_poly("x*y", variables=("x", "y"))
    with pytest.raises(DimensionMismatch):
        p.eval([1.0])
    with pytest.raises(DimensionMismatch):
        p.eval({"x": 1.0})
    with pytest.raises(DimensionMismatch):
        LaurentPoly(("x", "y"), {(1,): 1.0})


def test_compiled_evaluator_matches_eval():
    rng = np.random.default_rng(61)
    p = random_poly(rng, ("x", "y"), nterms=8)
    f = compiled_evaluator(p)
    pts = np.array([random_point(rng, 2) for _ in range(40)])
    batch = f(pts)
    assert batch.shape == (40,)
    for row, val in zip(pts, batch):
        assert val == pytest.approx(p.eval(list(row)), rel=1e-10)
    zero = compiled_evaluator(LaurentPoly.zero(("x", "y")))
    assert np.all(zero(pts) == 0)


def test_parse_format_round_trip_random():
    rng = np.random.default_rng(71)
    for _ in range(25):
        p = random_poly(rng, ("x", "y"), nterms=5)
        text = format_poly(p)
        q = parse_poly(text, variables=("x", "y"))
        assert q.terms == p.terms


def test_parse_known_expressions():
    p = parse_poly("x + x^-1")
    assert p.terms == {(1,): 1.0 + 0j, (-1,): 1.0 + 0j}
    q = parse_poly("t^2 + 2*t - e", variables=("t", "e"))
    assert q.eval({"t": 3.0, "e": 0.1}) == pytest.approx(14.9)
    r = parse_poly("2i*x + (1 - 1i)")
    assert r.terms == {(1,): 2j, (0,): 1.0 - 1j}
    s = parse_poly("-(x - 1)*(x + 1)")
    assert s.terms == {(2,): -1.0 + 0j, (0,): 1.0 + 0j}
    assert parse_poly("1.5e-2").constant_value() == pytest.approx(0.015)


def test_parse_rejects_malformed_input():
    for bad in ("x +", "x ** 2", "(x", "x ^ y", "x $ y", "2.5 3"):
        with pytest.raises(ParseError):
            parse_poly(bad)
    with pytest.raises(ParseError):
        parse_poly("x + q", variables=("x",))
    with pytest.raises(ParseError):
        parse_poly("(x + 1)^-1")


def test_format_canonical_order():
    p = LaurentPoly(("x", "y"), {(0, 0): 1.0, (2, 0): 1.0, (1, 1): -3.0, (0, 1): 1.0})
    assert format_poly(p) == "x^2 - 3*x*y + y + 1"


def test_rational_eval_quadric_denominator():
    x1 = parse_poly("x1", variables=("x1", "x3"))
    x3 = parse_poly("x3", variables=("x1", "x3"))
    one = LaurentPoly.const(("x1", "x3"), 1.0)
    w = RationalPotential(one, [(x1, 1), (x1 + 1, 1), (x3, 1), (x3 + 1, 1)])
    assert w.eval({"x1": -0.5, "x3": -0.5}) == pytest.approx(16.0)
    with pytest.raises(PoleError):
        w.eval({"x1": 0.0, "x3": -0.5})
    with pytest.raises(PoleError):
        w.eval({"x1": 1e-14, "x3": -0.5})


def test_rational_arithmetic_and_excluded_locus():
    x = parse_poly("x")
    f = RationalPotential(LaurentPoly.const(("x",), 1.0), [(x - 1, 1)])
    g = RationalPotential(x, [(x - 1, 1)])
    s = f + g
    assert s.eval(2.0) == pytest.approx(3.0)
    assert [format_poly(b) for b in s.excluded_locus] == ["x - 1"]
    prod = f * f
    assert prod.den_factors[0][1] == 2
    assert prod.eval(3.0) == pytest.approx(0.25)
    q = (x + 1) / (x ** 2 - 2)
    assert isinstance(q, RationalPotential)
    assert [format_poly(b) for b in q.excluded_locus] == ["x^2 - 2"]
    lau = (x + 1) / x
    assert isinstance(lau, LaurentPoly)
    assert lau.terms == {(0,): 1.0 + 0j, (-1,): 1.0 + 0j}


def test_rational_derivative_matches_finite_difference():
    rng = np.random.default_rng(83)
    x = parse_poly("x", variables=("x", "y"))
    y = parse_poly("y", variables=("x", "y"))
    for _ in range(10):
        num = random_poly(rng, ("x", "y"), nterms=4, maxdeg=2)
        f = RationalPotential(num, [(x + 3, 1), (y + 3, 2)])
        pt = random_point(rng, 2)
        for i, v in enumerate(("x", "y")):
            exact = f.partial_derivative(v).eval(pt)
            approx = fd_partial(f, pt, i)
            assert exact == pytest.approx(approx, rel=5e-5, abs=5e-5)


def test_rational_derivative_bumps_denominator_powers():
    x = parse_poly("x")
    f = RationalPotential(LaurentPoly.const(("x",), 1.0), [(x - 1, 1)])
    df = f.partial_derivative("x")
    assert df.den_factors[0][1] == 2
    assert df.eval(3.0) == pytest.approx(-0.25)


def test_clear_denominators_laurent_gradient():
    w = parse_poly("x + x^-1")
    polys, excluded = clear_denominators([w.partial_derivative("x")])
    assert polys[0].terms == {(2,): 1.0 + 0j, (0,): -1.0 + 0j}
    assert [format_poly(b) for b in excluded] == ["x"]


def test_clear_denominators_dlog_product_potential():
    e = 0.1
    t = parse_poly("t", variables=("t", "u"))
    u = parse_poly("u", variables=("t", "u"))
    num = (t * (t - e)) * (u * (u - e))
    w = RationalPotential(num, [(t + 1, 1), (u + 1, 1)])
    polys, excluded = clear_denominators(w.gradient())
    assert [format_poly(b) for b in excluded] == ["t + 1", "u + 1"]

    factored_t = (u + 1) * u * (u - e) * (t * t + 2 * t - e)
    factored_u = (t + 1) * t * (t - e) * (u * u + 2 * u - e)
    rng = np.random.default_rng(97)
    for _ in range(10):
        pt = random_point(rng, 2)
        assert polys[0].eval(pt) == pytest.approx(factored_t.eval(pt), rel=1e-9, abs=1e-9)
        assert polys[1].eval(pt) == pytest.approx(factored_u.eval(pt), rel=1e-9, abs=1e-9)

    # All eight stationary points of the product potential solve the cleared
    # system: four with both log-derivative factors vanishing, four on the
    # zero fiber where both numerator factors vanish.
    dlog_roots = [-1.0 + np.sqrt(1.0 + e), -1.0 - np.sqrt(1.0 + e)]
    fiber_roots = [0.0, e]
    for troot in dlog_roots + fiber_roots:
        for uroot in dlog_roots + fiber_roots:
            if (troot in dlog_roots) != (uroot in dlog_roots):
                continue
            vals = [abs(p.eval({"t": troot, "u": uroot})) for p in polys]
            assert max(vals) < 1e-9


def test_zero_and_constant_handling():
    z = LaurentPoly.zero(("x",))
    assert z.is_zero()
    assert format_poly(z) == "0"
    assert z.eval(2.0) == 0
    c = LaurentPoly.const(("x",), 4.0)
    assert c.is_constant() and c.constant_value() == 4.0
    assert (c - 4.0).is_zero()
    f = RationalPotential(parse_poly("x + 1"), [(LaurentPoly.const(("x",), 2.0), 1)])
    assert f.is_polynomial()
    assert f.eval(1.0) == pytest.approx(1.0)
