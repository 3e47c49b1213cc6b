"""Model construction, charge-data relations, elimination, model files."""

import cmath

import numpy as np
import pytest

from lgmirror.laurent import LaurentPoly, RationalPotential, parse_poly
from lgmirror.mirror import (
    CyclicOrder,
    GLSMData,
    LGModel,
    MirrorError,
    MissingParameter,
    ModelFileError,
    NonSolvablePick,
    Relation,
    UnknownPreset,
    builtin_model,
    eliminate,
    eliminate_with_steps,
    monomial_relations_from_glsm,
    parse_relation,
    preset_names,
    read_model_file,
    write_model_file,
)


def assert_poly_close(p, q, tol=1e-12):
    diff = p - q
    if diff.is_zero():
        return
    scale = max(abs(c) for c in p.terms.values()) if p.terms else 1.0
    worst = max(abs(c) for c in diff.terms.values())
    assert worst <= tol * max(scale, 1.0), f"polynomials differ by {worst:.3e}"


def torus_sample(rng, avoid=(0.0, -1.0), floor=0.05):
    """A random complex number of moderate size, away from listed spots."""
    while True:
        z = (0.6 + 0.9 * rng.random()) * np.exp(2j * np.pi * rng.random())
        if all(abs(z - a) > floor for a in avoid):
            return complex(z)


# ---------------------------------------------------------------------------
# charge data


def test_charge_relations_for_genus_two_surface():
    a1, a2 = 0.01, 0.02
    data = GLSMData(
        charges=((1, 0), (1, 0), (0, 1), (0, 1)),
        section_exponents=((3, 2),),
        moduli=(-cmath.log(a1), -cmath.log(a2)),
        coordinate_names=("x1", "x2", "x4", "x5"),
        section_names=("x3",),
    )
    rels = monomial_relations_from_glsm(data)
    assert len(rels) == 2
    model = builtin_model("genus2", {"a1": a1, "a2": a2})
    for built, expected in zip(rels, model.relations):
        assert_poly_close(built.residual(), expected.residual(), 1e-12)


def test_charge_relation_single_coordinate():
    data = GLSMData(charges=((1,),), section_exponents=(), moduli=(0.7,))
    (rel,) = monomial_relations_from_glsm(data)
    assert rel.lhs == LaurentPoly.variable("x1")
    assert rel.rhs.is_constant()
    assert rel.rhs.constant_value() == pytest.approx(cmath.exp(-0.7))


def test_charge_data_validation():
    with pytest.raises(MirrorError):
        GLSMData(charges=((1, 0), (1, 0)), section_exponents=(), moduli=(0.0, 0.0))
    with pytest.raises(MirrorError):
        GLSMData(charges=((1,),), section_exponents=(), moduli=(0.0, 0.0))
    with pytest.raises(MirrorError):
        GLSMData(charges=((1, 1),), section_exponents=((2,),), moduli=(0.0, 0.0))
    with pytest.raises(MirrorError):
        GLSMData(charges=((1,), (1,)), section_exponents=((2,),), moduli=(0.0,),
                 coordinate_names=("x", "u"), section_names=("u",))


# ---------------------------------------------------------------------------
# built-in models


def test_every_preset_constructs():
    needed = {"genus2": {"a1": 0.01, "a2": 0.02},
              "hyperelliptic": {"k": 4, "a1": 0.01, "a2": 0.02}}
    for name in preset_names():
        model = builtin_model(name, needed.get(name))
        assert model.name == name
        assert model.variables
        if name != "delpezzo4_deformed":
            assert model.relations and isinstance(model.potential, LaurentPoly)


def test_preset_lookup_errors():
    with pytest.raises(UnknownPreset):
        builtin_model("delpezzo5")
    with pytest.raises(MissingParameter):
        builtin_model("genus2", {"a1": 0.01})
    with pytest.raises(MirrorError):
        builtin_model("hyperelliptic", {"k": 2, "a1": 0.01, "a2": 0.02})
    with pytest.raises(MirrorError):
        builtin_model("delpezzo4", {"A": 1.0, "bogus": 3.0})


def test_relation_classification():
    model = builtin_model("delpezzo4")
    assert len(model.monomial_relations) == 1
    assert len(model.linear_relations) == 2
    assert model.relations[0].is_monomial_type()
    assert not model.relations[0].is_linear()


def test_deformed_preset_is_the_displayed_quotient():
    model = builtin_model("delpezzo4_deformed", {"e": 0.1})
    pot = model.potential
    assert isinstance(pot, RationalPotential)
    expected_num = parse_poly("t^2*u^2 - 0.1*t^2*u - 0.1*t*u^2 + 0.01*t*u", ("t", "u"))
    assert_poly_close(pot.num, expected_num)
    bases = sorted(str(b.key()) for b, p in pot.den_factors)
    assert all(p == 1 for _, p in pot.den_factors)
    assert len(pot.den_factors) == 2
    locus = pot.excluded_locus
    t_plus = parse_poly("t + 1", ("t", "u"))
    u_plus = parse_poly("u + 1", ("t", "u"))
    assert sorted(b.key() for b in locus) == sorted([t_plus.key(), u_plus.key()])
    assert bases  # factor list is populated, not folded into the numerator
    # no picks to run; elimination is the identity here
    assert eliminate(model) == pot


def test_hyperelliptic_k3_equals_genus2():
    params = {"a1": 0.03, "a2": 0.07}
    g2 = builtin_model("genus2", params)
    h3 = builtin_model("hyperelliptic", {"k": 3, **params})
    assert h3.relations == g2.relations
    assert h3.potential == g2.potential
    assert h3.default_picks == g2.default_picks


# ---------------------------------------------------------------------------
# elimination


def test_delpezzo4_reduces_to_displayed_potential():
    model = builtin_model("delpezzo4", {"A": 1.0})
    reduced = eliminate(model)
    assert set(reduced.vars) == {"x1", "x3"}
    rng = np.random.default_rng(7)
    for _ in range(30):
        x1 = torus_sample(rng)
        x3 = torus_sample(rng)
        expected = 1.0 / (x1 * (x1 + 1) * x3 * (x3 + 1))
        got = reduced.eval({"x1": x1, "x3": x3})
        assert abs(got - expected) <= 1e-10 * max(1.0, abs(expected))


def test_delpezzo4_pick_orders_agree():
    model = builtin_model("delpezzo4", {"A": 1.0})
    monomial_first = eliminate(model, (("x5", 0), ("x2", 1), ("x4", 2)))
    linear_first = eliminate(model, (("x2", 1), ("x4", 2), ("x5", 0)))
    # monomial-first keeps the denominator factors separate
    assert len(monomial_first.den_factors) == 2
    assert len(linear_first.den_factors) == 1
    rng = np.random.default_rng(11)
    for _ in range(20):
        point = {"x1": torus_sample(rng), "x3": torus_sample(rng)}
        assert abs(monomial_first.eval(point) - linear_first.eval(point)) <= 1e-9


def test_genus2_reduces_to_laurent_polynomial():
    model = builtin_model("genus2", {"a1": 0.01, "a2": 0.02})
    reduced = eliminate(model)
    assert reduced.is_polynomial()
    expected = parse_poly(
        "x1 + 0.01*x3^3*x1^-1 + x3 + x4 + 0.02*x3^2*x4^-1", ("x1", "x3", "x4"))
    assert_poly_close(reduced.num.restrict_vars(("x1", "x3", "x4")), expected)


def test_quadrics_reduction_values():
    model = builtin_model("quadrics_x4")
    reduced = eliminate(model)
    assert set(reduced.vars) == {"x1", "x3", "x5"}
    rng = np.random.default_rng(23)
    for _ in range(20):
        x1, x3, x5 = (torus_sample(rng) for _ in range(3))
        expected = x5 + 1.0 / (x1 * (-1 - x1) * x3 * (-1 - x3) * x5)
        got = reduced.eval({"x1": x1, "x3": x3, "x5": x5})
        assert abs(got - expected) <= 1e-10 * max(1.0, abs(expected))


@pytest.mark.parametrize("name,params", [
    ("delpezzo4", {"A": 1.0}),
    ("genus2", {"a1": 0.01, "a2": 0.02}),
    ("quadrics_x4", None),
    ("cubic_quadric_S", {"A": 0.5}),
    ("weighted_N", {"a": 2.0}),
])
def test_elimination_sound_on_constraint_variety(name, params):
    """Reduced potential equals the original on points satisfying relations."""
    model = builtin_model(name, params)
    steps = eliminate_with_steps(model)
    assert not steps.leftover
    rng = np.random.default_rng(hash(name) % 2**32)
    for _ in range(50):
        free_point = {v: torus_sample(rng) for v in steps.free_variables}
        full_point = dict(free_point)
        ok = True
        for var, expr in steps.substitutions:
            value = expr.eval(free_point)
            if abs(value) < 1e-6:  # solved coordinate must stay on the torus
                ok = False
                break
            full_point[var] = value
        if not ok:
            continue
        for rel in model.relations:
            res = rel.residual().eval(full_point)
            scale = max(1.0, abs(rel.lhs.eval(full_point)))
            assert abs(res) <= 1e-9 * scale
        original = model.potential
        w_full = (original.eval(full_point) if isinstance(original, LaurentPoly)
                  else original.eval(full_point))
        w_reduced = steps.potential.eval(free_point)
        assert abs(w_full - w_reduced) <= 1e-9 * max(1.0, abs(w_full))


def test_solving_inverse_power_relation():
    names = ("x1", "x2")
    rel = Relation(parse_poly("x2 * x1^-1", names), parse_poly("3", names))
    model = LGModel("toy", names, (rel,), parse_poly("x1 + x2", names))
    steps = eliminate_with_steps(model, (("x1", 0),))
    (sub,) = steps.substitutions
    assert sub[0] == "x1"
    assert abs(sub[1].eval({"x2": 1.8}) - 0.6) < 1e-12


def test_elimination_error_cases():
    model = builtin_model("delpezzo4")
    with pytest.raises(NonSolvablePick):
        eliminate(model, (("x3", 1),))  # x3 absent from x1 + x2 = -1
    with pytest.raises(NonSolvablePick):
        eliminate(model, (("zz", 0),))
    with pytest.raises(NonSolvablePick):
        eliminate(model, (("x5", 7),))
    with pytest.raises(CyclicOrder):
        eliminate(model, (("x2", 1), ("x2", 2)))
    with pytest.raises(CyclicOrder):
        eliminate(model, (("x2", 1), ("x1", 1)))
    with pytest.raises(MirrorError):
        eliminate(model, (("x2", 1),))  # two relations left unconsumed
    names = ("x1", "x2")
    squared = LGModel("toy", names,
                      (Relation(parse_poly("x1^2", names), parse_poly("x2", names)),),
                      parse_poly("x1", names))
    with pytest.raises(NonSolvablePick):
        eliminate(squared, (("x1", 0),))
    mixed = LGModel("toy", names,
                    (Relation(parse_poly("x1 + x1^-1", names), parse_poly("x2", names)),),
                    parse_poly("x1", names))
    with pytest.raises(NonSolvablePick):
        eliminate(mixed, (("x1", 0),))


# ---------------------------------------------------------------------------
# model files


@pytest.mark.parametrize("name,params", [
    ("delpezzo4", {"A": 1.0}),
    ("delpezzo4_deformed", {"e": 0.1}),
    ("genus2", {"a1": 0.01 + 0.003j, "a2": 0.02}),
    ("hyperelliptic", {"k": 5, "a1": 0.01, "a2": 0.02}),
    ("quadrics_x4", None),
    ("cubic_quadric_S", None),
    ("weighted_N", None),
])
def test_model_file_round_trip(tmp_path, name, params):
    model = builtin_model(name, params)
    path = tmp_path / f"{name}.toml"
    write_model_file(model, path)
    loaded = read_model_file(path)
    assert loaded.name == model.name
    assert loaded.variables == model.variables
    assert loaded.relations == model.relations
    assert loaded.potential == model.potential
    assert loaded.default_picks == model.default_picks
    assert set(loaded.parameters) == set(model.parameters)
    for key, value in model.parameters.items():
        assert loaded.parameters[key] == complex(value)


def test_model_file_supports_elimination(tmp_path):
    model = builtin_model("genus2", {"a1": 0.01, "a2": 0.02})
    path = tmp_path / "genus2.toml"
    write_model_file(model, path)
    loaded = read_model_file(path)
    assert eliminate(loaded) == eliminate(model)


def test_model_file_error_reporting(tmp_path):
    def load(text):
        path = tmp_path / "model.toml"
        path.write_text(text)
        return read_model_file(path)

    with pytest.raises(ModelFileError):
        load("name = 'm'\n")  # missing variables/relations/potential
    with pytest.raises(ModelFileError):
        load("this is { not toml")
    with pytest.raises(ModelFileError):
        load('name = "m"\nvariables = ["x"]\nrelations = []\n'
             'potential = "x"\nsurprise = 3\n')
    with pytest.raises(ModelFileError):
        load('name = "m"\nvariables = ["x"]\nrelations = ["x = 1"]\n'
             'potential = "x"\neliminate = [["x", "zero"]]\n')
    with pytest.raises(ModelFileError):
        load('name = "m"\nvariables = ["x"]\nrelations = ["x = 1"]\n'
             'potential = "y"\n')  # undeclared variable in an expression
    with pytest.raises(ModelFileError):
        load('name = "m"\nvariables = ["x"]\nrelations = ["x = 1"]\n'
             'potential = "x"\n[parameters]\na = "word"\n')


def test_relation_parse_requires_single_equals():
    with pytest.raises(Exception):
        parse_relation("x1 + 1", ("x1",))
    with pytest.raises(Exception):
        parse_relation("x1 = 1 = 2", ("x1",))
