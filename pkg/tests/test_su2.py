"""Quaternion SU(2) arithmetic and holonomy-relation solution counts."""

import numpy as np
import pytest

from lgmirror.critical import SearchConfig
from lgmirror.su2 import (
    GENERATORS,
    BudgetExhaustedAmbiguous,
    HolonomyError,
    HolonomyProblem,
    SU2Element,
    UnknownGenerator,
    _cluster_rows,
    conjugate_problem,
    conjugation_invariants,
    solve_relation,
    surface_loop_intersections,
)

I2 = SU2Element.identity()
MINUS = SU2Element.minus_identity()
A2_DIAG = SU2Element(0.0, 1.0, 0.0, 0.0)
B2_ANTI = SU2Element(0.0, 0.0, 1.0, 0.0)


def commutator(a, b):
    return a * b * a.inverse() * b.inverse()


# ---------------------------------------------------------------------------
# the quaternion model of SU(2)


def test_quaternion_matrix_correspondence():
    rng = np.random.default_rng(3)
    for _ in range(12):
        p = SU2Element.random(rng)
        q = SU2Element.random(rng)
        mp, mq = p.to_matrix(), q.to_matrix()
        assert np.abs(mp @ mp.conj().T - np.eye(2)).max() < 1e-12
        assert np.linalg.det(mp) == pytest.approx(1.0, abs=1e-12)
        assert np.abs((p * q).to_matrix() - mp @ mq).max() < 1e-12
        assert p.trace == pytest.approx(np.trace(mp).real, abs=1e-12)
        op_norm = np.linalg.svd(mp - mq, compute_uv=False).max()
        assert p.distance(q) == pytest.approx(op_norm, abs=1e-10)
        assert (p * p.inverse()).distance(I2) < 1e-12


def test_special_elements():
    assert np.abs(A2_DIAG.to_matrix() - np.diag([1j, -1j])).max() < 1e-15
    anti = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert np.abs(B2_ANTI.to_matrix() - anti).max() < 1e-15
    assert SU2Element.from_matrix(np.diag([1j, -1j])).distance(A2_DIAG) < 1e-12
    assert commutator(A2_DIAG, B2_ANTI).distance(MINUS) < 1e-12


def test_element_validation():
    with pytest.raises(HolonomyError):
        SU2Element(1.1, 0.0, 0.0, 0.0)
    with pytest.raises(HolonomyError):
        SU2Element.from_quaternion([0.0, 0.0, 0.0, 0.0])
    with pytest.raises(HolonomyError):
        SU2Element.from_matrix(np.array([[1.0, 1.0], [0.0, 1.0]]))
    longer = SU2Element.from_quaternion([3.0, 0.0, 4.0, 0.0])
    assert longer.distance(SU2Element(0.6, 0.0, 0.8, 0.0)) < 1e-12


def test_conjugation_invariants_examples():
    flat = conjugation_invariants((I2, I2, I2, I2))
    assert np.abs(flat - 2.0).max() < 1e-14
    marked = conjugation_invariants((I2, I2, A2_DIAG, B2_ANTI))
    assert np.abs(marked - np.array([2, 2, 0, 0, 0, 0, 0, 0])).max() < 1e-14
    rng = np.random.default_rng(8)
    tuple4 = tuple(SU2Element.random(rng) for _ in range(4))
    g = SU2Element.random(rng)
    moved = tuple(e.conjugated_by(g) for e in tuple4)
    drift = np.abs(conjugation_invariants(tuple4) - conjugation_invariants(moved))
    assert drift.max() < 1e-10


def test_surface_loop_table():
    assert surface_loop_intersections("a1", "b1") == 1
    assert surface_loop_intersections("b2", "a2") == 1
    assert surface_loop_intersections("a1", "a2") == 0
    assert surface_loop_intersections("a1", "b2") == 0
    assert surface_loop_intersections("b1", "a2") == 0
    assert surface_loop_intersections("b1", "b2") == 0
    assert surface_loop_intersections("a1", "a1") == 0
    with pytest.raises(UnknownGenerator):
        surface_loop_intersections("a1", "c9")


def test_problem_validation():
    with pytest.raises(UnknownGenerator):
        HolonomyProblem({"z4": I2}, MINUS)
    with pytest.raises(HolonomyError):
        HolonomyProblem({"a1": I2}, A2_DIAG)
    problem = HolonomyProblem({"a1": I2, "b1": I2}, MINUS)
    assert problem.free == ("a2", "b2")


# ---------------------------------------------------------------------------
# solving the loop relation


def test_disjoint_loops_give_empty():
    result = solve_relation(HolonomyProblem({"a1": I2, "a2": I2}, MINUS))
    assert result.status == "empty"
    assert result.count == 0
    assert result.representatives == ()
    assert result.budget == 10000


def test_crossing_loops_give_one_class():
    result = solve_relation(HolonomyProblem({"a1": I2, "b1": I2}, MINUS))
    assert result.status == "finite"
    assert result.count == 1
    a1, b1, a2, b2 = result.representatives[0]
    assert a1.distance(I2) < 1e-12
    assert b1.distance(I2) < 1e-12
    relation = commutator(a1, b1) * commutator(a2, b2)
    assert relation.distance(MINUS) < 1e-8
    assert abs(a2.trace) < 1e-8
    assert abs(b2.trace) < 1e-8
    assert abs((a2 * b2).trace) < 1e-8
    signature = result.invariant_signatures[0]
    assert np.abs(signature - np.array([2, 2, 0, 0, 0, 0, 0, 0])).max() < 1e-8


@pytest.mark.parametrize("g1,g2", [
    ("a1", "b1"), ("a2", "b2"), ("a1", "a2"),
    ("a1", "b2"), ("b1", "a2"), ("b1", "b2"),
])
def test_pair_fixings_match_loop_table(g1, g2):
    problem = HolonomyProblem({g1: I2, g2: I2}, MINUS)
    result = solve_relation(problem, SearchConfig(starts=2500, seed=2))
    predicted = surface_loop_intersections(g1, g2)
    if predicted == 1:
        assert result.status == "finite"
        assert result.count == 1
    else:
        assert result.status == "empty"


def test_trivial_target_gives_family():
    result = solve_relation(HolonomyProblem({}, I2),
                            SearchConfig(starts=1500, seed=4))
    assert result.status == "positive_dimensional"
    assert result.count is None
    for rep in result.representatives:
        relation = commutator(rep[0], rep[1]) * commutator(rep[2], rep[3])
        assert relation.distance(I2) < 1e-8


def test_fully_fixed_problems():
    everything = {g: I2 for g in GENERATORS}
    satisfied = solve_relation(HolonomyProblem(everything, I2))
    assert satisfied.status == "finite"
    assert satisfied.count == 1
    violated = solve_relation(HolonomyProblem(everything, MINUS))
    assert violated.status == "empty"


def test_seed_and_conjugation_invariance():
    base = HolonomyProblem({"a1": I2, "b1": I2}, MINUS)
    first = solve_relation(base, SearchConfig(starts=2500, seed=0))
    second = solve_relation(base, SearchConfig(starts=2500, seed=99))
    assert first.status == second.status == "finite"
    assert first.count == second.count == 1
    drift = np.abs(np.asarray(first.invariant_signatures[0])
                   - np.asarray(second.invariant_signatures[0]))
    assert drift.max() < 1e-6
    rng = np.random.default_rng(7)
    for _ in range(3):
        g = SU2Element.random(rng)
        moved = solve_relation(conjugate_problem(base, g),
                               SearchConfig(starts=2500, seed=0))
        assert moved.status == "finite"
        assert moved.count == 1
        a1, b1, a2, b2 = first.representatives[0]
        spun = tuple(e.conjugated_by(g) for e in (a1, b1, a2, b2))
        drift = np.abs(conjugation_invariants(spun)
                       - np.asarray(first.invariant_signatures[0]))
        assert drift.max() < 1e-10


def test_cluster_separation_guard():
    apart = np.zeros((3, 8))
    apart[1, 0] = 1.0
    apart[2, 3] = -1.0
    assert _cluster_rows(apart) == [0, 1, 2]
    merged = np.zeros((4, 8))
    merged[2, 0] = 5e-7
    merged[3, 0] = 1.0
    assert _cluster_rows(merged) == [0, 3]
    uneasy = np.zeros((2, 8))
    uneasy[1, 0] = 4e-6
    with pytest.raises(BudgetExhaustedAmbiguous):
        _cluster_rows(uneasy)
