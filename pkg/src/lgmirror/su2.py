"""Holonomy tuples in SU(2) and conjugacy-class counts for surface groups.

A projectively flat rank-2 connection on a genus-2 surface is pinned down
by the holonomies (A1, B1, A2, B2) of the standard generating loops,
subject to [A1,B1][A2,B2] = -I.  Fixing some holonomies to the identity
cuts out a Lagrangian of the moduli space, and the number of conjugacy
classes of solutions counts intersection points of two such Lagrangians.
This module solves the relation numerically over many random starts,
clusters the solutions by conjugation invariants, and estimates whether
each cluster is an isolated orbit or part of a positive-dimensional
family.  Elements live in quaternion coordinates, where the unit sphere
is exactly SU(2) and matrix arithmetic reduces to quaternion products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .critical import SearchConfig

GENERATORS = ("a1", "b1", "a2", "b2")

_GN_ITERATIONS = (24, 16)
_GN_DAMPING = (1e-2, 1e-12)
_CONVERGED_TOL = 1e-10
_REPORT_TOL = 1e-8
_CLUSTER_TOL = 1e-6
_RANK_REL_TOL = 1e-6
_PROBE_LIMIT = 16
_CLUSTER_LIMIT = 64


class HolonomyError(Exception):
    """Base error for holonomy problems."""


class UnknownGenerator(HolonomyError):
    """A loop name outside the standard generating system."""


class BudgetExhaustedAmbiguous(HolonomyError):
    """Solution clusters are too close to separate at the tolerance used."""


@dataclass(frozen=True)
class SU2Element:
    """A unit quaternion standing for a special unitary 2x2 matrix.

    The correspondence sends (q0, q1, q2, q3) to
    ``[[q0 + i q1, q2 + i q3], [-q2 + i q3, q0 - i q1]]``; quaternion
    multiplication matches matrix multiplication and the Euclidean
    4-norm of a difference equals the operator norm of the matrix
    difference, so all metric bookkeeping stays in R^4.
    """

    q0: float
    q1: float
    q2: float
    q3: float

    def __post_init__(self):
        norm = self.q0 ** 2 + self.q1 ** 2 + self.q2 ** 2 + self.q3 ** 2
        if abs(norm - 1.0) > 1e-10:
            raise HolonomyError(f"quaternion norm {math.sqrt(norm):.12f} is not 1")

    @classmethod
    def identity(cls) -> "SU2Element":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def minus_identity(cls) -> "SU2Element":
        return cls(-1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_quaternion(cls, values) -> "SU2Element":
        q = np.asarray(values, dtype=float)
        scale = float(np.linalg.norm(q))
        if scale == 0.0:
            raise HolonomyError("zero quaternion has no direction")
        q = q / scale
        return cls(float(q[0]), float(q[1]), float(q[2]), float(q[3]))

    @classmethod
    def from_matrix(cls, matrix) -> "SU2Element":
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (2, 2):
            raise HolonomyError(f"expected a 2x2 matrix, got shape {m.shape}")
        q = np.array([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag])
        candidate = cls.from_quaternion(q)
        if np.abs(candidate.to_matrix() - m).max() > 1e-8:
            raise HolonomyError("matrix is not special unitary")
        return candidate

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SU2Element":
        return cls.from_quaternion(rng.normal(size=4))

    def as_array(self) -> np.ndarray:
        return np.array([self.q0, self.q1, self.q2, self.q3])

    def to_matrix(self) -> np.ndarray:
        a = self.q0 + 1j * self.q1
        b = self.q2 + 1j * self.q3
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]])

    @property
    def trace(self) -> float:
        return 2.0 * self.q0

    def __mul__(self, other: "SU2Element") -> "SU2Element":
        out = _qmul(self.as_array(), other.as_array())
        return SU2Element(*(float(v) for v in out))

    def inverse(self) -> "SU2Element":
        return SU2Element(self.q0, -self.q1, -self.q2, -self.q3)

    def conjugated_by(self, g: "SU2Element") -> "SU2Element":
        return g * self * g.inverse()

    def distance(self, other: "SU2Element") -> float:
        """Operator-norm distance between the two matrices."""
        return float(np.linalg.norm(self.as_array() - other.as_array()))


def _qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)


def _qconj(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def _commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _qmul(_qmul(_qmul(a, b), _qconj(a)), _qconj(b))


@dataclass(frozen=True)
class HolonomyProblem:
    """Which holonomies are pinned, and what the loop product must equal.

    ``fixed`` maps generator names to their required values (the identity
    for the Lagrangians studied here); every other generator is free.
    ``target`` is the demanded value of [A1,B1][A2,B2], either identity.
    """

    fixed: Mapping[str, SU2Element]
    target: SU2Element
    free: tuple = field(init=False)

    def __post_init__(self):
        for name in self.fixed:
            if name not in GENERATORS:
                raise UnknownGenerator(f"{name!r} is not one of {GENERATORS}")
        object.__setattr__(self, "fixed", dict(self.fixed))
        object.__setattr__(
            self, "free", tuple(g for g in GENERATORS if g not in self.fixed))
        plus = abs(self.target.q0 - 1.0)
        minus = abs(self.target.q0 + 1.0)
        off_axis = abs(self.target.q1) + abs(self.target.q2) + abs(self.target.q3)
        if off_axis > 1e-10 or min(plus, minus) > 1e-10:
            raise HolonomyError("the loop-product target must be the identity "
                                "or its negative")


@dataclass(frozen=True)
class SolutionSet:
    """Conjugacy classes of holonomy tuples found by the search.

    ``status`` is ``empty`` (no start converged over the whole budget, a
    probabilistic statement recorded together with ``budget``), ``finite``
    (every cluster is an isolated conjugation orbit, ``count`` clusters),
    or ``positive_dimensional`` (some cluster moves in a family).
    """

    status: str
    representatives: tuple
    invariant_signatures: tuple
    count: int | None
    budget: int


def conjugation_invariants(elements) -> np.ndarray:
    """Trace coordinates separating tuples modulo simultaneous conjugation.

    Takes the four holonomies in generator order and returns the traces
    of A1, B1, A2, B2, A2 B2, A1 A2, B1 B2, and A1 B2.
    """
    a1, b1, a2, b2 = [np.asarray(e.as_array() if isinstance(e, SU2Element) else e,
                                 dtype=float) for e in elements]
    words = [a1, b1, a2, b2, _qmul(a2, b2), _qmul(a1, a2),
             _qmul(b1, b2), _qmul(a1, b2)]
    return np.array([2.0 * w[..., 0] for w in words]).T if a1.ndim > 1 \
        else np.array([2.0 * w[0] for w in words])


def surface_loop_intersections(g1: str, g2: str) -> int:
    """Geometric intersection count of two standard genus-2 loops.

    The a-loop and b-loop of the same handle cross once; every other
    pair, and any loop with itself, is disjoint up to isotopy.
    """
    for name in (g1, g2):
        if name not in GENERATORS:
            raise UnknownGenerator(f"{name!r} is not one of {GENERATORS}")
    return 1 if {g1, g2} in ({"a1", "b1"}, {"a2", "b2"}) else 0


def conjugate_problem(problem: HolonomyProblem, g: SU2Element) -> HolonomyProblem:
    """Conjugate every constraint and the target by one group element."""
    moved = {name: value.conjugated_by(g) for name, value in problem.fixed.items()}
    return HolonomyProblem(moved, problem.target.conjugated_by(g))


def _assemble(problem: HolonomyProblem, x: np.ndarray) -> dict:
    """Split flat unknowns into per-generator quaternion arrays."""
    rows = x.shape[0]
    quats = {}
    for name, value in problem.fixed.items():
        quats[name] = np.broadcast_to(value.as_array(), (rows, 4))
    for k, name in enumerate(problem.free):
        quats[name] = x[:, 4 * k:4 * k + 4]
    return quats


def _system(problem: HolonomyProblem, x: np.ndarray) -> np.ndarray:
    """Residuals: the loop relation (4 rows) and one unit norm per free."""
    quats = _assemble(problem, x)
    relation = _qmul(_commutator(quats["a1"], quats["b1"]),
                     _commutator(quats["a2"], quats["b2"]))
    parts = [relation - problem.target.as_array()]
    for k in range(len(problem.free)):
        block = x[:, 4 * k:4 * k + 4]
        parts.append(((block ** 2).sum(axis=1) - 1.0)[:, None])
    return np.concatenate(parts, axis=1)


def _jacobian(problem: HolonomyProblem, x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    h = 1e-7
    cols = []
    for k in range(n):
        bump = np.zeros(n)
        bump[k] = h
        cols.append((_system(problem, x + bump) - _system(problem, x - bump))
                    / (2.0 * h))
    return np.stack(cols, axis=2)


def _orbit_codimension(problem: HolonomyProblem, x_row: np.ndarray) -> int:
    """Local dimension of the solution set beyond one conjugation orbit.

    Counts unknowns minus the numerical rank of the Jacobian, minus the
    three directions of the simultaneous-conjugation action (which is
    free on irreducible tuples and preserves central constraints).
    """
    jac = _jacobian(problem, x_row[None, :])[0]
    svals = np.linalg.svd(jac, compute_uv=False)
    rank = int((svals > max(_RANK_REL_TOL * svals.max(), 1e-10)).sum())
    return x_row.size - rank - 3


def solve_relation(problem: HolonomyProblem,
                   search: SearchConfig | None = None) -> SolutionSet:
    """Count conjugacy classes of holonomy tuples meeting the constraints.

    Runs damped Gauss-Newton from ``starts`` random unit-quaternion
    tuples (vectorized over the whole batch), keeps starts whose residual
    drops below 1e-10, and clusters survivors by conjugation invariants.
    A cluster is an isolated orbit when the Jacobian's rank deficiency is
    exactly the conjugation orbit's dimension; any larger deficiency
    makes the whole answer ``positive_dimensional``.

    Raises ``BudgetExhaustedAmbiguous`` when distinct clusters sit closer
    than ten times the clustering tolerance, or when there are too many
    clusters to isolation-check individually.
    """
    cfg = search or SearchConfig(starts=10000)
    free_count = len(problem.free)
    if free_count == 0:
        forced = np.zeros((1, 0))
        residual = float(np.abs(_system(problem, forced)).max())
        tuple_fixed = tuple(problem.fixed[g] for g in GENERATORS)
        if residual < _REPORT_TOL:
            return SolutionSet("finite", (tuple_fixed,),
                               (conjugation_invariants(tuple_fixed),), 1, 0)
        return SolutionSet("empty", (), (), 0, 0)

    rng = np.random.default_rng(cfg.seed)
    x = rng.normal(size=(cfg.starts, 4 * free_count))
    for k in range(free_count):
        block = x[:, 4 * k:4 * k + 4]
        x[:, 4 * k:4 * k + 4] = block / np.linalg.norm(block, axis=1, keepdims=True)

    eye = np.eye(4 * free_count)
    for damping, rounds in zip(_GN_DAMPING, _GN_ITERATIONS):
        for _ in range(rounds):
            f = _system(problem, x)
            jac = _jacobian(problem, x)
            gram = jac.transpose(0, 2, 1) @ jac
            rhs = jac.transpose(0, 2, 1) @ f[:, :, None]
            # damping rides the Gram diagonal so rank-deficient rows (stuck
            # starts of infeasible problems) never go exactly singular
            scale = 1.0 + np.einsum("bii->b", gram) / eye.shape[0]
            mu = damping * scale
            for _retry in range(3):
                try:
                    step = np.linalg.solve(
                        gram + mu[:, None, None] * eye, rhs)[:, :, 0]
                    break
                except np.linalg.LinAlgError:
                    mu = mu * 1e4
            else:
                raise HolonomyError("normal equations stayed singular")
            x = np.clip(x - step, -5.0, 5.0)

    residuals = np.abs(np.nan_to_num(_system(problem, x), nan=1.0)).max(axis=1)
    converged = np.nonzero(residuals < _CONVERGED_TOL)[0]
    if converged.size == 0:
        return SolutionSet("empty", (), (), 0, cfg.starts)

    probe = converged[:: max(1, converged.size // _PROBE_LIMIT)][:_PROBE_LIMIT]
    if any(_orbit_codimension(problem, x[idx]) > 0 for idx in probe):
        reps, sigs = _collect(problem, x[probe[:3]])
        return SolutionSet("positive_dimensional", reps, sigs, None, cfg.starts)

    order = converged[np.argsort(residuals[converged], kind="stable")]
    signatures = conjugation_invariants(
        [_assemble(problem, x[order])[g] for g in GENERATORS])
    keepers = [int(order[row]) for row in _cluster_rows(signatures)]
    if any(_orbit_codimension(problem, x[idx]) > 0 for idx in keepers):
        reps, sigs = _collect(problem, x[keepers])
        return SolutionSet("positive_dimensional", reps, sigs, None, cfg.starts)
    reps, sigs = _collect(problem, x[keepers])
    return SolutionSet("finite", reps, sigs, len(reps), cfg.starts)


def _cluster_rows(signatures: np.ndarray) -> list[int]:
    """Cluster signature rows, returning the first row of each cluster.

    Rows are scanned in order (callers sort by residual, so the cluster
    representative is the best-converged member).  Raises
    ``BudgetExhaustedAmbiguous`` when two cluster centers sit inside ten
    times the clustering tolerance, or when the cluster count outgrows
    the per-cluster isolation checks.
    """
    signatures = np.atleast_2d(signatures)
    centers: list[np.ndarray] = []
    keepers: list[int] = []
    for row, sig in enumerate(signatures):
        if all(np.abs(sig - c).max() >= _CLUSTER_TOL for c in centers):
            centers.append(sig)
            keepers.append(row)
            if len(centers) > _CLUSTER_LIMIT:
                raise BudgetExhaustedAmbiguous(
                    f"more than {_CLUSTER_LIMIT} isolated-looking clusters; "
                    "widen the tolerance or supply a bigger budget")
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            split = float(np.abs(centers[i] - centers[j]).max())
            if split < 10.0 * _CLUSTER_TOL:
                raise BudgetExhaustedAmbiguous(
                    f"clusters {i} and {j} differ by {split:.3g}, inside the "
                    "ambiguity margin")
    return keepers


def _collect(problem: HolonomyProblem, rows: np.ndarray):
    """Package solution rows as SU2Element 4-tuples plus signatures."""
    reps = []
    sigs = []
    for row in np.atleast_2d(rows):
        quats = _assemble(problem, row[None, :])
        elements = tuple(SU2Element.from_quaternion(quats[g][0])
                         for g in GENERATORS)
        residual = _residual_of(elements, problem.target)
        if residual >= _REPORT_TOL:
            raise HolonomyError(
                f"candidate representative has residual {residual:.3g}")
        reps.append(elements)
        sigs.append(conjugation_invariants(elements))
    return tuple(reps), tuple(sigs)


def _residual_of(elements, target: SU2Element) -> float:
    a1, b1, a2, b2 = [e.as_array() for e in elements]
    relation = _qmul(_commutator(a1, b1), _commutator(a2, b2))
    return float(np.linalg.norm(relation - target.as_array()))
