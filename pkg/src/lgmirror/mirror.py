"""Affine Landau-Ginzburg models from torus charge data.

A model is a list of coordinate variables, a list of relations cutting out a
subvariety of the algebraic torus, and a superpotential.  Relations come from
gauge charge matrices (one monomial relation per gauge factor) or are entered
directly; ``eliminate`` solves chosen relations for chosen variables and
substitutes, turning the potential into an honest rational function of the
remaining coordinates.

Seven built-in models cover the worked examples used throughout the package:
two del Pezzo surface mirrors (one a two-variable deformed potential given
directly as a quotient), the genus-two curve mirror, its hyperelliptic
generalisation, an intersection of quadrics, an intersection of a cubic and
a quadric, and a weighted-projective hypersurface.
"""

from __future__ import annotations

import cmath

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .laurent import (
    LaurentPoly,
    ParseError,
    RationalPotential,
    format_poly,
    parse_poly,
)


class MirrorError(Exception):
    """Base class for model construction and elimination errors."""


class UnknownPreset(MirrorError):
    """``builtin_model`` was asked for a name it does not know."""


class MissingParameter(MirrorError):
    """A preset parameter without a default was not supplied."""


class NonSolvablePick(MirrorError):
    """A relation cannot be solved for the requested variable."""


class CyclicOrder(MirrorError):
    """An elimination pick reuses a variable or relation."""


class ModelFileError(MirrorError):
    """A model file is malformed or uses an unsupported schema."""


# ---------------------------------------------------------------------------
# relations


@dataclass(frozen=True)
class Relation:
    """An equation ``lhs = rhs`` between Laurent polynomials."""

    lhs: LaurentPoly
    rhs: LaurentPoly

    def residual(self) -> LaurentPoly:
        """lhs - rhs, aligned over the union of the two variable tuples."""
        return self.lhs - self.rhs

    def is_linear(self) -> bool:
        res = self.residual()
        return all(min(e) >= 0 and sum(e) <= 1 for e in res.terms)

    def is_monomial_type(self) -> bool:
        """True when both sides are single monomials (possibly scaled)."""
        return self.lhs.is_monomial() and self.rhs.is_monomial()

    def format(self) -> str:
        return f"{format_poly(self.lhs)} = {format_poly(self.rhs)}"


def parse_relation(text: str, variables: Sequence[str]) -> Relation:
    """Parse ``"lhs = rhs"`` with both sides in the given variables."""
    parts = text.split("=")
    if len(parts) != 2:
        raise ParseError(f"a relation needs exactly one '=': {text!r}")
    lhs = parse_poly(parts[0], variables)
    rhs = parse_poly(parts[1], variables)
    return Relation(lhs, rhs)


# ---------------------------------------------------------------------------
# charge data


@dataclass(frozen=True)
class GLSMData:
    """Gauge charge data: coordinate charges, section exponents, moduli.

    ``charges`` has one row per torus coordinate and one column per gauge
    factor.  ``section_exponents`` has one row per section variable (the
    extra variables monomial relations may produce on their right side).
    ``moduli`` holds one complexified volume per gauge factor; the scale in
    relation ``a`` is ``exp(-moduli[a])``.
    """

    charges: tuple[tuple[int, ...], ...]
    section_exponents: tuple[tuple[int, ...], ...]
    moduli: tuple[complex, ...]
    coordinate_names: tuple[str, ...] = ()
    section_names: tuple[str, ...] = ()

    def __post_init__(self):
        q = np.asarray(self.charges, dtype=int)
        if q.ndim != 2 or q.shape[0] == 0 or q.shape[1] == 0:
            raise MirrorError("charges must be a nonempty 2-d integer table")
        n, k = q.shape
        if len(self.moduli) != k:
            raise MirrorError(f"need {k} moduli, got {len(self.moduli)}")
        if np.any(np.all(q == 0, axis=0)):
            raise MirrorError("a gauge factor acts trivially on every coordinate")
        if len(self.section_exponents):
            d = np.asarray(self.section_exponents, dtype=int)
            if d.ndim != 2 or d.shape[1] != k:
                raise MirrorError("section exponent rows must match the gauge factor count")
        else:
            d = np.zeros((0, k), int)
        object.__setattr__(self, "charges", tuple(map(tuple, q.tolist())))
        object.__setattr__(self, "section_exponents", tuple(map(tuple, d.tolist())))
        object.__setattr__(self, "moduli", tuple(complex(t) for t in self.moduli))
        coords = self.coordinate_names or tuple(f"x{i + 1}" for i in range(n))
        sections = self.section_names or tuple(f"u{i + 1}" for i in range(len(self.section_exponents)))
        if len(coords) != n:
            raise MirrorError(f"need {n} coordinate names, got {len(coords)}")
        if len(sections) != len(self.section_exponents):
            raise MirrorError("section names must match section exponent rows")
        if len(set(coords) | set(sections)) != len(coords) + len(sections):
            raise MirrorError("coordinate and section names must be distinct")
        object.__setattr__(self, "coordinate_names", tuple(coords))
        object.__setattr__(self, "section_names", tuple(sections))

    @property
    def variables(self) -> tuple[str, ...]:
        return self.coordinate_names + self.section_names


def monomial_relations_from_glsm(data: GLSMData) -> list[Relation]:
    """One relation per gauge factor.

    Column ``a`` of the charge table gives the equation
    ``prod_i x_i^Q[i,a] = exp(-t_a) * prod_j u_j^D[j,a]``: positive
    coordinate charges on the left, section exponents and the volume scale
    on the right.
    """
    variables = data.variables
    q = np.asarray(data.charges, dtype=int)
    d = np.asarray(data.section_exponents, dtype=int)
    n = len(data.coordinate_names)
    relations = []
    for a in range(q.shape[1]):
        lhs_exp = [0] * len(variables)
        rhs_exp = [0] * len(variables)
        for i in range(n):
            lhs_exp[i] = int(q[i, a])
        for j in range(d.shape[0] if d.size else 0):
            rhs_exp[n + j] = int(d[j, a])
        lhs = LaurentPoly(variables, {tuple(lhs_exp): 1.0})
        rhs = LaurentPoly(variables, {tuple(rhs_exp): cmath.exp(-data.moduli[a])})
        relations.append(Relation(lhs, rhs))
    return relations


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class LGModel:
    """Torus coordinates, relations, superpotential, named constants."""

    name: str
    variables: tuple[str, ...]
    relations: tuple[Relation, ...]
    potential: LaurentPoly | RationalPotential
    parameters: dict[str, complex] = field(default_factory=dict)
    default_picks: tuple[tuple[str, int], ...] = ()

    @property
    def monomial_relations(self) -> tuple[Relation, ...]:
        return tuple(r for r in self.relations if r.is_monomial_type())

    @property
    def linear_relations(self) -> tuple[Relation, ...]:
        return tuple(r for r in self.relations if r.is_linear())


@dataclass(frozen=True)
class EliminationSteps:
    """Record of a run of ``eliminate``: solutions and what is left."""

    potential: RationalPotential
    free_variables: tuple[str, ...]
    substitutions: tuple[tuple[str, RationalPotential], ...]
    leftover: tuple[LaurentPoly, ...]


def _as_rational(value, variables) -> RationalPotential:
    if isinstance(value, RationalPotential):
        out = value
    else:
        out = RationalPotential(value)
    if set(out.vars) != set(variables):
        num = out.num.with_vars(variables)
        factors = tuple((b.with_vars(variables), p) for b, p in out.den_factors)
        out = RationalPotential(num, factors)
    return out


def _substitute(value: RationalPotential, var: str,
                replacement: RationalPotential) -> RationalPotential:
    """Replace ``var`` by a rational expression throughout ``value``."""
    def sub_poly(poly: LaurentPoly) -> RationalPotential:
        if not poly.uses_var(var):
            return RationalPotential(poly)
        out = RationalPotential(LaurentPoly.zero(poly.vars))
        for e, coeff in poly.coefficients_in(var).items():
            out = out + RationalPotential(coeff) * replacement ** e
        return out

    result = sub_poly(value.num)
    for base, power in value.den_factors:
        result = result / sub_poly(base) ** power
    return result


def _solve_relation_for(residual: LaurentPoly, var: str) -> RationalPotential:
    """Solve ``residual == 0`` for ``var``; needs a uniform exponent of +-1."""
    if not residual.uses_var(var):
        raise NonSolvablePick(f"{var!r} does not appear in the relation")
    grouped = residual.coefficients_in(var)
    nonzero = sorted(e for e in grouped if e != 0)
    if nonzero not in ([1], [-1]):
        raise NonSolvablePick(
            f"{var!r} appears with exponents {nonzero}; solving needs a "
            "single power of +1 or -1")
    coeff = grouped[nonzero[0]]
    rest = grouped.get(0, LaurentPoly.zero(residual.vars))
    if nonzero == [1]:
        # coeff * var + rest = 0
        return RationalPotential(-rest) / coeff
    # coeff / var + rest = 0
    if rest.is_zero():
        raise NonSolvablePick(f"{var!r} has no finite solution: the relation "
                              "reduces to a nonzero multiple of its inverse")
    return RationalPotential(-coeff) / rest


def eliminate_with_steps(model: LGModel,
                         picks: Sequence[tuple[str, int]] | None = None) -> EliminationSteps:
    """Solve relations for variables in order and substitute throughout.

    Each pick names a variable and the index of the relation to solve for
    it.  Solutions are substituted into the remaining relations, the
    potential, and the previously recorded solutions, so every returned
    expression uses free variables only.
    """
    if picks is None:
        picks = model.default_picks
    residuals: list[LaurentPoly | None] = [r.residual().with_vars(model.variables)
                                           for r in model.relations]
    potential = _as_rational(model.potential, model.variables)
    eliminated: list[str] = []
    substitutions: list[tuple[str, RationalPotential]] = []
    for var, idx in picks:
        if var not in model.variables:
            raise NonSolvablePick(f"{var!r} is not a model variable")
        if var in eliminated:
            raise CyclicOrder(f"{var!r} was already eliminated")
        if not 0 <= idx < len(residuals):
            raise NonSolvablePick(f"relation index {idx} out of range")
        if residuals[idx] is None:
            raise CyclicOrder(f"relation {idx} was already consumed")
        solution = _solve_relation_for(residuals[idx], var)
        residuals[idx] = None
        for j, res in enumerate(residuals):
            if res is not None and res.uses_var(var):
                # Substituting a rational solution can make the residual
                # rational; its zero locus away from poles is the numerator's.
                residuals[j] = _substitute(RationalPotential(res), var, solution).num
        potential = _substitute(potential, var, solution)
        substitutions = [(v, _substitute(s, var, solution)) for v, s in substitutions]
        substitutions.append((var, solution))
        eliminated.append(var)
    free = tuple(v for v in model.variables if v not in eliminated)
    potential = potential.restrict_vars(free)
    substitutions = [(v, s.restrict_vars(free)) for v, s in substitutions]
    leftover = tuple(r.restrict_vars(free) for r in residuals if r is not None)
    return EliminationSteps(potential, free, tuple(substitutions), leftover)


def eliminate(model: LGModel,
              picks: Sequence[tuple[str, int]] | None = None) -> RationalPotential:
    """Reduce the model to a rational potential on the unpicked variables."""
    steps = eliminate_with_steps(model, picks)
    if steps.leftover:
        raise MirrorError(
            f"{len(steps.leftover)} relation(s) were not consumed by the "
            "picks; the potential is only defined on the cut-out variety")
    return steps.potential


# ---------------------------------------------------------------------------
# built-in models

_REQUIRED = object()


def _take(params: dict, name: str, default=_REQUIRED) -> complex:
    if name in params:
        return complex(params.pop(name))
    if default is _REQUIRED:
        raise MissingParameter(f"parameter {name!r} is required")
    return complex(default)


def _poly(text: str, variables: Sequence[str]) -> LaurentPoly:
    return parse_poly(text, variables)


def _product_relation(variables: Sequence[str], scale: complex) -> Relation:
    lhs = LaurentPoly(tuple(variables), {(1,) * len(variables): 1.0})
    rhs = LaurentPoly.const(tuple(variables), scale)
    return Relation(lhs, rhs)


def _build_delpezzo4(params: dict) -> LGModel:
    scale = _take(params, "A", 1.0)
    names = ("x1", "x2", "x3", "x4", "x5")
    relations = (
        _product_relation(names, scale),
        parse_relation("x1 + x2 = -1", names),
        parse_relation("x3 + x4 = -1", names),
    )
    return LGModel("delpezzo4", names, relations, _poly("x5", names),
                   {"A": scale}, (("x5", 0), ("x2", 1), ("x4", 2)))


def _build_delpezzo4_deformed(params: dict) -> LGModel:
    e = _take(params, "e", 0.1)
    names = ("t", "u")
    tt = LaurentPoly.variable("t", names)
    uu = LaurentPoly.variable("u", names)
    num = tt * (tt - e) * uu * (uu - e)
    potential = RationalPotential(num, ((tt + 1.0, 1), (uu + 1.0, 1)))
    return LGModel("delpezzo4_deformed", names, (), potential, {"e": e}, ())


def _hyperelliptic_relations(names, k: int, a1: complex, a2: complex):
    x3_pow = LaurentPoly(names, {(0, 0, k, 0, 0): a1})
    x3_sqr = LaurentPoly(names, {(0, 0, 2, 0, 0): a2})
    return (
        Relation(_poly("x1 * x2", names), x3_pow),
        Relation(_poly("x4 * x5", names), x3_sqr),
    )


def _build_genus2(params: dict) -> LGModel:
    a1 = _take(params, "a1")
    a2 = _take(params, "a2")
    names = ("x1", "x2", "x3", "x4", "x5")
    relations = _hyperelliptic_relations(names, 3, a1, a2)
    potential = _poly("x1 + x2 + x3 + x4 + x5", names)
    return LGModel("genus2", names, relations, potential,
                   {"a1": a1, "a2": a2}, (("x2", 0), ("x5", 1)))


def _build_hyperelliptic(params: dict) -> LGModel:
    k_value = _take(params, "k")
    if k_value.imag != 0 or k_value.real != int(k_value.real) or int(k_value.real) < 3:
        raise MirrorError(f"k must be an integer >= 3, got {k_value}")
    k = int(k_value.real)
    a1 = _take(params, "a1")
    a2 = _take(params, "a2")
    names = ("x1", "x2", "x3", "x4", "x5")
    relations = _hyperelliptic_relations(names, k, a1, a2)
    potential = _poly("x1 + x2 + x3 + x4 + x5", names)
    return LGModel("hyperelliptic", names, relations, potential,
                   {"k": k, "a1": a1, "a2": a2}, (("x2", 0), ("x5", 1)))


def _build_quadrics_x4(params: dict) -> LGModel:
    scale = _take(params, "A", 1.0)
    names = ("x1", "x2", "x3", "x4", "x5", "x6")
    relations = (
        _product_relation(names, scale),
        parse_relation("x1 + x2 = -1", names),
        parse_relation("x3 + x4 = -1", names),
    )
    return LGModel("quadrics_x4", names, relations, _poly("x5 + x6", names),
                   {"A": scale}, (("x6", 0), ("x2", 1), ("x4", 2)))


def _build_cubic_quadric_S(params: dict) -> LGModel:
    scale = _take(params, "A", 1.0)
    names = ("x1", "x2", "x3", "x4", "x5", "x6")
    relations = (
        parse_relation("x1 + x2 = -1", names),
        parse_relation("x3 + x4 + x5 = -1", names),
        _product_relation(names, scale),
    )
    return LGModel("cubic_quadric_S", names, relations, _poly("x6", names),
                   {"A": scale}, (("x6", 2), ("x2", 0), ("x4", 1)))


def _build_weighted_N(params: dict) -> LGModel:
    scale = _take(params, "a", 1.0)
    names = ("u1", "u2", "u3", "u4", "u5", "v")
    lhs = LaurentPoly(names, {(1, 1, 1, 2, 3, 0): 1.0})
    rhs = LaurentPoly(names, {(0, 0, 0, 0, 0, 6): scale})
    potential = _poly("u1 + u2 + u3 + u4 + u5 + v", names)
    return LGModel("weighted_N", names, (Relation(lhs, rhs),), potential,
                   {"a": scale}, (("u1", 0),))


_PRESETS = {
    "delpezzo4": _build_delpezzo4,
    "delpezzo4_deformed": _build_delpezzo4_deformed,
    "genus2": _build_genus2,
    "hyperelliptic": _build_hyperelliptic,
    "quadrics_x4": _build_quadrics_x4,
    "cubic_quadric_S": _build_cubic_quadric_S,
    "weighted_N": _build_weighted_N,
}


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_PRESETS))


def builtin_model(name: str, parameters: Mapping[str, complex] | None = None) -> LGModel:
    """Construct a named built-in model, checking its parameter list."""
    if name not in _PRESETS:
        known = ", ".join(preset_names())
        raise UnknownPreset(f"unknown model {name!r}; choose one of: {known}")
    params = dict(parameters or {})
    model = _PRESETS[name](params)
    if params:
        extra = ", ".join(sorted(params))
        raise MirrorError(f"model {name!r} does not take parameter(s): {extra}")
    return model


# ---------------------------------------------------------------------------
# model files (TOML)


def _encode_complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _decode_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(p, (int, float)) for p in value)):
        return complex(value[0], value[1])
    raise ModelFileError(f"expected a number or [re, im] pair, got {value!r}")


def _toml_string(text: str) -> str:
    if any(ch in text for ch in '"\\\n'):
        raise ModelFileError(f"cannot serialise string with quotes/escapes: {text!r}")
    return f'"{text}"'


def write_model_file(model: LGModel, path) -> None:
    """Serialise a model to the TOML layout ``read_model_file`` accepts."""
    lines = [f"name = {_toml_string(model.name)}"]
    lines.append("variables = [" + ", ".join(_toml_string(v) for v in model.variables) + "]")
    lines.append("relations = [")
    for rel in model.relations:
        lines.append(f"    {_toml_string(rel.format())},")
    lines.append("]")
    if model.default_picks:
        picks = ", ".join(f"[{_toml_string(v)}, {i}]" for v, i in model.default_picks)
        lines.append(f"eliminate = [{picks}]")
    if isinstance(model.potential, LaurentPoly):
        lines.append(f"potential = {_toml_string(format_poly(model.potential))}")
    else:
        lines.append("")
        lines.append("[potential]")
        lines.append(f"numerator = {_toml_string(format_poly(model.potential.num))}")
        factors = ", ".join(f"[{_toml_string(format_poly(b))}, {p}]"
                            for b, p in model.potential.den_factors)
        lines.append(f"denominator_factors = [{factors}]")
    if model.parameters:
        lines.append("")
        lines.append("[parameters]")
        for key in sorted(model.parameters):
            re_im = _encode_complex(complex(model.parameters[key]))
            lines.append(f"{key} = [{re_im[0]!r}, {re_im[1]!r}]")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def read_model_file(path) -> LGModel:
    """Load a model from a TOML file.

    Required keys: ``name`` (string), ``variables`` (list of strings),
    ``relations`` (list of ``"lhs = rhs"`` strings) and ``potential``
    (either an expression string or a table with ``numerator`` and
    ``denominator_factors``).  Optional: ``eliminate`` (list of
    ``[variable, relation_index]`` picks) and a ``[parameters]`` table whose
    values are numbers or ``[re, im]`` pairs.
    """
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ModelFileError(f"not valid TOML: {exc}") from exc
    try:
        name = raw.pop("name")
        variables = tuple(raw.pop("variables"))
        relation_texts = raw.pop("relations")
        potential_raw = raw.pop("potential")
    except KeyError as exc:
        raise ModelFileError(f"missing required key {exc.args[0]!r}") from exc
    if not isinstance(name, str):
        raise ModelFileError("name must be a string")
    if not variables or not all(isinstance(v, str) for v in variables):
        raise ModelFileError("variables must be a nonempty list of strings")
    picks_raw = raw.pop("eliminate", [])
    params_raw = raw.pop("parameters", {})
    if raw:
        extra = ", ".join(sorted(raw))
        raise ModelFileError(f"unsupported key(s) in model file: {extra}")
    try:
        relations = tuple(parse_relation(text, variables) for text in relation_texts)
        if isinstance(potential_raw, str):
            potential = parse_poly(potential_raw, variables)
        elif isinstance(potential_raw, dict):
            num = parse_poly(potential_raw["numerator"], variables)
            factors = tuple((parse_poly(text, variables), int(power))
                            for text, power in potential_raw["denominator_factors"])
            potential = RationalPotential(num, factors)
        else:
            raise ModelFileError("potential must be a string or a table")
    except ParseError as exc:
        raise ModelFileError(f"bad expression in model file: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"bad relations/potential value: {exc}") from exc
    picks = []
    for entry in picks_raw:
        if (not isinstance(entry, list) or len(entry) != 2
                or not isinstance(entry[0], str) or not isinstance(entry[1], int)):
            raise ModelFileError(f"eliminate entries are [variable, index]: {entry!r}")
        picks.append((entry[0], entry[1]))
    parameters = {key: _decode_complex(value) for key, value in params_raw.items()}
    return LGModel(name, variables, relations, potential, parameters, tuple(picks))
