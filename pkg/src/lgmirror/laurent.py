"""Sparse multivariate Laurent polynomials over complex doubles.

Everything downstream (model elimination, critical-point solving, branch
tracking) works with two value types defined here:

* :class:`LaurentPoly` stores a finite map from integer exponent vectors to
  nonzero complex coefficients.  Negative exponents are allowed, so monomial
  inversion stays inside the class.
* :class:`RationalPotential` is a quotient ``num / prod(factor_i ** e_i)``
  whose denominator is kept in factored form.  No gcd reduction is ever
  performed; the factor list doubles as the record of excluded loci
  introduced by eliminations and quotient-rule derivatives.

Text round-tripping uses a small expression grammar: identifiers, ``^`` with
integer (possibly negative) exponents, ``*``, ``+``, ``-``, parentheses and
complex literals like ``1.5``, ``2i`` or ``(3+0.5i)``.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

import numpy as np


class LaurentError(Exception):
    """Base class for errors raised by this module."""


class DimensionMismatch(LaurentError):
    """An evaluation point does not match the variable tuple."""


class UnknownVariable(LaurentError):
    """A variable name is not part of the polynomial's variable tuple."""


class PoleError(LaurentError):
    """Evaluation hit (or came within tolerance of) a denominator zero."""


class ParseError(LaurentError):
    """The expression text does not conform to the grammar."""


POLE_TOL = 1e-12


def _as_complex(value) -> complex:
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)):
        return complex(value)
    raise TypeError(f"cannot interpret {value!r} as a complex coefficient")


class LaurentPoly:
    """A sparse Laurent polynomial in named variables.

    ``terms`` maps exponent tuples (one integer per variable, negatives
    allowed) to nonzero complex coefficients.  Zero coefficients are dropped
    on construction so that structural equality means mathematical equality
    of the stored representation.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, complex] | None = None):
        self.vars = tuple(variables)
        clean: dict[tuple[int, ...], complex] = {}
        if terms:
            n = len(self.vars)
            for exps, coeff in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != n:
                    raise DimensionMismatch(
                        f"exponent vector {exps} has length {len(exps)}, expected {n}")
                c = _as_complex(coeff)
                if c != 0:
                    clean[exps] = clean.get(exps, 0j) + c
                    if clean[exps] == 0:
                        del clean[exps]
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "LaurentPoly":
        return cls(variables, {})

    @classmethod
    def const(cls, variables: Sequence[str], value) -> "LaurentPoly":
        value = _as_complex(value)
        if value == 0:
            return cls.zero(variables)
        return cls(variables, {(0,) * len(tuple(variables)): value})

    @classmethod
    def variable(cls, name: str, variables: Sequence[str] | None = None) -> "LaurentPoly":
        variables = (name,) if variables is None else tuple(variables)
        if name not in variables:
            raise UnknownVariable(f"{name!r} not in {variables}")
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {exps: 1.0 + 0j})

    @classmethod
    def monomial(cls, variables: Sequence[str], exps: Sequence[int], coeff=1.0) -> "LaurentPoly":
        return cls(variables, {tuple(exps): coeff})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exps) for exps in self.terms)

    def constant_value(self) -> complex:
        if not self.is_constant():
            raise LaurentError("not a constant polynomial")
        return self.terms.get((0,) * len(self.vars), 0j)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def sorted_terms(self) -> list[tuple[tuple[int, ...], complex]]:
        """Terms in descending graded-lexicographic order (canonical)."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def key(self):
        """Hashable structural key, used to merge identical denominator factors."""
        return (self.vars, tuple(sorted(self.terms.items(), key=lambda kv: kv[0])))

    def degree_range(self, var: str) -> tuple[int, int]:
        """(min, max) exponent of ``var`` over the support; (0, 0) if absent."""
        i = self._index(var)
        if not self.terms:
            return (0, 0)
        exps = [e[i] for e in self.terms]
        return (min(exps), max(exps))

    def uses_var(self, var: str) -> bool:
        i = self._index(var)
        return any(e[i] != 0 for e in self.terms)

    def restrict_vars(self, variables: Sequence[str]) -> "LaurentPoly":
        """Project onto a variable subset; the dropped ones must be unused."""
        variables = tuple(variables)
        keep = []
        for v in self.vars:
            if v in variables:
                keep.append(self.vars.index(v))
            elif self.uses_var(v):
                raise LaurentError(f"cannot drop variable {v!r}: it appears in the support")
        pos = {self.vars[i]: i for i in keep}
        terms = {}
        for exps, c in self.terms.items():
            terms[tuple(exps[pos[v]] if v in pos else 0 for v in variables)] = c
        return LaurentPoly(variables, terms)

    def coefficients_in(self, var: str) -> dict[int, "LaurentPoly"]:
        """Group terms by the exponent of ``var``: {e: coefficient poly}.

        Coefficient polynomials keep the full variable tuple with ``var``
        zeroed out.
        """
        i = self._index(var)
        grouped: dict[int, dict] = {}
        for exps, c in self.terms.items():
            rest = list(exps)
            rest[i] = 0
            grouped.setdefault(exps[i], {})[tuple(rest)] = c
        return {e: LaurentPoly(self.vars, t) for e, t in grouped.items()}

    def support(self) -> list[tuple[int, ...]]:
        return list(self.terms.keys())

    def _index(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise UnknownVariable(f"{var!r} not in {self.vars}") from None

    # -- variable alignment ------------------------------------------------

    def with_vars(self, variables: Sequence[str]) -> "LaurentPoly":
        """Reindex onto a larger variable tuple (a superset of ``self.vars``)."""
        variables = tuple(variables)
        if variables == self.vars:
            return self
        pos = []
        for v in self.vars:
            if v not in variables:
                raise UnknownVariable(f"{v!r} not in target variables {variables}")
            pos.append(variables.index(v))
        n = len(variables)
        terms = {}
        for exps, c in self.terms.items():
            new = [0] * n
            for p, e in zip(pos, exps):
                new[p] = e
            terms[tuple(new)] = c
        return LaurentPoly(variables, terms)

    @staticmethod
    def _merged_vars(a: "LaurentPoly", b: "LaurentPoly") -> tuple[str, ...]:
        merged = list(a.vars)
        for v in b.vars:
            if v not in merged:
                merged.append(v)
        return tuple(merged)

    def _pair(self, other) -> tuple["LaurentPoly", "LaurentPoly"]:
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.const(self.vars, other)
        if self.vars == other.vars:
            return self, other
        merged = self._merged_vars(self, other)
        return self.with_vars(merged), other.with_vars(merged)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, RationalPotential):
            return NotImplemented
        a, b = self._pair(other)
        terms = dict(a.terms)
        for exps, c in b.terms.items():
            terms[exps] = terms.get(exps, 0j) + c
        return LaurentPoly(a.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, RationalPotential):
            return NotImplemented
        a, b = self._pair(other)
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RationalPotential):
            return NotImplemented
        a, b = self._pair(other)
        terms: dict[tuple[int, ...], complex] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                key = tuple(x + y for x, y in zip(e1, e2))
                terms[key] = terms.get(key, 0j) + c1 * c2
        return LaurentPoly(a.vars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            if not self.is_monomial():
                raise LaurentError("negative powers only defined for monomials")
            return self.monomial_inverse() ** (-n)
        if n == 0:
            return LaurentPoly.const(self.vars, 1.0)
        result = self
        for _ in range(n - 1):
            result = result * self
        return result

    def monomial_inverse(self) -> "LaurentPoly":
        """1/m for a single-term polynomial m."""
        if not self.is_monomial():
            raise LaurentError("inverse only defined for monomials")
        (exps, coeff), = self.terms.items()
        return LaurentPoly(self.vars, {tuple(-e for e in exps): 1.0 / coeff})

    def __truediv__(self, other):
        if isinstance(other, LaurentPoly):
            if other.is_monomial():
                return self * other.monomial_inverse()
            return RationalPotential.from_poly(self) / RationalPotential.from_poly(other)
        if isinstance(other, RationalPotential):
            return RationalPotential.from_poly(self) / other
        return self * (1.0 / _as_complex(other))

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.is_constant() and self.constant_value() == _as_complex(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        a, b = self._pair(other)
        return a.terms == b.terms

    def __hash__(self):
        return hash(self.key())

    # -- calculus and evaluation --------------------------------------------

    def partial_derivative(self, var: str) -> "LaurentPoly":
        i = self._index(var)
        terms = {}
        for exps, c in self.terms.items():
            e = exps[i]
            if e == 0:
                continue
            new = list(exps)
            new[i] = e - 1
            key = tuple(new)
            terms[key] = terms.get(key, 0j) + c * e
        return LaurentPoly(self.vars, terms)

    def _point_values(self, point):
        if isinstance(point, Mapping):
            try:
                return [point[v] for v in self.vars]
            except KeyError as exc:
                raise DimensionMismatch(f"point is missing variable {exc.args[0]!r}") from None
        values = list(point) if isinstance(point, (list, tuple)) else None
        if values is None:
            if len(self.vars) == 1:
                values = [point]
            else:
                raise DimensionMismatch(
                    f"cannot interpret point {point!r} for variables {self.vars}")
        if len(values) != len(self.vars):
            raise DimensionMismatch(
                f"point has {len(values)} coordinates, expected {len(self.vars)}")
        return values

    def eval(self, point):
        """Evaluate at a point (mapping or coordinate sequence).

        Uses per-variable Horner recursion on the sparse support, after
        factoring out the most negative exponent of each variable, so the
        rounding error stays at the machine-epsilon accumulation level.
        Coordinates may be numpy arrays; broadcasting applies.
        """
        values = self._point_values(point)
        if not self.terms:
            return 0j
        return _horner(self.terms, values, 0, len(self.vars))

    def eval_gradient(self, point):
        return [self.partial_derivative(v).eval(point) for v in self.vars]

    # -- text form -----------------------------------------------------------

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"LaurentPoly({self.vars!r}, {format_poly(self)!r})"


def _horner(terms: Mapping[tuple, complex], values, depth: int, nvars: int):
    """Evaluate sparse terms by Horner recursion over variables [depth:]."""
    if depth == nvars:
        # terms is {(): coeff}
        return terms.get((), 0j)
    groups: dict[int, dict] = {}
    for exps, c in terms.items():
        groups.setdefault(exps[0], {})[exps[1:]] = c
    x = values[depth]
    exps_sorted = sorted(groups, reverse=True)
    lowest = exps_sorted[-1]
    acc = None
    prev = None
    for e in exps_sorted:
        sub = _horner(groups[e], values, depth + 1, nvars)
        if acc is None:
            acc = sub
        else:
            acc = acc * x ** (prev - e) + sub
        prev = e
    if lowest:
        acc = acc * x ** lowest
    return acc


def compiled_evaluator(poly: LaurentPoly):
    """Vectorized evaluator ``f(points) -> values`` for batched numpy points.

    ``points`` has shape (..., nvars); powers are taken termwise, which is
    fine for the batch sizes used by the solvers.
    """
    if not poly.terms:
        nv = len(poly.vars)

        def zero(points):
            points = np.asarray(points)
            return np.zeros(points.shape[:-1], dtype=complex)

        return zero

    exps = np.array(list(poly.terms.keys()), dtype=np.int64)        # (k, n)
    coeffs = np.array(list(poly.terms.values()), dtype=complex)      # (k,)

    def evaluate(points):
        pts = np.asarray(points, dtype=complex)
        powers = pts[..., None, :] ** exps                           # (..., k, n)
        return powers.prod(axis=-1) @ coeffs

    return evaluate


# ---------------------------------------------------------------------------
# factored rational functions
# ---------------------------------------------------------------------------


class RationalPotential:
    """Quotient of Laurent polynomials with a factored denominator.

    The denominator is ``prod(base ** power)`` over ``den_factors``; the
    factor bases are also reported as :attr:`excluded_locus`.  Arithmetic
    never cancels common factors (derivatives are the unreduced quotient
    rule), which keeps the excluded locus an honest record of every division
    performed while building the function.
    """

    __slots__ = ("num", "den_factors", "_den_cache")

    def __init__(self, num: LaurentPoly, den_factors: Iterable[tuple[LaurentPoly, int]] = ()):
        factors = []
        for base, power in den_factors:
            if not isinstance(base, LaurentPoly):
                raise TypeError("denominator factors must be LaurentPoly")
            if base.is_zero():
                raise ZeroDivisionError("zero denominator factor")
            power = int(power)
            if power < 0:
                raise LaurentError("denominator factor powers must be positive")
            if power == 0 or base.is_constant():
                if base.is_constant() and power:
                    num = num * (1.0 / base.constant_value() ** power)
                continue
            factors.append((base, power))
        vars_ = num.vars
        for base, _ in factors:
            vars_ = LaurentPoly._merged_vars(LaurentPoly.zero(vars_), base)
        self.num = num.with_vars(vars_)
        self.den_factors = tuple((b.with_vars(vars_), p) for b, p in factors)
        self._den_cache = None

    @classmethod
    def from_poly(cls, poly: LaurentPoly) -> "RationalPotential":
        return cls(poly, ())

    @property
    def vars(self):
        return self.num.vars

    @property
    def den(self) -> LaurentPoly:
        if self._den_cache is None:
            d = LaurentPoly.const(self.vars, 1.0)
            for base, power in self.den_factors:
                for _ in range(power):
                    d = d * base
            self._den_cache = d
        return self._den_cache

    @property
    def excluded_locus(self) -> tuple[LaurentPoly, ...]:
        return tuple(base for base, _ in self.den_factors)

    def is_polynomial(self) -> bool:
        return not self.den_factors

    # -- factor bookkeeping -------------------------------------------------

    @staticmethod
    def _merge_factors(*factor_lists):
        merged: dict = {}
        order = []
        for factors in factor_lists:
            for base, power in factors:
                k = base.key()
                if k in merged:
                    entry = merged[k]
                    merged[k] = (entry[0], entry[1] + power)
                else:
                    merged[k] = (base, power)
                    order.append(k)
        return tuple(merged[k] for k in order)

    @staticmethod
    def _factor_quotient(big, small):
        """Factors of big / small assuming small's factors all occur in big."""
        remaining = {b.key(): [b, p] for b, p in big}
        for base, power in small:
            remaining[base.key()][1] -= power
        return tuple((b, p) for b, p in
                     (tuple(v) for v in remaining.values()) if p > 0)

    def _common_ground(self, other: "RationalPotential"):
        union = self._merge_factors_union(self.den_factors, other.den_factors)
        n1 = self.num
        for base, power in self._factor_quotient(union, self.den_factors):
            for _ in range(power):
                n1 = n1 * base
        n2 = other.num
        for base, power in self._factor_quotient(union, other.den_factors):
            for _ in range(power):
                n2 = n2 * base
        return n1, n2, union

    @staticmethod
    def _merge_factors_union(f1, f2):
        """Union with max powers (a lowest common denominator, no gcds)."""
        merged: dict = {}
        order = []
        for base, power in f1:
            merged[base.key()] = [base, power]
            order.append(base.key())
        for base, power in f2:
            k = base.key()
            if k in merged:
                merged[k][1] = max(merged[k][1], power)
            else:
                merged[k] = [base, power]
                order.append(k)
        return tuple(tuple(merged[k]) for k in order)

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _coerce(value) -> "RationalPotential":
        if isinstance(value, RationalPotential):
            return value
        if isinstance(value, LaurentPoly):
            return RationalPotential.from_poly(value)
        return RationalPotential.from_poly(LaurentPoly.const((), value))

    def __add__(self, other):
        other = self._coerce(other)
        n1, n2, union = self._common_ground(other)
        return RationalPotential(n1 + n2, union)

    __radd__ = __add__

    def __neg__(self):
        return RationalPotential(-self.num, self.den_factors)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        return RationalPotential(self.num * other.num,
                                 self._merge_factors(self.den_factors, other.den_factors))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        num = self.num
        extra = []
        if other.num.is_constant():
            num = num * (1.0 / other.num.constant_value())
        elif other.num.is_monomial():
            num = num * other.num.monomial_inverse()
        else:
            extra.append((other.num, 1))
        for base, power in other.den_factors:
            for _ in range(power):
                num = num * base
        return RationalPotential(num, self._merge_factors(self.den_factors, tuple(extra)))

    def reciprocal(self) -> "RationalPotential":
        """1 / self.  The old numerator becomes a denominator factor."""
        if self.num.is_zero():
            raise ZeroDivisionError("reciprocal of the zero potential")
        num = LaurentPoly.const(self.vars, 1.0)
        factors: tuple = ()
        if self.num.is_constant():
            num = num * (1.0 / self.num.constant_value())
        elif self.num.is_monomial():
            num = num * self.num.monomial_inverse()
        else:
            factors = ((self.num, 1),)
        for base, power in self.den_factors:
            num = num * base ** power
        return RationalPotential(num, factors)

    def __pow__(self, n: int) -> "RationalPotential":
        if not isinstance(n, int):
            raise TypeError("exponents must be integers")
        if n < 0:
            return self.reciprocal() ** (-n)
        out = RationalPotential(LaurentPoly.const(self.vars, 1.0))
        for _ in range(n):
            out = out * self
        return out

    def restrict_vars(self, variables: Sequence[str]) -> "RationalPotential":
        """Project numerator and every factor onto a variable subset."""
        return RationalPotential(
            self.num.restrict_vars(variables),
            tuple((base.restrict_vars(variables), p) for base, p in self.den_factors))

    def __eq__(self, other):
        if not isinstance(other, (RationalPotential, LaurentPoly, int, float, complex)):
            return NotImplemented
        other = self._coerce(other)
        if self.num != other.num:
            return False
        a = sorted(((b.key(), p) for b, p in self.den_factors))
        b = sorted(((b.key(), p) for b, p in other.den_factors))
        return a == b

    # -- calculus and evaluation ----------------------------------------------

    def partial_derivative(self, var: str) -> "RationalPotential":
        """Unreduced quotient rule; denominator powers each go up by one."""
        if var not in self.vars:
            raise UnknownVariable(f"{var!r} not in {self.vars}")
        if self.is_polynomial():
            return RationalPotential(self.num.partial_derivative(var))
        dnum = self.num.partial_derivative(var)
        # d(N / prod F_i^e_i) = [N' prod F_i - N sum_i e_i F_i' prod_{j != i} F_j]
        #                       / prod F_i^(e_i + 1)
        prod_all = LaurentPoly.const(self.vars, 1.0)
        for base, _ in self.den_factors:
            prod_all = prod_all * base
        total = dnum * prod_all
        for i, (base, power) in enumerate(self.den_factors):
            dbase = base.partial_derivative(var)
            if dbase.is_zero():
                continue
            rest = LaurentPoly.const(self.vars, 1.0)
            for j, (other, _) in enumerate(self.den_factors):
                if j != i:
                    rest = rest * other
            total = total - self.num * dbase * rest * float(power)
        new_factors = tuple((base, power + 1) for base, power in self.den_factors)
        return RationalPotential(total, new_factors)

    def gradient(self) -> list["RationalPotential"]:
        return [self.partial_derivative(v) for v in self.vars]

    def eval(self, point, pole_tol: float = POLE_TOL):
        values = self.num._point_values(point)
        try:
            den_val = self.den.eval(values)
        except ZeroDivisionError:
            raise PoleError("denominator has a pole at the evaluation point") from None
        if abs(den_val) < pole_tol:
            raise PoleError(f"|denominator| = {abs(den_val):.3e} below tolerance {pole_tol}")
        try:
            num_val = self.num.eval(values)
        except ZeroDivisionError:
            raise PoleError("Laurent numerator has a pole at the evaluation point") from None
        return num_val / den_val

    def __str__(self):
        if self.is_polynomial():
            return format_poly(self.num)
        parts = []
        for base, power in self.den_factors:
            text = f"({format_poly(base)})"
            if power != 1:
                text += f"^{power}"
            parts.append(text)
        return f"({format_poly(self.num)}) / ({'*'.join(parts)})"

    def __repr__(self):
        return f"RationalPotential({self!s})"


def clear_denominators(system: Sequence):
    """Clear a rational system to polynomials with the same off-locus roots.

    Returns ``(polys, excluded)``.  Each numerator is shifted by a monomial so
    its exponents are nonnegative; shifted variables join the excluded list as
    plain variable monomials, alongside every denominator factor base.  Away
    from the excluded loci the cleared polynomials vanish exactly where the
    original rational functions do.
    """
    polys = []
    excluded: list[LaurentPoly] = []
    seen: set = set()

    def add_excluded(p: LaurentPoly):
        if p.is_constant():
            return
        k = p.key()
        if k not in seen:
            seen.add(k)
            excluded.append(p)

    for f in system:
        f = RationalPotential._coerce(f)
        num = f.num
        shifts = []
        for i, v in enumerate(num.vars):
            lo, _ = num.degree_range(v)
            if lo < 0:
                shifts.append(-lo)
                add_excluded(LaurentPoly.variable(v, num.vars))
            else:
                shifts.append(0)
        if any(shifts):
            num = num * LaurentPoly.monomial(num.vars, shifts)
        for base, _ in f.den_factors:
            add_excluded(base)
        polys.append(num)
    return polys, excluded


# ---------------------------------------------------------------------------
# parsing and formatting
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?i?|\.\d+(?:[eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at position {pos}")
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append((m.lastgroup, m.group()))
    tokens.append(("end", ""))
    return tokens


class _Parser:
    """Recursive-descent parser for the Laurent expression grammar."""

    def __init__(self, text: str, variables: Sequence[str] | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.fixed_vars = tuple(variables) if variables is not None else None
        self.seen_vars: list[str] = []

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, text = self.next()
        if text != value:
            raise ParseError(f"expected {value!r}, got {text!r}")

    def var_poly(self, name: str) -> LaurentPoly:
        if self.fixed_vars is not None:
            if name not in self.fixed_vars:
                raise ParseError(f"unknown variable {name!r} (declared: {self.fixed_vars})")
            return LaurentPoly.variable(name, self.fixed_vars)
        if name not in self.seen_vars:
            self.seen_vars.append(name)
        return LaurentPoly.variable(name, (name,))

    def parse(self) -> LaurentPoly:
        result = self.expr()
        kind, text = self.next()
        if kind != "end":
            raise ParseError(f"trailing input starting at {text!r}")
        if self.fixed_vars is not None:
            return result.with_vars(self.fixed_vars)
        return result.with_vars(tuple(self.seen_vars)) if self.seen_vars else result

    def expr(self) -> LaurentPoly:
        negate = False
        kind, text = self.peek()
        if text in "+-":
            self.next()
            negate = text == "-"
        node = self.term()
        if negate:
            node = -node
        while True:
            kind, text = self.peek()
            if text == "+":
                self.next()
                node = node + self.term()
            elif text == "-":
                self.next()
                node = node - self.term()
            else:
                return node

    def term(self) -> LaurentPoly:
        node = self.power()
        while True:
            kind, text = self.peek()
            if text == "*":
                self.next()
                node = node * self.power()
            else:
                return node

    def power(self) -> LaurentPoly:
        base = self.atom()
        kind, text = self.peek()
        if text != "^":
            return base
        self.next()
        sign = 1
        kind, text = self.peek()
        if text in "+-":
            self.next()
            if text == "-":
                sign = -1
        kind, text = self.next()
        if kind != "num" or not re.fullmatch(r"\d+", text):
            raise ParseError(f"exponent must be an integer, got {text!r}")
        n = sign * int(text)
        if n < 0 and not base.is_monomial():
            raise ParseError("negative exponents require a monomial base")
        return base ** n

    def atom(self) -> LaurentPoly:
        kind, text = self.next()
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if text == "-":
            return -self.atom()
        if kind == "num":
            if text.endswith("i"):
                return LaurentPoly.const((), complex(0.0, float(text[:-1] or "1")))
            return LaurentPoly.const((), float(text))
        if kind == "ident":
            if text == "i" and (self.fixed_vars is None or "i" not in self.fixed_vars):
                return LaurentPoly.const((), 1j)
            return self.var_poly(text)
        raise ParseError(f"unexpected token {text!r}")


def parse_poly(text: str, variables: Sequence[str] | None = None) -> LaurentPoly:
    """Parse an expression into a LaurentPoly.

    With ``variables`` given, identifiers must come from that tuple and the
    result is aligned to it; otherwise variables are collected left to right.
    The identifier ``i`` denotes the imaginary unit unless declared as a
    variable.
    """
    return _Parser(text, variables).parse()


def _format_float(x: float) -> str:
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def format_complex(c: complex) -> str:
    re_, im = c.real, c.imag
    if im == 0:
        return _format_float(re_)
    if re_ == 0:
        return f"{_format_float(im)}i"
    sign = "+" if im > 0 else "-"
    return f"({_format_float(re_)}{sign}{_format_float(abs(im))}i)"


def format_poly(poly: LaurentPoly) -> str:
    """Canonical text form: graded-lex descending, explicit ``*`` and ``^``."""
    if not poly.terms:
        return "0"
    pieces = []
    for exps, coeff in poly.sorted_terms():
        factors = []
        for v, e in zip(poly.vars, exps):
            if e == 0:
                continue
            factors.append(v if e == 1 else f"{v}^{e}")
        mono = "*".join(factors)
        if not mono:
            text = format_complex(coeff)
        elif coeff == 1:
            text = mono
        elif coeff == -1:
            text = f"-{mono}"
        else:
            text = f"{format_complex(coeff)}*{mono}"
        pieces.append(text)
    out = pieces[0]
    for p in pieces[1:]:
        if p.startswith("-") and not p.startswith("-("):
            out += f" - {p[1:]}"
        else:
            out += f" + {p}"
    return out
