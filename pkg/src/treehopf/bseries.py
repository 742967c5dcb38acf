"""B-series over polynomial vector fields with exact rational coefficients.

A B-series attaches to each rooted tree an elementary differential of a
vector field, weighted by a coefficient functional divided by the tree's
symmetry factor, with one power of the step size h per vertex.  Everything
here stays polynomial-exact: vector fields are tuples of multivariate
polynomials over the rationals, series in h are truncated lists of such
objects, and comparisons are exact dictionary equality.

Composition of two B-series maps is literal polynomial substitution of one
truncated map into the other and matches the convolution of the
coefficient characters through the vertex-graded coproduct.  Substitution
replaces the vector field by h^(-1) times another B-series and matches the
convolution through the spanning-subforest coproduct.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .characters import ConvolutionContext, convolve
from .linalg import Functional, as_fraction
from .trees import Forest, Tree, tree_sigma, trees_with_vertices

__all__ = [
    "Poly",
    "PolyVectorField",
    "HSeriesField",
    "BSeriesMap",
    "elementary_differential",
    "bseries_eval",
    "field_series",
    "bseries_of_field_series",
    "substitute_coeffs",
    "compose_coeffs",
    "verify_substitution",
    "verify_composition",
    "BSeriesReport",
    "parse_poly",
    "parse_vector_field",
]

Scalar = Union[int, Fraction, str]


class Poly:
    """Multivariate polynomial with Fraction coefficients, one slot per
    variable; monomials are exponent tuples."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Optional[Mapping[tuple, Scalar]] = None):
        self.dim = dim
        data: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for mono, c in terms.items():
                c = as_fraction(c)
                if not c:
                    continue
                mono = tuple(mono)
                if len(mono) != dim:
                    raise ValueError("monomial arity mismatch")
                c0 = data.get(mono)
                c = c if c0 is None else c0 + c
                if c:
                    data[mono] = c
                elif mono in data:
                    del data[mono]
        self.terms = data

    @classmethod
    def zero(cls, dim: int) -> "Poly":
        return cls(dim)

    @classmethod
    def const(cls, dim: int, c: Scalar) -> "Poly":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def var(cls, dim: int, j: int) -> "Poly":
        mono = [0] * dim
        mono[j] = 1
        return cls(dim, {tuple(mono): 1})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            c2 = out.get(m, Fraction(0)) + c
            if c2:
                out[m] = c2
            elif m in out:
                del out[m]
        return _poly_raw(self.dim, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return _poly_raw(self.dim, {m: -c for m, c in self.terms.items()})

    def __mul__(self, other: Union["Poly", Scalar]) -> "Poly":
        if isinstance(other, Poly):
            out: dict[tuple[int, ...], Fraction] = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    m = tuple(a + b for a, b in zip(m1, m2))
                    c = out.get(m, Fraction(0)) + c1 * c2
                    if c:
                        out[m] = c
                    elif m in out:
                        del out[m]
            return _poly_raw(self.dim, out)
        c = as_fraction(other)
        if not c:
            return Poly(self.dim)
        return _poly_raw(self.dim, {m: c0 * c for m, c0 in self.terms.items()})

    __rmul__ = __mul__

    def diff(self, j: int) -> "Poly":
        out: dict[tuple[int, ...], Fraction] = {}
        for m, c in self.terms.items():
            if m[j] == 0:
                continue
            m2 = list(m)
            m2[j] -= 1
            out[tuple(m2)] = c * m[j]
        return _poly_raw(self.dim, out)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Poly)
            and self.dim == other.dim
            and self.terms == other.terms
        )

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = (
            ["y"] if self.dim == 1 else [f"y{j + 1}" for j in range(self.dim)]
        )
        parts = []
        for i, m in enumerate(sorted(self.terms, key=lambda m: (sum(m), m))):
            c = self.terms[m]
            mag = -c if c < 0 else c
            factors = [
                names[j] + (f"^{e}" if e > 1 else "")
                for j, e in enumerate(m)
                if e
            ]
            body = "*".join(factors) if factors else str(mag)
            if factors and mag != 1:
                body = f"{mag}*{body}"
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"Poly<{self}>"


def _poly_raw(dim: int, terms: dict) -> Poly:
    out = Poly(dim)
    out.terms = terms
    return out


class PolyVectorField:
    """A polynomial map from Q^d to Q^d, one Poly per component."""

    __slots__ = ("dim", "components")

    def __init__(self, components: Sequence[Poly]):
        comps = tuple(components)
        if not comps:
            raise ValueError("vector field needs at least one component")
        dim = comps[0].dim
        if any(p.dim != dim for p in comps) or len(comps) != dim:
            raise ValueError("need exactly dim components over dim variables")
        self.dim = dim
        self.components = comps

    @classmethod
    def zero(cls, dim: int) -> "PolyVectorField":
        return cls([Poly.zero(dim) for _ in range(dim)])

    @property
    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.components)

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField(
            [a + b for a, b in zip(self.components, other.components)]
        )

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField(
            [a - b for a, b in zip(self.components, other.components)]
        )

    def scale(self, c: Scalar) -> "PolyVectorField":
        return PolyVectorField([p * c for p in self.components])

    def directional(self, other: "PolyVectorField") -> "PolyVectorField":
        """self ▷ other: differentiate each component of other along self."""
        out = []
        for comp in other.components:
            acc = Poly.zero(self.dim)
            for j in range(self.dim):
                acc = acc + self.components[j] * comp.diff(j)
            out.append(acc)
        return PolyVectorField(out)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PolyVectorField)
            and self.components == other.components
        )

    def __str__(self) -> str:
        return "(" + ", ".join(str(p) for p in self.components) + ")"

    def __repr__(self) -> str:
        return f"PolyVectorField<{self}>"


def _derivative_contract(base: Poly, args: list[PolyVectorField]) -> Poly:
    """Contract the len(args)-th derivative tensor of a scalar polynomial
    against the argument fields: all partials are taken of the base before
    recursing, so argument factors are never differentiated."""
    if not args:
        return base
    dim = base.dim
    acc = Poly.zero(dim)
    first, rest = args[0], args[1:]
    for j in range(dim):
        acc = acc + _derivative_contract(base.diff(j), rest) * first.components[j]
    return acc


def elementary_differential(t: Tree, a: PolyVectorField) -> PolyVectorField:
    """The elementary differential of a vector field indexed by a tree:
    the root applies one derivative slot per child, recursively."""
    memo: dict[Tree, PolyVectorField] = {}

    def rec(node: Tree) -> PolyVectorField:
        hit = memo.get(node)
        if hit is not None:
            return hit
        child_fields = [rec(c) for c in node.children]
        comps = [
            _derivative_contract(a.components[i], child_fields)
            for i in range(a.dim)
        ]
        out = PolyVectorField(comps)
        memo[node] = out
        return out

    return rec(t)


# ---------------------------------------------------------------------------
# Truncated series in h


class HSeriesField:
    """A truncated power series in h whose coefficients are vector fields.

    ``coeffs[k]`` multiplies h^k; the truncation keeps powers below
    ``order``.
    """

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs: Sequence[PolyVectorField]):
        if order < 1:
            raise ValueError("order must be >= 1")
        cs = list(coeffs)[:order]
        while len(cs) < order:
            cs.append(PolyVectorField.zero(dim))
        self.dim = dim
        self.order = order
        self.coeffs = tuple(cs)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, HSeriesField)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )


def _series_derivative_contract(
    base: HSeriesField, args: list[HSeriesField], order: int
) -> HSeriesField:
    """Multilinear extension of the derivative contraction to h-series,
    truncated at h^order."""
    dim = base.dim
    out = [PolyVectorField.zero(dim) for _ in range(order)]

    def splits(total: int, n: int):
        if n == 0:
            if total == 0:
                yield ()
            return
        if n == 1:
            if 0 <= total:
                yield (total,)
            return
        for first in range(total + 1):
            for rest in splits(total - first, n - 1):
                yield (first,) + rest

    n = len(args)
    for target in range(order):
        acc = PolyVectorField.zero(dim)
        for base_k in range(min(target + 1, base.order)):
            rem = target - base_k
            for ks in splits(rem, n):
                if any(k >= a.order for k, a in zip(ks, args)):
                    continue
                fields = [a.coeffs[k] for k, a in zip(ks, args)]
                comps = [
                    _derivative_contract(base.coeffs[base_k].components[i], fields)
                    for i in range(dim)
                ]
                acc = acc + PolyVectorField(comps)
        out[target] = acc
    return HSeriesField(dim, order, out)


def _elementary_differential_series(
    t: Tree, a: HSeriesField, order: int
) -> HSeriesField:
    child_series = [
        _elementary_differential_series(c, a, order) for c in t.children
    ]
    return _series_derivative_contract(a, child_series, order)


# ---------------------------------------------------------------------------
# B-series maps


class BSeriesMap:
    """Truncated Taylor development of a numerical one-step map.

    ``levels[k]`` is the d-tuple of polynomials multiplying h^k, for k up
    to the truncation order inclusive.
    """

    __slots__ = ("dim", "order", "levels")

    def __init__(self, dim: int, order: int, levels: Sequence[Sequence[Poly]]):
        lv = [tuple(polys) for polys in levels]
        while len(lv) < order + 1:
            lv.append(tuple(Poly.zero(dim) for _ in range(dim)))
        self.dim = dim
        self.order = order
        self.levels = tuple(lv[: order + 1])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BSeriesMap)
            and self.order == other.order
            and self.levels == other.levels
        )

    def compose(self, inner: "BSeriesMap") -> "BSeriesMap":
        """self after inner, by exact polynomial substitution, truncated."""
        if self.dim != inner.dim:
            raise ValueError("dimension mismatch")
        order = min(self.order, inner.order)
        dim = self.dim
        inner_series = [
            [inner.levels[k][j] for k in range(order + 1)] for j in range(dim)
        ]
        pow_cache: list[dict[int, list[Poly]]] = [dict() for _ in range(dim)]

        def series_mul(a: list[Poly], b: list[Poly]) -> list[Poly]:
            out = [Poly.zero(dim) for _ in range(order + 1)]
            for i, pa in enumerate(a):
                if pa.is_zero:
                    continue
                for j in range(order + 1 - i):
                    pb = b[j]
                    if pb.is_zero:
                        continue
                    out[i + j] = out[i + j] + pa * pb
            return out

        def series_pow(j: int, e: int) -> list[Poly]:
            cached = pow_cache[j].get(e)
            if cached is not None:
                return cached
            if e == 0:
                out = [Poly.const(dim, 1)] + [
                    Poly.zero(dim) for _ in range(order)
                ]
            else:
                out = series_mul(series_pow(j, e - 1), inner_series[j])
            pow_cache[j][e] = out
            return out

        out_levels = [
            [Poly.zero(dim) for _ in range(dim)] for _ in range(order + 1)
        ]
        for k in range(order + 1):
            for i in range(dim):
                p = self.levels[k][i]
                for mono, c in p.terms.items():
                    series = [Poly.const(dim, c)] + [
                        Poly.zero(dim) for _ in range(order)
                    ]
                    for j, e in enumerate(mono):
                        if e:
                            series = series_mul(series, series_pow(j, e))
                    for shift in range(order + 1 - k):
                        if not series[shift].is_zero:
                            out_levels[k + shift][i] = (
                                out_levels[k + shift][i] + series[shift]
                            )
        return BSeriesMap(dim, order, out_levels)


def _alpha_value(alpha, key) -> Fraction:
    if isinstance(alpha, Functional):
        return alpha(key)
    # a plain mapping from canonical forests/trees to rationals
    return as_fraction(alpha.get(key, 0))


def bseries_eval(alpha: Functional, a: PolyVectorField, order: int) -> BSeriesMap:
    """Assemble the B-series map of a coefficient functional: the identity
    weighted by the value on the empty forest, then one elementary
    differential per tree with at most ``order`` vertices."""
    from .trees import EMPTY_FOREST

    dim = a.dim
    levels: list[list[Poly]] = [
        [Poly.zero(dim) for _ in range(dim)] for _ in range(order + 1)
    ]
    c_empty = alpha(EMPTY_FOREST)
    for i in range(dim):
        levels[0][i] = Poly.var(dim, i) * c_empty
    for v in range(1, order + 1):
        for t in trees_with_vertices(v):
            c = alpha(t) / tree_sigma(t)
            if not c:
                continue
            diff = elementary_differential(t, a)
            for i in range(dim):
                levels[v][i] = levels[v][i] + diff.components[i] * c
    return BSeriesMap(dim, order, levels)


def field_series(
    alpha: Functional,
    a: PolyVectorField,
    order: int,
    *,
    allow_general_root_value: bool = False,
) -> HSeriesField:
    """The modified vector field h^(-1) B(alpha; a) as a truncated series.

    Only tree values of alpha enter (the empty forest contributes nothing
    to a vector field).  The leading coefficient is alpha(•)·a; by default
    alpha(•) = 1 is required, matching the normalization under which the
    substituted series starts from the same field.
    """
    from .trees import LEAF, single

    if not allow_general_root_value and alpha(single(LEAF)) != 1:
        raise ValueError(
            "substitution expects alpha(•) = 1; pass "
            "allow_general_root_value=True for general leading values"
        )
    dim = a.dim
    coeffs = [PolyVectorField.zero(dim) for _ in range(order)]
    for v in range(1, order + 1):
        for t in trees_with_vertices(v):
            c = alpha(t) / tree_sigma(t)
            if not c:
                continue
            coeffs[v - 1] = coeffs[v - 1] + elementary_differential(t, a).scale(c)
    return HSeriesField(dim, order, coeffs)


def bseries_of_field_series(
    beta: Functional, atilde: HSeriesField, order: int
) -> BSeriesMap:
    """B-series of an h-dependent field, expanding each elementary
    differential by multilinearity over the h-grades."""
    from .trees import EMPTY_FOREST

    dim = atilde.dim
    levels: list[list[Poly]] = [
        [Poly.zero(dim) for _ in range(dim)] for _ in range(order + 1)
    ]
    c_empty = beta(EMPTY_FOREST)
    for i in range(dim):
        levels[0][i] = Poly.var(dim, i) * c_empty
    for v in range(1, order + 1):
        for t in trees_with_vertices(v):
            c = beta(t) / tree_sigma(t)
            if not c:
                continue
            series = _elementary_differential_series(t, atilde, order - v + 1)
            for k in range(order - v + 1):
                piece = series.coeffs[k]
                for i in range(dim):
                    levels[v + k][i] = levels[v + k][i] + piece.components[i] * c
    return BSeriesMap(dim, order, levels)


# ---------------------------------------------------------------------------
# Coefficient-level laws


def substitute_coeffs(alpha: Functional, beta: Functional, max_degree: int) -> Functional:
    """Coefficients of the substituted series: the convolution of the
    multiplicative alpha with beta through the spanning-subforest
    coproduct."""
    ctx = ConvolutionContext("Htilde", max_degree)
    return convolve(alpha, beta, ctx)


def compose_coeffs(alpha: Functional, beta: Functional, max_degree: int) -> Functional:
    """Coefficients of the composed map: the convolution alpha then beta
    through the vertex-graded coproduct."""
    ctx = ConvolutionContext("CK", max_degree)
    return convolve(alpha, beta, ctx)


@dataclass
class BSeriesReport:
    name: str
    passed: bool
    failures: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"{status} {self.name}"]
        lines.extend(f"  {msg}" for msg in self.failures)
        return "\n".join(lines)


def verify_substitution(
    a: PolyVectorField, alpha: Functional, beta: Functional, order: int
) -> BSeriesReport:
    """Substituting the modified field into beta's series must equal the
    series of the spanning-subforest convolution, polynomial-exactly."""
    failures: list[str] = []
    atilde = field_series(alpha, a, order)
    direct = bseries_of_field_series(beta, atilde, order)
    coeff = bseries_eval(substitute_coeffs(alpha, beta, order), a, order)
    if direct != coeff:
        for k in range(order + 1):
            if direct.levels[k] != coeff.levels[k]:
                failures.append(
                    f"h^{k}: direct {tuple(map(str, direct.levels[k]))} vs "
                    f"coefficient {tuple(map(str, coeff.levels[k]))}"
                )
    return BSeriesReport("substitution", not failures, failures)


def verify_composition(
    a: PolyVectorField, alpha: Functional, beta: Functional, order: int
) -> BSeriesReport:
    """Composing the two maps must equal the series of the vertex-graded
    convolution, polynomial-exactly."""
    failures: list[str] = []
    inner = bseries_eval(alpha, a, order)
    outer = bseries_eval(beta, a, order)
    direct = outer.compose(inner)
    coeff = bseries_eval(compose_coeffs(alpha, beta, order), a, order)
    if direct != coeff:
        for k in range(order + 1):
            if direct.levels[k] != coeff.levels[k]:
                failures.append(
                    f"h^{k}: direct {tuple(map(str, direct.levels[k]))} vs "
                    f"coefficient {tuple(map(str, coeff.levels[k]))}"
                )
    return BSeriesReport("composition", not failures, failures)


# ---------------------------------------------------------------------------
# Parsing of polynomial vector fields (CLI surface)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>y\d*)|(?P<op>[\^*+-]))"
)


def parse_poly(text: str, dim: int) -> Poly:
    """Parse sums of monomial terms like ``1/2*y1^2*y2 - y2 + 3``.

    The variable is ``y`` when dim is 1, else ``y1`` .. ``yd``.
    """
    pos = 0
    tokens: list[tuple[str, str]] = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ValueError(f"cannot parse polynomial near {text[pos:]!r}")
            break
        pos = m.end()
        for kind in ("num", "var", "op"):
            if m.group(kind):
                tokens.append((kind, m.group(kind)))
                break

    result = Poly.zero(dim)
    sign = Fraction(1)
    coeff = Fraction(1)
    mono = [0] * dim
    has_term = False

    def flush():
        nonlocal result, sign, coeff, mono, has_term
        if has_term:
            result = result + Poly(dim, {tuple(mono): sign * coeff})
        sign, coeff, mono, has_term = Fraction(1), Fraction(1), [0] * dim, False

    i = 0
    while i < len(tokens):
        kind, val = tokens[i]
        if kind == "op" and val in "+-":
            flush()
            if val == "-":
                sign = Fraction(-1)
            i += 1
            continue
        if kind == "num":
            coeff *= Fraction(val)
            has_term = True
            i += 1
        elif kind == "var":
            j = 0 if val == "y" else int(val[1:]) - 1
            if not (0 <= j < dim):
                raise ValueError(f"variable {val!r} outside dimension {dim}")
            power = 1
            if i + 2 < len(tokens) and tokens[i + 1] == ("op", "^"):
                if tokens[i + 2][0] != "num" or "/" in tokens[i + 2][1]:
                    raise ValueError("exponent must be a nonnegative integer")
                power = int(tokens[i + 2][1])
                i += 2
            mono[j] += power
            has_term = True
            i += 1
        elif kind == "op" and val == "*":
            i += 1
        else:
            raise ValueError(f"unexpected token {val!r}")
    flush()
    return result


def parse_vector_field(text: str, dim: int) -> PolyVectorField:
    """Parse ``;``-separated component polynomials into a vector field."""
    parts = [p for p in text.split(";")]
    if len(parts) != dim:
        raise ValueError(f"expected {dim} components separated by ';'")
    return PolyVectorField([parse_poly(p, dim) for p in parts])
