"""Exact-rational linear combinations of forests and their tensor products,
plus degree-truncated linear forms on the forest basis.

Coefficients are ``fractions.Fraction`` throughout; no floating point enters
any computation.  Zero coefficients are never stored.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .trees import (
    BULLET_FOREST,
    EMPTY_FOREST,
    LEAF,
    Forest,
    Tree,
    enumerate_forests,
    h_normalize,
    parse_forest,
    single,
)

__all__ = [
    "ForestSum",
    "TensorSum",
    "Functional",
    "GradingError",
    "TruncationError",
    "MissingTreeValueError",
    "character_from_tree_values",
    "delta_basis",
    "apply_functional",
    "functionals_equal",
    "as_fraction",
]

Scalar = Union[int, Fraction, str]


class GradingError(ValueError):
    """Operands live over incompatible gradings."""


class TruncationError(ValueError):
    """A functional was evaluated beyond its truncation degree."""


class MissingTreeValueError(ValueError):
    """A character lacks a tree value inside its degree range."""


def as_fraction(x: Scalar) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def _as_forest(key: Union[Forest, Tree]) -> Forest:
    return single(key) if isinstance(key, Tree) else key


def _render_coeff(c: Fraction) -> str:
    return str(c)


def _render_terms(items: list[tuple[str, Fraction]]) -> str:
    """Join (body, coefficient) pairs as '... + c·body − c·body'."""
    if not items:
        return "0"
    parts: list[str] = []
    for i, (body, c) in enumerate(items):
        mag = -c if c < 0 else c
        piece = body if mag == 1 else f"{_render_coeff(mag)}·{body}"
        if i == 0:
            parts.append(("−" if c < 0 else "") + piece)
        else:
            parts.append((" − " if c < 0 else " + ") + piece)
    return "".join(parts)


class ForestSum:
    """A finite rational linear combination of forests."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Union[Forest, Tree], Scalar]] = None):
        data: dict[Forest, Fraction] = {}
        if terms:
            for key, val in terms.items():
                c = as_fraction(val)
                if c:
                    f = _as_forest(key)
                    c0 = data.get(f)
                    c = c if c0 is None else c0 + c
                    if c:
                        data[f] = c
                    elif f in data:
                        del data[f]
        self.terms = data

    @classmethod
    def zero(cls) -> "ForestSum":
        return cls()

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, key: Union[Forest, Tree]) -> Fraction:
        return self.terms.get(_as_forest(key), Fraction(0))

    def items(self) -> Iterator[tuple[Forest, Fraction]]:
        return iter(self.terms.items())

    def __add__(self, other: "ForestSum") -> "ForestSum":
        out = dict(self.terms)
        for f, c in other.terms.items():
            c2 = out.get(f, Fraction(0)) + c
            if c2:
                out[f] = c2
            elif f in out:
                del out[f]
        return _forest_sum_raw(out)

    def __sub__(self, other: "ForestSum") -> "ForestSum":
        return self + (-other)

    def __neg__(self) -> "ForestSum":
        return _forest_sum_raw({f: -c for f, c in self.terms.items()})

    def __mul__(self, other: Union["ForestSum", Scalar]) -> "ForestSum":
        if isinstance(other, ForestSum):
            out: dict[Forest, Fraction] = {}
            for f1, c1 in self.terms.items():
                for f2, c2 in other.terms.items():
                    f = f1 * f2
                    c = out.get(f, Fraction(0)) + c1 * c2
                    if c:
                        out[f] = c
                    elif f in out:
                        del out[f]
            return _forest_sum_raw(out)
        c = as_fraction(other)
        if not c:
            return ForestSum()
        return _forest_sum_raw({f: c0 * c for f, c0 in self.terms.items()})

    def __rmul__(self, other: Scalar) -> "ForestSum":
        return self.__mul__(other)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ForestSum) and self.terms == other.terms

    def map_forests(self, fn: Callable[[Forest], Forest]) -> "ForestSum":
        out: dict[Forest, Fraction] = {}
        for f, c in self.terms.items():
            g = fn(f)
            c2 = out.get(g, Fraction(0)) + c
            if c2:
                out[g] = c2
            elif g in out:
                del out[g]
        return _forest_sum_raw(out)

    def render(self) -> str:
        items = sorted(self.terms.items(), key=lambda kv: kv[0].sort_key)
        return _render_terms([(f.encoding, c) for f, c in items])

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"ForestSum<{self.render()}>"

    def to_json(self) -> dict:
        items = sorted(self.terms.items(), key=lambda kv: kv[0].sort_key)
        return {f.encoding: str(c) for f, c in items}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "ForestSum":
        return cls({parse_forest(k): Fraction(v) for k, v in data.items()})


def _forest_sum_raw(terms: dict[Forest, Fraction]) -> ForestSum:
    out = ForestSum()
    out.terms = terms
    return out


class TensorSum:
    """A rational linear combination of n-fold tensor products of forests.

    The workhorse arities are 2 and 3 (coproducts, coactions and the
    mixed-coaction identities); iterated coproducts produce higher arities
    and are supported by the same representation.
    """

    __slots__ = ("arity", "terms")

    def __init__(
        self,
        arity: int,
        terms: Optional[Mapping[tuple, Scalar]] = None,
    ):
        if arity < 1:
            raise ValueError("arity must be >= 1")
        self.arity = arity
        data: dict[tuple[Forest, ...], Fraction] = {}
        if terms:
            for key, val in terms.items():
                c = as_fraction(val)
                if not c:
                    continue
                legs = tuple(_as_forest(x) for x in key)
                if len(legs) != arity:
                    raise ValueError("tensor key arity mismatch")
                c0 = data.get(legs)
                c = c if c0 is None else c0 + c
                if c:
                    data[legs] = c
                elif legs in data:
                    del data[legs]
        self.terms = data

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, key: tuple) -> Fraction:
        legs = tuple(_as_forest(x) for x in key)
        return self.terms.get(legs, Fraction(0))

    def items(self) -> Iterator[tuple[tuple[Forest, ...], Fraction]]:
        return iter(self.terms.items())

    def __add__(self, other: "TensorSum") -> "TensorSum":
        if self.arity != other.arity:
            raise ValueError("tensor arity mismatch")
        out = dict(self.terms)
        for k, c in other.terms.items():
            c2 = out.get(k, Fraction(0)) + c
            if c2:
                out[k] = c2
            elif k in out:
                del out[k]
        return _tensor_sum_raw(self.arity, out)

    def __sub__(self, other: "TensorSum") -> "TensorSum":
        return self + (-other)

    def __neg__(self) -> "TensorSum":
        return _tensor_sum_raw(self.arity, {k: -c for k, c in self.terms.items()})

    def __mul__(self, other: Scalar) -> "TensorSum":
        c = as_fraction(other)
        if not c:
            return TensorSum(self.arity)
        return _tensor_sum_raw(self.arity, {k: c0 * c for k, c0 in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TensorSum)
            and self.arity == other.arity
            and self.terms == other.terms
        )

    def componentwise_mul(
        self,
        other: "TensorSum",
        leg_products: Iterable[Callable[[Forest, Forest], Forest]],
    ) -> "TensorSum":
        """Bilinear product taking each leg through its own forest product."""
        if self.arity != other.arity:
            raise ValueError("tensor arity mismatch")
        prods = tuple(leg_products)
        if len(prods) != self.arity:
            raise ValueError("need one product per leg")
        out: dict[tuple[Forest, ...], Fraction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = tuple(p(a, b) for p, a, b in zip(prods, k1, k2))
                c = out.get(key, Fraction(0)) + c1 * c2
                if c:
                    out[key] = c
                elif key in out:
                    del out[key]
        return _tensor_sum_raw(self.arity, out)

    def render(self) -> str:
        items = sorted(
            self.terms.items(), key=lambda kv: tuple(f.sort_key for f in kv[0])
        )
        return _render_terms(
            [("⊗".join(f.encoding for f in k), c) for k, c in items]
        )

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"TensorSum<{self.render()}>"

    def to_json(self) -> dict:
        items = sorted(
            self.terms.items(), key=lambda kv: tuple(f.sort_key for f in kv[0])
        )
        return {
            "arity": self.arity,
            "terms": {"⊗".join(f.encoding for f in k): str(c) for k, c in items},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TensorSum":
        arity = int(data["arity"])
        terms = {
            tuple(parse_forest(part) for part in key.split("⊗")): Fraction(val)
            for key, val in data["terms"].items()
        }
        return cls(arity, terms)


def _tensor_sum_raw(arity: int, terms: dict) -> TensorSum:
    out = TensorSum(arity)
    out.terms = terms
    return out


# ---------------------------------------------------------------------------
# Functionals


_GRADING = {"H": "edge", "H_sigma": "edge", "Htilde": "vertex", "CK": "vertex"}
_KINDS = ("generic", "infinitesimal", "character")


class Functional:
    """A degree-truncated linear form on the forest basis.

    ``algebra`` selects the unit conventions: "H" (edge grading, unit is
    the single-vertex forest, inputs are normalized by dropping
    single-vertex components), "CK" or "Htilde" (vertex grading, unit is
    the empty forest, the single-vertex tree is an honest generator).

    ``kind`` fixes the evaluation rule:

    * ``character``: multiplicative over components, 1 on the unit; values
      are stored per tree (or derived from ``tree_rule``).
    * ``infinitesimal``: vanishes on the unit; for "H"/"CK" it also
      vanishes on any forest with two or more components; for "Htilde" the
      evaluation follows the counit-twisted derivation rule, where
      single-vertex components are transparent.
    * ``generic``: arbitrary values, stored per forest or via ``rule``.

    Evaluation past ``max_degree`` raises :class:`TruncationError`.
    Instances memoize evaluations; all state is write-once per basis
    forest, so concurrent use is safe.
    """

    __slots__ = (
        "algebra",
        "kind",
        "max_degree",
        "name",
        "_tree_values",
        "_tree_rule",
        "_values",
        "_rule",
        "_cache",
    )

    def __init__(
        self,
        algebra: str,
        kind: str,
        max_degree: int,
        *,
        tree_values: Optional[Mapping[Tree, Scalar]] = None,
        tree_rule: Optional[Callable[[Tree], Fraction]] = None,
        values: Optional[Mapping[Union[Forest, Tree], Scalar]] = None,
        rule: Optional[Callable[[Forest], Fraction]] = None,
        name: str = "",
    ):
        if algebra not in _GRADING:
            raise ValueError(f"unknown algebra {algebra!r}")
        if kind not in _KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        if max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        self.algebra = "H" if algebra == "H_sigma" else algebra
        self.kind = kind
        self.max_degree = max_degree
        self.name = name
        self._tree_values = (
            {t: as_fraction(c) for t, c in tree_values.items()} if tree_values else {}
        )
        self._tree_rule = tree_rule
        self._values = (
            {_as_forest(k): as_fraction(c) for k, c in values.items()} if values else {}
        )
        self._rule = rule
        self._cache: dict[Forest, Fraction] = {}

    # -- structure ---------------------------------------------------------

    @property
    def grading(self) -> str:
        return _GRADING[self.algebra]

    @property
    def unit_forest(self) -> Forest:
        return BULLET_FOREST if self.algebra == "H" else EMPTY_FOREST

    def degree(self, f: Forest) -> int:
        return f.edges if self.grading == "edge" else f.vertices

    def normalize(self, f: Forest) -> Forest:
        return h_normalize(f) if self.algebra == "H" else f

    # -- evaluation --------------------------------------------------------

    def tree_value(self, t: Tree) -> Fraction:
        if self.algebra == "H" and t.edges == 0:
            return Fraction(1) if self.kind == "character" else Fraction(0)
        if t in self._tree_values:
            return self._tree_values[t]
        if self._tree_rule is not None:
            val = as_fraction(self._tree_rule(t))
            self._tree_values[t] = val
            return val
        if self.kind in ("character", "infinitesimal"):
            raise MissingTreeValueError(
                f"{self.name or 'functional'}: no value for tree {t.encoding}"
            )
        raise TypeError("tree_value only applies to character-like functionals")

    def __call__(self, f: Union[Forest, Tree]) -> Fraction:
        f = self.normalize(_as_forest(f))
        if self.degree(f) > self.max_degree:
            raise TruncationError(
                f"degree {self.degree(f)} exceeds truncation {self.max_degree}"
            )
        hit = self._cache.get(f)
        if hit is not None:
            return hit
        val = self._evaluate(f)
        self._cache[f] = val
        return val

    def _evaluate(self, f: Forest) -> Fraction:
        if self.kind == "character":
            if f == self.unit_forest:
                return Fraction(1)
            out = Fraction(1)
            for t in f.trees:
                out *= self.tree_value(t)
            return out
        if self.kind == "infinitesimal":
            if f == self.unit_forest:
                return Fraction(0)
            if self.algebra == "Htilde":
                edged = [t for t in f.trees if t.edges > 0]
                bullets = len(f.trees) - len(edged)
                if len(edged) >= 2:
                    return Fraction(0)
                if len(edged) == 1:
                    return self.tree_value(edged[0])
                return bullets * self.tree_value(LEAF)
            if len(f.trees) >= 2:
                return Fraction(0)
            return self.tree_value(f.trees[0])
        if self._rule is not None:
            return as_fraction(self._rule(f))
        return self._values.get(f, Fraction(0))

    # -- constructors ------------------------------------------------------

    @classmethod
    def unit(cls, algebra: str, max_degree: int) -> "Functional":
        """The convolution unit of the algebra's dual.

        For "H" this is 1 on the single-vertex forest; for "CK" it is the
        counit, 1 on the empty forest only; for "Htilde" the counit takes
        the value 1 on every pure single-vertex forest.
        """
        if algebra in ("H", "H_sigma", "Htilde"):
            rule = lambda t: Fraction(1 if t.edges == 0 else 0)
        else:
            rule = lambda t: Fraction(0)
        return cls(algebra, "character", max_degree, tree_rule=rule, name="e")

    @classmethod
    def from_rule(
        cls,
        algebra: str,
        rule: Callable[[Forest], Fraction],
        max_degree: int,
        kind: str = "generic",
        name: str = "",
    ) -> "Functional":
        return cls(algebra, kind, max_degree, rule=rule, name=name)

    @classmethod
    def from_values(
        cls,
        algebra: str,
        values: Mapping[Union[Forest, Tree], Scalar],
        max_degree: int,
        name: str = "",
    ) -> "Functional":
        return cls(algebra, "generic", max_degree, values=values, name=name)

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "Functional") -> "Functional":
        if self.grading != other.grading:
            raise GradingError("cannot add functionals of different gradings")
        algebra = self.algebra if self.algebra == other.algebra else "CK"
        md = min(self.max_degree, other.max_degree)
        return Functional.from_rule(
            algebra, lambda f: self(f) + other(f), md, name=f"({self.name}+{other.name})"
        )

    def __sub__(self, other: "Functional") -> "Functional":
        if self.grading != other.grading:
            raise GradingError("cannot subtract functionals of different gradings")
        algebra = self.algebra if self.algebra == other.algebra else "CK"
        md = min(self.max_degree, other.max_degree)
        return Functional.from_rule(
            algebra, lambda f: self(f) - other(f), md, name=f"({self.name}-{other.name})"
        )

    def scale(self, c: Scalar) -> "Functional":
        c = as_fraction(c)
        return Functional.from_rule(
            self.algebra, lambda f: c * self(f), self.max_degree, name=f"{c}*{self.name}"
        )

    def __repr__(self) -> str:
        label = self.name or "?"
        return (
            f"Functional({label}, algebra={self.algebra}, kind={self.kind}, "
            f"max_degree={self.max_degree})"
        )

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        values = {}
        for f in enumerate_forests(self.max_degree, self.algebra):
            c = self(f)
            if c:
                values[f.encoding] = str(c)
        return {
            "algebra": self.algebra,
            "kind": self.kind,
            "max_degree": self.max_degree,
            "name": self.name,
            "values": values,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Functional":
        values = {parse_forest(k): Fraction(v) for k, v in data["values"].items()}
        return cls(
            data["algebra"],
            "generic",
            int(data["max_degree"]),
            values=values,
            name=data.get("name", ""),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def character_from_tree_values(
    tree_values: Mapping[Tree, Scalar],
    algebra: str,
    max_degree: int,
    name: str = "",
) -> Functional:
    """Multiplicative extension of per-tree values to all forests.

    Every tree of degree at most ``max_degree`` in the algebra's grading
    must carry a value (for "H" the single-vertex tree is implicitly 1 and
    must not be overridden with anything else).
    """
    from .trees import trees_with_edges, trees_with_vertices

    tv = {t: as_fraction(c) for t, c in tree_values.items()}
    if algebra in ("H", "H_sigma"):
        if LEAF in tv and tv[LEAF] != 1:
            raise ValueError("an H-character has value 1 on the single-vertex tree")
        required = [
            t for e in range(1, max_degree + 1) for t in trees_with_edges(e)
        ]
    elif algebra in ("CK", "Htilde"):
        required = [
            t for v in range(1, max_degree + 1) for t in trees_with_vertices(v)
        ]
    else:
        raise ValueError(f"unknown algebra {algebra!r}")
    for t in required:
        if t not in tv:
            raise MissingTreeValueError(
                f"missing tree value for {t.encoding} within degree {max_degree}"
            )
    return Functional(algebra, "character", max_degree, tree_values=tv, name=name)


def delta_basis(s: Forest, algebra: str, max_degree: int) -> Functional:
    """The dual-basis linear form of the forest s: 1 on s, 0 elsewhere.

    For a single tree this is an infinitesimal character; for the unit
    forest it is the counit (a character); otherwise it is generic.
    """
    algebra = "H" if algebra == "H_sigma" else algebra
    unit = BULLET_FOREST if algebra == "H" else EMPTY_FOREST
    s_norm = h_normalize(s) if algebra == "H" else s
    if s_norm == unit:
        return Functional(
            algebra,
            "character",
            max_degree,
            tree_rule=lambda t: Fraction(0),
            name=f"delta[{s_norm.encoding}]",
        )
    if len(s_norm) == 1:
        return Functional(
            algebra,
            "infinitesimal",
            max_degree,
            tree_values={s_norm.trees[0]: Fraction(1)},
            tree_rule=lambda t: Fraction(0),
            name=f"delta[{s_norm.encoding}]",
        )
    return Functional(
        algebra,
        "generic",
        max_degree,
        values={s_norm: Fraction(1)},
        name=f"delta[{s_norm.encoding}]",
    )


def apply_functional(f: Functional, fs: ForestSum) -> Fraction:
    """Linear extension of f to a ForestSum."""
    out = Fraction(0)
    for forest, c in fs.items():
        out += c * f(forest)
    return out


def functionals_equal(
    f: Functional, g: Functional, max_degree: Optional[int] = None
) -> bool:
    """Decide equality degree by degree on the common truncation range."""
    if f.grading != g.grading:
        return False
    d = min(f.max_degree, g.max_degree)
    if max_degree is not None:
        d = min(d, max_degree)
    for basis in (enumerate_forests(d, f.algebra), enumerate_forests(d, g.algebra)):
        for forest in basis:
            if f(forest) != g(forest):
                return False
    return True
