"""The one-generator quasi-shuffle algebra and the word image of forests.

Words over a single letter x with the overlap rule [xx] = x are determined
by their length, so the algebra is the polynomial ring in x with the
quasi-shuffle product

    x^k ⋄ x^l = sum over r of qsh(k, l; r) x^(k+l-r),

where qsh counts the surjections merging two increasing runs with r
overlaps.  Each rooted tree maps to a word polynomial by taking the
quasi-shuffle product at every branching and appending one letter at the
root; ladders with n vertices land on x^n.  The coefficients of this image
count ordered partitions of the tree into independent vertex blocks, and
the alternating harmonic combination of them recovers the
backward-error-analysis coefficient of the tree.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial as _ifactorial
from typing import Mapping, Optional, Union

from .hopf import iterated_coproduct
from .linalg import as_fraction
from .trees import Forest, Tree, single

__all__ = [
    "WordPoly",
    "diamond",
    "qsh_coefficient",
    "lambda_map",
    "omega_s",
    "omega_s_by_partitions",
    "omega_via_lambda",
    "c_s",
]


class WordPoly:
    """A polynomial in the single generator x, exact coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Optional[Mapping[int, Union[int, Fraction, str]]] = None):
        data: dict[int, Fraction] = {}
        if coeffs:
            for k, v in coeffs.items():
                if k < 0:
                    raise ValueError("word lengths are nonnegative")
                c = as_fraction(v)
                if c:
                    data[k] = data.get(k, Fraction(0)) + c
                    if not data[k]:
                        del data[k]
        self.coeffs = data

    @classmethod
    def one(cls) -> "WordPoly":
        return cls({0: 1})

    @classmethod
    def x(cls, power: int = 1) -> "WordPoly":
        return cls({power: 1})

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs.get(k, Fraction(0))

    @property
    def degree(self) -> int:
        return max(self.coeffs, default=0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "WordPoly") -> "WordPoly":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            c2 = out.get(k, Fraction(0)) + c
            if c2:
                out[k] = c2
            elif k in out:
                del out[k]
        return _raw(out)

    def __sub__(self, other: "WordPoly") -> "WordPoly":
        return self + (-other)

    def __neg__(self) -> "WordPoly":
        return _raw({k: -c for k, c in self.coeffs.items()})

    def scale(self, c: Union[int, Fraction]) -> "WordPoly":
        c = as_fraction(c)
        if not c:
            return WordPoly()
        return _raw({k: c0 * c for k, c0 in self.coeffs.items()})

    def append_x(self) -> "WordPoly":
        """Right concatenation with the single letter: shift every word up."""
        return _raw({k + 1: c for k, c in self.coeffs.items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WordPoly) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"WordPoly<{self}>"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, k in enumerate(sorted(self.coeffs, reverse=True)):
            c = self.coeffs[k]
            mag = -c if c < 0 else c
            if k == 0:
                body = str(mag)
            else:
                xs = "x" if k == 1 else f"x^{k}"
                body = xs if mag == 1 else f"{mag}{xs}"
            if i == 0:
                parts.append(("−" if c < 0 else "") + body)
            else:
                parts.append((" − " if c < 0 else " + ") + body)
        return "".join(parts)


def _raw(coeffs: dict[int, Fraction]) -> WordPoly:
    out = WordPoly()
    out.coeffs = coeffs
    return out


def _qsh_binary(k: int, l: int, r: int) -> int:
    if r < 0 or r > min(k, l):
        return 0
    return _ifactorial(k + l - r) // (
        _ifactorial(k - r) * _ifactorial(l - r) * _ifactorial(r)
    )


def diamond(u: WordPoly, v: WordPoly) -> WordPoly:
    """Quasi-shuffle product, bilinear over the length basis."""
    out: dict[int, Fraction] = {}
    for k, ck in u.coeffs.items():
        for l, cl in v.coeffs.items():
            if k == 0 or l == 0:
                key = k + l
                c = out.get(key, Fraction(0)) + ck * cl
                if c:
                    out[key] = c
                elif key in out:
                    del out[key]
                continue
            for r in range(min(k, l) + 1):
                key = k + l - r
                c = out.get(key, Fraction(0)) + ck * cl * _qsh_binary(k, l, r)
                if c:
                    out[key] = c
                elif key in out:
                    del out[key]
    return _raw(out)


def qsh_coefficient(ks: list[int], r: int) -> int:
    """Quasi-shuffle multinomial: the number of merged interleavings of
    increasing runs of lengths ks with r overlaps.

    For two runs there is a closed product of factorials; in general it is
    the coefficient of the appropriately shortened power in the iterated
    quasi-shuffle product.
    """
    if r < 0:
        return 0
    if len(ks) == 0:
        return 1 if r == 0 else 0
    if len(ks) == 1:
        return 1 if r == 0 else 0
    if len(ks) == 2:
        return _qsh_binary(ks[0], ks[1], r)
    acc = WordPoly.x(ks[0])
    for k in ks[1:]:
        acc = diamond(acc, WordPoly.x(k))
    coeff = acc.coefficient(sum(ks) - r)
    assert coeff.denominator == 1
    return int(coeff)


@lru_cache(maxsize=None)
def _lambda_tree(t: Tree) -> WordPoly:
    acc = WordPoly.one()
    for child in t.children:
        acc = diamond(acc, _lambda_tree(child))
    return acc.append_x()


def lambda_map(s: Forest) -> WordPoly:
    """Word image of a forest: quasi-shuffle across components and at every
    branching, one letter per vertex at the root.  The n-vertex ladder
    maps to x^n; the map is an algebra morphism onto the quasi-shuffle
    product."""
    acc = WordPoly.one()
    for t in s.trees:
        acc = diamond(acc, _lambda_tree(t))
    return acc


def omega_s(t: Tree) -> dict[int, int]:
    """Word-length profile of a tree: s -> coefficient of x^s in its word
    image."""
    out = {}
    for k, c in lambda_map(single(t)).coeffs.items():
        assert c.denominator == 1
        out[k] = int(c)
    return out


def omega_s_by_partitions(t: Tree) -> dict[int, int]:
    """Independent count of the same profile: the number of ordered
    partitions of the vertex set into s blocks, each inducing an edgeless
    subforest, read off the iterated reduced vertex-graded coproduct."""
    out: dict[int, int] = {}
    for s in range(1, t.vertices + 1):
        tensor = iterated_coproduct(single(t), "CK", n=s - 1, reduced=True)
        count = Fraction(0)
        for legs, c in tensor.items():
            if all(leg.edges == 0 and not leg.is_empty for leg in legs):
                count += c
        assert count.denominator == 1
        if count:
            out[s] = int(count)
    return out


def omega_via_lambda(t: Tree) -> Fraction:
    """Alternating harmonic combination of the word-length profile; equals
    the backward-error-analysis coefficient of the tree."""
    out = Fraction(0)
    for s, n in omega_s(t).items():
        out += Fraction((-1) ** (s + 1), s) * n
    return out


def _c(t: Tree, s: int) -> Fraction:
    if s < 0 or s >= t.vertices:
        return Fraction(0)
    kids = t.children
    sizes = [c.vertices for c in kids]
    total = Fraction(0)
    for j in range(s + 1):
        for rs in _bounded_tuples(s - j, [sz - 1 for sz in sizes]):
            prod = Fraction(1)
            for child, r in zip(kids, rs):
                prod *= _c(child, r)
                if not prod:
                    break
            if not prod:
                continue
            total += qsh_coefficient(
                [sz - r for sz, r in zip(sizes, rs)], j
            ) * prod
    return total


def _bounded_tuples(total: int, bounds: list[int]):
    """Nonnegative tuples below per-entry bounds with the given sum."""
    if total < 0:
        return
    if not bounds:
        if total == 0:
            yield ()
        return
    first_max = min(bounds[0], total)
    for v in range(first_max + 1):
        for rest in _bounded_tuples(total - v, bounds[1:]):
            yield (v,) + rest


def c_s(t: Tree, s: int) -> int:
    """High-end word coefficients by the branching recursion.

    c_s(t) is the coefficient of x^(v(t)-s) in the word image of t; it is
    assembled from the children's coefficients and quasi-shuffle
    multinomials, with c_0(t) = v(t)!/t!.
    """
    if s < 0 or s >= t.vertices:
        raise ValueError("s must satisfy 0 <= s < v(t)")
    val = _c(t, s)
    assert val.denominator == 1
    return int(val)
