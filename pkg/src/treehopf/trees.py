"""Canonical non-planar rooted trees and rooted forests.

A tree is stored through a canonical bracket encoding: ``"["`` followed by
the children's encodings and ``"]"``, with children sorted by
``(length, lexicographic)`` of their own encodings.  Two isomorphic
non-planar trees therefore have identical representations, and string
comparison within a fixed grade is a total order.

A forest is a multiset of trees kept as a canonically sorted tuple.  The
empty forest ``EMPTY_FOREST`` is the unit of the vertex-graded forest
algebra (the Connes-Kreimer side); the single-vertex forest
``BULLET_FOREST`` plays the unit role in the edge-graded algebra, whose
basis forests carry at least one edge in every component.

All values are immutable after construction and all operations are pure,
so everything here is safe for concurrent use.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial as _ifactorial
from typing import Iterable, Iterator

__all__ = [
    "Tree",
    "Forest",
    "TreeStats",
    "TreeSyntaxError",
    "LEAF",
    "EMPTY_FOREST",
    "BULLET_FOREST",
    "single",
    "h_normalize",
    "ladder",
    "corolla",
    "parse_forest",
    "parse_tree",
    "enumerate_trees",
    "enumerate_forests",
    "trees_with_vertices",
    "trees_with_edges",
    "forests_with_vertices",
    "forests_with_edges",
    "stats",
    "tree_sigma",
    "tree_factorial",
    "forest_sigma",
    "forest_factorial",
    "b_plus",
    "butcher",
    "merge",
    "bowtie",
    "parent_vector",
    "tree_from_parents",
]


class TreeSyntaxError(ValueError):
    """Malformed tree/forest string.  Carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Tree:
    """A non-planar rooted tree in canonical form.

    ``children`` is a tuple of canonical subtrees, sorted by the canonical
    key, so construction canonicalizes automatically.  Instances are
    immutable by convention and hashable.
    """

    __slots__ = ("children", "encoding", "vertices", "_hash")

    def __init__(self, children: Iterable["Tree"] = ()):
        kids = tuple(sorted(children, key=_tree_key))
        self.children = kids
        self.encoding = "[" + "".join(c.encoding for c in kids) + "]"
        self.vertices = 1 + sum(c.vertices for c in kids)
        self._hash = hash(self.encoding)

    @property
    def edges(self) -> int:
        return self.vertices - 1

    @property
    def height(self) -> int:
        """Maximal edge distance from the root to a leaf."""
        return 1 + max((c.height for c in self.children), default=-1)

    @property
    def sort_key(self) -> tuple[int, str]:
        return (len(self.encoding), self.encoding)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Tree) and self.encoding == other.encoding

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Tree") -> bool:
        return self.sort_key < other.sort_key

    def __repr__(self) -> str:
        return f"Tree({self.encoding!r})"

    def __str__(self) -> str:
        return self.encoding


def _tree_key(t: Tree) -> tuple[int, str]:
    return (len(t.encoding), t.encoding)


class Forest:
    """A multiset of rooted trees, stored as a canonically sorted tuple."""

    __slots__ = ("trees", "encoding", "_hash")

    def __init__(self, trees: Iterable[Tree] = ()):
        comps = tuple(sorted(trees, key=_tree_key))
        self.trees = comps
        self.encoding = "·".join(t.encoding for t in comps) if comps else "∅"
        self._hash = hash(self.encoding)

    @property
    def vertices(self) -> int:
        return sum(t.vertices for t in self.trees)

    @property
    def edges(self) -> int:
        return sum(t.edges for t in self.trees)

    @property
    def is_empty(self) -> bool:
        return not self.trees

    @property
    def sort_key(self) -> tuple[int, int, str]:
        return (len(self.trees), len(self.encoding), self.encoding)

    def __mul__(self, other: "Forest") -> "Forest":
        return Forest(self.trees + other.trees)

    def __iter__(self) -> Iterator[Tree]:
        return iter(self.trees)

    def __len__(self) -> int:
        return len(self.trees)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Forest) and self.encoding == other.encoding

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Forest") -> bool:
        return self.sort_key < other.sort_key

    def __repr__(self) -> str:
        return f"Forest({self.encoding!r})"

    def __str__(self) -> str:
        return self.encoding


LEAF = Tree()
EMPTY_FOREST = Forest()
BULLET_FOREST = Forest((LEAF,))


def single(t: Tree) -> Forest:
    """The one-component forest {t}."""
    return Forest((t,))


def h_normalize(f: Forest) -> Forest:
    """Normal form of a forest in the edge-graded algebra.

    Single-vertex components are the unit there and get dropped; the empty
    result is represented by the single-vertex forest itself.
    """
    comps = tuple(t for t in f.trees if t.edges > 0)
    return Forest(comps) if comps else BULLET_FOREST


@lru_cache(maxsize=None)
def ladder(n: int) -> Tree:
    """The chain with n edges (n+1 vertices).  ladder(0) is the leaf."""
    if n < 0:
        raise ValueError("ladder needs n >= 0")
    t = LEAF
    for _ in range(n):
        t = Tree((t,))
    return t


def corolla(n: int) -> Tree:
    """Root with n leaf children (n edges).  corolla(0) is the leaf."""
    if n < 0:
        raise ValueError("corolla needs n >= 0")
    return Tree((LEAF,) * n)


# ---------------------------------------------------------------------------
# Parsing


_OPEN = {"[": "]", "(": ")"}
_SEPARATORS = "·."


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i].isspace():
        i += 1
    return i


def _parse_tree_at(text: str, i: int) -> tuple[Tree, int]:
    i = _skip_ws(text, i)
    if i >= len(text):
        raise TreeSyntaxError("expected a tree", i)
    ch = text[i]
    if ch not in _OPEN:
        raise TreeSyntaxError(f"expected '[' or '(', found {ch!r}", i)
    close = _OPEN[ch]
    i += 1
    kids: list[Tree] = []
    while True:
        i = _skip_ws(text, i)
        if i >= len(text):
            raise TreeSyntaxError(f"unbalanced bracket, expected {close!r}", i)
        if text[i] == close:
            return Tree(kids), i + 1
        child, i = _parse_tree_at(text, i)
        kids.append(child)


def parse_forest(text: str) -> Forest:
    """Parse a tree/forest string into its canonical Forest.

    Grammar: ``tree := "[" tree* "]"``, ``forest := tree ("·" tree)* | "∅"``.
    ASCII alternatives "()" for brackets, "." as separator and "empty" for
    the empty forest are accepted on input; canonical output always uses
    "[", "·" and "∅".
    """
    i = _skip_ws(text, 0)
    stripped = text.strip()
    if stripped in ("∅", "empty"):
        return EMPTY_FOREST
    if i >= len(text):
        raise TreeSyntaxError("empty input", i)
    comps: list[Tree] = []
    while True:
        t, i = _parse_tree_at(text, i)
        comps.append(t)
        i = _skip_ws(text, i)
        if i >= len(text):
            return Forest(comps)
        if text[i] in _SEPARATORS:
            i += 1
            continue
        raise TreeSyntaxError(
            f"expected component separator or end of input, found {text[i]!r}", i
        )


def parse_tree(text: str) -> Tree:
    """Parse a string that must denote a single tree."""
    f = parse_forest(text)
    if len(f) != 1:
        raise TreeSyntaxError("expected a single tree, got a forest", 0)
    return f.trees[0]


# ---------------------------------------------------------------------------
# Enumeration


@lru_cache(maxsize=None)
def trees_with_vertices(n: int) -> tuple[Tree, ...]:
    """All isomorphism classes of rooted trees with exactly n vertices,
    each exactly once, in canonical-string order."""
    if n < 1:
        return ()
    if n == 1:
        return (LEAF,)
    out = [Tree(f.trees) for f in forests_with_vertices(n - 1)]
    return tuple(sorted(out, key=_tree_key))


def trees_with_edges(e: int) -> tuple[Tree, ...]:
    if e < 0:
        return ()
    return trees_with_vertices(e + 1)


@lru_cache(maxsize=None)
def forests_with_vertices(total: int) -> tuple[Forest, ...]:
    """All forests (multisets of trees) with exactly ``total`` vertices."""
    if total < 0:
        return ()
    if total == 0:
        return (EMPTY_FOREST,)
    pool: list[Tree] = []
    for v in range(1, total + 1):
        pool.extend(trees_with_vertices(v))
    out: list[Forest] = []

    def rec(remaining: int, start: int, chosen: list[Tree]) -> None:
        if remaining == 0:
            out.append(Forest(chosen))
            return
        for i in range(start, len(pool)):
            t = pool[i]
            if t.vertices > remaining:
                break  # pool is sorted by ascending vertex count
            chosen.append(t)
            rec(remaining - t.vertices, i, chosen)
            chosen.pop()

    rec(total, 0, [])
    return tuple(sorted(out, key=lambda f: f.sort_key))


@lru_cache(maxsize=None)
def forests_with_edges(total: int) -> tuple[Forest, ...]:
    """All forests of edge-bearing trees with exactly ``total`` edges.

    For ``total == 0`` this is the single-vertex forest, the unit of the
    edge-graded algebra.
    """
    if total < 0:
        return ()
    if total == 0:
        return (BULLET_FOREST,)
    pool: list[Tree] = []
    for e in range(1, total + 1):
        pool.extend(trees_with_edges(e))
    out: list[Forest] = []

    def rec(remaining: int, start: int, chosen: list[Tree]) -> None:
        if remaining == 0:
            out.append(Forest(chosen))
            return
        for i in range(start, len(pool)):
            t = pool[i]
            if t.edges > remaining:
                break
            chosen.append(t)
            rec(remaining - t.edges, i, chosen)
            chosen.pop()

    rec(total, 0, [])
    return tuple(sorted(out, key=lambda f: f.sort_key))


def enumerate_trees(n: int, grading: str = "vertices") -> list[Tree]:
    """All rooted trees with exactly n vertices (or n edges), canonical order."""
    if n < 1:
        raise ValueError("enumeration needs n >= 1")
    if grading == "vertices":
        return list(trees_with_vertices(n))
    if grading == "edges":
        return list(trees_with_edges(n))
    raise ValueError(f"unknown grading {grading!r}")


def enumerate_forests(max_degree: int, algebra: str) -> list[Forest]:
    """Basis forests of the given algebra up to the given degree.

    ``algebra`` is "CK" or "Htilde" (vertex grading, all forests including
    the empty one) or "H" (edge grading, components all edge-bearing, with
    the single-vertex forest as the degree-0 unit).
    """
    if algebra in ("CK", "Htilde"):
        out: list[Forest] = []
        for k in range(max_degree + 1):
            out.extend(forests_with_vertices(k))
        return out
    if algebra in ("H", "H_sigma"):
        out = []
        for k in range(max_degree + 1):
            out.extend(forests_with_edges(k))
        return out
    raise ValueError(f"unknown algebra {algebra!r}")


# ---------------------------------------------------------------------------
# Statistics


@dataclass(frozen=True)
class TreeStats:
    """Elementary statistics of a forest, all exact.

    ``sigma`` is the internal symmetry factor (product of the automorphism
    group orders of the components), ``factorial`` the tree factorial and
    ``cm`` the Connes-Moscovici coefficient v! / (factorial * sigma).
    """

    vertices: int
    edges: int
    sigma: int
    factorial: int
    cm: Fraction


@lru_cache(maxsize=None)
def tree_sigma(t: Tree) -> int:
    """|Aut t| via child multiplicities: prod over distinct child classes c
    of m_c! * sigma(c)^m_c."""
    out = 1
    i = 0
    kids = t.children
    while i < len(kids):
        j = i
        while j < len(kids) and kids[j] == kids[i]:
            j += 1
        m = j - i
        out *= _ifactorial(m) * tree_sigma(kids[i]) ** m
        i = j
    return out


@lru_cache(maxsize=None)
def tree_factorial(t: Tree) -> int:
    out = t.vertices
    for c in t.children:
        out *= tree_factorial(c)
    return out


def forest_sigma(f: Forest) -> int:
    out = 1
    for t in f.trees:
        out *= tree_sigma(t)
    return out


def forest_factorial(f: Forest) -> int:
    out = 1
    for t in f.trees:
        out *= tree_factorial(t)
    return out


def stats(s: Forest) -> TreeStats:
    v = s.vertices
    fac = forest_factorial(s)
    sig = forest_sigma(s)
    return TreeStats(
        vertices=v,
        edges=s.edges,
        sigma=sig,
        factorial=fac,
        cm=Fraction(_ifactorial(v), fac * sig),
    )


# ---------------------------------------------------------------------------
# Structural products


def b_plus(s: Forest) -> Tree:
    """Graft every component of s onto a fresh common root."""
    return Tree(s.trees)


def butcher(a: Tree, b: Tree) -> Tree:
    """Butcher product: graft the root of b under the root of a."""
    return Tree(a.children + (b,))


def merge(a: Tree, b: Tree) -> Tree:
    """Merge product: identify the roots of a and b."""
    return Tree(a.children + b.children)


def bowtie(a: Tree, b: Tree):
    """The symmetrized product a∘b + b∘a + a×b, with coinciding terms
    accumulated in a ForestSum."""
    from .linalg import ForestSum

    out = ForestSum()
    for t in (butcher(a, b), butcher(b, a), merge(a, b)):
        out = out + ForestSum({single(t): 1})
    return out


# ---------------------------------------------------------------------------
# Vertex-indexed views (used by coproduct machinery and test strategies)


def parent_vector(t: Tree) -> tuple[int, ...]:
    """Preorder parent vector; entry 0 is the root with parent -1."""
    parents: list[int] = []

    def rec(node: Tree, parent: int) -> None:
        idx = len(parents)
        parents.append(parent)
        for c in node.children:
            rec(c, idx)

    rec(t, -1)
    return tuple(parents)


def tree_from_parents(parents: Iterable[int]) -> Tree:
    """Rebuild (and canonicalize) a tree from any parent vector whose root
    has parent -1."""
    ps = list(parents)
    kids: dict[int, list[int]] = {i: [] for i in range(len(ps))}
    root = -1
    for i, p in enumerate(ps):
        if p < 0:
            root = i
        else:
            kids[p].append(i)
    if root < 0:
        raise ValueError("parent vector has no root")

    def build(i: int) -> Tree:
        return Tree(build(j) for j in kids[i])

    return build(root)
