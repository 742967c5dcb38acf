"""The two pre-Lie products on rooted trees and the pre-Lie Magnus fixed
point.

Insertion is dual to the edge-graded coproduct: the coefficient of a tree
v in t ▷ u is the coefficient of t ⊗ u in the coproduct of v, scanned over
all trees of the correct edge grade.  Grafting is dual to the vertex-graded
coproduct and is also computed directly by attaching the first tree's root
below every vertex of the second; the two routes cross-check each other.

Normalized variants divide the structure constants by the symmetry factor
of the produced tree and multiply by those of the arguments, turning the
counts into numbers of distinct ways of inserting or grafting.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial as _ifactorial

from .characters import bernoulli
from .hopf import coproduct
from .linalg import ForestSum, _forest_sum_raw
from .trees import (
    EMPTY_FOREST,
    LEAF,
    Forest,
    Tree,
    single,
    tree_sigma,
    trees_with_edges,
    trees_with_vertices,
)

__all__ = [
    "insert",
    "graft",
    "graft_via_coproduct",
    "insert_sum",
    "graft_sum",
    "magnus_omega",
]


@lru_cache(maxsize=None)
def _insert_terms(t: Tree, u: Tree, normalized: bool) -> tuple:
    target = t.edges + u.edges
    t_forest, u_forest = single(t), single(u)
    out = []
    for v in trees_with_edges(target):
        n = coproduct(single(v), "H").coefficient((t_forest, u_forest))
        if not n:
            continue
        if normalized:
            n = n * Fraction(tree_sigma(t) * tree_sigma(u), tree_sigma(v))
        out.append((single(v), n))
    return tuple(out)


def insert(t: Tree, u: Tree, normalized: bool = False) -> ForestSum:
    """Insertion pre-Lie product t ▷ u (or its normalized variant).

    Every term has t.edges + u.edges edges.
    """
    return _forest_sum_raw(dict(_insert_terms(t, u, normalized)))


def _attachments(t: Tree, u: Tree):
    """All trees obtained by grafting t's root below one vertex of u,
    one per vertex (repetitions encode multiplicities)."""
    yield Tree(u.children + (t,))
    for i, child in enumerate(u.children):
        rest = u.children[:i] + u.children[i + 1 :]
        for grown in _attachments(t, child):
            yield Tree(rest + (grown,))


@lru_cache(maxsize=None)
def _graft_terms(t: Tree, u: Tree, normalized: bool) -> tuple:
    # Attachment counting yields the normalized constants directly (the
    # number of ways to graft); the raw constants, dual to the
    # vertex-graded coproduct, differ by the symmetry-factor ratio.
    counts: dict[Tree, int] = {}
    for v in _attachments(t, u):
        counts[v] = counts.get(v, 0) + 1
    out = []
    for v, n in counts.items():
        c = Fraction(n)
        if not normalized:
            c *= Fraction(tree_sigma(v), tree_sigma(t) * tree_sigma(u))
        out.append((single(v), c))
    return tuple(out)


def graft(t: Tree, u: Tree, normalized: bool = False) -> ForestSum:
    """Grafting pre-Lie product t → u (or its normalized variant).

    Every term has t.vertices + u.vertices vertices.
    """
    return _forest_sum_raw(dict(_graft_terms(t, u, normalized)))


def graft_via_coproduct(t: Tree, u: Tree, normalized: bool = False) -> ForestSum:
    """Independent route to the grafting structure constants: read the
    coefficient of t ⊗ u off the vertex-graded coproduct of each candidate
    tree."""
    target = t.vertices + u.vertices
    t_forest, u_forest = single(t), single(u)
    out: dict[Forest, Fraction] = {}
    for v in trees_with_vertices(target):
        n = coproduct(single(v), "CK").coefficient((t_forest, u_forest))
        if not n:
            continue
        if normalized:
            n = n * Fraction(tree_sigma(t) * tree_sigma(u), tree_sigma(v))
        out[single(v)] = n
    return _forest_sum_raw(out)


def _bilinear(op, a: ForestSum, b: ForestSum, normalized: bool) -> ForestSum:
    """Extend a tree-level pre-Lie product bilinearly.

    The empty forest acts as a fictitious unit on either side.
    """
    out = ForestSum()
    for fa, ca in a.items():
        for fb, cb in b.items():
            c = ca * cb
            if fa == EMPTY_FOREST:
                out = out + c * ForestSum({fb: 1})
                continue
            if fb == EMPTY_FOREST:
                out = out + c * ForestSum({fa: 1})
                continue
            if len(fa) != 1 or len(fb) != 1:
                raise ValueError("pre-Lie products pair single trees")
            out = out + c * op(fa.trees[0], fb.trees[0], normalized)
    return out


def insert_sum(a: ForestSum, b: ForestSum, normalized: bool = False) -> ForestSum:
    return _bilinear(insert, a, b, normalized)


def graft_sum(a: ForestSum, b: ForestSum, normalized: bool = False) -> ForestSum:
    return _bilinear(graft, a, b, normalized)


def magnus_omega(max_vertices: int) -> ForestSum:
    """Solve the pre-Lie Magnus fixed point grade by grade.

    The unknown is a series in the free pre-Lie algebra on one generator
    (normalized grafting); its grade-g part collects, over n >= 1 and
    compositions (k_1, ..., k_n) of g-1, the n-fold left multiplication
    of the already-known parts applied to the generator, weighted by
    B_n / n!.  The coefficient of each tree comes out as the
    backward-error coefficient of that tree divided by its symmetry
    factor.
    """
    if max_vertices < 1:
        raise ValueError("max_vertices must be >= 1")
    parts: dict[int, ForestSum] = {1: ForestSum({single(LEAF): 1})}
    for g in range(2, max_vertices + 1):
        acc = ForestSum()
        for n in range(1, g):
            b_n = bernoulli(n)
            if not b_n:
                continue
            weight = b_n / _ifactorial(n)
            for combo in _compositions(g - 1, n):
                cur = ForestSum({single(LEAF): 1})
                for k in reversed(combo):
                    cur = graft_sum(parts[k], cur, normalized=True)
                acc = acc + weight * cur
        parts[g] = acc
    total = ForestSum()
    for g in range(1, max_vertices + 1):
        total = total + parts[g]
    return total


def _compositions(total: int, n: int):
    """Ordered n-tuples of positive integers summing to total."""
    if n == 1:
        yield (total,)
        return
    for first in range(1, total - n + 2):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest
