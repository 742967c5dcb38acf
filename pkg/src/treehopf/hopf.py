"""Coproducts and antipodes on rooted forests.

Four coproduct variants are implemented on the same basis of canonical
forests:

* ``"H"``: the edge-graded coproduct.  A subforest of a tree is any
  collection of pairwise disjoint subtrees with at least one edge each,
  which is the same thing as a subset of the edge set.  The coproduct of a
  tree sums ``subforest ⊗ contraction`` over all edge subsets, the
  contraction collapsing every selected component to a single vertex.  The
  single-vertex forest is the unit.
* ``"H_sigma"``: the same coproduct conjugated by the symmetry-factor
  rescaling s ↦ σ(s)·s, which multiplies each term by
  σ(subforest)·σ(contraction)/σ(tree).
* ``"Htilde"``: the spanning-subforest variant.  Every vertex must belong
  to a component, so single-vertex components appear on the left; only
  components with an edge are contracted on the right.  The empty forest
  is the unit and the single-vertex forest is grouplike; this bialgebra
  has no antipode.
* ``"CK"``: the Connes-Kreimer coproduct, graded by vertices, summing
  ``pruning ⊗ trunk`` over admissible cuts (edge antichains) together with
  the empty and total cuts.

All coproducts extend multiplicatively to forests; per-tree results are
memoized.  Antipodes come in recursive form (both one-sided recursions)
and, for the edge grading, in a closed form summing over ordered
partitions of the edge set.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product as _iproduct
from math import comb

from .linalg import ForestSum, TensorSum, _forest_sum_raw, _tensor_sum_raw
from .trees import (
    BULLET_FOREST,
    EMPTY_FOREST,
    LEAF,
    Forest,
    Tree,
    corolla,
    forest_sigma,
    h_normalize,
    ladder,
    parent_vector,
    single,
)

__all__ = [
    "VARIANTS",
    "UnsupportedCombination",
    "coproduct",
    "reduced_coproduct",
    "iterated_coproduct",
    "antipode",
    "corolla_coproduct",
    "ladder_coproduct",
    "floored_coproduct",
    "forest_product",
    "sum_product",
    "unit_forest",
    "counit_value",
]

VARIANTS = ("H", "H_sigma", "Htilde", "CK")


class UnsupportedCombination(ValueError):
    """Requested operation does not exist for this variant."""


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown coproduct variant {variant!r}")


def unit_forest(variant: str) -> Forest:
    return BULLET_FOREST if variant in ("H", "H_sigma") else EMPTY_FOREST


def counit_value(f: Forest, variant: str) -> Fraction:
    """The counit evaluated on a basis forest."""
    if variant in ("H", "H_sigma"):
        return Fraction(1 if h_normalize(f) == BULLET_FOREST else 0)
    if variant == "Htilde":
        return Fraction(1 if f.edges == 0 else 0)
    return Fraction(1 if f.is_empty else 0)


def forest_product(a: Forest, b: Forest, variant: str) -> Forest:
    """The forest product in the variant's algebra (single-vertex
    components collapse for the edge grading)."""
    if variant in ("H", "H_sigma"):
        return h_normalize(a * b)
    return a * b


def sum_product(a: ForestSum, b: ForestSum, variant: str) -> ForestSum:
    """Bilinear extension of :func:`forest_product`."""
    out: dict[Forest, Fraction] = {}
    for f1, c1 in a.items():
        for f2, c2 in b.items():
            f = forest_product(f1, f2, variant)
            c = out.get(f, Fraction(0)) + c1 * c2
            if c:
                out[f] = c
            elif f in out:
                del out[f]
    return _forest_sum_raw(out)


# ---------------------------------------------------------------------------
# Edge-subset machinery


def _edge_components_and_contraction(
    t: Tree, mask: int
) -> tuple[list[Tree], int, Tree]:
    """Split a tree along an edge subset.

    Edge j joins vertex j+1 (preorder) to its parent.  Returns the list of
    selected components with at least one edge, the number of isolated
    vertices, and the contraction of the selected components.
    """
    parents = parent_vector(t)
    n = len(parents)
    uf = list(range(n))

    def find(x: int) -> int:
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    selected = [v for v in range(1, n) if mask >> (v - 1) & 1]
    for v in selected:
        rv, rp = find(v), find(parents[v])
        if rv != rp:
            uf[rv] = rp

    # contraction: unselected edges between class representatives
    kids_c: dict[int, list[int]] = {}
    for v in range(1, n):
        if not (mask >> (v - 1) & 1):
            kids_c.setdefault(find(parents[v]), []).append(find(v))

    def build(kids: dict[int, list[int]], node: int) -> Tree:
        return Tree(build(kids, ch) for ch in kids.get(node, ()))

    contraction = build(kids_c, find(0))

    # components: selected edges grouped by class
    members: dict[int, list[int]] = {}
    for v in range(n):
        members.setdefault(find(v), []).append(v)
    comp_kids: dict[int, list[int]] = {}
    for v in selected:
        comp_kids.setdefault(parents[v], []).append(v)
    components = []
    isolated = 0
    for rep, verts in members.items():
        if len(verts) == 1:
            isolated += 1
            continue
        root = min(verts)  # preorder: the member closest to the tree root
        components.append(build(comp_kids, root))
    return components, isolated, contraction


@lru_cache(maxsize=None)
def _tree_coproduct(t: Tree, variant: str) -> tuple:
    """Coproduct terms ((left, right), coefficient) of a single tree."""
    e = t.edges
    terms: dict[tuple[Forest, Forest], Fraction] = {}
    if variant in ("H", "H_sigma", "Htilde"):
        sig_t = forest_sigma(single(t)) if variant == "H_sigma" else 1
        for mask in range(1 << e):
            components, isolated, contraction = _edge_components_and_contraction(
                t, mask
            )
            if variant == "Htilde":
                left = Forest(components + [LEAF] * isolated)
            else:
                left = Forest(components) if components else BULLET_FOREST
            right = single(contraction)
            coeff = Fraction(1)
            if variant == "H_sigma":
                coeff = Fraction(forest_sigma(left) * forest_sigma(right), sig_t)
            key = (left, right)
            terms[key] = terms.get(key, Fraction(0)) + coeff
    elif variant == "CK":
        for pruning, trunk in _ck_cuts(t):
            key = (Forest(pruning), single(trunk))
            terms[key] = terms.get(key, Fraction(0)) + 1
        key = (single(t), EMPTY_FOREST)
        terms[key] = terms.get(key, Fraction(0)) + 1
    else:  # pragma: no cover
        raise ValueError(variant)
    return tuple(terms.items())


def _ck_cuts(t: Tree) -> list[tuple[tuple[Tree, ...], Tree]]:
    """All admissible cuts of a tree as (pruning components, trunk).

    Covers every edge antichain, including the empty one (trunk = t); the
    total cut is handled by the caller.  Cutting an edge sends the whole
    subtree above it to the pruning, so no descendant edge can be cut
    again.
    """
    options = []
    for child in t.children:
        child_opts: list[tuple[tuple[Tree, ...], Tree | None]] = [((child,), None)]
        child_opts.extend(
            (pruning, trunk) for pruning, trunk in _ck_cuts(child)
        )
        options.append(child_opts)
    out: list[tuple[tuple[Tree, ...], Tree]] = []
    for combo in _iproduct(*options):
        pruning: tuple[Tree, ...] = ()
        kept: list[Tree] = []
        for pr, trunk in combo:
            if trunk is None:
                pruning += pr
            else:
                pruning += pr
                kept.append(trunk)
        out.append((pruning, Tree(kept)))
    return out


def coproduct(s: Forest, variant: str = "H") -> TensorSum:
    """The coproduct of a basis forest, extended multiplicatively.

    The edge-graded variants reject forests mixing a bare single-vertex
    component with edged components; the single-vertex forest itself (and
    the empty forest, identified with it) is the unit.
    """
    _check_variant(variant)
    if variant in ("H", "H_sigma"):
        if any(t.edges == 0 for t in s.trees) and s.vertices > 1:
            raise ValueError(
                "the edge-graded coproduct is undefined on forests with a "
                "bare single-vertex component"
            )
        s = h_normalize(s)
    unit = unit_forest(variant)
    acc: dict[tuple[Forest, Forest], Fraction] = {(unit, unit): Fraction(1)}
    for t in s.trees:
        tree_terms = _tree_coproduct(t, variant)
        nxt: dict[tuple[Forest, Forest], Fraction] = {}
        for (l1, r1), c1 in acc.items():
            for (l2, r2), c2 in tree_terms:
                key = (
                    forest_product(l1, l2, variant),
                    forest_product(r1, r2, variant),
                )
                c = nxt.get(key, Fraction(0)) + c1 * c2
                if c:
                    nxt[key] = c
                elif key in nxt:
                    del nxt[key]
        acc = nxt
    return _tensor_sum_raw(2, acc)


def reduced_coproduct(s: Forest, variant: str = "H") -> TensorSum:
    """Coproduct with the two unit-bearing terms x ⊗ 1 and 1 ⊗ x removed."""
    _check_variant(variant)
    full = coproduct(s, variant)
    unit = unit_forest(variant)
    if variant in ("H", "H_sigma"):
        s = h_normalize(s)
    out = dict(full.terms)
    for key in ((s, unit), (unit, s)):
        if key in out:
            c = out[key] - 1
            if c:
                out[key] = c
            else:
                del out[key]
    return _tensor_sum_raw(2, out)


def iterated_coproduct(
    s: Forest, variant: str = "H", n: int = 1, reduced: bool = False
) -> TensorSum:
    """The n-fold iterate of the (reduced) coproduct, an (n+1)-tensor.

    Coassociativity makes the expansion order irrelevant; the last leg is
    expanded repeatedly.
    """
    _check_variant(variant)
    if n < 0:
        raise ValueError("n must be >= 0")
    delta = reduced_coproduct if reduced else coproduct
    acc: dict[tuple[Forest, ...], Fraction] = {(s,): Fraction(1)}
    for _ in range(n):
        nxt: dict[tuple[Forest, ...], Fraction] = {}
        for legs, c in acc.items():
            for (l, r), c2 in delta(legs[-1], variant).items():
                key = legs[:-1] + (l, r)
                cv = nxt.get(key, Fraction(0)) + c * c2
                if cv:
                    nxt[key] = cv
                elif key in nxt:
                    del nxt[key]
        acc = nxt
    return _tensor_sum_raw(n + 1, acc)


# ---------------------------------------------------------------------------
# Antipodes


@lru_cache(maxsize=None)
def _antipode_tree(t: Tree, variant: str, side: str) -> ForestSum:
    """Antipode of a single tree by the one-sided graded recursion."""
    if variant == "H":
        if t.edges == 0:
            return ForestSum({BULLET_FOREST: 1})
        out = ForestSum({single(t): -1})
        for (left, right), c in _tree_coproduct(t, "H"):
            if left == BULLET_FOREST or right == BULLET_FOREST:
                continue  # skip the unit-bearing terms
            if side == "left":
                piece = sum_product(
                    _antipode_forest_terms(left, "H", side),
                    ForestSum({right: 1}),
                    "H",
                )
            else:
                piece = sum_product(
                    ForestSum({left: 1}),
                    _antipode_forest_terms(right, "H", side),
                    "H",
                )
            out = out - c * piece
        return out
    if variant == "CK":
        out = ForestSum({single(t): -1})
        for (left, right), c in reduced_coproduct(single(t), "CK").items():
            if side == "left":
                piece = _antipode_forest_terms(left, "CK", side) * ForestSum(
                    {right: 1}
                )
            else:
                piece = ForestSum({left: 1}) * _antipode_forest_terms(
                    right, "CK", side
                )
            out = out - c * piece
        return out
    raise UnsupportedCombination(f"no recursive antipode for variant {variant!r}")


def _antipode_forest_terms(f: Forest, variant: str, side: str) -> ForestSum:
    out = ForestSum({unit_forest(variant): 1})
    for t in f.trees:
        out = sum_product(out, _antipode_tree(t, variant, side), variant)
    return out


@lru_cache(maxsize=None)
def _antipode_tree_closed(t: Tree) -> ForestSum:
    """Closed-form edge-graded antipode of a tree.

    Sums, over ordered partitions of the edge set into r nonempty blocks,
    the product of the first r-1 block subforests times the contraction of
    the tree along their union, with sign (-1)^r.
    """
    e = t.edges
    if e == 0:
        return ForestSum({BULLET_FOREST: 1})
    acc: dict[Forest, Fraction] = {}
    for r in range(1, e + 1):
        sign = Fraction((-1) ** r)
        for labels in _iproduct(range(r), repeat=e):
            if len(set(labels)) != r:
                continue
            prefix_mask = 0
            forest_parts: list[Tree] = []
            for block in range(r - 1):
                mask = 0
                for j, lab in enumerate(labels):
                    if lab == block:
                        mask |= 1 << j
                comps, _, _ = _edge_components_and_contraction(t, mask)
                forest_parts.extend(comps)
                prefix_mask |= mask
            _, _, contraction = _edge_components_and_contraction(t, prefix_mask)
            f = Forest(forest_parts + [contraction])
            c = acc.get(f, Fraction(0)) + sign
            if c:
                acc[f] = c
            elif f in acc:
                del acc[f]
    return _forest_sum_raw(acc)


def antipode(s: Forest, variant: str = "H", method: str = "recursive", side: str = "left") -> ForestSum:
    """The antipode of a basis forest, extended multiplicatively.

    ``variant`` is "H", "H_sigma" or "CK"; the spanning-subforest bialgebra
    has no antipode and is rejected.  ``method`` is "recursive" (either
    one-sided recursion via ``side``) or "closed_form", which exists for
    the edge-graded variants only.
    """
    if variant == "Htilde":
        raise UnsupportedCombination(
            "the spanning-subforest bialgebra has no antipode"
        )
    if variant not in ("H", "H_sigma", "CK"):
        raise ValueError(f"unknown antipode variant {variant!r}")
    if method not in ("recursive", "closed_form"):
        raise ValueError(f"unknown antipode method {method!r}")
    if side not in ("left", "right"):
        raise ValueError(f"unknown recursion side {side!r}")
    if method == "closed_form" and variant == "CK":
        raise UnsupportedCombination(
            "no closed-form antipode is implemented for the vertex grading"
        )

    base_variant = "H" if variant in ("H", "H_sigma") else "CK"
    if base_variant == "H":
        if any(t.edges == 0 for t in s.trees) and s.vertices > 1:
            raise ValueError(
                "the edge-graded antipode is undefined on forests with a "
                "bare single-vertex component"
            )
        s = h_normalize(s)

    out = ForestSum({unit_forest(base_variant): 1})
    for t in s.trees:
        if method == "closed_form":
            st = _antipode_tree_closed(t)
        else:
            st = _antipode_tree(t, base_variant, side)
        out = sum_product(out, st, base_variant)

    if variant == "H_sigma":
        sig_s = forest_sigma(s)
        out = _forest_sum_raw(
            {
                f: c * Fraction(forest_sigma(f), sig_s)
                for f, c in out.items()
                if c
            }
        )
    return out


# ---------------------------------------------------------------------------
# Closed-form coproduct oracles


def corolla_coproduct(n: int) -> TensorSum:
    """Edge-graded coproduct of the n-edge corolla: binomial pairing of
    smaller corollas."""
    if n < 0:
        raise ValueError("n must be >= 0")
    terms: dict[tuple[Forest, Forest], Fraction] = {}
    for p in range(n + 1):
        left = BULLET_FOREST if p == 0 else single(corolla(p))
        right = single(corolla(n - p))
        key = (left, right)
        terms[key] = terms.get(key, Fraction(0)) + comb(n, p)
    return _tensor_sum_raw(2, terms)


def _mock_compositions(n: int) -> list[tuple[int, ...]]:
    """Sequences (p1, ..., pr) with p1 >= 0, later parts >= 1, sum n.

    There are 2^n of them; they biject with ordinary compositions of n+1.
    """
    out: list[tuple[int, ...]] = []

    def extend(prefix: tuple[int, ...], remaining: int) -> None:
        if remaining == 0:
            out.append(prefix)
            return
        for p in range(1, remaining + 1):
            extend(prefix + (p,), remaining - p)

    if n >= 1:
        for first in range(n + 1):
            extend((first,), n - first)
    return out


def ladder_coproduct(n: int) -> TensorSum:
    """Edge-graded coproduct of the n-edge ladder via mock-compositions.

    Each sequence (p1, ..., pr) with p1 >= 0 and positive later parts
    summing to n contributes the product of the odd-position ladders on
    the left and the ladder of the even-position total on the right; the
    number of terms counted with multiplicity is 2^n.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return _tensor_sum_raw(2, {(BULLET_FOREST, BULLET_FOREST): Fraction(1)})
    terms: dict[tuple[Forest, Forest], Fraction] = {}
    for parts in _mock_compositions(n):
        odd = [p for p in parts[0::2] if p > 0]
        even = parts[1::2]
        left = Forest([ladder(p) for p in odd]) if odd else BULLET_FOREST
        right = single(ladder(sum(even)))
        key = (left, right)
        terms[key] = terms.get(key, Fraction(0)) + 1
    return _tensor_sum_raw(2, terms)


def _floor_assignments(t: Tree):
    """All valid floor functions on the edges of t.

    A floor function is nondecreasing from the root outwards, bounded by
    the height of each edge's upper vertex, and its image restricted to
    every root-to-leaf path is an integer interval starting at 0 or 1
    (the lowest floor may be empty).  Equivalently, floors are maximal
    runs of edges along each path: an edge sits either on its parent
    edge's floor or on the next one, and a root edge sits on floor 0 or 1.
    There are exactly 2^(edge count) of them, matching the subforests.
    """
    parents = parent_vector(t)
    n = len(parents)
    e = n - 1
    if e == 0:
        return
    assignment = [0] * e

    def rec(j: int):
        # edge j sits above vertex j+1; its parent edge is that of parents[j+1]
        if j == e:
            yield tuple(assignment)
            return
        v = j + 1
        pv = parents[v]
        lower = assignment[pv - 1] if pv >= 1 else 0
        for val in (lower, lower + 1):
            assignment[j] = val
            yield from rec(j + 1)

    yield from rec(0)


def floored_coproduct(t: Tree) -> TensorSum:
    """Edge-graded coproduct of a tree assembled from floor functions.

    For each valid floor function the edges on even-numbered floors form
    the left subforest and the tree is contracted along them on the right.
    Agrees with the subforest expansion and specializes to the corolla
    binomial formula.
    """
    if t.vertices == 1:
        return _tensor_sum_raw(2, {(BULLET_FOREST, BULLET_FOREST): Fraction(1)})
    terms: dict[tuple[Forest, Forest], Fraction] = {}
    for fl in _floor_assignments(t):
        mask = 0
        for j, val in enumerate(fl):
            if val % 2 == 0:
                mask |= 1 << j
        comps, _, contraction = _edge_components_and_contraction(t, mask)
        left = Forest(comps) if comps else BULLET_FOREST
        key = (left, single(contraction))
        terms[key] = terms.get(key, Fraction(0)) + 1
    return _tensor_sum_raw(2, terms)
