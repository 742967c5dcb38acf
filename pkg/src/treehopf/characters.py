"""Convolution algebras of truncated functionals, named characters, the
edge-graded coactions on the vertex-graded forest algebra, and the
backward-error-analysis map omega.

The convolution of two functionals pairs them through a coproduct variant:
(f ⋆ g)(s) sums f(left)·g(right) over the coproduct terms of s.  Connected
gradedness makes exp and log of the convolution finite sums degree by
degree.

The two dual sides interact through the coactions Phi and Psi, which read
the edge-graded coproduct of a tree inside mixed tensor spaces.  Acting
with the inverse L of the tree-factorial character E through Phi produces
the same functional as the convolution logarithm of the Euler character
delta; ``omega`` computes both and cross-checks them.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial as _ifactorial

from .hopf import (
    UnsupportedCombination,
    antipode,
    coproduct,
    forest_product,
    unit_forest,
)
from .linalg import (
    ForestSum,
    Functional,
    GradingError,
    TensorSum,
    apply_functional,
    character_from_tree_values,
    delta_basis,
    functionals_equal,
    _forest_sum_raw,
    _tensor_sum_raw,
)
from .trees import (
    BULLET_FOREST,
    EMPTY_FOREST,
    LEAF,
    Forest,
    Tree,
    enumerate_forests,
    forest_sigma,
    h_normalize,
    single,
    tree_factorial,
    tree_sigma,
    trees_with_vertices,
)

__all__ = [
    "ConvolutionContext",
    "InternalCheckError",
    "bernoulli",
    "convolve",
    "exp_star",
    "log_star",
    "convolution_inverse",
    "named_character",
    "coaction_phi",
    "coaction_psi",
    "t_L",
    "star_action",
    "correspond",
    "omega",
    "verify_theorem_comp",
    "TheoremReport",
]


class InternalCheckError(RuntimeError):
    """A built-in cross-check of two independent pipelines failed."""


_CTX_GRADING = {"H": "edge", "H_sigma": "edge", "Htilde": "vertex", "CK": "vertex"}


@dataclass(frozen=True)
class ConvolutionContext:
    """Selects the coproduct driving a convolution and its truncation."""

    algebra: str
    max_degree: int

    def __post_init__(self):
        if self.algebra not in _CTX_GRADING:
            raise ValueError(f"unknown convolution algebra {self.algebra!r}")

    @property
    def grading(self) -> str:
        return _CTX_GRADING[self.algebra]

    @property
    def functional_algebra(self) -> str:
        return "H" if self.algebra == "H_sigma" else self.algebra

    def unit(self) -> Functional:
        return Functional.unit(self.functional_algebra, self.max_degree)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers from the defining series x/(e^x - 1); B_1 = -1/2."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return Fraction(1)
    acc = Fraction(0)
    for j in range(n):
        acc += comb(n + 1, j) * bernoulli(j)
    return -acc / (n + 1)


def convolve(f: Functional, g: Functional, ctx: ConvolutionContext) -> Functional:
    """(f ⋆ g)(s) = sum of f(s1)·g(s2) over the context's coproduct of s."""
    if f.grading != ctx.grading or g.grading != ctx.grading:
        raise GradingError(
            f"convolution in {ctx.algebra} needs {ctx.grading}-graded functionals"
        )
    md = min(f.max_degree, g.max_degree, ctx.max_degree)

    def rule(s: Forest) -> Fraction:
        out = Fraction(0)
        for (left, right), c in coproduct(s, ctx.algebra).items():
            out += c * f(left) * g(right)
        return out

    kind = "character" if f.kind == g.kind == "character" else "generic"
    if kind == "character":
        return Functional(
            ctx.functional_algebra,
            "character",
            md,
            tree_rule=lambda t: rule(single(t)),
            name=f"({f.name}⋆{g.name})",
        )
    return Functional.from_rule(
        ctx.functional_algebra, rule, md, name=f"({f.name}⋆{g.name})"
    )


def _nilpotency_degree(s: Forest, ctx: ConvolutionContext) -> int:
    # the k-th power of a counit-free functional vanishes past this grade
    return s.edges if ctx.grading == "edge" or ctx.algebra == "Htilde" else s.vertices


def _check_bullet_free(f: Functional, ctx: ConvolutionContext, value: Fraction) -> None:
    """For the spanning-subforest bialgebra the grade-0 part is spanned by
    all pure single-vertex forests; exp/log need the argument constant
    there."""
    if ctx.algebra != "Htilde":
        return
    forest = EMPTY_FOREST
    for k in range(ctx.max_degree + 1):
        if f(forest) != value:
            raise ValueError(
                "exp/log over the spanning-subforest coproduct need the "
                f"argument to equal {value} on single-vertex forests"
            )
        forest = forest * BULLET_FOREST


def exp_star(f: Functional, ctx: ConvolutionContext) -> Functional:
    """Truncated convolution exponential of a unit-free functional."""
    unit = ctx.unit()
    if f(unit.unit_forest) != 0:
        raise ValueError("exp needs f(unit) = 0")
    _check_bullet_free(f, ctx, Fraction(0))
    md = min(f.max_degree, ctx.max_degree)
    powers: list[Functional] = [ctx.unit(), f]

    def rule(s: Forest) -> Fraction:
        bound = _nilpotency_degree(s, ctx)
        while len(powers) <= bound:
            powers.append(convolve(powers[-1], f, ctx))
        out = Fraction(0)
        for k in range(bound + 1):
            out += powers[k](s) / _ifactorial(k)
        return out

    kind = "character" if f.kind == "infinitesimal" else "generic"
    if kind == "character":
        return Functional(
            ctx.functional_algebra,
            "character",
            md,
            tree_rule=lambda t: rule(single(t)),
            name=f"exp*({f.name})",
        )
    return Functional.from_rule(ctx.functional_algebra, rule, md, name=f"exp*({f.name})")


def log_star(g: Functional, ctx: ConvolutionContext) -> Functional:
    """Truncated convolution logarithm of a unit-preserving functional."""
    unit = ctx.unit()
    if g(unit.unit_forest) != 1:
        raise ValueError("log needs g(unit) = 1")
    _check_bullet_free(g, ctx, Fraction(1))
    md = min(g.max_degree, ctx.max_degree)
    h = Functional.from_rule(
        g.algebra, lambda s: g(s) - unit(s), md, name=f"({g.name}-e)"
    )
    powers: list[Functional] = [ctx.unit(), h]

    def rule(s: Forest) -> Fraction:
        bound = _nilpotency_degree(s, ctx)
        while len(powers) <= bound:
            powers.append(convolve(powers[-1], h, ctx))
        out = Fraction(0)
        for k in range(1, bound + 1):
            out += Fraction((-1) ** (k + 1), k) * powers[k](s)
        return out

    kind = "infinitesimal" if g.kind == "character" else "generic"
    if kind == "infinitesimal":
        return Functional(
            ctx.functional_algebra,
            "infinitesimal",
            md,
            tree_rule=lambda t: rule(single(t)),
            name=f"log*({g.name})",
        )
    return Functional.from_rule(ctx.functional_algebra, rule, md, name=f"log*({g.name})")


def convolution_inverse(f: Functional, ctx: ConvolutionContext) -> Functional:
    """Inverse of a character by composition with the antipode."""
    if f.kind != "character":
        raise ValueError("convolution_inverse is implemented for characters")
    if ctx.algebra == "Htilde":
        raise UnsupportedCombination(
            "the spanning-subforest bialgebra characters form a monoid only"
        )
    variant = ctx.algebra if ctx.algebra in ("H", "H_sigma", "CK") else "H"
    md = min(f.max_degree, ctx.max_degree)

    def tree_rule(t: Tree) -> Fraction:
        return apply_functional(f, antipode(single(t), variant))

    return Functional(
        ctx.functional_algebra,
        "character",
        md,
        tree_rule=tree_rule,
        name=f"{f.name}^-1",
    )


# ---------------------------------------------------------------------------
# Named characters


def named_character(name: str, max_degree: int) -> Functional:
    """The library's distinguished characters.

    ``E``       edge-graded character 1/(tree factorial)
    ``E_sigma`` edge-graded character 1/(tree factorial · symmetry factor)
    ``L``       inverse of E (composition with the antipode)
    ``L_sigma`` inverse of E_sigma for the rescaled coproduct
    ``delta``   vertex-graded character: 1 on the single vertex, else 0
    ``eps``     the vertex-graded counit
    ``delta_bullet`` the dual-basis infinitesimal character of the single
    vertex
    """
    if name == "E":
        return Functional(
            "H",
            "character",
            max_degree,
            tree_rule=lambda t: Fraction(1, tree_factorial(t)),
            name="E",
        )
    if name == "E_sigma":
        return Functional(
            "H",
            "character",
            max_degree,
            tree_rule=lambda t: Fraction(1, tree_factorial(t) * tree_sigma(t)),
            name="E_sigma",
        )
    if name == "L":
        E = named_character("E", max_degree)
        return Functional(
            "H",
            "character",
            max_degree,
            tree_rule=lambda t: apply_functional(E, antipode(single(t), "H")),
            name="L",
        )
    if name == "L_sigma":
        E_sigma = named_character("E_sigma", max_degree)
        return Functional(
            "H",
            "character",
            max_degree,
            tree_rule=lambda t: apply_functional(
                E_sigma, antipode(single(t), "H_sigma")
            ),
            name="L_sigma",
        )
    if name == "delta":
        return Functional(
            "CK",
            "character",
            max_degree,
            tree_rule=lambda t: Fraction(1 if t == LEAF else 0),
            name="delta",
        )
    if name == "eps":
        return Functional(
            "CK", "character", max_degree, tree_rule=lambda t: Fraction(0), name="eps"
        )
    if name == "delta_bullet":
        return Functional(
            "CK",
            "infinitesimal",
            max_degree,
            tree_values={LEAF: Fraction(1)},
            tree_rule=lambda t: Fraction(0),
            name="delta_bullet",
        )
    raise ValueError(f"unknown character name {name!r}")


# ---------------------------------------------------------------------------
# Coactions


def _phi_leg_products(flavor: str):
    if flavor == "H":
        left = lambda a, b: forest_product(a, b, "H")
        right = lambda a, b: a * b
    elif flavor == "Htilde":
        left = lambda a, b: a * b
        right = lambda a, b: a * b
    else:
        raise ValueError(f"unknown coaction flavor {flavor!r}")
    return left, right


def coaction_phi(x: Forest, flavor: str = "H") -> TensorSum:
    """Left coaction on the vertex-graded forest algebra.

    On a nonempty tree this is the edge-graded coproduct read inside
    (edge-graded) ⊗ (vertex-graded); it extends to forests as an algebra
    morphism.  The empty forest maps to unit ⊗ empty.  In the "Htilde"
    flavor the spanning-subforest coproduct is used instead and the left
    leg keeps its single-vertex components.
    """
    left_mul, right_mul = _phi_leg_products(flavor)
    variant = "H" if flavor == "H" else "Htilde"
    if flavor == "H":
        acc: dict[tuple[Forest, Forest], Fraction] = {
            (BULLET_FOREST, EMPTY_FOREST): Fraction(1)
        }
    else:
        acc = {(EMPTY_FOREST, EMPTY_FOREST): Fraction(1)}
    for t in x.trees:
        tree_terms = coproduct(single(t), variant).terms
        nxt: dict[tuple[Forest, Forest], Fraction] = {}
        for (l1, r1), c1 in acc.items():
            for (l2, r2), c2 in tree_terms.items():
                key = (left_mul(l1, l2), right_mul(r1, r2))
                c = nxt.get(key, Fraction(0)) + c1 * c2
                if c:
                    nxt[key] = c
                elif key in nxt:
                    del nxt[key]
        acc = nxt
    return _tensor_sum_raw(2, acc)


def coaction_psi(x: Forest, flavor: str = "H") -> TensorSum:
    """Right coaction: the mirror of :func:`coaction_phi`.

    The subforest leg is now read in the vertex-graded algebra (so the
    trivial subforest contributes honest single-vertex components) and the
    contraction leg in the edge-graded one.  The empty forest maps to
    empty ⊗ unit.
    """
    variant = "H" if flavor == "H" else "Htilde"
    if flavor == "H":
        left_mul = lambda a, b: a * b
        right_mul = lambda a, b: forest_product(a, b, "H")
        acc: dict[tuple[Forest, Forest], Fraction] = {
            (EMPTY_FOREST, BULLET_FOREST): Fraction(1)
        }
    else:
        left_mul = lambda a, b: a * b
        right_mul = lambda a, b: a * b
        acc = {(EMPTY_FOREST, EMPTY_FOREST): Fraction(1)}
    for t in x.trees:
        tree_terms = coproduct(single(t), variant).terms
        nxt: dict[tuple[Forest, Forest], Fraction] = {}
        for (l1, r1), c1 in acc.items():
            for (l2, r2), c2 in tree_terms.items():
                key = (left_mul(l1, l2), right_mul(r1, r2))
                c = nxt.get(key, Fraction(0)) + c1 * c2
                if c:
                    nxt[key] = c
                elif key in nxt:
                    del nxt[key]
        acc = nxt
    return _tensor_sum_raw(2, acc)


def t_L(a: Functional, x: Forest) -> ForestSum:
    """The transposed left-multiplication operator: pair a against the
    subforest leg of the left coaction of x."""
    flavor = "H" if a.grading == "edge" else "Htilde"
    out: dict[Forest, Fraction] = {}
    for (left, right), c in coaction_phi(x, flavor).items():
        val = c * a(left)
        if not val:
            continue
        c2 = out.get(right, Fraction(0)) + val
        if c2:
            out[right] = c2
        elif right in out:
            del out[right]
    return _forest_sum_raw(out)


def star_action(a: Functional, b: Functional, side: str = "left") -> Functional:
    """Action of an edge-graded functional on a vertex-graded one.

    ``left``: (a ⋆ b)(x) pairs a with the subforest leg of Phi; ``right``
    pairs it with the contraction leg of Psi.  The flavor follows a's
    algebra ("H" or "Htilde").
    """
    if b.algebra not in ("CK", "Htilde"):
        raise GradingError("star_action acts on vertex-graded functionals")
    flavor = "H" if a.algebra == "H" else "Htilde"
    if flavor == "H":
        md = min(b.max_degree, a.max_degree + 1)
    else:
        md = min(b.max_degree, a.max_degree)

    if side == "left":

        def rule(x: Forest) -> Fraction:
            out = Fraction(0)
            for (left, right), c in coaction_phi(x, flavor).items():
                out += c * a(left) * b(right)
            return out

    elif side == "right":

        def rule(x: Forest) -> Fraction:
            out = Fraction(0)
            for (left, right), c in coaction_psi(x, flavor).items():
                out += c * b(left) * a(right)
            return out

    else:
        raise ValueError(f"unknown side {side!r}")

    if a.kind == "character" and b.kind == "character":
        kind = "character"
    elif a.kind == "character" and b.kind == "infinitesimal":
        kind = "infinitesimal"
    else:
        kind = "generic"
    name = f"({a.name}⋆{b.name})" if side == "left" else f"({b.name}⋆{a.name})"
    if kind == "generic":
        return Functional.from_rule("CK", rule, md, name=name)
    return Functional(
        "CK", kind, md, tree_rule=lambda t: rule(single(t)), name=name
    )


def correspond(phi: Functional, mode: str) -> Functional:
    """Transport a character of the edge-graded (or spanning-subforest)
    algebra to the vertex-graded side.

    ``infinitesimal`` returns phi ⋆ delta_bullet, the infinitesimal
    character agreeing with phi on nonempty trees; ``character`` returns
    phi ⋆ delta, the character doing the same.
    """
    if phi.kind != "character":
        raise ValueError("correspond expects a character")
    md = phi.max_degree + 1 if phi.algebra == "H" else phi.max_degree
    if mode == "infinitesimal":
        return star_action(phi, named_character("delta_bullet", md), "left")
    if mode == "character":
        return star_action(phi, named_character("delta", md), "left")
    raise ValueError(f"unknown correspondence mode {mode!r}")


def omega(max_degree: int) -> Functional:
    """The backward-error-analysis coefficients as an infinitesimal
    character of the vertex-graded algebra.

    Computed twice, through two independent pipelines: the inverse of the
    tree-factorial character acting through the left coaction, and the
    convolution logarithm of the Euler character.  A mismatch raises
    :class:`InternalCheckError`.
    """
    L = named_character("L", max_degree)
    via_action = star_action(L, named_character("delta_bullet", max_degree), "left")
    ctx = ConvolutionContext("CK", max_degree)
    via_log = log_star(named_character("delta", max_degree), ctx)
    for f in enumerate_forests(max_degree, "CK"):
        if via_action(f) != via_log(f):
            raise InternalCheckError(
                f"omega pipelines disagree on {f.encoding}: "
                f"{via_action(f)} vs {via_log(f)}"
            )
    return Functional(
        "CK",
        "infinitesimal",
        max_degree,
        tree_rule=lambda t: via_action(single(t)),
        name="omega",
    )


# ---------------------------------------------------------------------------
# The mixed-coaction identity


@dataclass
class TheoremReport:
    name: str
    passed: bool
    failures: list[str]


def _ck_coproduct_on_sum(fs: ForestSum) -> TensorSum:
    out: dict[tuple[Forest, Forest], Fraction] = {}
    for f, c in fs.items():
        for key, c2 in coproduct(f, "CK").items():
            cv = out.get(key, Fraction(0)) + c * c2
            if cv:
                out[key] = cv
            elif key in out:
                del out[key]
    return _tensor_sum_raw(2, out)


def verify_theorem_comp(max_edges: int, flavor: str = "H") -> TheoremReport:
    """Check the mixed identity (id ⊗ Δ_CK)∘Φ = m13∘(Φ⊗Φ)∘Δ_CK on all
    trees with at most ``max_edges`` edges, plus the coderivation identity
    for the transposed operators of the dual-basis infinitesimal
    characters."""
    failures: list[str] = []
    trees = [
        t for v in range(1, max_edges + 2) for t in trees_with_vertices(v)
    ]
    h_mul = (
        (lambda a, b: forest_product(a, b, "H"))
        if flavor == "H"
        else (lambda a, b: a * b)
    )
    for t in trees:
        x = single(t)
        lhs: dict[tuple[Forest, Forest, Forest], Fraction] = {}
        for (s, y), c in coaction_phi(x, flavor).items():
            for (p, r), c2 in coproduct(y, "CK").items():
                key = (s, p, r)
                cv = lhs.get(key, Fraction(0)) + c * c2
                if cv:
                    lhs[key] = cv
                elif key in lhs:
                    del lhs[key]
        rhs: dict[tuple[Forest, Forest, Forest], Fraction] = {}
        for (p, r), c in coproduct(x, "CK").items():
            for (a1, b1), ca in coaction_phi(p, flavor).items():
                for (a2, b2), cb in coaction_phi(r, flavor).items():
                    key = (h_mul(a1, a2), b1, b2)
                    cv = rhs.get(key, Fraction(0)) + c * ca * cb
                    if cv:
                        rhs[key] = cv
                    elif key in rhs:
                        del rhs[key]
        if lhs != rhs:
            failures.append(f"mixed identity fails on {t.encoding}")

    # coderivation corollary for a = dual basis of a single tree: the
    # vertex coproduct intertwines tL_a with tL_a ⊗ id + id ⊗ tL_a
    samples = [t for v in (2, 3) for t in trees_with_vertices(v)]
    max_v = max_edges + 1
    check_forests = [f for f in enumerate_forests(min(max_v, 4), "CK")]
    for a_tree in samples:
        a = delta_basis(single(a_tree), "H" if flavor == "H" else "Htilde", max_edges + 1)
        for x in check_forests:
            lhs_t = _ck_coproduct_on_sum(t_L(a, x))
            rhs_terms: dict[tuple[Forest, Forest], Fraction] = {}
            for (p, r), c in coproduct(x, "CK").items():
                for side_first in (True, False):
                    if side_first:
                        part = t_L(a, p)
                        for f2, c2 in part.items():
                            key = (f2, r)
                            cv = rhs_terms.get(key, Fraction(0)) + c * c2
                            if cv:
                                rhs_terms[key] = cv
                            elif key in rhs_terms:
                                del rhs_terms[key]
                    else:
                        part = t_L(a, r)
                        for f2, c2 in part.items():
                            key = (p, f2)
                            cv = rhs_terms.get(key, Fraction(0)) + c * c2
                            if cv:
                                rhs_terms[key] = cv
                            elif key in rhs_terms:
                                del rhs_terms[key]
            if lhs_t != _tensor_sum_raw(2, rhs_terms):
                failures.append(
                    f"coderivation fails for a={a_tree.encoding} on {x.encoding}"
                )
    return TheoremReport("thm-comp", not failures, failures)
