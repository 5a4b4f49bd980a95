"""Polynomial vector fields, differential forms, and the negative nilpotent frames.

Vector fields are stored as one WeightedPoly coefficient per chart variable.
Differential forms map strictly increasing index tuples to WeightedPoly
coefficients.  Exterior derivative, contraction, Lie derivative, and brackets
use the standard coordinate formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import expr as ex
from . import wpoly as wp
from .expr import Expr, ZERO
from .weights import WeightSequence, weighted_degree
from .wpoly import WeightedPoly


@dataclass(frozen=True)
class PolyVectorField:
    vars: tuple[str, ...]
    coeffs: tuple[WeightedPoly, ...]

    def __post_init__(self):
        if len(self.vars) != len(self.coeffs):
            raise ValueError("one coefficient per variable required")

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coeffs)

    def coeff_exprs(self) -> tuple[Expr, ...]:
        return tuple(wp.to_expr(c) for c in self.coeffs)

    def __str__(self):
        parts = [f"({wp.wpoly_text(c)}) d/d[{v}]"
                 for v, c in zip(self.vars, self.coeffs) if not c.is_zero]
        return " + ".join(parts) if parts else "0"


def vf_from_exprs(chart: Sequence[str], coeff_exprs: Sequence[Expr],
                  positive_vars: Sequence[str]) -> PolyVectorField:
    chart = tuple(chart)
    return PolyVectorField(chart, tuple(
        wp.poly_normal_form(ex.as_expr(c), positive_vars) for c in coeff_exprs))


def vf_for_weights(W: WeightSequence, coeff_exprs: Sequence[Expr]) -> PolyVectorField:
    return vf_from_exprs(W.vars, coeff_exprs, W.positive_vars)


def coordinate_field(W: WeightSequence, name: str) -> PolyVectorField:
    coeffs = [ex.ONE if v == name else ZERO for v in W.vars]
    return vf_for_weights(W, coeffs)


def euler_field(W: WeightSequence) -> PolyVectorField:
    return vf_for_weights(W, [ex.mul(ex.const(w), ex.var(v))
                              for v, w in zip(W.vars, W.weights)])


def vf_filtration_degree(X: PolyVectorField, W: WeightSequence) -> int:
    """min_a (deg f_a - w_a), clamped below at -r.  Errors on the zero field."""
    if X.is_zero:
        raise ValueError("zero vector field has no filtration degree")
    best = math.inf
    for v, c in zip(X.vars, X.coeffs):
        if c.is_zero:
            continue
        best = min(best, wp.filtration_degree(c, W) - W.weight_of(v))
    return max(-W.order, int(best))


def homogeneous_approx_vf(X: PolyVectorField, W: WeightSequence,
                          degree: int) -> PolyVectorField:
    if vf_filtration_degree(X, W) < degree:
        raise ValueError(f"vector field has filtration degree below {degree}")
    return PolyVectorField(X.vars, tuple(
        wp.homogeneous_part(c, W, degree + W.weight_of(v))
        for v, c in zip(X.vars, X.coeffs)))


def vf_apply(X: PolyVectorField, p: WeightedPoly) -> WeightedPoly:
    out = wp.wp_zero(p.pvars)
    for v, c in zip(X.vars, X.coeffs):
        dp = wp.partial(p, v)
        if dp.is_zero or c.is_zero:
            continue
        out = wp.wp_add(out, wp.wp_mul(c, dp))
    return out


def vf_apply_expr(chart: Sequence[str], coeff_exprs: Sequence[Expr], f: Expr) -> Expr:
    return ex.add(*[ex.mul(c, ex.differentiate(f, v))
                    for v, c in zip(chart, coeff_exprs)], ZERO)


def lie_bracket(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    if X.vars != Y.vars:
        raise ValueError("vector fields live on different charts")
    coeffs = tuple(wp.wp_add(vf_apply(X, yc), wp.wp_scale(vf_apply(Y, xc), -1))
                   for xc, yc in zip(X.coeffs, Y.coeffs))
    return PolyVectorField(X.vars, coeffs)


def vf_equal(X: PolyVectorField, Y: PolyVectorField) -> bool:
    return X.vars == Y.vars and X.coeffs == Y.coeffs


# ---------------------------------------------------------------------------
# differential forms

@dataclass(frozen=True)
class DifferentialFormPoly:
    vars: tuple[str, ...]
    degree: int
    terms: tuple[tuple[tuple[int, ...], WeightedPoly], ...]

    def __post_init__(self):
        for idx, c in self.terms:
            if len(idx) != self.degree:
                raise ValueError("index tuple length must equal form degree")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError("index tuples must be strictly increasing")

    @property
    def is_zero(self) -> bool:
        return not self.terms


def form(vars: Sequence[str], degree: int,
         terms: dict[tuple[int, ...], WeightedPoly]) -> DifferentialFormPoly:
    cleaned = [(idx, c) for idx, c in terms.items() if not c.is_zero]
    cleaned.sort(key=lambda item: item[0])
    return DifferentialFormPoly(tuple(vars), degree, tuple(cleaned))


def form_add(*forms_: DifferentialFormPoly) -> DifferentialFormPoly:
    base = forms_[0]
    acc: dict[tuple[int, ...], WeightedPoly] = {}
    for a in forms_:
        if a.degree != base.degree or a.vars != base.vars:
            raise ValueError("cannot add forms of different type")
        for idx, c in a.terms:
            acc[idx] = wp.wp_add(acc[idx], c) if idx in acc else c
    return form(base.vars, base.degree, acc)


def d_poly(p: WeightedPoly, vars: Sequence[str]) -> DifferentialFormPoly:
    """Exterior derivative of a function, as a 1-form over the chart."""
    vars = tuple(vars)
    acc: dict[tuple[int, ...], WeightedPoly] = {}
    for a, v in enumerate(vars):
        dp = wp.partial(p, v)
        if not dp.is_zero:
            acc[(a,)] = dp
    return form(vars, 1, acc)


def d_form(alpha: DifferentialFormPoly) -> DifferentialFormPoly:
    acc: dict[tuple[int, ...], WeightedPoly] = {}
    for idx, c in alpha.terms:
        for a, v in enumerate(alpha.vars):
            if a in idx:
                continue
            dc = wp.partial(c, v)
            if dc.is_zero:
                continue
            pos = sum(1 for b in idx if b < a)
            new_idx = tuple(sorted(idx + (a,)))
            signed = dc if pos % 2 == 0 else wp.wp_scale(dc, -1)
            acc[new_idx] = wp.wp_add(acc[new_idx], signed) if new_idx in acc else signed
    return form(alpha.vars, alpha.degree + 1, acc)


def contract(X: PolyVectorField, alpha: DifferentialFormPoly) -> DifferentialFormPoly:
    if alpha.degree == 0:
        raise ValueError("cannot contract a 0-form")
    acc: dict[tuple[int, ...], WeightedPoly] = {}
    for idx, c in alpha.terms:
        for pos, a in enumerate(idx):
            xa = X.coeffs[a]
            if xa.is_zero:
                continue
            rest = idx[:pos] + idx[pos + 1:]
            piece = wp.wp_mul(xa, c)
            if pos % 2 == 1:
                piece = wp.wp_scale(piece, -1)
            acc[rest] = wp.wp_add(acc[rest], piece) if rest in acc else piece
    return form(alpha.vars, alpha.degree - 1, acc)


def lie_derivative_form(X: PolyVectorField,
                        alpha: DifferentialFormPoly) -> DifferentialFormPoly:
    if alpha.degree == 0:
        raise ValueError("use vf_apply for functions")
    return form_add(d_form(contract(X, alpha)), contract(X, d_form(alpha)))


def form_filtration_degree(alpha: DifferentialFormPoly, W: WeightSequence):
    """min over terms of (coefficient degree + sum of the slot weights)."""
    if alpha.is_zero:
        raise ValueError("zero form has no filtration degree")
    best = math.inf
    for idx, c in alpha.terms:
        shift = sum(W.weight_of(alpha.vars[a]) for a in idx)
        best = min(best, wp.filtration_degree(c, W) + shift)
    return int(best)


# ---------------------------------------------------------------------------
# nilpotent frames of negative polynomial vector fields on the graded model

@dataclass(frozen=True)
class GradedLieAlgebra:
    """Structure constants for the bundle of negative polynomial fields.

    Basis labels are pairs (s, a): the monomial exponent vector s over the
    positive-weight variables and the index a of the coordinate direction,
    subject to s.w - w_a < 0.  The subalgebra marker selects labels with
    s != 0 (fields vanishing on the base).
    """

    W: WeightSequence
    basis: tuple[tuple[tuple[int, ...], int], ...]
    degrees: tuple[int, ...]
    in_subalgebra: tuple[bool, ...]
    brackets: tuple[tuple[tuple[int, int], tuple[tuple[int, Fraction], ...]], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def dim_sub(self) -> int:
        return sum(self.in_subalgebra)

    def bracket_table(self) -> dict[tuple[int, int], dict[int, Fraction]]:
        return {key: dict(val) for key, val in self.brackets}

    def label_text(self, index: int) -> str:
        s, a = self.basis[index]
        mono = wp.monomial_text(self.W.positive_vars, s)
        head = f"d/d[{self.W.vars[a]}]"
        return f"{mono} {head}" if mono else head


def _bracket_labels(W: WeightSequence, s: tuple[int, ...], a: int,
                    u: tuple[int, ...], b: int) -> dict:
    """[x^s d_a, x^u d_b] expanded over monomial-field labels."""
    pvars = W.positive_vars
    out: dict[tuple[tuple[int, ...], int], Fraction] = {}

    def accumulate(coeff: int, exps: tuple[int, ...], direction: int):
        if coeff == 0:
            return
        key = (exps, direction)
        out[key] = out.get(key, Fraction(0)) + coeff
        if out[key] == 0:
            del out[key]

    a_pos = pvars.index(W.vars[a]) if W.vars[a] in pvars else None
    b_pos = pvars.index(W.vars[b]) if W.vars[b] in pvars else None
    if a_pos is not None and u[a_pos] > 0:
        exps = tuple(x + y for x, y in zip(s, u))
        exps = exps[:a_pos] + (exps[a_pos] - 1,) + exps[a_pos + 1:]
        accumulate(u[a_pos], exps, b)
    if b_pos is not None and s[b_pos] > 0:
        exps = tuple(x + y for x, y in zip(s, u))
        exps = exps[:b_pos] + (exps[b_pos] - 1,) + exps[b_pos + 1:]
        accumulate(-s[b_pos], exps, a)
    return out


def nilpotent_frames(W: WeightSequence) -> GradedLieAlgebra:
    """Monomial frame of the negative graded fields, with exact brackets."""
    pvars = W.positive_vars
    pw = list(W.positive_weights)
    labels: list[tuple[tuple[int, ...], int]] = []
    for a, name in enumerate(W.vars):
        wa = W.weights[a]
        if wa == 0:
            continue

        def walk(prefix: list[int], pos: int, total: int):
            if total >= wa:
                return
            if pos == len(pvars):
                labels.append((tuple(prefix), a))
                return
            s = 0
            while total + s * pw[pos] < wa:
                walk(prefix + [s], pos + 1, total + s * pw[pos])
                s += 1

        walk([], 0, 0)
    labels.sort(key=lambda lab: (weighted_degree(lab[0], pw) - W.weights[lab[1]],
                                 lab[1], lab[0]))
    index = {lab: i for i, lab in enumerate(labels)}
    degrees = tuple(weighted_degree(s, pw) - W.weights[a] for s, a in labels)
    in_sub = tuple(any(s) for s, _ in labels)
    brackets = []
    for i, (s, a) in enumerate(labels):
        for j, (u, b) in enumerate(labels):
            if i >= j:
                continue
            expanded = _bracket_labels(W, s, a, u, b)
            entries = tuple(sorted((index[lab], coeff)
                                   for lab, coeff in expanded.items()))
            if entries:
                brackets.append(((i, j), entries))
    return GradedLieAlgebra(W, tuple(labels), degrees, in_sub, tuple(brackets))


def gla_bracket(g: GradedLieAlgebra, x: dict[int, Fraction],
                y: dict[int, Fraction]) -> dict[int, Fraction]:
    """Bracket of coefficient vectors over the frame, for property checks."""
    table = g.bracket_table()
    out: dict[int, Fraction] = {}
    for i, ci in x.items():
        for j, cj in y.items():
            if i == j:
                continue
            sign = 1
            key = (i, j)
            if i > j:
                key = (j, i)
                sign = -1
            for k, c in table.get(key, {}).items():
                out[k] = out.get(k, Fraction(0)) + sign * ci * cj * c
    return {k: v for k, v in out.items() if v != 0}
