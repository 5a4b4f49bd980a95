"""Chart-level geometry: graded transitions, deformation interpolants, the
scaling field, blow-up charts, and the numeric order estimator.

Deformation-space coordinates are named positionally y1..yn plus t, blow-up
chart coordinates z1..zn plus t.  The interpolant of a function f of
weighted degree at least i is

    sum_s  t^(s.w - i) * chi_s(y_0) * y^s

which restricts to f (with x_a renamed to y_a) at t = 1 and to the
homogeneous degree-i component at t = 0.  Only functions polynomial in the
positive-weight variables are accepted; weight-zero dependence stays
symbolic in the coefficients.

Blow-up charts carry monomials with rational exponents, printed in the
style y2^(-1/2).  They are kept as formal monomial maps; the chain rule
d(y^q) = q y^(q-1) dy is applied formally.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import expr as ex
from . import wpoly as wp
from .expr import Expr, ZERO, ONE
from .fields import (PolyVectorField, euler_field, homogeneous_approx_vf,
                     vf_equal, vf_filtration_degree)
from .weights import WeightSequence, weighted_degree


def deformation_names(W: WeightSequence) -> tuple[str, ...]:
    return tuple(f"y{a + 1}" for a in range(W.n))


def chart_names(W: WeightSequence) -> tuple[str, ...]:
    return tuple(f"z{a + 1}" for a in range(W.n))


def _rename_map(W: WeightSequence, names: Sequence[str]) -> dict[str, Expr]:
    return {v: ex.var(name) for v, name in zip(W.vars, names)}


# ---------------------------------------------------------------------------
# morphisms and the graded transition

@dataclass(frozen=True)
class CoordinateChange:
    """Components of a chart map, expressions in the source variables."""

    source: WeightSequence
    target: WeightSequence
    components: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.components) != self.target.n:
            raise ValueError("one component per target variable required")


def coordinate_change(source: WeightSequence, target: WeightSequence,
                      components: Sequence[Expr]) -> CoordinateChange:
    return CoordinateChange(source, target,
                            tuple(ex.simplify_canonical(ex.as_expr(c))
                                  for c in components))


def check_morphism(phi: CoordinateChange) -> bool:
    """Each target coordinate must reach its target weight in the source."""
    for b, component in enumerate(phi.components):
        wb = phi.target.weights[b]
        if wb == 0:
            continue
        low = wp.weighted_taylor(component, phi.source, wb - 1)
        if not low.is_zero:
            return False
    return True


def nu_transition(phi: CoordinateChange) -> tuple[Expr, ...]:
    """Induced map of graded coordinates: the weight-w_b part per component.

    Components are returned as expressions in the positional graded
    coordinates y1..yn of the source.
    """
    if not check_morphism(phi):
        raise ValueError("chart map does not preserve the filtrations")
    names = deformation_names(phi.source)
    rename = _rename_map(phi.source, names)
    out = []
    for b, component in enumerate(phi.components):
        wb = phi.target.weights[b]
        part = wp.homogeneous_part(
            wp.weighted_taylor(component, phi.source, wb), phi.source, wb)
        out.append(ex.substitute(wp.to_expr(part), rename))
    return tuple(out)


def compose_transitions(outer: Sequence[Expr], inner: Sequence[Expr],
                        W_mid: WeightSequence) -> tuple[Expr, ...]:
    """Substitute one graded transition into another (both in y-names)."""
    names = deformation_names(W_mid)
    mapping = dict(zip(names, inner))
    return tuple(ex.substitute(c, mapping) for c in outer)


# ---------------------------------------------------------------------------
# deformation-space interpolants

@dataclass(frozen=True)
class DeformationFunction:
    weights: WeightSequence
    degree: int
    expression: Expr  # in y1..yn and t

    def at_t(self, value) -> Expr:
        return ex.substitute(self.expression, {"t": ex.const(value)})

    def __str__(self):
        return ex.to_text(self.expression)


def def_interpolant(f: Expr, degree: int, W: WeightSequence,
                    tname: str = "t") -> DeformationFunction:
    """The interpolant between f (t = 1) and its degree-`degree` part (t = 0)."""
    p = wp.poly_normal_form(ex.as_expr(f), W.positive_vars)
    names = deformation_names(W)
    rename = _rename_map(W, names)
    w = list(W.positive_weights)
    terms = []
    t = ex.var(tname)
    for s, c in p.terms:
        sw = weighted_degree(s, w)
        if sw < degree:
            raise ValueError(
                f"function has a term of weighted degree {sw} below {degree}")
        mono = ex.substitute(wp.monomial_expr(p.pvars, s), rename)
        terms.append(ex.mul(ex.pow_(t, sw - degree),
                            ex.substitute(c, rename), mono))
    return DeformationFunction(W, degree, ex.add(*terms, ZERO))


@dataclass(frozen=True)
class DeformationField:
    """Vector field on the deformation chart: name -> coefficient."""

    weights: WeightSequence
    degree: int
    components: tuple[tuple[str, Expr], ...]

    def coefficient(self, name: str) -> Expr:
        for n, c in self.components:
            if n == name:
                return c
        return ZERO

    def apply(self, f: Expr) -> Expr:
        return ex.add(*[ex.mul(c, ex.differentiate(f, n))
                        for n, c in self.components], ZERO)

    def __str__(self):
        parts = [f"({ex.to_text(c)}) d/d[{n}]" for n, c in self.components]
        return " + ".join(parts) if parts else "0"


def _def_field(W: WeightSequence, degree: int,
               comps: Mapping[str, Expr]) -> DeformationField:
    cleaned = [(n, ex.simplify_canonical(c)) for n, c in comps.items()]
    cleaned = [(n, c) for n, c in cleaned if c != ZERO]
    cleaned.sort(key=lambda item: item[0])
    return DeformationField(W, degree, tuple(cleaned))


def def_vf_interpolant(X: PolyVectorField, degree: int, W: WeightSequence,
                       tname: str = "t") -> DeformationField:
    """Extension of t^(-degree) X to the deformation chart."""
    if vf_filtration_degree(X, W) < degree:
        raise ValueError(f"vector field has filtration degree below {degree}")
    names = deformation_names(W)
    rename = _rename_map(W, names)
    w = list(W.positive_weights)
    t = ex.var(tname)
    comps: dict[str, Expr] = {}
    for a, coeff in enumerate(X.coeffs):
        if coeff.is_zero:
            continue
        shift = degree + W.weights[a]
        pieces = []
        for s, c in coeff.terms:
            sw = weighted_degree(s, w)
            mono = ex.substitute(wp.monomial_expr(coeff.pvars, s), rename)
            pieces.append(ex.mul(ex.pow_(t, sw - shift),
                                 ex.substitute(c, rename), mono))
        comps[names[a]] = ex.add(*pieces, ZERO)
    return _def_field(W, degree, comps)


def theta_field(W: WeightSequence, tname: str = "t") -> DeformationField:
    """The scaling generator t d/dt - sum w_a y_a d/dy_a."""
    names = deformation_names(W)
    comps: dict[str, Expr] = {tname: ex.var(tname)}
    for a, w in enumerate(W.weights):
        if w:
            comps[names[a]] = ex.mul(ex.const(-w), ex.var(names[a]))
    return _def_field(W, 0, comps)


def euler_like_check(X: PolyVectorField, W: WeightSequence) -> bool:
    """Degree 0 with degree-0 part equal to the weight scaling field."""
    if X.is_zero:
        return False
    if vf_filtration_degree(X, W) < 0:
        return False
    return vf_equal(homogeneous_approx_vf(X, W, 0), euler_field(W))


# ---------------------------------------------------------------------------
# numeric scaling-order estimation

@dataclass(frozen=True)
class ScalingReport:
    estimated_order: float
    residual: float
    samples: int
    base_point: tuple[Fraction, ...]


def scaling_order_estimate(f: Expr, W: WeightSequence,
                           base_point: Sequence | None = None,
                           t_grid: Sequence[float] | None = None,
                           seed: int = 0) -> ScalingReport:
    """Least-squares slope of log|f| along the weighted dilation.

    For polynomial input the slope recovers the filtration degree.  Zero
    samples trigger a resample of the base point, up to eight times.
    """
    if t_grid is None:
        t_grid = [2.0 ** (-k) for k in range(4, 13)]
    rng = random.Random(seed)

    def random_point() -> tuple[Fraction, ...]:
        return tuple(Fraction(rng.randint(8, 32), 16) for _ in range(W.n))

    attempts = 1 if base_point is not None else 8
    point = (tuple(Fraction(b) for b in base_point)
             if base_point is not None else random_point())
    for attempt in range(attempts):
        xs, ys = [], []
        degenerate = False
        for t in t_grid:
            assignment = {v: float(b) * (t ** w)
                          for v, w, b in zip(W.vars, W.weights, point)}
            value = ex.eval_numeric(f, assignment)
            if value == 0.0:
                degenerate = True
                break
            xs.append(math.log(t))
            ys.append(math.log(abs(value)))
        if not degenerate:
            n = len(xs)
            mean_x = sum(xs) / n
            mean_y = sum(ys) / n
            var_x = sum((x - mean_x) ** 2 for x in xs)
            cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
            slope = cov / var_x
            intercept = mean_y - slope * mean_x
            residual = math.sqrt(sum(
                (y - slope * x - intercept) ** 2
                for x, y in zip(xs, ys)) / n)
            return ScalingReport(slope, residual, n, point)
        point = random_point()
    raise ValueError("all samples vanish along the dilation "
                     "(degenerate direction)")


# ---------------------------------------------------------------------------
# blow-up charts with rational exponents

Exponents = tuple[tuple[str, Fraction], ...]


def _exps(mapping: Mapping[str, Fraction | int]) -> Exponents:
    return tuple(sorted((v, Fraction(q)) for v, q in mapping.items()
                        if Fraction(q) != 0))


@dataclass(frozen=True)
class RationalMonomialMap:
    """Chart map whose components are single monomials with rational exponents."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    components: tuple[tuple[str, tuple[Fraction, Exponents]], ...]
    sign: str = "+"

    def component(self, name: str) -> tuple[Fraction, Exponents]:
        for n, c in self.components:
            if n == name:
                return c
        raise KeyError(name)

    def __str__(self):
        return "; ".join(f"{n} = {monomial_text(c, m)}"
                         for n, (c, m) in self.components)


def monomial_text(coeff: Fraction, exps: Exponents) -> str:
    factors = []
    for v, q in exps:
        if q == 1:
            factors.append(v)
        elif q.denominator == 1 and q > 0:
            factors.append(f"{v}^{q}")
        else:
            factors.append(f"{v}^({q})")
    if not factors:
        return str(coeff)
    body = "*".join(factors)
    return body if coeff == 1 else f"{coeff}*{body}"


def rational_map(source: Sequence[str], target: Sequence[str],
                 components: Mapping[str, tuple[Fraction, Mapping]],
                 sign: str = "+") -> RationalMonomialMap:
    comps = tuple((n, (Fraction(c), _exps(m)))
                  for n, (c, m) in sorted(components.items()))
    return RationalMonomialMap(tuple(source), tuple(target), comps, sign)


def compose_rational(outer: RationalMonomialMap,
                     inner: RationalMonomialMap) -> RationalMonomialMap:
    """Substitute the inner map into the outer one (monomials compose)."""
    comps = {}
    for name, (c, exps) in outer.components:
        coeff = c
        acc: dict[str, Fraction] = {}
        for v, q in exps:
            ic, iexps = inner.component(v)
            if ic != 1:
                if q.denominator != 1:
                    raise ValueError(
                        "cannot raise a non-unit coefficient to a fractional "
                        "power in a chart composition")
                coeff *= ic ** q.numerator
            for iv, iq in iexps:
                acc[iv] = acc.get(iv, Fraction(0)) + q * iq
        comps[name] = (coeff, acc)
    return rational_map(inner.source, outer.target, comps, outer.sign)


def blowup_chart(W: WeightSequence, center: str,
                 sign: str = "+") -> RationalMonomialMap:
    """Chart of the weighted blow-up over the slice where +-y_c > 0.

    Maps deformation coordinates (y, t) to chart coordinates (z, t) with
    z_a = y_a y_c^(-w_a/w_c) away from the center index and
    z_c = t y_c^(1/w_c).
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    c = W.vars.index(center) if center in W.vars else -1
    if c < 0:
        raise KeyError(f"unknown variable {center!r}")
    wc = W.weights[c]
    if wc < 1:
        raise ValueError(f"variable {center!r} has weight 0 and is not a "
                         f"blow-up direction")
    ynames = deformation_names(W)
    znames = chart_names(W)
    comps: dict[str, tuple[Fraction, dict]] = {}
    for a in range(W.n):
        if a == c:
            comps[znames[a]] = (Fraction(1),
                                {"t": Fraction(1), ynames[c]: Fraction(1, wc)})
        else:
            comps[znames[a]] = (Fraction(1),
                                {ynames[a]: Fraction(1),
                                 ynames[c]: Fraction(-W.weights[a], wc)})
    comps["t"] = (Fraction(1), {"t": Fraction(1)})
    return rational_map(tuple(ynames) + ("t",), tuple(znames) + ("t",),
                        comps, sign)


def blowup_chart_inverse(W: WeightSequence, center: str,
                         sign: str = "+") -> RationalMonomialMap:
    c = W.vars.index(center)
    wc = W.weights[c]
    ynames = deformation_names(W)
    znames = chart_names(W)
    comps: dict[str, tuple[Fraction, dict]] = {}
    for a in range(W.n):
        if a == c:
            comps[ynames[a]] = (Fraction(1),
                                {znames[c]: Fraction(wc), "t": Fraction(-wc)})
        else:
            comps[ynames[a]] = (Fraction(1),
                                {znames[a]: Fraction(1),
                                 znames[c]: Fraction(W.weights[a]),
                                 "t": Fraction(-W.weights[a])})
    comps["t"] = (Fraction(1), {"t": Fraction(1)})
    return rational_map(tuple(znames) + ("t",), tuple(ynames) + ("t",),
                        comps, sign)


Term = tuple[Expr, Exponents]


@dataclass(frozen=True)
class BlowupField:
    """Vector field on a blow-up chart; coefficients are sums of
    rational-exponent monomials with symbolic weight-zero coefficients."""

    chart: RationalMonomialMap
    components: tuple[tuple[str, tuple[Term, ...]], ...]

    def coefficient_terms(self, name: str) -> tuple[Term, ...]:
        for n, terms in self.components:
            if n == name:
                return terms
        return ()

    def __str__(self):
        parts = []
        for n, terms in self.components:
            body = " + ".join(
                (f"{ex.to_text(c)}*" if c != ONE else "") + monomial_text(Fraction(1), m)
                if m else ex.to_text(c)
                for c, m in terms)
            parts.append(f"({body}) d/d[{n}]")
        return " + ".join(parts) if parts else "0"


def _collect_terms(terms: list[Term]) -> tuple[Term, ...]:
    acc: dict[Exponents, Expr] = {}
    for c, m in terms:
        acc[m] = ex.add(acc.get(m, ZERO), c)
    cleaned = []
    for m, c in acc.items():
        c = ex.simplify_canonical(c)
        if c != ZERO:
            cleaned.append((c, m))
    cleaned.sort(key=lambda item: item[1])
    return tuple(cleaned)


def blowup_lift_vf(X: PolyVectorField, W: WeightSequence,
                   chart: RationalMonomialMap) -> BlowupField:
    """Push the degree-0 extension of X through a blow-up chart.

    Only filtration degree 0 descends; the result is expressed in the chart
    coordinates z1..zn and is checked to be free of the parameter t.
    """
    degree = vf_filtration_degree(X, W)
    if degree < 0:
        raise ValueError("only fields of filtration degree 0 lift to the "
                         "blow-up")
    ynames = deformation_names(W)
    rename = _rename_map(W, ynames)
    w = list(W.positive_weights)
    # coefficients of the degree-0 extension, as (coefficient, exponent) terms
    ext: dict[str, list[tuple[Expr, dict[str, Fraction]]]] = {}
    for a, coeff in enumerate(X.coeffs):
        terms = []
        for s, c in coeff.terms:
            sw = weighted_degree(s, w)
            exps: dict[str, Fraction] = {"t": Fraction(sw - W.weights[a])}
            for v, e in zip(coeff.pvars, s):
                if e:
                    exps[ynames[W.vars.index(v)]] = Fraction(e)
            terms.append((ex.substitute(c, rename), exps))
        ext[ynames[a]] = terms
    # inverse substitution y -> z expressed monomially
    inverse = blowup_chart_inverse(W, _chart_center(W, chart), chart.sign)

    def substitute_term(coeff: Expr, exps: Mapping[str, Fraction]) -> Term:
        total: dict[str, Fraction] = {}
        for v, q in exps.items():
            _ic, iexps = inverse.component(v)
            for iv, iq in iexps:
                total[iv] = total.get(iv, Fraction(0)) + q * iq
        zrename = {yn: ex.var(zn) for yn, zn
                   in zip(ynames, chart_names(W))}
        return (ex.substitute(coeff, zrename), _exps(total))

    comps: dict[str, tuple[Term, ...]] = {}
    for zname, (zc, zexps) in chart.components:
        if zname == "t":
            continue
        collected: list[Term] = []
        for v, q in zexps:
            if v == "t":
                continue
            # formal chain rule: contribution q * z / y_v per unit of X(y_v)
            for coeff, exps in ext.get(v, []):
                merged: dict[str, Fraction] = {}
                for vv, qq in zexps:
                    merged[vv] = merged.get(vv, Fraction(0)) + qq
                merged[v] = merged.get(v, Fraction(0)) - 1
                for vv, qq in exps.items():
                    merged[vv] = merged.get(vv, Fraction(0)) + qq
                term_coeff = ex.mul(ex.const(q * zc), coeff)
                collected.append(substitute_term(term_coeff, merged))
        cleaned = _collect_terms(collected)
        for c, m in cleaned:
            if any(v == "t" and q != 0 for v, q in m):
                raise ValueError("lifted field does not descend "
                                 "(t-dependence survives)")
        if cleaned:
            comps[zname] = cleaned
    ordered = tuple(sorted(comps.items()))
    return BlowupField(chart, ordered)


def _chart_center(W: WeightSequence, chart: RationalMonomialMap) -> str:
    """Recover the center variable of a blow-up chart from its components."""
    znames = chart_names(W)
    ynames = deformation_names(W)
    for a, zn in enumerate(znames):
        coeff, exps = chart.component(zn)
        if any(v == "t" for v, _q in exps):
            return W.vars[a]
    raise ValueError("map is not a blow-up chart")
