"""Truncated-jet arithmetic and prolongations to the higher tangent bundle.

The scalar model is the truncated polynomial algebra R[eps]/(eps^{r+1}).
A chart point of the order-r tangent bundle stores one coefficient vector
per chart variable.  Slot variables are labelled (a, j) for variable index a
and level 0 <= j <= r; the slot (a, j) carries weighted degree j in the
intrinsic grading of the prolonged space.

Function lifts f^(i) pick out the eps^i coefficient of f evaluated on the
generic jet; vector-field lifts X^(-i) shift the prolongation levels of
their coefficients.  Only polynomial data with rational coefficients is
accepted here, which keeps every identity bit-exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import expr as ex
from .expr import Expr
from .fields import PolyVectorField

Label = tuple[int, int]
Monomial = tuple[tuple[Label, int], ...]


@dataclass(frozen=True)
class JetPoly:
    """Polynomial with rational coefficients in slot variables (a, j)."""

    terms: tuple[tuple[Monomial, Fraction], ...]

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        return jp_add(self, as_jetpoly(other))

    __radd__ = __add__

    def __sub__(self, other):
        return jp_add(self, jp_scale(as_jetpoly(other), -1))

    def __mul__(self, other):
        return jp_mul(self, as_jetpoly(other))

    __rmul__ = __mul__

    def __neg__(self):
        return jp_scale(self, -1)

    def __str__(self):
        return jp_text(self)


def jetpoly(terms: Mapping[Monomial, Fraction]) -> JetPoly:
    cleaned = [(m, Fraction(c)) for m, c in terms.items() if c != 0]
    cleaned.sort(key=lambda item: item[0])
    return JetPoly(tuple(cleaned))


JP_ZERO = jetpoly({})
JP_ONE = jetpoly({(): Fraction(1)})


def as_jetpoly(value) -> JetPoly:
    if isinstance(value, JetPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return jp_const(value)
    raise TypeError(f"cannot interpret {value!r} as a jet polynomial")


def jp_const(c) -> JetPoly:
    return jetpoly({(): Fraction(c)})


def jp_slot(a: int, j: int) -> JetPoly:
    return jetpoly({(((a, j), 1),): Fraction(1)})


def jp_add(*polys: JetPoly) -> JetPoly:
    acc: dict[Monomial, Fraction] = {}
    for p in polys:
        for m, c in p.terms:
            acc[m] = acc.get(m, Fraction(0)) + c
    return jetpoly(acc)


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    acc = dict(m1)
    for label, e in m2:
        acc[label] = acc.get(label, 0) + e
    return tuple(sorted(acc.items()))


def jp_mul(a: JetPoly, b: JetPoly) -> JetPoly:
    acc: dict[Monomial, Fraction] = {}
    for m1, c1 in a.terms:
        for m2, c2 in b.terms:
            m = _mono_mul(m1, m2)
            acc[m] = acc.get(m, Fraction(0)) + c1 * c2
    return jetpoly(acc)


def jp_scale(p: JetPoly, c) -> JetPoly:
    c = Fraction(c)
    return jetpoly({m: c * co for m, co in p.terms})


def jp_pow(p: JetPoly, exponent: int) -> JetPoly:
    if exponent < 0:
        raise ValueError("negative power of a jet polynomial")
    out = JP_ONE
    for _ in range(exponent):
        out = jp_mul(out, p)
    return out


def jp_partial(p: JetPoly, label: Label) -> JetPoly:
    acc: dict[Monomial, Fraction] = {}
    for m, c in p.terms:
        d = dict(m)
        e = d.get(label, 0)
        if e == 0:
            continue
        if e == 1:
            del d[label]
        else:
            d[label] = e - 1
        key = tuple(sorted(d.items()))
        acc[key] = acc.get(key, Fraction(0)) + c * e
    return jetpoly(acc)


def jp_substitute(p: JetPoly, mapping: Mapping[Label, JetPoly]) -> JetPoly:
    out = JP_ZERO
    for m, c in p.terms:
        piece = jp_const(c)
        for label, e in m:
            base = mapping.get(label, jp_slot(*label))
            piece = jp_mul(piece, jp_pow(base, e))
        out = jp_add(out, piece)
    return out


def jp_evaluate(p: JetPoly, values: Mapping[Label, Fraction]) -> Fraction:
    out = Fraction(0)
    for m, c in p.terms:
        piece = c
        for label, e in m:
            if label not in values:
                raise ValueError(f"no value for slot {label}")
            piece *= Fraction(values[label]) ** e
        out += piece
    return out


def jp_labels(p: JetPoly) -> set[Label]:
    return {label for m, _ in p.terms for label, _ in m}


def jp_weighted_degree_terms(p: JetPoly) -> set[int]:
    """Set of slot-degrees sum(e * j) of the monomials of p."""
    return {sum(e * j for (_, j), e in m) for m, _ in p.terms}


def jp_text(p: JetPoly, names: Sequence[str] | None = None) -> str:
    """Deterministic print with slots rendered as name.level."""
    if p.is_zero:
        return "0"

    def slot_name(label: Label) -> str:
        a, j = label
        base = names[a] if names is not None else f"x{a + 1}"
        return f"{base}.{j}"

    def mono_key(m: Monomial):
        return (sum(e * j for (_, j), e in m), m)

    pieces = []
    for m, c in sorted(p.terms, key=lambda item: mono_key(item[0])):
        factors = [f"{slot_name(l)}" + (f"^{e}" if e != 1 else "") for l, e in m]
        if not factors:
            body = str(abs(c))
        else:
            mono = "*".join(factors)
            body = mono if abs(c) == 1 else f"{abs(c)}*{mono}"
        sign = "-" if c < 0 else "+"
        if not pieces:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)


# ---------------------------------------------------------------------------
# truncated scalars and chart points

@dataclass(frozen=True)
class JetScalar:
    """Element of R[eps]/(eps^{r+1}) with rational coefficients."""

    coeffs: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other):
        other = as_jetscalar(other, self.order)
        return JetScalar(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __mul__(self, other):
        other = as_jetscalar(other, self.order)
        r = self.order
        out = [Fraction(0)] * (r + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if i + j > r:
                    break
                out[i + j] += a * b
        return JetScalar(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise ValueError("negative power in the truncated algebra")
        out = jet_scalar_const(1, self.order)
        for _ in range(exponent):
            out = out * self
        return out


def jet_scalar(coeffs: Sequence, order: int | None = None) -> JetScalar:
    cs = [Fraction(c) for c in coeffs]
    if order is not None:
        cs = (cs + [Fraction(0)] * (order + 1))[:order + 1]
    return JetScalar(tuple(cs))


def jet_scalar_const(c, order: int) -> JetScalar:
    return jet_scalar([c] + [0] * order)


def as_jetscalar(value, order: int) -> JetScalar:
    if isinstance(value, JetScalar):
        if value.order != order:
            raise ValueError("mixed truncation orders")
        return value
    return jet_scalar_const(Fraction(value), order)


@dataclass(frozen=True)
class JetPoint:
    """A chart point of the order-r tangent bundle: slots per variable."""

    vars: tuple[str, ...]
    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.vars) != len(self.values):
            raise ValueError("one slot vector per variable required")
        lengths = {len(v) for v in self.values}
        if len(lengths) != 1:
            raise ValueError("all slot vectors must share one order")

    @property
    def order(self) -> int:
        return len(self.values[0]) - 1

    def slot(self, a: int, j: int) -> Fraction:
        return self.values[a][j]

    def slot_map(self) -> dict[Label, Fraction]:
        return {(a, j): v for a, row in enumerate(self.values)
                for j, v in enumerate(row)}

    def base(self) -> tuple[Fraction, ...]:
        return tuple(row[0] for row in self.values)


def jet_point(vars: Sequence[str], rows: Sequence[Sequence]) -> JetPoint:
    return JetPoint(tuple(vars),
                    tuple(tuple(Fraction(v) for v in row) for row in rows))


def evaluate_jet(f: Expr, u: JetPoint, r: int | None = None) -> JetScalar:
    """Evaluate a polynomial expression on a jet in the truncated algebra."""
    if r is None:
        r = u.order
    if r != u.order:
        raise ValueError("jet point order does not match requested order")
    names = {name: jet_scalar(row, r) for name, row in zip(u.vars, u.values)}

    def rec(e: Expr) -> JetScalar:
        if isinstance(e, ex.Const):
            return jet_scalar_const(e.value, r)
        if isinstance(e, ex.Var):
            if e.name not in names:
                raise ValueError(f"variable {e.name!r} is not a chart variable")
            return names[e.name]
        if isinstance(e, ex.Sum):
            out = jet_scalar_const(0, r)
            for t in e.terms:
                out = out + rec(t)
            return out
        if isinstance(e, ex.Prod):
            out = jet_scalar_const(1, r)
            for fct in e.factors:
                out = out * rec(fct)
            return out
        if isinstance(e, ex.Pow):
            if e.exponent < 0:
                raise ValueError("input is not polynomial (negative power)")
            return rec(e.base) ** e.exponent
        if isinstance(e, ex.App):
            raise ValueError(f"input is not polynomial ({e.fn} head)")
        raise TypeError(f"unknown expression node {e!r}")

    return rec(f)


# ---------------------------------------------------------------------------
# lifts

def _generic_series(f: Expr, chart: Sequence[str], r: int) -> list[JetPoly]:
    """Coefficients of f along the generic jet, as slot polynomials."""
    chart = tuple(chart)
    index = {name: a for a, name in enumerate(chart)}

    def ser_add(a, b):
        return [jp_add(x, y) for x, y in zip(a, b)]

    def ser_mul(a, b):
        out = [JP_ZERO] * (r + 1)
        for i, x in enumerate(a):
            if x.is_zero:
                continue
            for j, y in enumerate(b):
                if i + j > r:
                    break
                out[i + j] = jp_add(out[i + j], jp_mul(x, y))
        return out

    def rec(e: Expr) -> list[JetPoly]:
        if isinstance(e, ex.Const):
            return [jp_const(e.value)] + [JP_ZERO] * r
        if isinstance(e, ex.Var):
            if e.name not in index:
                raise ValueError(f"variable {e.name!r} is not a chart variable")
            a = index[e.name]
            return [jp_slot(a, j) for j in range(r + 1)]
        if isinstance(e, ex.Sum):
            out = [JP_ZERO] * (r + 1)
            for t in e.terms:
                out = ser_add(out, rec(t))
            return out
        if isinstance(e, ex.Prod):
            out = [jp_const(1)] + [JP_ZERO] * r
            for fct in e.factors:
                out = ser_mul(out, rec(fct))
            return out
        if isinstance(e, ex.Pow):
            if e.exponent < 0:
                raise ValueError("input is not polynomial (negative power)")
            out = [jp_const(1)] + [JP_ZERO] * r
            base = rec(e.base)
            for _ in range(e.exponent):
                out = ser_mul(out, base)
            return out
        if isinstance(e, ex.App):
            raise ValueError(f"input is not polynomial ({e.fn} head)")
        raise TypeError(f"unknown expression node {e!r}")

    return rec(ex.simplify_canonical(f))


def jet_lift(f: Expr, i: int, r: int, chart: Sequence[str]) -> JetPoly:
    """The lift f^(i): the eps^i coefficient of f on the generic jet."""
    if not 0 <= i <= r:
        raise ValueError(f"lift level {i} outside 0..{r}")
    return _generic_series(f, chart, r)[i]


@dataclass(frozen=True)
class JetVectorField:
    """Vector field on the prolonged chart: slot (a, k) -> coefficient."""

    terms: tuple[tuple[Label, JetPoly], ...]

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, label: Label) -> JetPoly:
        for l, c in self.terms:
            if l == label:
                return c
        return JP_ZERO

    def __str__(self):
        if self.is_zero:
            return "0"
        return " + ".join(f"({jp_text(c)}) d/d[x{a + 1}.{k}]"
                          for (a, k), c in self.terms)


def jet_vf(terms: Mapping[Label, JetPoly]) -> JetVectorField:
    cleaned = [(l, c) for l, c in terms.items() if not c.is_zero]
    cleaned.sort(key=lambda item: item[0])
    return JetVectorField(tuple(cleaned))


def jvf_apply(xi: JetVectorField, p: JetPoly) -> JetPoly:
    out = JP_ZERO
    for label, c in xi.terms:
        dp = jp_partial(p, label)
        if not dp.is_zero:
            out = jp_add(out, jp_mul(c, dp))
    return out


def jvf_add(a: JetVectorField, b: JetVectorField) -> JetVectorField:
    acc: dict[Label, JetPoly] = dict(a.terms)
    for l, c in b.terms:
        acc[l] = jp_add(acc[l], c) if l in acc else c
    return jet_vf(acc)


def jvf_scale(a: JetVectorField, c) -> JetVectorField:
    return jet_vf({l: jp_scale(p, c) for l, p in a.terms})


def jet_bracket(xi: JetVectorField, eta: JetVectorField) -> JetVectorField:
    """Coordinate Lie bracket on the prolonged chart."""
    acc: dict[Label, JetPoly] = {}
    for label, c in eta.terms:
        acc[label] = jvf_apply(xi, c)
    for label, c in xi.terms:
        piece = jvf_apply(eta, c)
        acc[label] = jp_add(acc[label], jp_scale(piece, -1)) if label in acc \
            else jp_scale(piece, -1)
    return jet_vf(acc)


def vf_lift(X: PolyVectorField, i: int, r: int) -> JetVectorField:
    """The lift X^(-i): coefficients f_a^(k-i) on d/d[x_a^(k)], k = i..r."""
    if not 0 <= i <= r:
        raise ValueError(f"lift level {i} outside 0..{r}")
    chart = X.vars
    acc: dict[Label, JetPoly] = {}
    for a, coeff in enumerate(X.coeff_exprs()):
        if coeff == ex.ZERO:
            continue
        series = _generic_series(coeff, chart, r)
        for k in range(i, r + 1):
            if not series[k - i].is_zero:
                acc[(a, k)] = series[k - i]
    return jet_vf(acc)


def epsilon_shift(xi: JetVectorField, r: int) -> JetVectorField:
    """Frame-wise action of eps: d/d[x_a^(j)] -> d/d[x_a^(j+1)], top level drops."""
    acc: dict[Label, JetPoly] = {}
    for (a, j), c in xi.terms:
        if j + 1 > r:
            continue
        key = (a, j + 1)
        acc[key] = jp_add(acc[key], c) if key in acc else c
    return jet_vf(acc)


# ---------------------------------------------------------------------------
# reparametrization and the tangent-space translation

@dataclass(frozen=True)
class Reparametrization:
    """Algebra endomorphism of the truncated algebra, eps -> sum psi_j eps^j."""

    psi: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.psi)

    def of_epsilon(self) -> JetScalar:
        return jet_scalar([0] + list(self.psi))

    def __str__(self):
        pieces = [f"{c}*e" + (f"^{j + 1}" if j else "")
                  for j, c in enumerate(self.psi) if c != 0]
        return "psi=" + (" + ".join(pieces) if pieces else "0")


def reparam(psi: Sequence, order: int | None = None) -> Reparametrization:
    cs = [Fraction(c) for c in psi]
    if order is not None:
        cs = (cs + [Fraction(0)] * order)[:order]
    return Reparametrization(tuple(cs))


def dilation(t, order: int) -> Reparametrization:
    return reparam([t] + [0] * (order - 1))


def reparametrize(u: JetPoint, psi: Reparametrization) -> JetPoint:
    """Compose the jet with the reparametrization (slotwise substitution)."""
    r = u.order
    if psi.order != r:
        raise ValueError("reparametrization order does not match the point")
    p = psi.of_epsilon()
    rows = []
    for row in u.values:
        total = jet_scalar_const(0, r)
        power = jet_scalar_const(1, r)
        for j, c in enumerate(row):
            total = total + c * power
            power = power * p
        rows.append(total.coeffs)
    return jet_point(u.vars, rows)


def reparam_compose(outer: Reparametrization,
                    inner: Reparametrization) -> Reparametrization:
    """The endomorphism outer o inner (inner applied first).

    Its defining polynomial is P_inner evaluated at P_outer(eps):
    (outer o inner)(q) = q(P_inner(P_outer(eps))).
    """
    if outer.order != inner.order:
        raise ValueError("mixed truncation orders")
    r = outer.order
    p_out = outer.of_epsilon()
    total = jet_scalar_const(0, r)
    power = jet_scalar_const(1, r)
    for c in (Fraction(0),) + inner.psi:
        total = total + c * power
        power = power * p_out
    return reparam(total.coeffs[1:])


def tm_translate(u: JetPoint, base: Sequence, components: Sequence) -> JetPoint:
    """Shift the top slots by a tangent vector attached at the base of u."""
    base = tuple(Fraction(b) for b in base)
    if base != u.base():
        raise ValueError("tangent vector base point does not match the jet")
    comps = tuple(Fraction(c) for c in components)
    if len(comps) != len(u.vars):
        raise ValueError("one component per variable required")
    rows = [row[:-1] + (row[-1] + c,) for row, c in zip(u.values, comps)]
    return jet_point(u.vars, rows)


# ---------------------------------------------------------------------------
# text formats

def jet_point_text(u: JetPoint) -> str:
    """Format "x=0:0,1:1,2:0; y=..." listing slot values per variable."""
    chunks = []
    for name, row in zip(u.vars, u.values):
        slots = ",".join(f"{j}:{v}" for j, v in enumerate(row))
        chunks.append(f"{name}={slots}")
    return "; ".join(chunks)


def parse_jet_point(text: str) -> JetPoint:
    names, rows = [], []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if "=" not in chunk:
            raise ValueError(f"malformed jet point chunk {chunk!r}")
        name, body = chunk.split("=", 1)
        slots: dict[int, Fraction] = {}
        for piece in body.split(","):
            if ":" not in piece:
                raise ValueError(f"malformed slot {piece.strip()!r}")
            level, value = piece.split(":", 1)
            slots[int(level)] = Fraction(value.strip())
        if sorted(slots) != list(range(len(slots))):
            raise ValueError(f"variable {name.strip()!r} is missing slot levels")
        names.append(name.strip())
        rows.append([slots[j] for j in range(len(slots))])
    return jet_point(names, rows)


_PSI_TERM_RE = re.compile(
    r"^\s*([+-]?[0-9/]*)\s*\*?\s*e(?:\^(\d+))?\s*$")


def parse_reparametrization(text: str, order: int | None = None) -> Reparametrization:
    """Parse "psi=1*e+1*e^2" (or just the right-hand side)."""
    body = text.split("=", 1)[1] if "=" in text else text
    body = body.replace(" ", "").replace("-", "+-")
    coeffs: dict[int, Fraction] = {}
    for chunk in body.split("+"):
        if not chunk.strip():
            continue
        m = _PSI_TERM_RE.match(chunk)
        if m is None:
            raise ValueError(f"malformed reparametrization term {chunk.strip()!r}")
        raw, power = m.groups()
        coeff = Fraction(raw) if raw not in ("", "+", "-") else \
            Fraction(-1 if raw == "-" else 1)
        j = int(power) if power else 1
        if j < 1:
            raise ValueError("reparametrization terms start at e^1")
        coeffs[j] = coeffs.get(j, Fraction(0)) + coeff
    top = max(coeffs) if coeffs else 1
    if order is None:
        order = top
    if top > order:
        raise ValueError(f"term e^{top} above truncation order {order}")
    return reparam([coeffs.get(j, Fraction(0))
                    for j in range(1, order + 1)])
