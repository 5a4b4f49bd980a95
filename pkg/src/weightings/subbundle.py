"""Graded subbundles of the prolonged chart, the weighting criterion, and
adapted coordinates.

A GraphSubbundle stores the subbundle in solved form: a set of constrained
slots (a, j), each equal to a slot polynomial in the free slots that is
homogeneous of degree j.  Membership, tangency, restriction, and the
weighting checks all reduce to substitution into this graph.

``check_weighting`` runs an ordered battery:

  N1  the free-slot pattern of every variable must be a prefix of the levels
      (otherwise the induced flag is not a filtration containing the base
      tangent directions);
  N2  constraints must not involve top-level slots, so the subbundle is
      invariant under the translation action of the tangent bundle
      (automatic for homogeneous graphs, verified and reported);
  N3  invariance under a generic reparametrization with symbolic
      coefficients, checked as polynomial identities;
  N4  filtration consistency: every nonzero right-hand side must be the
      restriction of an honest function lift.  The solver looks for a
      polynomial change of coordinates u_a = x_a - G_a, with G_a a rational
      combination of monomials of the matching weighted degree, that turns
      the graph into the standard one.  A right-hand side outside the span
      of monomial lifts certifies that no weighting induces the graph:
      function lifts only produce symmetric slot combinations, so an
      antisymmetric relation can never be matched.
  N5  the corrected coordinate frame must be tangent to the subbundle at
      its declared levels (the spanning condition).

Failures carry machine-readable reason codes and a concrete witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from . import expr as ex
from . import jets as jt
from . import wpoly as wp
from .expr import Expr, ZERO, ONE
from .fields import PolyVectorField, lie_bracket, vf_for_weights, vf_from_exprs
from .jets import JetPoly, JetPoint, Label
from .weights import WeightSequence, weight_sequence, weighted_degree

FLAG_INVALID = "FLAG_INVALID"
TM_INVARIANCE = "TM_INVARIANCE"
LAMBDA_INVARIANCE = "LAMBDA_INVARIANCE"
FILTRATION_MISMATCH = "FILTRATION_MISMATCH"
SPAN_FAIL = "SPAN_FAIL"
UNDECIDED = "UNDECIDED"


class FlagError(ValueError):
    pass


@dataclass(frozen=True)
class GraphSubbundle:
    vars: tuple[str, ...]
    order: int
    constraints: tuple[tuple[Label, JetPoly], ...]

    @property
    def n(self) -> int:
        return len(self.vars)

    @property
    def dim(self) -> int:
        return self.n * (self.order + 1) - len(self.constraints)

    def constraint_map(self) -> dict[Label, JetPoly]:
        return dict(self.constraints)

    def constrained_labels(self) -> set[Label]:
        return {label for label, _ in self.constraints}

    def free_labels(self) -> list[Label]:
        constrained = self.constrained_labels()
        return [(a, j) for a in range(self.n) for j in range(self.order + 1)
                if (a, j) not in constrained]


def graph_subbundle(vars: Sequence[str], order: int,
                    constraints: Mapping[Label, JetPoly]) -> GraphSubbundle:
    """Validate and canonicalize a solved-form graded subbundle."""
    vars = tuple(vars)
    n = len(vars)
    labels = set(constraints)
    for (a, j), g in constraints.items():
        if not (0 <= a < n and 0 <= j <= order):
            raise ValueError(f"constraint slot ({a},{j}) out of range")
        if j == 0 and not g.is_zero:
            raise ValueError("level-0 constraints must vanish "
                             "(the base is a coordinate subspace)")
        degs = jt.jp_weighted_degree_terms(g)
        if degs - {j}:
            raise ValueError(
                f"right-hand side for slot ({a},{j}) is not homogeneous "
                f"of degree {j}")
        for label in jt.jp_labels(g):
            if label in labels:
                raise ValueError(
                    f"right-hand side for slot ({a},{j}) uses constrained "
                    f"slot {label}")
    cleaned = sorted(constraints.items(), key=lambda item: item[0])
    return GraphSubbundle(vars, order, tuple(cleaned))


def standard_q(W: WeightSequence) -> GraphSubbundle:
    """The subbundle cut out by vanishing of all slots below each weight."""
    constraints = {(a, j): jt.JP_ZERO
                   for a in range(W.n) for j in range(W.weights[a])}
    return graph_subbundle(W.vars, W.order, constraints)


def substitute_graph(Q: GraphSubbundle, p: JetPoly) -> JetPoly:
    """Restrict a slot polynomial to the graph (eliminate constrained slots)."""
    mapping = Q.constraint_map()
    if not (jt.jp_labels(p) & set(mapping)):
        return p
    return jt.jp_substitute(p, mapping)


def q_membership(Q: GraphSubbundle, u: JetPoint) -> bool:
    if u.vars != Q.vars or u.order != Q.order:
        raise ValueError("jet point does not match the subbundle chart")
    values = u.slot_map()
    for (a, j), g in Q.constraints:
        if values[(a, j)] != jt.jp_evaluate(g, values):
            return False
    return True


def induced_filtration_degree(Q: GraphSubbundle, f: Expr) -> int:
    """Largest i <= r+1 with all lower lifts of f vanishing on the graph."""
    r = Q.order
    for j in range(r + 1):
        lifted = jt.jet_lift(f, j, r, Q.vars)
        if not substitute_graph(Q, lifted).is_zero:
            return j
    return r + 1


def _slot_weights(Q: GraphSubbundle) -> list[int]:
    """Per-variable first free level; FlagError if the pattern is not a prefix."""
    weights = []
    constrained = Q.constrained_labels()
    for a, name in enumerate(Q.vars):
        levels = sorted(j for (b, j) in constrained if b == a)
        w = len(levels)
        if levels != list(range(w)):
            if 0 not in levels:
                raise FlagError(
                    f"flag does not contain the base tangent direction of "
                    f"{name!r} (level-0 slot is free but level "
                    f"{min(levels)} is constrained)")
            raise FlagError(
                f"free-slot pattern of {name!r} is not monotone in the level "
                f"(constrained levels {levels})")
        if w > Q.order:
            raise FlagError(f"variable {name!r} has every slot constrained")
        weights.append(w)
    return weights


def derive_weights(Q: GraphSubbundle) -> WeightSequence:
    """Weights read off the free-slot pattern (the linear approximation)."""
    return weight_sequence(list(zip(Q.vars, _slot_weights(Q))), Q.order)


def k_membership(Q: GraphSubbundle, X: PolyVectorField, i: int) -> bool:
    """Whether the level -i lift of X is tangent to the graph."""
    if not 0 <= i <= Q.order:
        raise ValueError(f"level {i} outside 0..{Q.order}")
    if X.vars != Q.vars:
        raise ValueError("vector field chart does not match the subbundle")
    xi = jt.vf_lift(X, i, Q.order)
    for (a, j), g in Q.constraints:
        image = jt.jp_add(xi.coefficient((a, j)),
                          jt.jp_scale(jt.jvf_apply(xi, g), -1))
        if not substitute_graph(Q, image).is_zero:
            return False
    return True


def quotient_to_normal(Q: GraphSubbundle, u: JetPoint) -> tuple[Fraction, ...]:
    """Project a graph point to graded coordinates (slot at each weight)."""
    if not q_membership(Q, u):
        raise ValueError("point does not lie on the subbundle")
    weights = _slot_weights(Q)
    return tuple(u.slot(a, weights[a]) for a in range(Q.n))


@dataclass
class WeightingVerdict:
    accepted: bool
    weights: WeightSequence | None = None
    reason: str | None = None
    witness: str | None = None
    details: dict | None = None

    def __str__(self):
        if self.accepted:
            return f"accepted: weights {self.weights.assignment_text()}"
        text = f"rejected {self.reason}"
        if self.witness:
            text += f": {self.witness}"
        return text


def _solve_exact(rows: list[list[Fraction]],
                 rhs: list[Fraction]) -> list[Fraction] | None:
    """One exact solution of A x = b, or None when inconsistent."""
    m = len(rows)
    cols = len(rows[0]) if rows else 0
    aug = [row[:] + [b] for row, b in zip(rows, rhs)]
    pivots = []
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, m) if aug[r][col] != 0), None)
        if pivot is None:
            continue
        aug[rank], aug[pivot] = aug[pivot], aug[rank]
        scale = aug[rank][col]
        aug[rank] = [v / scale for v in aug[rank]]
        for r in range(m):
            if r != rank and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v - factor * p for v, p in zip(aug[r], aug[rank])]
        pivots.append(col)
        rank += 1
        if rank == m:
            break
    for r in range(rank, m):
        if aug[r][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for r, col in enumerate(pivots):
        x[col] = aug[r][cols]
    return x


def _monomials_of_weight(weights: Sequence[int], target: int) -> list[tuple[int, ...]]:
    """Exponent vectors s over positive-weight variables with s.w == target."""
    positive = [(a, w) for a, w in enumerate(weights) if w >= 1]
    out: list[tuple[int, ...]] = []

    def walk(prefix: dict[int, int], pos: int, total: int):
        if total == target and pos == len(positive):
            out.append(tuple(prefix.get(a, 0) for a in range(len(weights))))
            return
        if pos == len(positive) or total > target:
            return
        a, w = positive[pos]
        smax = (target - total) // w
        for s in range(smax + 1):
            if s:
                prefix[a] = s
            walk(prefix, pos + 1, total + s * w)
            prefix.pop(a, None)

    walk({}, 0, 0)
    return sorted(out)


def _monomial_expr(Q: GraphSubbundle, s: tuple[int, ...]) -> Expr:
    return ex.mul(*[ex.pow_(ex.var(v), e) for v, e in zip(Q.vars, s) if e], ONE)


def _solve_as_lift(Q: GraphSubbundle, weights: Sequence[int], level: int,
                   target: JetPoly) -> Expr | None:
    """Express target as (sum c_s x^s)^(level) restricted to the graph."""
    candidates = _monomials_of_weight(weights, level)
    lifts = [substitute_graph(Q, jt.jet_lift(_monomial_expr(Q, s), level,
                                             Q.order, Q.vars))
             for s in candidates]
    monomials = sorted({m for p in lifts for m, _ in p.terms}
                       | {m for m, _ in target.terms})
    if not monomials:
        return ZERO
    index = {m: i for i, m in enumerate(monomials)}
    rows = [[Fraction(0)] * len(candidates) for _ in monomials]
    for k, p in enumerate(lifts):
        for m, c in p.terms:
            rows[index[m]][k] = c
    rhs = [Fraction(0)] * len(monomials)
    for m, c in target.terms:
        rhs[index[m]] = c
    solution = _solve_exact(rows, rhs)
    if solution is None:
        return None
    return ex.add(*[ex.mul(ex.const(c), _monomial_expr(Q, s))
                    for s, c in zip(candidates, solution) if c != 0], ZERO)


def _reconstructed_dimension(Q: GraphSubbundle) -> int:
    """Dimension of the standard graph built from induced coordinate degrees."""
    induced = [induced_filtration_degree(Q, ex.var(v)) for v in Q.vars]
    return Q.n * (Q.order + 1) - sum(min(d, Q.order + 1) for d in induced)


def _lambda_invariance_witness(Q: GraphSubbundle) -> str | None:
    """Check invariance under a symbolic reparametrization; None if invariant.

    Free slots stay as their own symbols and the reparametrization
    coefficients enter as extra symbols (-1, m), so the check is a set of
    polynomial identities.
    """
    r = Q.order
    cmap = Q.constraint_map()
    vals: list[list[JetPoly]] = []
    for a in range(Q.n):
        vals.append([cmap.get((a, j), jt.jp_slot(a, j)) for j in range(r + 1)])
    # powers of Psi(eps) as truncated series with slot-polynomial coefficients
    psi = [jt.JP_ZERO] + [jt.jp_slot(-1, m) for m in range(1, r + 1)]
    powers = [[jt.JP_ONE] + [jt.JP_ZERO] * r]
    for _ in range(r):
        prev = powers[-1]
        nxt = [jt.JP_ZERO] * (r + 1)
        for i, p in enumerate(prev):
            if p.is_zero:
                continue
            for j, qq in enumerate(psi):
                if qq.is_zero or i + j > r:
                    continue
                nxt[i + j] = jt.jp_add(nxt[i + j], jt.jp_mul(p, qq))
        powers.append(nxt)
    new_vals: list[list[JetPoly]] = []
    for a in range(Q.n):
        row = [jt.JP_ZERO] * (r + 1)
        for j in range(r + 1):
            if vals[a][j].is_zero:
                continue
            for k in range(r + 1):
                if not powers[j][k].is_zero:
                    row[k] = jt.jp_add(row[k], jt.jp_mul(vals[a][j], powers[j][k]))
        new_vals.append(row)
    free_map = {(b, k): new_vals[b][k] for (b, k) in Q.free_labels()}
    for (a, j), g in Q.constraints:
        expected = jt.jp_substitute(g, free_map)
        if jt.jp_add(new_vals[a][j], jt.jp_scale(expected, -1)).is_zero:
            continue
        return (f"slot {Q.vars[a]}.{j} moves off the graph under a generic "
                f"reparametrization")
    return None


def check_weighting(Q: GraphSubbundle, max_passes: int | None = None) -> WeightingVerdict:
    """Decide whether the graph is the subbundle of a weighting."""
    # N1: flag validity
    try:
        weights = _slot_weights(Q)
    except FlagError as err:
        return WeightingVerdict(False, reason=FLAG_INVALID, witness=str(err))
    W = weight_sequence(list(zip(Q.vars, weights)), Q.order)
    # N2: translation invariance (top slots never constrained, nor referenced)
    for (a, j), g in Q.constraints:
        bad = [label for label in jt.jp_labels(g) if label[1] >= Q.order]
        if j >= Q.order or bad:
            return WeightingVerdict(
                False, reason=TM_INVARIANCE,
                witness=f"constraint at {Q.vars[a]}.{j} touches a top-level slot")
    # N3: reparametrization invariance
    witness = _lambda_invariance_witness(Q)
    if witness is not None:
        return WeightingVerdict(False, reason=LAMBDA_INVARIANCE, witness=witness)
    # N4: filtration consistency through coordinate corrections
    corrections: dict[int, Expr] = {a: ZERO for a in range(Q.n)}
    ordered = sorted(Q.constraints, key=lambda item: (item[0][1], item[0][0]))
    if max_passes is None:
        max_passes = Q.order + 2
    solved = False
    for _ in range(max_passes):
        dirty = False
        for (a, j), _g in ordered:
            corrected = ex.add(ex.var(Q.vars[a]),
                               ex.mul(ex.MINUS_ONE, corrections[a]))
            residual = substitute_graph(
                Q, jt.jet_lift(corrected, j, Q.order, Q.vars))
            if residual.is_zero:
                continue
            dirty = True
            correction = _solve_as_lift(Q, weights, j, residual)
            if correction is None:
                zero_weight_slots = any(
                    weights[b] == 0 for (b, _k) in jt.jp_labels(residual)
                    if b >= 0)
                if zero_weight_slots:
                    return WeightingVerdict(
                        False, reason=UNDECIDED,
                        witness=(f"constraint at {Q.vars[a]}.{j} depends on "
                                 f"weight-0 slots beyond the rational ansatz"))
                return WeightingVerdict(
                    False, reason=FILTRATION_MISMATCH,
                    witness=f"witness {Q.vars[a]} level {j}",
                    details={"reconstructed_dim": _reconstructed_dimension(Q),
                             "graph_dim": Q.dim})
            corrections[a] = ex.add(corrections[a], correction)
        if not dirty:
            solved = True
            break
    if not solved:
        return WeightingVerdict(
            False, reason=UNDECIDED,
            witness="coordinate corrections did not stabilize")
    # N5: the corrected frame spans the graph tangent at its declared levels
    frame_fields = _corrected_frame(Q, corrections)
    for a, field_a in enumerate(frame_fields):
        if not k_membership(Q, field_a, weights[a]):
            return WeightingVerdict(
                False, reason=SPAN_FAIL,
                witness=(f"corrected frame field for {Q.vars[a]} is not "
                         f"tangent at level {weights[a]}"))
    return WeightingVerdict(True, weights=W)


def _corrected_frame(Q: GraphSubbundle,
                     corrections: dict[int, Expr]) -> list[PolyVectorField]:
    """Coordinate frame of u_a = x_a - G_a pushed back to the chart."""
    n = Q.n
    names = Q.vars
    # D[a][b] = d G_a / d x_b; the Jacobian of u is I - D, with D nilpotent
    D = [[ex.differentiate(corrections[a], names[b]) for b in range(n)]
         for a in range(n)]

    def mat_mul(A, B):
        return [[ex.add(*[ex.mul(A[i][k], B[k][j]) for k in range(n)], ZERO)
                 for j in range(n)] for i in range(n)]

    identity = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    inverse = identity
    power = D
    for _ in range(n):
        if all(entry == ZERO for row in power for entry in row):
            break
        inverse = [[ex.add(inverse[i][j], power[i][j]) for j in range(n)]
                   for i in range(n)]
        power = mat_mul(power, D)
    weights = _slot_weights(Q)
    positive = [v for v, w in zip(names, weights) if w >= 1]
    fields = []
    for a in range(n):
        # d/d[u_a] = sum_b (dx_b/du_a) d/d[x_b], the a-th column of (I - D)^{-1}
        coeffs = [inverse[b][a] for b in range(n)]
        fields.append(vf_from_exprs(names, coeffs, positive))
    return fields


# ---------------------------------------------------------------------------
# frames, differential operators, adapted coordinates

@dataclass(frozen=True)
class Frame:
    """Local frame with declared tangency levels, over the chart of W."""

    W: WeightSequence
    fields: tuple[PolyVectorField, ...]

    def __post_init__(self):
        if len(self.fields) != self.W.n:
            raise ValueError("frame needs one field per chart variable")
        for f in self.fields:
            if f.vars != self.W.vars:
                raise ValueError("frame field lives on a different chart")

    @property
    def n(self) -> int:
        return self.W.n

    def field_exprs(self, a: int) -> tuple[Expr, ...]:
        return self.fields[a].coeff_exprs()

    def apply(self, a: int, f: Expr) -> Expr:
        return ex.add(*[ex.mul(c, ex.differentiate(f, v))
                        for v, c in zip(self.W.vars, self.field_exprs(a))], ZERO)

    def apply_word(self, s: Sequence[int], f: Expr) -> Expr:
        """V^s f with V^s = V_1^{s_1} o ... o V_n^{s_n} (rightmost acts first)."""
        out = f
        for a in reversed(range(self.n)):
            for _ in range(s[a]):
                out = self.apply(a, out)
        return out


def restrict_to_base(e: Expr, W: WeightSequence) -> Expr:
    return ex.substitute(e, {v: ZERO for v in W.positive_vars})


def frame(W: WeightSequence, coeff_rows: Sequence[Sequence[Expr]]) -> Frame:
    """Build and validate a frame from per-field coefficient expressions."""
    fields = tuple(vf_for_weights(W, row) for row in coeff_rows)
    fr = Frame(W, fields)
    matrix = [[restrict_to_base(c, W) for c in f.coeff_exprs()] for f in fields]
    origin = {v: Fraction(0) for v in W.zero_vars}
    numeric = [[ex.eval_exact(entry, origin) for entry in row] for row in matrix]
    if _det(numeric) == 0:
        raise ValueError("frame coefficient matrix is singular at the base point")
    k0 = W.count(0)
    for a in range(k0):
        for b in range(a):
            bracket = lie_bracket(fields[a], fields[b])
            for v, c in zip(W.vars, bracket.coeff_exprs()):
                if W.weight_of(v) == 0 and restrict_to_base(c, W) != ZERO:
                    raise ValueError(
                        "base-tangent frame fields do not commute on the base")
    return fr


def _det(matrix) -> Fraction:
    n = len(matrix)
    if n == 1:
        return Fraction(matrix[0][0])
    out = Fraction(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = Fraction(matrix[0][j]) * _det(minor)
        out += term if j % 2 == 0 else -term
    return out


def _det_expr(matrix: list[list[Expr]]) -> Expr:
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    terms = []
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        piece = ex.mul(matrix[0][j], _det_expr(minor))
        terms.append(piece if j % 2 == 0 else ex.mul(ex.MINUS_ONE, piece))
    return ex.add(*terms, ZERO)


@lru_cache(maxsize=None)
def _frame_bracket(fr: Frame, a: int, b: int) -> tuple[tuple[int, Expr], ...]:
    """[V_a, V_b] expanded over the frame, by exact adjugate inversion."""
    bracket = lie_bracket(fr.fields[a], fr.fields[b])
    target = bracket.coeff_exprs()
    n = fr.n
    matrix = [[fr.field_exprs(c)[i] for c in range(n)] for i in range(n)]
    det = ex.simplify_canonical(_det_expr(matrix), expand_polynomials=True)
    if not isinstance(det, ex.Const) or det.value == 0:
        raise ValueError(
            "frame brackets need a coefficient matrix with constant nonzero "
            f"determinant (got {ex.to_text(det)})")
    out = []
    for c in range(n):
        # Cramer: replace column c by the bracket coefficients
        replaced = [[target[i] if col == c else matrix[i][col]
                     for col in range(n)] for i in range(n)]
        h = ex.mul(ex.const(Fraction(1) / det.value), _det_expr(replaced))
        h = ex.simplify_canonical(h, expand_polynomials=True)
        if h != ZERO:
            out.append((c, h))
    return tuple(out)


@dataclass(frozen=True)
class DiffOpStandardForm:
    """Normal-ordered differential operator sum_s f_s V^s over a frame."""

    frame: Frame
    terms: tuple[tuple[tuple[int, ...], Expr], ...]

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for s, f in self.terms:
            word = "".join(f"V{a + 1}" + (f"^{e}" if e > 1 else "")
                           for a, e in enumerate(s) if e)
            body = ex.to_text(f)
            pieces.append(f"({body})" + (f" {word}" if word else ""))
        return " + ".join(pieces)


def diffop(fr: Frame, terms: Mapping[tuple[int, ...], Expr]) -> DiffOpStandardForm:
    cleaned = []
    for s, f in terms.items():
        f = ex.simplify_canonical(ex.as_expr(f))
        if f != ZERO:
            cleaned.append((tuple(int(v) for v in s), f))
    cleaned.sort(key=lambda item: item[0])
    return DiffOpStandardForm(fr, tuple(cleaned))


@lru_cache(maxsize=None)
def _normal_va_vs(fr: Frame, a: int, s: tuple[int, ...]) -> tuple:
    """Standard form of V_a o V^s, as ((u, coefficient) ...)."""
    n = len(s)
    if not any(s):
        unit = tuple(1 if c == a else 0 for c in range(n))
        return ((unit, ONE),)
    b = next(c for c in range(n) if s[c])
    if a <= b:
        bumped = tuple(e + (1 if c == a else 0) for c, e in enumerate(s))
        return ((bumped, ONE),)
    rest = tuple(e - (1 if c == b else 0) for c, e in enumerate(s))
    acc: dict[tuple[int, ...], Expr] = {}

    def accumulate(u: tuple[int, ...], coeff: Expr):
        acc[u] = ex.add(acc.get(u, ZERO), coeff)

    # V_a o V^s = V_b o (V_a o V^rest) + [V_a, V_b] o V^rest
    for u, coeff in _normal_va_vs(fr, a, rest):
        db = fr.apply(b, coeff)
        if db != ZERO:
            accumulate(u, db)
        for u2, coeff2 in _normal_va_vs(fr, b, u):
            accumulate(u2, ex.mul(coeff, coeff2))
    for c, h in _frame_bracket(fr, a, b):
        for u2, coeff2 in _normal_va_vs(fr, c, rest):
            accumulate(u2, ex.mul(h, coeff2))
    cleaned = []
    for u, coeff in acc.items():
        coeff = ex.simplify_canonical(coeff)
        if coeff != ZERO:
            cleaned.append((u, coeff))
    return tuple(sorted(cleaned, key=lambda item: item[0]))


def normal_order(fr: Frame, word: Sequence) -> DiffOpStandardForm:
    """Rewrite a composition word into standard form.

    Word items are frame indices (int, 0-based, meaning composition with
    that frame field) or expressions (meaning multiplication); the leftmost
    item acts last.
    """
    n = fr.n
    terms: dict[tuple[int, ...], Expr] = {(0,) * n: ONE}
    for item in reversed(list(word)):
        nxt: dict[tuple[int, ...], Expr] = {}

        def accumulate(u, coeff):
            nxt[u] = ex.add(nxt.get(u, ZERO), coeff)

        if isinstance(item, int):
            for s, f in terms.items():
                da = fr.apply(item, f)
                if da != ZERO:
                    accumulate(s, da)
                for u, coeff in _normal_va_vs(fr, item, s):
                    accumulate(u, ex.mul(f, coeff))
        else:
            g = ex.as_expr(item)
            for s, f in terms.items():
                accumulate(s, ex.mul(g, f))
        terms = nxt
    return diffop(fr, terms)


def apply_diffop(D: DiffOpStandardForm, f) -> Expr:
    """Exact application sum_s f_s (V^s f); accepts Expr or WeightedPoly."""
    if isinstance(f, wp.WeightedPoly):
        f = wp.to_expr(f)
    out = ZERO
    for s, coeff in D.terms:
        out = ex.add(out, ex.mul(coeff, D.frame.apply_word(s, f)))
    return out


def coefficient_q_weight(D: DiffOpStandardForm, W: WeightSequence) -> int:
    """The coefficient-criterion weight: min_s (deg f_s - w.s), at most 0.

    For operators written over an adapted frame this equals the largest
    weight consistent with the coefficient criterion; it upper-bounds the
    presentation-based weight.
    """
    if not D.terms:
        raise ValueError("zero operator has no weight")
    best = None
    for s, f in D.terms:
        fdeg = wp.filtration_degree(wp.poly_normal_form(f, W.positive_vars), W)
        value = fdeg - weighted_degree(s, W.weights)
        best = value if best is None else min(best, value)
    return int(min(best, 0))


@dataclass(frozen=True)
class AdaptedChange:
    """Result of the adapted-coordinates recursion."""

    frame: Frame
    y_names: tuple[str, ...]
    x_in_chart: tuple[Expr, ...]
    x_in_y: tuple[Expr, ...]
    chi: tuple[tuple[tuple[int, tuple[int, ...]], Expr], ...]
    normalizers: tuple[tuple[tuple[int, ...], Fraction], ...]

    def chi_map(self) -> dict:
        return dict(self.chi)

    def normalizer_map(self) -> dict:
        return dict(self.normalizers)


def _normal_multi_indices(W: WeightSequence, below: int,
                          min_size: int) -> list[tuple[int, ...]]:
    """Multi-indices supported on positive-weight variables with s.w < below."""
    n = W.n
    out = []

    def walk(prefix: list[int], a: int, total: int, size: int):
        if a == n:
            if size >= min_size:
                out.append(tuple(prefix))
            return
        w = W.weights[a]
        if w == 0:
            walk(prefix + [0], a + 1, total, size)
            return
        s = 0
        while total + s * w < below:
            walk(prefix + [s], a + 1, total + s * w, size + s)
            s += 1

    walk([], 0, 0, 0)
    return sorted(out, key=lambda s: (sum(s), s))


def adapted_coordinates(fr: Frame, y_exprs: Sequence[Expr],
                        y_names: Sequence[str] | None = None) -> AdaptedChange:
    """Correct initial coordinates until every frame word of lower weighted
    degree kills them along the base.

    Preconditions: (V_a y_b) restricted to the base is the identity matrix,
    and the positive-weight y's vanish on the base.  The corrections are
    sums chi_{a,u} y^u over multi-indices u with at least two entries,
    supported on the positive-weight variables, of weighted degree below the
    weight of the coordinate being corrected.
    """
    W = fr.W
    n = W.n
    y_exprs = tuple(ex.simplify_canonical(ex.as_expr(y)) for y in y_exprs)
    if y_names is None:
        y_names = tuple(f"y{a + 1}" for a in range(n))
    else:
        y_names = tuple(y_names)
    for a in range(n):
        for b in range(n):
            value = restrict_to_base(fr.apply(a, y_exprs[b]), W)
            expected = ONE if a == b else ZERO
            if value != expected:
                raise ValueError(
                    f"(V_{a + 1} y_{b + 1}) on the base is {ex.to_text(value)}, "
                    f"expected {ex.to_text(expected)}")
    k0 = W.count(0)
    for a in range(k0, n):
        if restrict_to_base(y_exprs[a], W) != ZERO:
            raise ValueError(f"initial coordinate y_{a + 1} does not vanish "
                             f"on the base")
    max_w = max(W.weights)
    all_s = _normal_multi_indices(W, max_w, 2)
    chi: dict[tuple[int, tuple[int, ...]], Expr] = {}
    normalizers: dict[tuple[int, ...], Fraction] = {}

    def y_monomial(u: tuple[int, ...]) -> Expr:
        return ex.mul(*[ex.pow_(y_exprs[b], e) for b, e in enumerate(u) if e],
                      ONE)

    for s in all_s:
        sw = weighted_degree(s, W.weights)
        targets = [a for a in range(k0, n) if sw < W.weights[a]]
        if not targets:
            continue
        if s not in normalizers:
            c_s = restrict_to_base(fr.apply_word(s, y_monomial(s)), W)
            if not isinstance(c_s, ex.Const) or c_s.value <= 0:
                raise ValueError(
                    f"frame normalizer for {s} is not a positive constant "
                    f"({ex.to_text(c_s)}); the frame does not satisfy the "
                    f"preconditions")
            normalizers[s] = c_s.value
        for a in targets:
            total = restrict_to_base(fr.apply_word(s, y_exprs[a]), W)
            for (a2, u), coeff in chi.items():
                if a2 != a or sum(u) >= sum(s):
                    continue
                piece = fr.apply_word(s, ex.mul(coeff, y_monomial(u)))
                total = ex.add(total, restrict_to_base(piece, W))
            value = ex.mul(ex.const(Fraction(-1) / normalizers[s]), total)
            value = ex.simplify_canonical(value, expand_polynomials=True)
            if value != ZERO:
                chi[(a, s)] = value
    x_in_chart = []
    x_in_y = []
    for a in range(n):
        chart = y_exprs[a]
        in_y: Expr = ex.var(y_names[a])
        for (a2, u), coeff in chi.items():
            if a2 != a:
                continue
            chart = ex.add(chart, ex.mul(coeff, y_monomial(u)))
            in_y = ex.add(in_y, ex.mul(
                coeff, ex.mul(*[ex.pow_(ex.var(y_names[b]), e)
                                for b, e in enumerate(u) if e], ONE)))
        x_in_chart.append(ex.simplify_canonical(chart))
        x_in_y.append(ex.simplify_canonical(in_y))
    return AdaptedChange(
        fr, y_names, tuple(x_in_chart), tuple(x_in_y),
        tuple(sorted(chi.items(), key=lambda item: item[0])),
        tuple(sorted(normalizers.items())))


def verify_adapted(x_exprs: Sequence[Expr], fr: Frame) -> bool:
    """Check (V^s x_a) vanishes on the base whenever s.w < w_a."""
    W = fr.W
    x_exprs = tuple(ex.as_expr(x) for x in x_exprs)
    max_w = max(W.weights)
    for a in range(W.n):
        wa = W.weights[a]
        if wa == 0:
            continue
        for s in _normal_multi_indices(W, wa, 0):
            value = restrict_to_base(fr.apply_word(s, x_exprs[a]), W)
            if ex.simplify_canonical(value, expand_polynomials=True) != ZERO:
                return False
    return True
