"""Weight sequences and multi-weights on named coordinates.

A weight sequence assigns a nonnegative integer to each coordinate and fixes
an order r at least as large as every weight.  Variables are kept sorted by
nondecreasing weight (stable within equal weights, so user input order is
preserved and output is deterministic).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence


@dataclass(frozen=True)
class WeightSequence:
    vars: tuple[str, ...]
    weights: tuple[int, ...]
    order: int

    def __post_init__(self):
        if not self.vars:
            raise ValueError("weight sequence needs at least one variable")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variable names")
        if len(self.vars) != len(self.weights):
            raise ValueError("variable and weight counts differ")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if any(a > b for a, b in zip(self.weights, self.weights[1:])):
            raise ValueError("weights must be nondecreasing")
        if self.order < max(self.weights):
            raise ValueError(
                f"order {self.order} below maximum weight {max(self.weights)}")

    @property
    def n(self) -> int:
        return len(self.vars)

    def weight_of(self, name: str) -> int:
        try:
            return self.weights[self.vars.index(name)]
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def count(self, i: int) -> int:
        """k_i, the number of variables of weight at most i."""
        return sum(1 for w in self.weights if w <= i)

    @property
    def counts(self) -> tuple[int, ...]:
        """(k_0, ..., k_r)."""
        return tuple(self.count(i) for i in range(self.order + 1))

    def flag(self, i: int) -> tuple[str, ...]:
        """Variables spanning the level -i piece of the flag (weight <= i)."""
        return tuple(v for v, w in zip(self.vars, self.weights) if w <= i)

    @property
    def zero_vars(self) -> tuple[str, ...]:
        return self.flag(0)

    @property
    def positive_vars(self) -> tuple[str, ...]:
        return tuple(v for v, w in zip(self.vars, self.weights) if w >= 1)

    @property
    def positive_weights(self) -> tuple[int, ...]:
        return tuple(w for w in self.weights if w >= 1)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.vars, self.weights))

    def assignment_text(self) -> str:
        return ",".join(f"{v}={w}" for v, w in zip(self.vars, self.weights))


def weight_sequence(assignments, order: int | None = None) -> WeightSequence:
    """Build a WeightSequence from name->weight assignments.

    Accepts a mapping or a sequence of (name, weight) pairs; insertion order
    breaks ties among equal weights.  The order defaults to the maximum
    weight (at least 1).
    """
    if isinstance(assignments, Mapping):
        pairs = list(assignments.items())
    else:
        pairs = list(assignments)
    if not pairs:
        raise ValueError("no weight assignments given")
    for name, w in pairs:
        if int(w) != w or w < 0:
            raise ValueError(f"weight of {name!r} must be a nonnegative integer")
    pairs.sort(key=lambda item: item[1])
    if order is None:
        order = max(1, max(w for _, w in pairs))
    return WeightSequence(tuple(n for n, _ in pairs),
                          tuple(int(w) for _, w in pairs), int(order))


_ASSIGN_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\d+)\s*$")


def parse_weight_assignments(text: str) -> list[tuple[str, int]]:
    """Parse "x=1,y=2,z=3" into ordered (name, weight) pairs."""
    pairs = []
    for chunk in text.split(","):
        m = _ASSIGN_RE.match(chunk)
        if m is None:
            raise ValueError(f"malformed weight assignment {chunk.strip()!r}")
        pairs.append((m.group(1), int(m.group(2))))
    return pairs


def weighted_degree(exponents: Sequence[int], weights: Sequence[int]) -> int:
    return sum(s * w for s, w in zip(exponents, weights))


def ideal_generators(W: WeightSequence, degree: int) -> set[tuple[int, ...]]:
    """Minimal monomial generators of the ideal of weighted degree >= degree.

    Exponent vectors run over the positive-weight variables of W.  A monomial
    x^s is a generator when s.w >= degree and decrementing any nonzero
    exponent drops the weighted degree below the threshold.
    """
    if degree < 1:
        raise ValueError("generator degree must be at least 1")
    w = W.positive_weights
    if not w:
        return set()
    out: set[tuple[int, ...]] = set()

    def walk(prefix: list[int], position: int, total: int):
        if position == len(w):
            if total >= degree and all(
                    s == 0 or total - wa < degree
                    for s, wa in zip(prefix, w)):
                out.add(tuple(prefix))
            return
        bound = 0 if total >= degree else -(-(degree - total) // w[position])
        for s in range(bound + 1):
            walk(prefix + [s], position + 1, total + s * w[position])

    walk([], 0, 0)
    return out


@dataclass(frozen=True)
class MultiWeight:
    """Per-variable weight vectors in Z_{>=0}^d."""

    vars: tuple[str, ...]
    weights: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.vars:
            raise ValueError("multi-weight needs at least one variable")
        if len(self.vars) != len(self.weights):
            raise ValueError("variable and weight counts differ")
        dims = {len(v) for v in self.weights}
        if len(dims) != 1:
            raise ValueError("weight vectors must share one dimension")
        if self.d < 1:
            raise ValueError("multi-weight dimension must be at least 1")
        if any(c < 0 for vec in self.weights for c in vec):
            raise ValueError("multi-weight entries must be nonnegative")

    @property
    def d(self) -> int:
        return len(self.weights[0])

    def vector_of(self, name: str) -> tuple[int, ...]:
        return self.weights[self.vars.index(name)]


_MULTI_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*\(([0-9,\s]*)\)\s*$")


def parse_multiweight(text: str) -> MultiWeight:
    """Parse "x=(1,0),y=(0,1)" into a MultiWeight."""
    names, vectors = [], []
    for chunk in re.split(r",(?![^()]*\))", text):
        m = _MULTI_RE.match(chunk)
        if m is None:
            raise ValueError(f"malformed multi-weight assignment {chunk.strip()!r}")
        names.append(m.group(1))
        vectors.append(tuple(int(c) for c in m.group(2).split(",")))
    return MultiWeight(tuple(names), tuple(vectors))


def total_weighting(mw: MultiWeight, order: int | None = None) -> WeightSequence:
    """Collapse a multi-weight to the single weighting with |w_a| per variable."""
    totals = [sum(vec) for vec in mw.weights]
    if order is None:
        order = max(1, max(totals))
    if order < max(totals):
        raise ValueError(f"order {order} below maximum total weight {max(totals)}")
    return weight_sequence(list(zip(mw.vars, totals)), order)


def multi_degree(exponents: Mapping[str, int], mw: MultiWeight) -> tuple:
    """Componentwise multi-weight s.w of a monomial given as name->exponent."""
    total = [0] * mw.d
    for name, s in exponents.items():
        vec = mw.vector_of(name)
        for k in range(mw.d):
            total[k] += s * vec[k]
    return tuple(total)


def multi_filtration_degree(p, mw: MultiWeight) -> tuple:
    """Componentwise minimum of term multi-degrees; infinities for zero.

    Accepts a WeightedPoly over a subset of the multi-weight variables.
    """
    if p.is_zero:
        return (math.inf,) * mw.d
    best = None
    for s, _ in p.terms:
        degree = multi_degree(dict(zip(p.pvars, s)), mw)
        if best is None:
            best = list(degree)
        else:
            best = [min(a, b) for a, b in zip(best, degree)]
    return tuple(best)
