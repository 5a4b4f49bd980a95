"""Shared deterministic random generators for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from weightings import expr as ex
from weightings import wpoly as wp
from weightings.weights import WeightSequence, weight_sequence


def rand_rational(rng: random.Random, zero_ok: bool = True) -> Fraction:
    num = rng.randint(-6, 6)
    if not zero_ok and num == 0:
        num = 1
    return Fraction(num, rng.randint(1, 4))


def rand_poly_expr(rng: random.Random, names, max_degree: int = 4,
                   max_terms: int = 4) -> ex.Expr:
    """Random polynomial expression with rational coefficients."""
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        factors = [ex.const(rand_rational(rng, zero_ok=False))]
        budget = rng.randint(0, max_degree)
        for _ in range(budget):
            factors.append(ex.var(rng.choice(names)))
        terms.append(ex.mul(*factors))
    return ex.add(*terms)


def rand_expr(rng: random.Random, names, depth: int = 3) -> ex.Expr:
    """Random canonical expression tree including transcendental heads."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.4:
            return ex.const(rand_rational(rng))
        return ex.var(rng.choice(names))
    kind = rng.randrange(4)
    if kind == 0:
        return ex.add(*[rand_expr(rng, names, depth - 1)
                        for _ in range(rng.randint(2, 3))])
    if kind == 1:
        return ex.mul(*[rand_expr(rng, names, depth - 1)
                        for _ in range(rng.randint(2, 3))])
    if kind == 2:
        base = rand_expr(rng, names, depth - 1)
        exponent = rng.choice([2, 3, -1, -2])
        if exponent < 0 and base == ex.ZERO:
            base = ex.var(names[0])
        try:
            return ex.pow_(base, exponent)
        except ValueError:
            return ex.pow_(ex.var(names[0]), exponent)
    return ex.app(rng.choice(["sin", "cos", "exp"]),
                  rand_expr(rng, names, depth - 1))


def rand_weight_sequence(rng: random.Random, max_n: int = 3,
                         max_order: int = 4, min_weight: int = 1) -> WeightSequence:
    n = rng.randint(1, max_n)
    names = [f"x{i + 1}" for i in range(n)]
    weights = sorted(rng.randint(min_weight, max_order) for _ in range(n))
    order = max(max(weights), rng.randint(max(weights), max_order))
    return weight_sequence(list(zip(names, weights)), order)


def rand_wpoly(rng: random.Random, W: WeightSequence, max_degree: int = 4,
               max_terms: int = 4, coeff_vars: bool = True) -> wp.WeightedPoly:
    """Random WeightedPoly; coefficients may involve the weight-0 variables."""
    pvars = W.positive_vars
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        s = tuple(rng.randint(0, max_degree // max(1, len(pvars)))
                  for _ in pvars)
        coeff: ex.Expr = ex.const(rand_rational(rng, zero_ok=False))
        if coeff_vars and W.zero_vars and rng.random() < 0.5:
            coeff = ex.mul(coeff, ex.var(rng.choice(W.zero_vars)))
        terms[s] = ex.add(terms.get(s, ex.ZERO), coeff)
    return wp.wpoly(pvars, terms)
