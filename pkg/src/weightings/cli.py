"""Command-line interface.

One subcommand per library operation group; inputs come from flags or from a
problem file with INI-style sections ([weights], [map], [graph], [frame],
[coords]).  Output is canonical text by default or a versioned JSON envelope
with --json.  Exit codes: 0 success, 1 domain error (including a rejected
weighting check), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from typing import Sequence

from . import expr as ex
from . import fields as fl
from . import jets as jt
from . import spaces as sp
from . import subbundle as sb
from . import weights as wt
from . import wpoly as wp

JSON_SCHEMA_VERSION = "1"


class UsageError(ValueError):
    pass


@dataclass
class Command:
    name: str
    options: dict


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="weightings", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, help_text, *, weights=False, expr=False, degree=False,
            level=False, order=False, vars_=False, coeffs=False, file_=False,
            extra=()):
        p = sub.add_parser(name, help=help_text)
        if weights:
            p.add_argument("--weights", help="assignments like x=1,y=2,z=3")
        if vars_:
            p.add_argument("--vars", help="chart variables, comma separated")
        if expr:
            p.add_argument("--expr", help="expression text")
        if coeffs:
            p.add_argument("--coeffs",
                           help="vector field coefficients, ';' separated")
        if degree:
            p.add_argument("--degree", type=int, help="weighted degree")
        if level:
            p.add_argument("--level", type=int, help="prolongation level")
        if order:
            p.add_argument("--order", type=int, help="truncation order r")
        if file_:
            p.add_argument("--file", help="problem file path")
        for args, kwargs in extra:
            p.add_argument(*args, **kwargs)
        p.add_argument("--json", action="store_true", help="JSON output")
        return p

    add("wdeg", "filtration degree of a polynomial expression",
        weights=True, expr=True, order=True, file_=True)
    add("happrox", "homogeneous approximation of the given degree",
        weights=True, expr=True, degree=True, order=True, file_=True)
    add("gens", "minimal monomial generators of the degree ideal",
        weights=True, degree=True, order=True, file_=True)
    add("jet-lift", "function lift to the prolonged chart",
        vars_=True, expr=True, level=True, order=True)
    add("vf-lift", "vector field lift to the prolonged chart",
        vars_=True, coeffs=True, level=True, order=True)
    add("nu-trans", "induced map of graded coordinates", file_=True)
    add("def-interp", "deformation interpolant of a function",
        weights=True, expr=True, degree=True, order=True, file_=True)
    add("theta", "scaling field on the deformation chart",
        weights=True, order=True, file_=True)
    add("blowup", "weighted blow-up chart", weights=True, order=True,
        file_=True,
        extra=((("--center",), {"help": "center variable"}),
               (("--sign",), {"default": "+", "choices": ["+", "-"]})))
    add("check-q", "weighting criterion for a graph subbundle", file_=True)
    add("adapt", "adapted coordinates from a frame and initial coordinates",
        file_=True)
    add("euler-like", "test a field for the scaling normal form",
        weights=True, coeffs=True, order=True, file_=True)
    add("scale-order", "numeric scaling-order estimate",
        weights=True, expr=True, order=True, file_=True,
        extra=((("--seed",), {"type": int, "default": 0}),))
    add("nilpotent", "negative nilpotent frame algebra",
        weights=True, order=True, file_=True)
    add("total-weight", "total weighting of a multi-weight",
        order=True, file_=True,
        extra=((("--multi",), {"help": "assignments like x=(1,0),y=(0,1)"}),))
    return parser


def parse_invocation(argv: Sequence[str]) -> Command:
    parser = _build_parser()
    namespace = parser.parse_args(list(argv))
    if namespace.command is None:
        raise UsageError("a command is required")
    return Command(namespace.command, vars(namespace))


# ---------------------------------------------------------------------------
# problem files

_SECTIONS = ("weights", "map", "graph", "frame", "coords")
_SLOT_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\.(\d+)")


def parse_problem_file(text: str) -> dict[str, dict]:
    sections: dict[str, dict] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ValueError(f"line {lineno}: unknown section [{name}]")
            if name in sections:
                raise ValueError(f"line {lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if current is None:
            raise ValueError(f"line {lineno}: content before any section")
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if key in sections[current]:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        sections[current][key] = value
    return sections


def _weights_from_sections(sections, options) -> wt.WeightSequence:
    if options.get("weights"):
        pairs = wt.parse_weight_assignments(options["weights"])
        order = options.get("order")
        return wt.weight_sequence(pairs, order)
    if "weights" in sections:
        body = dict(sections["weights"])
        order = body.pop("order", None)
        pairs = [(name, int(value)) for name, value in body.items()]
        if not pairs:
            raise ValueError("[weights] section has no assignments")
        order = int(order) if order is not None else options.get("order")
        return wt.weight_sequence(pairs, order)
    raise UsageError("missing --weights (or a [weights] file section)")


def _sections_for(options) -> dict:
    path = options.get("file")
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        return parse_problem_file(handle.read())


def _parse_slot_poly(text: str, names: Sequence[str]) -> jt.JetPoly:
    """Parse a polynomial in slots written name.level into a JetPoly."""
    mangled = _SLOT_RE.sub(lambda m: f"{m.group(1)}__L{m.group(2)}", text)
    tree = ex.parse_expr(mangled)
    slot_vars = sorted(ex.variables(tree))
    poly = wp.poly_normal_form(tree, slot_vars)
    index = {name: a for a, name in enumerate(names)}
    terms: dict = {}
    for s, c in poly.terms:
        if not isinstance(c, ex.Const):
            raise ValueError(f"non-rational coefficient {ex.to_text(c)!r} "
                             f"in slot polynomial")
        mono = []
        for v, e in zip(slot_vars, s):
            if not e:
                continue
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)__L(\d+)", v)
            if m is None or m.group(1) not in index:
                raise ValueError(f"unknown slot {v.replace('__L', '.')!r}")
            mono.append(((index[m.group(1)], int(m.group(2))), e))
        terms[tuple(sorted(mono))] = c.value
    return jt.jetpoly(terms)


def _graph_from_sections(sections) -> sb.GraphSubbundle:
    if "graph" not in sections:
        raise UsageError("check-q needs a [graph] section (use --file)")
    body = dict(sections["graph"])
    if "vars" not in body or "order" not in body:
        raise ValueError("[graph] needs 'vars' and 'order' keys")
    names = tuple(v.strip() for v in body.pop("vars").split(","))
    order = int(body.pop("order"))
    constraints: dict = {}
    for key, value in body.items():
        parts = key.split()
        if len(parts) != 2 or parts[0] not in names or not parts[1].isdigit():
            raise ValueError(f"bad graph constraint key {key!r} "
                             f"(expected 'var level')")
        label = (names.index(parts[0]), int(parts[1]))
        constraints[label] = _parse_slot_poly(value, names)
    return sb.graph_subbundle(names, order, constraints)


def _frame_from_sections(sections, W: wt.WeightSequence) -> sb.Frame:
    if "frame" not in sections:
        raise UsageError("adapt needs a [frame] section")
    body = sections["frame"]
    rows = []
    for a in range(W.n):
        key = f"V{a + 1}"
        if key not in body:
            raise ValueError(f"[frame] is missing {key}")
        row = [ex.parse_expr(chunk) for chunk in body[key].split(",")]
        if len(row) != W.n:
            raise ValueError(f"{key} needs {W.n} coefficients")
        rows.append(row)
    extra = set(body) - {f"V{a + 1}" for a in range(W.n)}
    if extra:
        raise ValueError(f"[frame] has unknown keys {sorted(extra)}")
    return sb.frame(W, rows)


# ---------------------------------------------------------------------------
# execution and rendering

def _expr_arg(options, sections) -> ex.Expr:
    text = options.get("expr")
    if text is None and "map" in sections and len(sections["map"]) == 1:
        text = next(iter(sections["map"].values()))
    if text is None:
        raise UsageError("missing --expr")
    return ex.parse_expr(text)


def _vars_arg(options) -> tuple[str, ...]:
    if not options.get("vars"):
        raise UsageError("missing --vars")
    return tuple(v.strip() for v in options["vars"].split(","))


def _coeffs_arg(options, chart) -> list[ex.Expr]:
    if not options.get("coeffs"):
        raise UsageError("missing --coeffs")
    parts = [ex.parse_expr(chunk) for chunk in options["coeffs"].split(";")]
    if len(parts) != len(chart):
        raise UsageError(f"expected {len(chart)} coefficients, "
                         f"got {len(parts)}")
    return parts


def _wp_json(p: wp.WeightedPoly) -> dict:
    return {"vars": list(p.pvars),
            "terms": [{"exponents": list(s), "coefficient": ex.to_text(c)}
                      for s, c in p.terms]}


def _jp_json(p: jt.JetPoly, names) -> dict:
    return {"terms": [{"slots": [[names[a], j, e] for (a, j), e in m],
                       "coefficient": str(c)} for m, c in p.terms]}


def execute(cmd: Command) -> tuple[str, int, object]:
    """Run a parsed command; returns (text, exit code, json payload)."""
    options = cmd.options
    sections = _sections_for(options)
    name = cmd.name

    if name == "wdeg":
        W = _weights_from_sections(sections, options)
        p = wp.poly_normal_form(_expr_arg(options, sections), W.positive_vars)
        degree = wp.filtration_degree(p, W)
        text = "inf" if degree == float("inf") else str(degree)
        return text, 0, {"degree": text}

    if name == "happrox":
        W = _weights_from_sections(sections, options)
        if options.get("degree") is None:
            raise UsageError("missing --degree")
        degree = options["degree"]
        part = wp.homogeneous_part(
            wp.weighted_taylor(_expr_arg(options, sections), W, degree),
            W, degree)
        return wp.wpoly_text(part, W), 0, _wp_json(part)

    if name == "gens":
        W = _weights_from_sections(sections, options)
        if options.get("degree") is None:
            raise UsageError("missing --degree")
        gens = wt.ideal_generators(W, options["degree"])
        w = list(W.positive_weights)
        ordered = sorted(gens, key=lambda s: (wt.weighted_degree(s, w), s))
        texts = [wp.monomial_text(W.positive_vars, s) for s in ordered]
        payload = [{"exponents": list(s), "coefficient": "1"} for s in ordered]
        return ", ".join(texts), 0, payload

    if name == "jet-lift":
        chart = _vars_arg(options)
        if options.get("level") is None or options.get("order") is None:
            raise UsageError("jet-lift needs --level and --order")
        lifted = jt.jet_lift(_expr_arg(options, sections), options["level"],
                             options["order"], chart)
        return jt.jp_text(lifted, chart), 0, _jp_json(lifted, chart)

    if name == "vf-lift":
        chart = _vars_arg(options)
        if options.get("level") is None or options.get("order") is None:
            raise UsageError("vf-lift needs --level and --order")
        coeffs = _coeffs_arg(options, chart)
        X = fl.vf_from_exprs(chart, coeffs, chart)
        xi = jt.vf_lift(X, options["level"], options["order"])
        lines = [f"d/d[{chart[a]}.{k}]: {jt.jp_text(c, chart)}"
                 for (a, k), c in xi.terms]
        payload = [{"slot": [chart[a], k], "coefficient": _jp_json(c, chart)}
                   for (a, k), c in xi.terms]
        return "\n".join(lines) if lines else "0", 0, payload

    if name == "nu-trans":
        if "map" not in sections:
            raise UsageError("nu-trans needs a [map] section (use --file)")
        W = _weights_from_sections(sections, options)
        components = []
        for v in W.vars:
            if v not in sections["map"]:
                raise ValueError(f"[map] is missing component for {v!r}")
            components.append(ex.parse_expr(sections["map"][v]))
        extra = set(sections["map"]) - set(W.vars)
        if extra:
            raise ValueError(f"[map] has unknown keys {sorted(extra)}")
        phi = sp.coordinate_change(W, W, components)
        out = sp.nu_transition(phi)
        names = sp.deformation_names(W)
        lines = [f"{n} -> {ex.to_text(c)}" for n, c in zip(names, out)]
        payload = {n: ex.to_text(c) for n, c in zip(names, out)}
        return "\n".join(lines), 0, payload

    if name == "def-interp":
        W = _weights_from_sections(sections, options)
        if options.get("degree") is None:
            raise UsageError("missing --degree")
        F = sp.def_interpolant(_expr_arg(options, sections),
                               options["degree"], W)
        return ex.to_text(F.expression), 0, {"expression": ex.to_text(F.expression),
                                             "degree": F.degree}

    if name == "theta":
        W = _weights_from_sections(sections, options)
        th = sp.theta_field(W)
        return str(th), 0, {n: ex.to_text(c) for n, c in th.components}

    if name == "blowup":
        W = _weights_from_sections(sections, options)
        if not options.get("center"):
            raise UsageError("missing --center")
        chart = sp.blowup_chart(W, options["center"], options.get("sign", "+"))
        lines = [f"{n} = {sp.monomial_text(c, m)}"
                 for n, (c, m) in chart.components]
        payload = {n: sp.monomial_text(c, m) for n, (c, m) in chart.components}
        return "\n".join(lines), 0, payload

    if name == "check-q":
        Q = _graph_from_sections(sections)
        verdict = sb.check_weighting(Q)
        if verdict.accepted:
            payload = {"verdict": "weighting",
                       "weights": list(verdict.weights.weights),
                       "vars": list(verdict.weights.vars)}
            return str(verdict), 0, payload
        text = f"{verdict.reason}: {verdict.witness}"
        if verdict.details:
            text += (f" (reconstructed dimension "
                     f"{verdict.details['reconstructed_dim']} vs "
                     f"{verdict.details['graph_dim']})")
        payload = {"verdict": "rejected", "reason": verdict.reason,
                   "witness": verdict.witness, "details": verdict.details}
        return text, 1, payload

    if name == "adapt":
        W = _weights_from_sections(sections, options)
        fr = _frame_from_sections(sections, W)
        if "coords" not in sections:
            raise UsageError("adapt needs a [coords] section")
        names = list(sections["coords"])
        exprs = [ex.parse_expr(sections["coords"][n]) for n in names]
        change = sb.adapted_coordinates(fr, exprs, names)
        lines = [f"x{a + 1} = {ex.to_text(e)}"
                 for a, e in enumerate(change.x_in_y)]
        for (a, u), coeff in change.chi:
            lines.append(f"chi[{a + 1}][{','.join(map(str, u))}] = "
                         f"{ex.to_text(coeff)}")
        for u, c in change.normalizers:
            lines.append(f"c[{','.join(map(str, u))}] = {c}")
        payload = {
            "coordinates": [ex.to_text(e) for e in change.x_in_y],
            "chi": [{"target": a + 1, "multi_index": list(u),
                     "value": ex.to_text(coeff)}
                    for (a, u), coeff in change.chi],
            "normalizers": [{"multi_index": list(u), "value": str(c)}
                            for u, c in change.normalizers]}
        return "\n".join(lines), 0, payload

    if name == "euler-like":
        W = _weights_from_sections(sections, options)
        coeffs = _coeffs_arg(options, W.vars)
        X = fl.vf_for_weights(W, coeffs)
        verdict = sp.euler_like_check(X, W)
        return ("true" if verdict else "false"), 0, {"euler_like": verdict}

    if name == "scale-order":
        W = _weights_from_sections(sections, options)
        report = sp.scaling_order_estimate(_expr_arg(options, sections), W,
                                           seed=options.get("seed", 0))
        text = (f"order ~ {report.estimated_order:.4f} "
                f"(residual {report.residual:.2e}, samples {report.samples})")
        payload = {"order": report.estimated_order,
                   "residual": report.residual, "samples": report.samples}
        return text, 0, payload

    if name == "nilpotent":
        W = _weights_from_sections(sections, options)
        g = fl.nilpotent_frames(W)
        lines = [f"dim k = {g.dim}, dim l = {g.dim_sub}"]
        for i in range(g.dim):
            marker = " (in l)" if g.in_subalgebra[i] else ""
            lines.append(f"  b{i + 1} = {g.label_text(i)}  "
                         f"degree {g.degrees[i]}{marker}")
        for (i, j), entries in g.brackets:
            body = " + ".join(
                (f"{c}*b{k + 1}" if c != 1 else f"b{k + 1}")
                for k, c in entries)
            lines.append(f"  [b{i + 1}, b{j + 1}] = {body}")
        payload = {"dim": g.dim, "dim_sub": g.dim_sub,
                   "basis": [g.label_text(i) for i in range(g.dim)],
                   "degrees": list(g.degrees)}
        return "\n".join(lines), 0, payload

    if name == "total-weight":
        if not options.get("multi"):
            raise UsageError("missing --multi")
        mw = wt.parse_multiweight(options["multi"])
        W = wt.total_weighting(mw, options.get("order"))
        return W.assignment_text(), 0, {"weights": W.as_dict(),
                                        "order": W.order}

    raise UsageError(f"unknown command {name!r}")


def render(text: str, payload: object, cmd: Command) -> str:
    if cmd.options.get("json"):
        envelope = {"op": cmd.name, "version": JSON_SCHEMA_VERSION,
                    "result": payload}
        return json.dumps(envelope, sort_keys=True)
    return text


def main(argv: Sequence[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        cmd = parse_invocation(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    try:
        text, code, payload = execute(cmd)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(render(text, payload, cmd))
    return code


if __name__ == "__main__":
    sys.exit(main())
