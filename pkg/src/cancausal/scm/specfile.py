"""Reader and writer for the line-oriented model-spec text format.

Example::

    # mixed model in the style of the fig1a preset
    description: random coefficient on a hidden parent
    seed: 7
    node Z observed
    node X observed
    node Y observed
    node V hidden
    node eps hidden
    noise eta_z gaussian 0 1
    ...
    X = (+ (* 0.8 Z) eta_x)
    Y = (+ X Z (* eps V)
           eta_y)

Blank lines and ``#`` comments are ignored. An equation may span lines until
its parentheses balance. Every error carries the 1-based line and column.
"""

from __future__ import annotations

from pathlib import Path

from .expr import ParseError, parse_expr, resolve
from .model import ModelError, NoiseSpec, ScmModel

DISTRIBUTIONS = ("gaussian", "uniform", "laplace")


def _strip_comment(line):
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse_model_spec(text: str) -> ScmModel:
    nodes = []
    noises = []
    raw_eqs = {}
    description = ""
    seed = 0
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = _strip_comment(lines[i])
        i += 1
        body = line.strip()
        if not body:
            continue
        col = line.index(body[0]) + 1
        head = body.split()[0]
        if head.rstrip(":") == "description" and ":" in body:
            description = body.split(":", 1)[1].strip()
        elif head.rstrip(":") == "seed" and ":" in body:
            val = body.split(":", 1)[1].strip()
            try:
                seed = int(val)
            except ValueError:
                raise ParseError(f"seed must be an integer, got {val!r}", lineno, col) from None
        elif head == "node":
            parts = body.split()
            if len(parts) != 3 or parts[2] not in ("observed", "hidden"):
                raise ParseError("expected: node <name> observed|hidden", lineno, col)
            nodes.append((parts[1], parts[2] == "observed"))
        elif head == "noise":
            parts = body.split()
            if len(parts) != 5 or parts[2] not in DISTRIBUTIONS:
                raise ParseError(
                    "expected: noise <name> gaussian|uniform|laplace <p1> <p2>", lineno, col)
            try:
                params = (float(parts[3]), float(parts[4]))
            except ValueError:
                raise ParseError("noise parameters must be numbers", lineno, col) from None
            try:
                noises.append(NoiseSpec(parts[1], parts[2], params))
            except ModelError as exc:
                raise ParseError(str(exc), lineno, col) from None
        elif "=" in body:
            name, rhs = body.split("=", 1)
            name = name.strip()
            if not name.isidentifier():
                raise ParseError(f"bad node name {name!r}", lineno, col)
            rhs_col = line.index("=") + 2
            text_parts = [rhs]
            depth = rhs.count("(") - rhs.count(")")
            while depth > 0 and i < len(lines):
                more = _strip_comment(lines[i])
                i += 1
                text_parts.append(more)
                depth += more.count("(") - more.count(")")
            if name in raw_eqs:
                raise ParseError(f"second equation for {name!r}", lineno, col)
            # multi-line equations report columns relative to the first line
            expr = parse_expr(" ".join(text_parts), lineno, rhs_col)
            raw_eqs[name] = (expr, lineno, col)
        else:
            raise ParseError(f"unrecognised line {body!r}", lineno, col)

    node_names = [n for n, _ in nodes]
    noise_names = [nz.name for nz in noises]
    eqs = {}
    for name, (expr, lineno, col) in raw_eqs.items():
        if name not in node_names:
            raise ParseError(f"equation for undeclared node {name!r}", lineno, col)
        eqs[name] = resolve(expr, node_names, noise_names, lineno, col)
    for n in node_names:
        if n not in eqs:
            raise ParseError(f"node {n!r} has no equation")
    try:
        return ScmModel.from_equations(nodes, eqs, noises, description=description,
                                       default_seed=seed)
    except (ModelError, ValueError) as exc:
        raise ParseError(str(exc)) from None


def load_model_spec(path) -> ScmModel:
    return parse_model_spec(Path(path).read_text())


def format_model_spec(model: ScmModel) -> str:
    g = model.graph
    out = []
    if model.description:
        out.append(f"description: {model.description}")
    out.append(f"seed: {model.default_seed}")
    for v in g.nodes:
        out.append(f"node {v} {'observed' if g.is_observed(v) else 'hidden'}")
    for nz in model.noises.values():
        out.append(f"noise {nz.name} {nz.distribution} {nz.params[0]!r} {nz.params[1]!r}")
    for v in g.topological_order():
        out.append(f"{v} = {model.equations[v]}")
    return "\n".join(out) + "\n"
