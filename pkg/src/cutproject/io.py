"""Scheme/job files, the inline window grammar, and CSV/SVG emitters.

Scheme files are JSON objects with the keys ``name``, ``d``, ``m``, ``N``,
``M`` and ``c``.  ``M`` is given row-major, either as a list of rows or as a
flat list of ``(d+m)^2`` numbers.  Matrix entries may be numbers or short
arithmetic strings such as ``"(1+sqrt(5))/2"``.

Inline windows::

    window := term ('+' term)*
    term   := [coef '@'] factor ('*' factor)*
    factor := 'box:' a ',' b [',open'] | 'tent:' w | 'cyclic:' '{' s, ... '}' | 'one'

Euclidean factors are assigned to internal axes in order; a missing cyclic
factor means all of Z/N.
"""

import ast
import csv
import json
import math
import operator
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import CutProjectError, ParseError, SignatureMismatch
from .scheme import new_scheme
from .windows import AxisFactor, WeightFunction, WeightTerm

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "cos": math.cos, "sin": math.sin, "exp": math.exp, "log": math.log}
_CONSTS = {"pi": math.pi, "e": math.e}


def eval_number(text, field_name=None):
    """Evaluate a numeric literal or a small arithmetic expression."""
    if isinstance(text, bool):
        raise ParseError(f"expected a number, got {text!r}", field_name)
    if isinstance(text, (int, float)):
        return float(text)
    if not isinstance(text, str):
        raise ParseError(f"expected a number, got {text!r}", field_name)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](walk(node.args[0]))
        raise ParseError(f"unsupported expression {text!r}", field_name)

    try:
        return walk(ast.parse(text.strip(), mode="eval"))
    except SyntaxError:
        raise ParseError(f"cannot parse number {text!r}", field_name) from None


def _line_of(raw, key):
    for i, line in enumerate(raw.splitlines(), 1):
        if f'"{key}"' in line:
            return i
    return None


_SCHEME_KEYS = {"name", "d", "m", "N", "M", "c"}


def scheme_from_dict(data, raw=""):
    if not isinstance(data, dict):
        raise ParseError("scheme file must contain a JSON object")
    unknown = set(data) - _SCHEME_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ParseError(f"unknown key {key!r}", key, _line_of(raw, key))
    for key in ("d", "m", "M", "c"):
        if key not in data:
            raise ParseError("missing required key", key)

    def integer(key, default=None):
        v = data.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ParseError(f"expected an integer, got {v!r}", key, _line_of(raw, key))
        return v

    d, m, N = integer("d"), integer("m"), integer("N", 1)
    D = d + m
    M = data["M"]
    if not isinstance(M, list):
        raise ParseError("M must be a list", "M", _line_of(raw, "M"))
    if M and all(not isinstance(r, list) for r in M):
        if len(M) != D * D:
            raise ParseError(f"flat M needs {D * D} entries, got {len(M)}", "M", _line_of(raw, "M"))
        M = [M[i * D:(i + 1) * D] for i in range(D)]
    if len(M) != D:
        raise ParseError(f"M needs {D} rows, got {len(M)}", "M", _line_of(raw, "M"))
    rows = []
    for i, row in enumerate(M):
        if not isinstance(row, list) or len(row) != D:
            got = len(row) if isinstance(row, list) else "a scalar"
            raise ParseError(f"row {i} of M has {got} entries, expected {D}", f"M[{i}]",
                             _line_of(raw, "M"))
        rows.append([eval_number(v, f"M[{i}]") for v in row])
    c = data["c"]
    if not isinstance(c, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in c):
        raise ParseError("c must be a list of integers", "c", _line_of(raw, "c"))
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ParseError("name must be a string", "name")
    return new_scheme(d, m, N, rows, c, name=name)


def parse_scheme_file(path):
    """Read and validate a scheme file.

    Raises
    ------
    ParseError
        Malformed JSON or fields (names the offending field).
    CutProjectError
        Scheme validation errors are passed through unchanged.
    """
    with open(path) as fh:
        raw = fh.read()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return scheme_from_dict(data, raw)


def dump_scheme(scheme, path=None):
    text = json.dumps(scheme.to_dict(), indent=2) + "\n"
    if path is not None:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text


def _split_top(text, sep):
    parts, depth, cur = [], 0, []
    for i, ch in enumerate(text):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == sep and depth == 0:
            # keep exponent signs such as 1e+3
            if sep == "+" and i > 1 and text[i - 1] in "eE" and text[i - 2].isdigit():
                cur.append(ch)
                continue
            parts.append("".join(cur))
            cur = []
            continue
        cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _parse_factor(text, N):
    head, _, body = text.partition(":")
    head = head.strip().lower()
    if head == "one" and not body:
        return None
    if head == "box":
        args = [a.strip() for a in body.split(",")]
        closed = True
        if args and args[-1].lower() in ("open", "halfopen", "half-open"):
            closed = False
            args = args[:-1]
        if len(args) != 2:
            raise ParseError(f"box needs two endpoints: {text!r}", "window")
        a, b = (eval_number(v, "window") for v in args)
        return AxisFactor(((a, b),), closed)
    if head == "tent":
        w = eval_number(body, "window")
        if w <= 0:
            raise ParseError("tent halfwidth must be positive", "window")
        return AxisFactor(((-w, w), (-w, w)))
    if head == "cyclic":
        body = body.strip().strip("{}")
        v = np.zeros(N)
        for s in filter(None, (p.strip() for p in body.split(","))):
            try:
                v[int(s) % N] = 1.0
            except ValueError:
                raise ParseError(f"bad residue {s!r}", "window") from None
        return v
    raise ParseError(f"unknown window factor {text!r}", "window")


def parse_window(text, m, N):
    """Build a :class:`WeightFunction` on R^m x Z/N from the inline grammar."""
    if not text or not text.strip():
        raise ParseError("empty window", "window")
    terms, kinds = [], set()
    for term_text in _split_top(text, "+"):
        coef = 1.0
        if "@" in term_text:
            c_text, term_text = term_text.split("@", 1)
            try:
                coef = complex(c_text.replace(" ", ""))
            except ValueError:
                coef = eval_number(c_text, "window")
        axes, cyc = [], None
        for f_text in _split_top(term_text, "*"):
            part = _parse_factor(f_text, N)
            if part is None:
                continue
            if isinstance(part, AxisFactor):
                axes.append(part)
                kinds.add("Tent" if part.order == 2 else "BoxIndicator")
            elif cyc is None:
                cyc = part
            else:
                cyc = cyc * part
        if len(axes) != m:
            raise SignatureMismatch(f"window has {len(axes)} Euclidean factors, scheme has m={m}")
        if cyc is None:
            cyc = np.ones(N)
        terms.append(WeightTerm(coef, tuple(axes), cyc))
    if len(terms) > 1:
        kind = "FiniteCombination"
    elif len(kinds) == 1:
        kind = kinds.pop()
    elif not kinds:
        kind = "BoxIndicator"
    else:
        kind = "FiniteCombination"
    return WeightFunction(tuple(terms), m, N, kind)


_WINDOW_KEYS = {"kind", "intervals", "halfwidths", "cyclic_subset", "coefficients", "terms", "closed"}


def window_from_dict(data, m, N):
    """Window from its JSON form (``kind`` = box, tent or combination)."""
    if isinstance(data, str):
        return parse_window(data, m, N)
    unknown = set(data) - _WINDOW_KEYS
    if unknown:
        raise ParseError(f"unknown window key {sorted(unknown)[0]!r}", "window")
    kind = str(data.get("kind", "box")).lower()
    subset = data.get("cyclic_subset")
    cyc = "" if subset is None else "*cyclic:{" + ",".join(str(int(s)) for s in subset) + "}"
    if kind in ("box", "boxindicator"):
        ivs = data.get("intervals", [])
        suffix = "" if data.get("closed", True) else ",open"
        factors = [f"box:{float(a)!r},{float(b)!r}{suffix}" for a, b in ivs]
        return parse_window("*".join(factors or ["one"]) + cyc, m, N)
    if kind == "tent":
        ws = data.get("halfwidths", [])
        factors = [f"tent:{float(w)!r}" for w in np.atleast_1d(ws)]
        return parse_window("*".join(factors or ["one"]) + cyc, m, N)
    if kind in ("combination", "finitecombination"):
        parts = [window_from_dict(t, m, N) for t in data.get("terms", [])]
        coefs = data.get("coefficients", [1.0] * len(parts))
        if len(coefs) != len(parts) or not parts:
            raise ParseError("coefficients and terms must have equal nonzero length", "window")
        terms = []
        for coef, h in zip(coefs, parts):
            coef = complex(coef) if not isinstance(coef, list) else complex(*coef)
            terms.extend(WeightTerm(coef * t.coef, t.axes, t.cyclic) for t in h.terms)
        return WeightFunction(tuple(terms), m, N, "FiniteCombination")
    raise ParseError(f"unknown window kind {kind!r}", "window")


@dataclass
class JobConfig:
    """Parameters of one command, read from a JSON job file."""

    scheme: str = None
    window: object = None
    n: float = None
    t: list = None
    radius: float = None
    dual_box: list = None
    eps: float = None
    tol: float = None
    n_list: list = None
    t_list: list = None
    chi_list: list = None
    k_list: list = None
    width: float = None
    out: str = None
    format: str = None
    extra: dict = field(default_factory=dict)

    _positive = ("n", "radius", "eps", "tol", "width")

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)} - {"extra"}
        unknown = set(data) - names
        if unknown:
            raise ParseError(f"unknown job key {sorted(unknown)[0]!r}", sorted(unknown)[0])
        cfg = cls(**data)
        for key in cls._positive:
            v = getattr(cfg, key)
            if v is not None and not (isinstance(v, (int, float)) and v > 0):
                raise ParseError(f"{key} must be a positive number", key)
        if cfg.format is not None and cfg.format not in ("csv", "json", "svg"):
            raise ParseError("format must be csv, json or svg", "format")
        return cfg

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
        if not isinstance(data, dict):
            raise ParseError("job file must contain a JSON object")
        return cls.from_dict(data)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def emit_csv(rows, path, header=None):
    """Write rows as CSV with ``.`` decimals, ``\\n`` line ends and repr floats."""
    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])

    if path is None or path == "-":
        import sys

        write(sys.stdout)
        return
    try:
        with open(path, "w", newline="") as fh:
            write(fh)
    except OSError as exc:
        raise CutProjectError(f"cannot write {path}: {exc}") from exc


def svg_stem_plot(locations, heights, x_range=None, title="diffraction", xlabel="frequency",
                  ylabel="intensity"):
    """Stem plot as an SVG string; one vertical line per peak."""
    W, H, L, R, T, B = 640, 360, 60, 20, 30, 45
    locations = np.asarray(locations, dtype=float).reshape(-1)
    heights = np.asarray(heights, dtype=float).reshape(-1)
    if x_range is None:
        x_range = (locations.min(), locations.max()) if len(locations) else (-1.0, 1.0)
    x0, x1 = float(x_range[0]), float(x_range[1])
    if x1 <= x0:
        x1 = x0 + 1.0
    ymax = float(heights.max()) if len(heights) else 1.0
    ymax = ymax if ymax > 0 else 1.0

    def px(x):
        return L + (x - x0) / (x1 - x0) * (W - L - R)

    def py(y):
        return H - B - y / ymax * (H - T - B) * 0.95

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<title>{title}</title>',
        '<g id="axes" stroke="black" stroke-width="1">',
        f'<line x1="{L}" y1="{H - B}" x2="{W - R}" y2="{H - B}"/>',
        f'<line x1="{L}" y1="{H - B}" x2="{L}" y2="{T}"/>',
        "</g>",
        '<g id="ticks" font-family="sans-serif" font-size="11" text-anchor="middle">',
    ]
    for x in np.linspace(x0, x1, 5):
        out.append(f'<text x="{px(x):.2f}" y="{H - B + 16}">{x:.4g}</text>')
    for y in np.linspace(0, ymax, 3):
        out.append(f'<text x="{L - 8}" y="{py(y) + 4:.2f}" text-anchor="end">{y:.3g}</text>')
    out.append("</g>")
    out.append(
        f'<text x="{(L + W - R) / 2:.1f}" y="{H - 8}" font-family="sans-serif" '
        f'font-size="12" text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="14" y="{(T + H - B) / 2:.1f}" font-family="sans-serif" font-size="12" '
        f'text-anchor="middle" transform="rotate(-90 14 {(T + H - B) / 2:.1f})">{ylabel}</text>'
    )
    out.append('<g id="stems" stroke="steelblue" stroke-width="1.5">')
    for x, y in zip(locations, heights):
        out.append(
            f'<line x1="{px(x):.3f}" y1="{H - B}" x2="{px(x):.3f}" y2="{py(y):.3f}"/>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(comb, path, x_range=None):
    """Write a dual-side comb as an SVG stem plot (1-D frequencies only)."""
    if comb.side != "dual":
        raise ValueError("emit_svg expects a dual-side comb")
    if comb.d != 1:
        raise ValueError("stem plots need one-dimensional frequencies")
    text = svg_stem_plot(comb.locations[:, 0], np.abs(comb.amplitudes), x_range)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CutProjectError(f"cannot write {path}: {exc}") from exc
    return text
