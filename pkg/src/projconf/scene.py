"""Line-oriented scene files.

Example::

    # round sphere in stereographic coordinates
    [chart] n=3 vars=x0,x1,x2
    [metric]
    diag(4/(1+x0^2+x1^2+x2^2)^2, 4/(1+x0^2+x1^2+x2^2)^2, 4/(1+x0^2+x1^2+x2^2)^2)
    [beta]
    0, 0, 0

Sections and accepted body lines:

* ``[chart]``: ``n=3``, ``vars=x0,x1,x2``, optional ``fiber=p1,p2`` (names of
  the first-derivative variables in ``[odes]``),
  ``signature=+1`` and ``degree_bound=64``.
* ``[metric]``: ``diag(e0, ..., e{n-1})``, or n rows of comma-separated entries,
  or ``i j = expr`` lines (the symmetric entry is filled in).
* ``[connection]``, ``[connection2]``: ``i j k = expr`` lines for G^i_{jk}.
* ``[beta]``: one comma-separated row, or ``i = expr`` lines.
* ``[odes]``: ``F1 = expr`` and ``F2 = expr``.
* ``[quartic]``: ``coeffs = C4, C3, C2, C1, C0``.
* ``[samples]``: comma-separated rational points, one per line.
* ``[geodesic]``: ``x0 = ...``, ``v0 = ...``, ``h = ...``, ``steps = ...``.

Text after a section header on the same line is read as its first body line.
Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .affine import MetricError, MetricField, WeylStructureField
from .projective import ODEPair
from .symkernel import Chart, ParseError, SymkernelError, UnknownVariableError
from .tensor import DOWN, ConnectionField, TensorError, TensorField

SECTIONS = ("chart", "metric", "connection", "connection2", "beta", "odes", "quartic", "samples", "geodesic")

_HEADER = re.compile(r"^\s*\[([A-Za-z0-9_]+)\]\s*(.*)$")
_KEYVALS = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)(?=\s+[A-Za-z_][A-Za-z0-9_]*\s*=|\s*$)")


class SceneError(ValueError):
    def __init__(self, message, line=None, column=None, path=None):
        self.message = message
        self.line = line
        self.column = column
        self.path = path
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(f"{path + ': ' if path else ''}{where}{message}")


@dataclass
class _Line:
    number: int
    column: int  # 1-based column of text[0]
    text: str


@dataclass
class Scene:
    chart: Chart
    signature: int = 1
    metric: MetricField | None = None
    connection: ConnectionField | None = None
    connection2: ConnectionField | None = None
    beta: TensorField | None = None
    odes: ODEPair | None = None
    quartic: list | None = None
    samples: list = field(default_factory=list)
    geodesic: dict = field(default_factory=dict)
    digest: str = ""
    path: str | None = None

    def weyl_structure(self):
        if self.metric is None:
            raise SceneError("scene has no [metric] section")
        return WeylStructureField(self.metric, self.beta)

    def with_signature(self, signature):
        if self.metric is None:
            self.signature = signature
            return self
        self.metric = MetricField(self.chart, self.metric.g, signature)
        self.signature = signature
        return self


def _split_sections(text):
    sections = {}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        m = _HEADER.match(stripped)
        if m:
            name = m.group(1).lower()
            if name not in SECTIONS:
                raise SceneError(f"unknown section [{name}]", number, stripped.index("[") + 1)
            if name in sections:
                raise SceneError(f"duplicate section [{name}]", number, stripped.index("[") + 1)
            sections[name] = []
            current = name
            rest = m.group(2)
            if rest.strip():
                col = len(stripped) - len(rest) + 1
                sections[name].append(_Line(number, col + (len(rest) - len(rest.lstrip())), rest.strip()))
            continue
        if current is None:
            raise SceneError("content before the first section header", number, 1)
        lead = len(stripped) - len(stripped.lstrip())
        sections[current].append(_Line(number, lead + 1, stripped.strip()))
    return sections


def _keyvals(lines, allowed):
    out = {}
    for ln in lines:
        matches = list(_KEYVALS.finditer(ln.text))
        covered = "".join(ln.text[m.start() : m.end()] for m in matches)
        if not matches or len(covered.replace(" ", "")) != len(ln.text.replace(" ", "")):
            raise SceneError(f"expected key=value pairs, got {ln.text!r}", ln.number, ln.column)
        for m in matches:
            key = m.group(1)
            if key not in allowed:
                raise SceneError(f"unknown key {key!r}", ln.number, ln.column + m.start())
            out[key] = (m.group(2).strip(), ln.number, ln.column + m.start(2))
    return out


def _expr(chart, text, number, column):
    try:
        return chart.parse(text)
    except ParseError as exc:
        raise SceneError(str(exc), number, column + exc.position) from None
    except UnknownVariableError as exc:
        raise SceneError(str(exc), number, column + getattr(exc, "position", 0)) from None
    except SymkernelError as exc:
        raise SceneError(str(exc), number, column) from None


def _split_commas(text, number, column):
    """Split at top-level commas; returns (piece, column) pairs."""
    pieces = []
    depth = 0
    start = 0
    for i, ch in enumerate(text + ","):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            piece = text[start:i]
            lead = len(piece) - len(piece.lstrip())
            pieces.append((piece.strip(), column + start + lead))
            start = i + 1
    if depth != 0:
        raise SceneError("unbalanced parentheses", number, column)
    return pieces


def _rational(text, number, column):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise SceneError(f"expected a rational number, got {text.strip()!r}", number, column) from None


def _indices(text, count, n, number, column):
    parts = text.split()
    if len(parts) != count or not all(p.isdigit() for p in parts):
        raise SceneError(f"expected {count} indices before '='", number, column)
    idx = tuple(int(p) for p in parts)
    if any(i >= n for i in idx):
        raise SceneError(f"index out of range for n = {n}", number, column)
    return idx


def _parse_chart(lines):
    kv = _keyvals(lines, {"n", "vars", "fiber", "signature", "degree_bound"})
    if "n" not in kv:
        ln = lines[0] if lines else None
        raise SceneError("[chart] needs n", ln.number if ln else None)
    n_text, num, col = kv["n"]
    if not n_text.isdigit():
        raise SceneError(f"n must be an integer, got {n_text!r}", num, col)
    n = int(n_text)
    base = None
    if "vars" in kv:
        base = [v.strip() for v in kv["vars"][0].split(",")]
    fiber = ()
    if "fiber" in kv:
        fiber = tuple(v.strip() for v in kv["fiber"][0].split(","))
    signature = 1
    if "signature" in kv:
        s, num2, col2 = kv["signature"]
        if s not in ("1", "+1", "-1"):
            raise SceneError(f"signature must be +1 or -1, got {s!r}", num2, col2)
        signature = int(s)
    bound = 64
    if "degree_bound" in kv:
        b, num3, col3 = kv["degree_bound"]
        if not b.isdigit():
            raise SceneError("degree_bound must be a positive integer", num3, col3)
        bound = int(b)
    try:
        chart = Chart(n, base, (), bound)
        if fiber:
            chart.lifted(fiber)
    except ValueError as exc:
        raise SceneError(str(exc), num, col) from None
    return chart, signature, fiber or ("p1", "p2")


def _parse_metric(chart, lines, signature):
    n = chart.n
    zero = chart.zero()
    if len(lines) == 1 and lines[0].text.startswith("diag("):
        ln = lines[0]
        if not ln.text.endswith(")"):
            raise SceneError("diag(...) is missing ')'", ln.number, ln.column + len(ln.text))
        inner = ln.text[5:-1]
        pieces = _split_commas(inner, ln.number, ln.column + 5)
        if len(pieces) != n:
            raise SceneError(f"diag needs {n} entries, got {len(pieces)}", ln.number, ln.column)
        diag = [_expr(chart, t, ln.number, c) for t, c in pieces]
        rows = [[diag[i] if i == j else zero for j in range(n)] for i in range(n)]
    elif lines and all("=" in ln.text for ln in lines):
        table = {}
        for ln in lines:
            left, right = ln.text.split("=", 1)
            i, j = _indices(left, 2, n, ln.number, ln.column)
            e = _expr(chart, right.strip(), ln.number, ln.column + len(left) + 1 + (len(right) - len(right.lstrip())))
            for key in ((i, j), (j, i)):
                if key in table and table[key] != e:
                    raise SceneError(f"conflicting metric entries at {key}", ln.number, ln.column)
                table[key] = e
        rows = [[table.get((i, j), zero) for j in range(n)] for i in range(n)]
    else:
        if len(lines) != n:
            raise SceneError(f"[metric] needs diag(...), {n} rows, or 'i j = expr' lines", lines[0].number if lines else None)
        rows = []
        for ln in lines:
            pieces = _split_commas(ln.text, ln.number, ln.column)
            if len(pieces) != n:
                raise SceneError(f"metric row needs {n} entries, got {len(pieces)}", ln.number, ln.column)
            rows.append([_expr(chart, t, ln.number, c) for t, c in pieces])
    try:
        return MetricField(chart, rows, signature)
    except (MetricError, TensorError) as exc:
        ln = lines[0] if lines else None
        raise SceneError(str(exc), ln.number if ln else None) from None


def _parse_connection(chart, lines):
    entries = {}
    for ln in lines:
        if "=" not in ln.text:
            raise SceneError("expected 'i j k = expr'", ln.number, ln.column)
        left, right = ln.text.split("=", 1)
        idx = _indices(left, 3, chart.n, ln.number, ln.column)
        e = _expr(chart, right.strip(), ln.number, ln.column + len(left) + 1 + (len(right) - len(right.lstrip())))
        i, j, k = idx
        for key in ((i, j, k), (i, k, j)):
            if key in entries and entries[key] != e:
                raise SceneError(f"conflicting Christoffel entries at {key}", ln.number, ln.column)
        entries[i, min(j, k), max(j, k)] = e
    return ConnectionField.from_entries(chart, entries)


def _parse_beta(chart, lines):
    n = chart.n
    if len(lines) == 1 and "=" not in lines[0].text:
        ln = lines[0]
        pieces = _split_commas(ln.text, ln.number, ln.column)
        if len(pieces) != n:
            raise SceneError(f"beta needs {n} entries, got {len(pieces)}", ln.number, ln.column)
        return TensorField(chart, (DOWN,), [_expr(chart, t, ln.number, c) for t, c in pieces])
    vals = [chart.zero()] * n
    for ln in lines:
        if "=" not in ln.text:
            raise SceneError("expected 'i = expr'", ln.number, ln.column)
        left, right = ln.text.split("=", 1)
        (i,) = _indices(left, 1, n, ln.number, ln.column)
        vals[i] = _expr(chart, right.strip(), ln.number, ln.column + len(left) + 1 + (len(right) - len(right.lstrip())))
    return TensorField(chart, (DOWN,), vals)


def _parse_odes(chart, lines):
    kv = _keyvals(lines, {"F1", "F2"})
    if set(kv) != {"F1", "F2"}:
        ln = lines[0] if lines else None
        raise SceneError("[odes] needs F1 and F2", ln.number if ln else None)
    f = [_expr(chart, *kv[k]) for k in ("F1", "F2")]
    return ODEPair(chart, f[0], f[1])


def _parse_rational_list(ln, count=None):
    pieces = _split_commas(ln.text, ln.number, ln.column)
    if count is not None and len(pieces) != count:
        raise SceneError(f"expected {count} numbers, got {len(pieces)}", ln.number, ln.column)
    return [_rational(t, ln.number, c) for t, c in pieces]


def _parse_geodesic(chart, lines):
    kv = _keyvals(lines, {"x0", "v0", "h", "steps"})
    out = {}
    for key in ("x0", "v0"):
        if key in kv:
            text, num, col = kv[key]
            out[key] = _parse_rational_list(_Line(num, col, text), chart.n)
    if "h" in kv:
        out["h"] = _rational(*kv["h"])
        if out["h"] <= 0:
            raise SceneError("h must be positive", kv["h"][1], kv["h"][2])
    if "steps" in kv:
        text, num, col = kv["steps"]
        if not text.isdigit():
            raise SceneError("steps must be a non-negative integer", num, col)
        out["steps"] = int(text)
    return out


def parse_scene(text, path=None, degree_bound=None):
    try:
        return _parse_scene(text, path, degree_bound)
    except SceneError as exc:
        if exc.path is None and path is not None:
            raise SceneError(exc.message, exc.line, exc.column, str(path)) from None
        raise


def _parse_scene(text, path, degree_bound):
    sections = _split_sections(text)
    if "chart" in sections:
        chart, signature, fiber = _parse_chart(sections["chart"])
    elif set(sections) <= {"odes", "samples", "quartic"}:
        chart, signature, fiber = Chart(3), 1, ("p1", "p2")
    else:
        raise SceneError("missing [chart] section")
    if degree_bound is not None:
        chart = chart.with_degree_bound(degree_bound)
    scene = Scene(chart=chart, signature=signature, path=str(path) if path else None)
    scene.digest = "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()
    if "metric" in sections:
        scene.metric = _parse_metric(chart, sections["metric"], signature)
    if "connection" in sections:
        scene.connection = _parse_connection(chart, sections["connection"])
    if "connection2" in sections:
        scene.connection2 = _parse_connection(chart, sections["connection2"])
    if "beta" in sections:
        scene.beta = _parse_beta(chart, sections["beta"])
    if "odes" in sections:
        if chart.n != 3:
            raise SceneError("[odes] needs a chart with n = 3", sections["odes"][0].number if sections["odes"] else None)
        scene.odes = _parse_odes(chart.lifted(fiber), sections["odes"])
    if "quartic" in sections:
        kv = _keyvals(sections["quartic"], {"coeffs"})
        if "coeffs" not in kv:
            raise SceneError("[quartic] needs coeffs = C4, C3, C2, C1, C0")
        text_, num, col = kv["coeffs"]
        scene.quartic = _parse_rational_list(_Line(num, col, text_), 5)
    if "samples" in sections:
        scene.samples = [_parse_rational_list(ln) for ln in sections["samples"]]
    if "geodesic" in sections:
        scene.geodesic = _parse_geodesic(chart, sections["geodesic"])
    if scene.metric is None and scene.connection is None and scene.odes is None and scene.quartic is None:
        raise SceneError("scene defines no metric, connection, odes or quartic")
    if scene.beta is not None and scene.metric is None:
        raise SceneError("[beta] needs a [metric] section")
    return scene


def load_scene(path, degree_bound=None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneError(f"cannot read scene: {exc}", path=str(path)) from None
    return parse_scene(text, path, degree_bound)
