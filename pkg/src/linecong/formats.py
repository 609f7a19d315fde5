"""Config files, report blocks and the CSV, SVG and OBJ writers."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import expr as ex
from .config import DEFAULT_NUMERICS, Numerics, Tolerances
from .congruence import Domain, LineCongruence, delta_values, shape_values, xi_at
from .errors import ConfigError, ExprSyntaxError, LineCongruenceError

FORMAT_VERSION = "linecong 0.1"

_SECTIONS = ("congruence", "params", "domain", "numerics")
_NUMERIC_INT = {"degree", "grid", "portrait_seeds", "scan_stride"}
_NUMERIC_KEYS = {f.name for f in fields(Numerics) if f.name != "tol"} | {f.name for f in fields(Tolerances)}


@dataclass
class Config:
    congruence: LineCongruence
    numerics: Numerics
    source: str = ""


def _real(text: str, key: str, line: int) -> float:
    try:
        x = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a real number, found {text!r}", line) from None
    if not math.isfinite(x):
        raise ConfigError(f"{key}: value must be finite", line)
    return x


def parse_config(text: str, source: str = "<string>") -> Config:
    section = None
    seen = {}
    cong, params, dom, num = {}, {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, found {line!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any section", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        if (section, key) in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[section, key]})", lineno)
        seen[section, key] = lineno
        if section == "congruence":
            if key not in {"mode", "name", "xi1", "xi2", "a", "b", "c", "d"}:
                raise ConfigError(f"unknown key {key!r} in [congruence]", lineno)
            if key in {"xi1", "xi2", "a", "b", "c", "d"}:
                try:
                    cong[key] = (ex.parse(value), lineno)
                except ExprSyntaxError as err:
                    raise ConfigError(f"{key}: {err}", lineno) from None
                except LineCongruenceError as err:
                    raise ConfigError(f"{key}: {err}", lineno) from None
            else:
                cong[key] = (value, lineno)
        elif section == "params":
            if not key.isidentifier() or key in ("u", "v"):
                raise ConfigError(f"invalid parameter name {key!r}", lineno)
            params[key] = _real(value, key, lineno)
        elif section == "domain":
            if key not in {"umin", "umax", "vmin", "vmax"}:
                raise ConfigError(f"unknown key {key!r} in [domain]", lineno)
            dom[key] = (_real(value, key, lineno), lineno)
        else:
            if key not in _NUMERIC_KEYS:
                raise ConfigError(f"unknown key {key!r} in [numerics]", lineno)
            x = _real(value, key, lineno)
            if key in _NUMERIC_INT:
                if x != int(x) or x < 0:
                    raise ConfigError(f"{key}: expected a nonnegative integer", lineno)
                x = int(x)
            elif x <= 0:
                raise ConfigError(f"{key}: expected a positive value", lineno)
            num[key] = x

    mode_entry = cong.get("mode")
    if mode_entry is None:
        raise ConfigError("[congruence] needs mode = xi | shape")
    mode, mline = mode_entry
    need = {"xi": ("xi1", "xi2"), "shape": ("a", "b", "c", "d")}.get(mode)
    if need is None:
        raise ConfigError(f"mode must be xi or shape, found {mode!r}", mline)
    for k in cong:
        if k not in need and k not in ("mode", "name"):
            raise ConfigError(f"key {k!r} does not belong to mode {mode}", cong[k][1])
    for k in need:
        if k not in cong:
            raise ConfigError(f"mode {mode} needs {k} =", mline)
    for k in need:
        missing = sorted(ex.free_params(cong[k][0]) - set(params))
        if missing:
            raise ConfigError(f"{k}: unbound parameter(s) {', '.join(missing)}", cong[k][1])

    domain = Domain()
    if dom:
        for k in ("umin", "umax", "vmin", "vmax"):
            if k not in dom:
                raise ConfigError(f"[domain] needs {k}")
        if dom["umin"][0] >= dom["umax"][0] or dom["vmin"][0] >= dom["vmax"][0]:
            raise ConfigError("[domain] bounds must satisfy min < max", dom["umax"][1])
        domain = Domain(dom["umin"][0], dom["umax"][0], dom["vmin"][0], dom["vmax"][0])
    name = cong.get("name", (Path(source).stem, 0))[0]
    from .congruence import DirectionField, ShapeFields
    m = DirectionField(*(cong[k][0] for k in need)) if mode == "xi" else ShapeFields(*(cong[k][0] for k in need))
    C = LineCongruence(m, params, domain, name)
    try:
        numerics = DEFAULT_NUMERICS.with_overrides(**num)
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None
    return Config(C, numerics, source)


def load_config(path) -> Config:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {p}: {err.strerror}") from None
    return parse_config(text, str(p))


def dump_config(C: LineCongruence, numerics: Numerics | None = None) -> str:
    lines = ["[congruence]"]
    exprs = C.expressions()
    lines.append("mode = " + ("xi" if C.is_direction_field else "shape"))
    if C.name:
        lines.append(f"name = {C.name}")
    lines += [f"{k} = {ex.pretty(e)}" for k, e in exprs.items()]
    if C.params:
        lines += ["", "[params]"] + [f"{k} = {_num(v)}" for k, v in C.params.items()]
    d = C.domain
    lines += ["", "[domain]", f"umin = {_num(d.umin)}", f"umax = {_num(d.umax)}",
              f"vmin = {_num(d.vmin)}", f"vmax = {_num(d.vmax)}"]
    if numerics is not None:
        lines += ["", "[numerics]"]
        for f in fields(Numerics):
            if f.name != "tol":
                lines.append(f"{f.name} = {_num(getattr(numerics, f.name))}")
        lines += [f"{k} = {_num(v)}" for k, v in numerics.tol.as_dict().items()]
    return "\n".join(lines) + "\n"


# -- reports -----------------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    return repr(float(f"{x:.12g}"))


def _value(x) -> str:
    if isinstance(x, (list, tuple, np.ndarray)):
        return ",".join(_value(y) for y in x)
    if isinstance(x, str):
        return x
    return _num(x)


def report_block(rep) -> str:
    """One blank-line-terminated key=value block for a PointReport."""
    lines = [f"point={_num(rep.point[0])},{_num(rep.point[1])}", f"kind={rep.kind}", f"branch={rep.branch}",
             f"verdict={rep.verdict}"]
    if rep.ambiguous:
        lines.append("ambiguous=true")
    if rep.oracle_verdict is not None:
        lines.append(f"oracle={_value(rep.oracle_verdict)}")
    if rep.discriminant is not None:
        lines.append(f"folded_type={rep.discriminant.folded_type}")
    for k in sorted(rep.quantities):
        lines.append(f"quantity.{k}={_value(rep.quantities[k])}")
    for k in sorted(rep.thresholds):
        lines.append(f"threshold.{k}={_value(rep.thresholds[k])}")
    for n in rep.notes:
        lines.append(f"note={n}")
    return "\n".join(lines) + "\n"


def format_reports(reports) -> str:
    return "\n".join(report_block(r) for r in reports)


def parse_reports(text: str) -> list:
    """Inverse of :func:`format_reports` as a list of dicts (values kept as strings)."""
    out, cur = [], {}
    for line in text.splitlines():
        if not line.strip():
            if cur:
                out.append(cur)
                cur = {}
            continue
        k, v = line.split("=", 1)
        if k == "note":
            cur.setdefault("note", []).append(v)
        else:
            cur[k] = v
    if cur:
        out.append(cur)
    return out


def human_report(rep) -> str:
    head = f"({rep.point[0]:.6g}, {rep.point[1]:.6g}) {rep.kind}"
    if rep.branch:
        head += f" branch {rep.branch}"
    head += f": {rep.verdict}"
    if rep.ambiguous:
        head += " (ambiguous)"
    body = [f"  {k} = {_value(v)}" for k, v in sorted(rep.quantities.items())]
    if rep.discriminant is not None:
        body.append(f"  folded type = {rep.discriminant.folded_type}")
    body += [f"  note: {n}" for n in rep.notes]
    return "\n".join([head] + body)


# -- CSV -----------------------------------------------------------------------

def polyline_csv(poly) -> str:
    n = len(poly.points)
    tags = poly.tags if len(poly.tags) == n else np.zeros(n, dtype=int)
    res = poly.residuals if len(poly.residuals) == n else np.zeros(n)
    rows = ["u,v,branch,residual"]
    rows += [f"{_num(p[0])},{_num(p[1])},{int(t)},{_num(r)}" for p, t, r in zip(poly.points, tags, res)]
    return "\n".join(rows) + "\n"


def read_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


# -- SVG -----------------------------------------------------------------------

COLORS = {"discriminant": "#d62728", "ridge1": "#2ca02c", "ridge2": "#1f77b4", "ridge": "#17becf",
          "separatrix": "#000000", "principal1": "#7f7f7f", "principal2": "#bcbcbc"}


class _Canvas:
    def __init__(self, domain: Domain, width: int = 600):
        self.d = domain
        self.w = width
        self.h = max(1, int(round(width * (domain.vmax - domain.vmin) / (domain.umax - domain.umin))))
        self.parts = []

    def xy(self, p):
        d = self.d
        x = (p[0] - d.umin) / (d.umax - d.umin) * self.w
        y = (d.vmax - p[1]) / (d.vmax - d.vmin) * self.h
        return x, y

    def path(self, pts, color, width, closed=False):
        pts = np.asarray(pts)
        if len(pts) < 2:
            return
        xs = [self.xy(p) for p in pts]
        dstr = "M" + " L".join(f"{x:.2f},{y:.2f}" for x, y in xs) + (" Z" if closed else "")
        self.parts.append(f'<path d="{dstr}" fill="none" stroke="{color}" stroke-width="{width}"/>')

    def dot(self, p, color, r=4):
        x, y = self.xy(p)
        self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">\n<!-- {FORMAT_VERSION} -->\n'
                f'<rect width="{self.w}" height="{self.h}" fill="white" stroke="black"/>')
        return head + "\n" + "\n".join(self.parts) + "\n</svg>\n"


def _split_tagged(poly):
    """Runs of constant tag along a polyline."""
    tags = poly.tags if len(poly.tags) == len(poly.points) else np.zeros(len(poly.points), dtype=int)
    start = 0
    for k in range(1, len(tags) + 1):
        if k == len(tags) or tags[k] != tags[start]:
            yield tags[start], poly.points[max(start - 1, 0):k]
            start = k


def portrait_svg(portrait, domain: Domain, width: int = 600) -> str:
    cv = _Canvas(domain, width)
    for pl in portrait.principal:
        br = int(pl.tags[0]) if len(pl.tags) else 1
        cv.path(pl.points, COLORS["principal1" if br == 1 else "principal2"], 0.6)
    for pl in portrait.discriminant:
        cv.path(pl.points, COLORS["discriminant"], 2, pl.closed)
    for pl in portrait.ridges:
        for tag, pts in _split_tagged(pl):
            cv.path(pts, COLORS.get(f"ridge{int(tag)}", COLORS["ridge"]), 1.8)
    for pl in portrait.separatrices:
        cv.path(pl.points, COLORS["separatrix"], 2.5)
    for p in portrait.singular_points:
        cv.dot(p, COLORS["separatrix"])
    return cv.render()


# -- OBJ -----------------------------------------------------------------------

@dataclass
class Mesh:
    vertices: np.ndarray
    faces: list
    lines: list


def focal_mesh(C: LineCongruence, branch: int, n: int = 40, tol: Tolerances = DEFAULT_NUMERICS.tol) -> Mesh:
    """Grid-triangulated focal surface f + xi / lambda_i over the part of the domain where delta > 0."""
    U, V = C.domain.grid(n, n)
    a, b, c, d = shape_values(C, U, V)
    scale = np.sqrt(a * a + b * b + c * c + d * d)
    dl = (a - d) ** 2 + 4 * b * c
    ok = dl > tol.eps_delta * scale**2
    r = np.sqrt(np.where(ok, dl, 0.0))
    lam = 0.5 * (a + d + (r if branch == 1 else -r))
    ok &= np.abs(lam) > tol.eps_div
    lam = np.where(ok, lam, 1.0)
    x1, x2 = xi_at(C, U, V)
    t = 1.0 / lam
    P = np.stack([U + t * x1, V + t * x2, t], axis=-1)
    index = -np.ones(U.shape, dtype=int)
    verts = []
    for i in range(U.shape[0]):
        for j in range(U.shape[1]):
            if ok[i, j]:
                index[i, j] = len(verts)
                verts.append(P[i, j])
    faces = []
    for i in range(U.shape[0] - 1):
        for j in range(U.shape[1] - 1):
            q = index[i, j], index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]
            if min(q[0], q[1], q[2]) >= 0:
                faces.append((q[0], q[1], q[2]))
            if min(q[0], q[2], q[3]) >= 0:
                faces.append((q[0], q[2], q[3]))
    return Mesh(np.array(verts).reshape(-1, 3), faces, [])


def curve_image(C: LineCongruence, poly, branch: int, tol: Tolerances = DEFAULT_NUMERICS.tol) -> np.ndarray:
    """Focal image f + xi / lambda_i of a parameter-plane polyline (rows with lambda ~ 0 dropped)."""
    u, v = poly.points[:, 0], poly.points[:, 1]
    a, b, c, d = shape_values(C, u, v)
    r = np.sqrt(np.maximum((a - d) ** 2 + 4 * b * c, 0.0))
    lam = 0.5 * (a + d + (r if branch == 1 else -r))
    keep = np.abs(lam) > tol.eps_div
    x1, x2 = xi_at(C, u, v)
    t = 1.0 / np.where(keep, lam, 1.0)
    P = np.stack([u + t * x1, v + t * x2, t], axis=-1)
    return P[keep]


def mesh_obj(mesh: Mesh) -> str:
    out = [f"# {FORMAT_VERSION}"]
    out += [f"v {_num(x)} {_num(y)} {_num(z)}" for x, y, z in mesh.vertices]
    out += [f"f {i + 1} {j + 1} {k + 1}" for i, j, k in mesh.faces]
    for ln in mesh.lines:
        out.append("l " + " ".join(str(i + 1) for i in ln))
    return "\n".join(out) + "\n"


def polylines_obj(curves: list) -> Mesh:
    verts, lines = [], []
    for P in curves:
        if len(P) < 2:
            continue
        start = len(verts)
        verts.extend(P)
        lines.append(list(range(start, start + len(P))))
    return Mesh(np.array(verts).reshape(-1, 3), [], lines)


def read_obj(text: str) -> Mesh:
    v, f, l = [], [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            v.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            f.append(tuple(int(x) - 1 for x in parts[1:4]))
        elif parts[0] == "l":
            l.append([int(x) - 1 for x in parts[1:]])
    return Mesh(np.array(v).reshape(-1, 3), f, l)


def delta_grid_sign(C: LineCongruence, n: int = 40):
    U, V = C.domain.grid(n, n)
    return U, V, np.sign(delta_values(C, U, V))
