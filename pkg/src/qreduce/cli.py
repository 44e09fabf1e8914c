"""Command-line front end: ``qreduce {vq,brackets,spectrum,recipes,layersim}``.

Exit codes: 0 success, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import brackets as br
from . import geometry as geo
from . import layersim as ls
from . import potential as pot
from . import spectral as spc
from .errors import QReduceError, UsageError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
FORMATS = ("text", "csv", "json")


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


def _normalize(value):
    """Canonical JSON-ready form: 12 significant digits, lists, no NaN."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_normalize(v) for v in value]
    return value


@dataclass
class RunConfig:
    subcommand: str
    target: str | None = None
    geometry: dict = field(default_factory=dict)
    hbar: float = 1.0
    knobs: dict = field(default_factory=dict)
    fmt: str = "text"
    output: str | None = None
    timing: bool = False

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("output")
        d.pop("timing")
        return _normalize(d)


@dataclass
class ResultRecord:
    config: dict
    results: dict
    provenance: list = field(default_factory=list)
    duration_s: float | None = None

    def __post_init__(self):
        self.config = _normalize(self.config)
        self.results = _normalize(self.results)
        self.provenance = [str(p) for p in self.provenance]
        if self.duration_s is not None:
            self.duration_s = _normalize(self.duration_s)

    def to_json(self) -> str:
        payload = {"config": self.config, "results": self.results, "provenance": self.provenance}
        if self.duration_s is not None:
            payload["duration_s"] = self.duration_s
        return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ResultRecord:
        d = json.loads(text)
        return cls(d["config"], d["results"], d.get("provenance", []), d.get("duration_s"))


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return value


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}, got {text}")
        return value

    parse.__name__ = f"int>={lo}"
    return parse


def _polar_angle(text: str) -> float:
    value = _float(text)
    if not 0.0 < value < math.pi:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and pi, got {text}")
    return value


def _eps_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty thickness list")
    return tuple(_positive_float(p.strip()) for p in parts)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hbar", type=_positive_float, default=1.0, help="Planck constant (default 1)")
    p.add_argument("--format", choices=FORMATS, default="text", help="output format")
    p.add_argument("--output", "-o", default=None, help="write output to this file")
    p.add_argument("--config", default=None, help="key = value file; command line wins")
    p.add_argument("--timing", action="store_true", help="include wall-clock duration")


def _curve_flags(p, shapes, default_shape="circle"):
    p.add_argument("--shape", choices=shapes, default=default_shape, help="catalog shape")
    p.add_argument("--radius", type=_positive_float, default=1.0, help="circle or sphere radius")
    p.add_argument("--a", type=_positive_float, default=1.5, help="ellipse semi-axis along x")
    p.add_argument("--b", type=_positive_float, default=1.0, help="ellipse semi-axis along y")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qreduce", description="Quantum potentials of constrained motion.")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser, required=True)

    p = sub.add_parser("vq", help="quantum potential of a curve, surface or latitude circle")
    p.add_argument("target", choices=("curve", "surface", "latitude"))
    p.add_argument(
        "--shape",
        choices=geo.CURVE_KINDS + geo.SURFACE_KINDS,
        default=None,
        help="catalog shape (curve: line|circle|ellipse|parabola; "
        "surface: plane|sphere|cylinder|torus)",
    )
    p.add_argument("--radius", type=_positive_float, default=1.0, help="circle/sphere/cylinder radius")
    p.add_argument("--a", type=_positive_float, default=1.5, help="ellipse semi-axis along x")
    p.add_argument("--b", type=_positive_float, default=1.0, help="ellipse semi-axis along y")
    p.add_argument("--c", type=_float, default=0.5, help="parabola coefficient in y = c x^2")
    p.add_argument("--big-r", type=_positive_float, default=3.0, help="torus centre-line radius")
    p.add_argument("--small-r", type=_positive_float, default=1.0, help="torus tube radius")
    p.add_argument("--s", type=_float, default=0.0, help="arc length position on a curve")
    p.add_argument("--u", type=_float, default=1.0, help="first surface parameter")
    p.add_argument("--v", type=_float, default=0.5, help="second surface parameter")
    p.add_argument("--theta", type=_polar_angle, default=math.pi / 2, help="latitude polar angle")
    p.add_argument("--method", choices=("closed", "profile", "both"), default="closed")
    _common(p)

    p = sub.add_parser("brackets", help="constraint bracket table and classification")
    p.add_argument("system", nargs="?", choices=tuple(br.SYSTEMS), default=None)
    p.add_argument("--system", dest="system_flag", choices=tuple(br.SYSTEMS), default=None)
    p.add_argument("--n", type=_int_at_least(1), default=3, help="configuration dimension")
    p.add_argument("--radius", type=_positive_float, default=1.0, help="sphere radius")
    p.add_argument("--samples", type=_int_at_least(1), default=20, help="on-shell sample points")
    p.add_argument("--seed", type=_int_at_least(0), default=0, help="sampling seed")
    _common(p)

    p = sub.add_parser("spectrum", help="1D reduced spectrum on a closed curve")
    p.add_argument("geometry", choices=("circle", "ellipse"))
    p.add_argument("--radius", type=_positive_float, default=1.0, help="circle radius")
    p.add_argument("--a", type=_positive_float, default=1.5, help="ellipse semi-axis along x")
    p.add_argument("--b", type=_positive_float, default=1.0, help="ellipse semi-axis along y")
    p.add_argument("--n-grid", type=_int_at_least(8), default=256, help="arc-length grid size")
    p.add_argument("--modes", type=_int_at_least(1), default=8, help="number of levels")
    p.add_argument("--with-vq", action="store_true", help="add the quantum potential")
    p.add_argument("--solver", choices=("auto", "jacobi", "lapack"), default="auto")
    _common(p)

    p = sub.add_parser("recipes", help="compare quantization recipes")
    p.add_argument("action", choices=("compare",))
    p.add_argument("--geometry", choices=("sphere", "circle"), default="sphere")
    p.add_argument("--radius", type=_positive_float, default=1.0, help="sphere or circle radius")
    p.add_argument("--lmax", type=_int_at_least(0), default=4, help="highest l (or |m|)")
    p.add_argument("--n", type=_int_at_least(3), default=3, help="ambient dimension for spheres")
    _common(p)

    p = sub.add_parser("layersim", help="thin-layer band simulations")
    p.add_argument("geometry", choices=("circle", "latitude", "curve2d"))
    p.add_argument("--radius", type=_positive_float, default=1.0, help="circle or sphere radius")
    p.add_argument("--theta", type=_polar_angle, default=math.pi / 3, help="latitude polar angle")
    p.add_argument("--shape", choices=("ellipse", "circle"), default="ellipse", help="curve2d shape")
    p.add_argument("--a", type=_positive_float, default=1.5, help="ellipse semi-axis along x")
    p.add_argument("--b", type=_positive_float, default=1.0, help="ellipse semi-axis along y")
    p.add_argument("--eps", type=_eps_list, default=ls.DEFAULT_EPS, help="comma-separated thicknesses")
    p.add_argument("--mmax", type=_int_at_least(0), default=3, help="highest angular mode")
    p.add_argument("--ntrans", type=_int_at_least(32), default=None,
                   help="transverse grid size (default 128; 32 for curve2d)")
    p.add_argument("--ntan", type=_int_at_least(8), default=None, help="curve2d tangential grid size")
    p.add_argument("--bands", type=_int_at_least(1), default=4, help="curve2d band count")
    p.add_argument("--confinement", choices=("dirichlet", "harmonic"), default="dirichlet")
    p.add_argument("--extrapolate", action="store_true", help="report the eps -> 0 limit")
    _common(p)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            if name in action.choices:
                return action.choices[name]
    raise UsageError(f"unknown subcommand {name!r}")


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(sub: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions if a.option_strings}
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"config file: unknown key {key!r}")
        flag = action.option_strings[-1]
        if isinstance(action, argparse._StoreTrueAction):
            low = value.lower()
            if low not in _TRUE | _FALSE:
                raise UsageError(f"config file: argument {flag}: expected a boolean")
            defaults[key] = low in _TRUE
            continue
        try:
            converted = action.type(value) if action.type else value
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"config file: argument {flag}: {exc}") from None
        if action.choices is not None and converted not in action.choices:
            raise UsageError(f"config file: argument {flag}: invalid choice {value!r}")
        defaults[key] = converted
    sub.set_defaults(**defaults)


def _find_config(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv) -> RunConfig:
    """Turn a token list into a validated :class:`RunConfig`."""
    argv = list(argv)
    parser = build_parser()
    cfg_path = _find_config(argv)
    if cfg_path is not None:
        head = parser.parse_known_args(argv)[0] if argv else None
        name = getattr(head, "subcommand", None)
        if name is None:
            raise UsageError("--config needs a subcommand")
        _apply_config(_subparser(parser, name), read_config_file(cfg_path))
    ns = parser.parse_args(argv)
    return _to_run_config(ns)


_GEOMETRY_KEYS = {
    "vq": ("shape", "radius", "a", "b", "c", "big_r", "small_r", "s", "u", "v", "theta"),
    "brackets": ("n", "radius"),
    "spectrum": ("radius", "a", "b"),
    "recipes": ("geometry", "radius", "n"),
    "layersim": ("radius", "theta", "shape", "a", "b"),
}
_SKIP = {"subcommand", "hbar", "format", "output", "config", "timing"}


def _to_run_config(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    name = d["subcommand"]
    target = None
    if name == "vq":
        target = d["target"]
        shape = d["shape"] or {"curve": "circle", "surface": "sphere", "latitude": "sphere"}[target]
        allowed = {
            "curve": geo.CURVE_KINDS,
            "surface": geo.SURFACE_KINDS,
            "latitude": ("sphere",),
        }[target]
        if shape not in allowed:
            raise UsageError(
                f"qreduce vq: error: argument --shape: {shape!r} is not a {target} shape"
            )
        d["shape"] = shape
        if shape == "torus" and not d["big_r"] > d["small_r"]:
            raise UsageError("qreduce vq: error: argument --small-r: torus needs big-r > small-r")
    elif name == "brackets":
        if d["system"] and d["system_flag"] and d["system"] != d["system_flag"]:
            raise UsageError("qreduce brackets: error: argument --system: conflicts with positional system")
        target = d["system"] or d["system_flag"] or "sphere"
    elif name == "spectrum":
        target = d["geometry"]
    elif name == "recipes":
        target = d["action"]
    elif name == "layersim":
        target = d["geometry"]
        if d["ntrans"] is None:
            d["ntrans"] = 32 if target == "curve2d" else 128
    geometry = {k: d[k] for k in _GEOMETRY_KEYS[name] if k in d}
    knobs = {
        k: v
        for k, v in d.items()
        if k not in _SKIP and k not in geometry and k not in ("target", "system", "system_flag", "action")
        and not (name in ("spectrum", "layersim") and k == "geometry")
    }
    return RunConfig(
        subcommand=name,
        target=target,
        geometry=geometry,
        hbar=d["hbar"],
        knobs=knobs,
        fmt=d["format"],
        output=d["output"],
        timing=d["timing"],
    )


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


@dataclass
class _Outcome:
    results: dict
    provenance: list
    text: list[str]
    columns: list[str] | None = None
    rows: list[list] | None = None


def _curve_from(g: dict) -> geo.CurveSpec:
    shape = g.get("shape", "circle")
    if shape == "circle":
        return geo.CurveSpec.circle(g["radius"])
    if shape == "ellipse":
        return geo.CurveSpec.ellipse(g["a"], g["b"])
    if shape == "parabola":
        return geo.CurveSpec.parabola(g["c"], t0=-10.0, t1=10.0)
    return geo.CurveSpec.line(0.0, 10.0)


def _surface_from(g: dict) -> geo.SurfaceSpec:
    shape = g["shape"]
    if shape == "plane":
        return geo.SurfaceSpec.plane()
    if shape == "sphere":
        return geo.SurfaceSpec.sphere(g["radius"])
    if shape == "cylinder":
        return geo.SurfaceSpec.cylinder(g["radius"])
    return geo.SurfaceSpec.torus(g["big_r"], g["small_r"])


def _fmt6(x) -> str:
    return "n/a" if x is None else f"{x:.6g}"


def _run_vq(cfg: RunConfig, params) -> _Outcome:
    g, method = cfg.geometry, cfg.knobs["method"]
    results, prov = {}, []
    if cfg.target == "latitude":
        val = pot.vq_latitude_on_sphere(g["radius"], g["theta"], params)
        results["vq_closed"] = val.value
        results["vq_plane_circle"] = val.plane_value
        prov.append(val.provenance)
        if method in ("profile", "both"):
            prof = pot.vq_normal_profile(pot.latitude_profile(g["radius"], g["theta"]), params)
            results["vq_profile"] = prof.value
            prov.append(prof.provenance)
        text = [f"sphere latitude: {_fmt6(results['vq_closed'])}",
                f"plane circle:    {_fmt6(results['vq_plane_circle'])}"]
        if "vq_profile" in results:
            text.append(f"profile:         {_fmt6(results['vq_profile'])}")
        return _Outcome(results, prov, text)
    if cfg.target == "curve":
        curve = _curve_from(g)
        k = float(geo.curvature_at_arclength(curve, g["s"]))
        results["curvature"] = k
        closed = pot.vq_curve(k, params)
        profile = (lambda: pot.vq_normal_profile(pot.curve_profile(curve, g["s"]), params))
    else:
        surface = _surface_from(g)
        c = geo.surface_curvatures(surface, g["u"], g["v"])
        results.update(H=c.H, K=c.K, k1=c.k1, k2=c.k2)
        closed = pot.vq_surface(c, params)
        profile = (lambda: pot.vq_normal_profile(
            pot.surface_profile(surface, g["u"], g["v"], numeric=True), params))
    text = []
    if method in ("closed", "both"):
        results["vq_closed"] = closed.value
        prov.append(closed.provenance)
        text.append(_fmt6(closed.value))
    if method in ("profile", "both"):
        val = profile()
        results["vq_profile"] = val.value
        prov.append(val.provenance)
        text.append(_fmt6(val.value))
    if method == "both":
        text = [f"closed:  {text[0]}", f"profile: {text[1]}"]
    return _Outcome(results, prov, text)


_SYMBOLS = {"sphere": ("Φ₁", "Φ₂"), "sphere-abelian": ("σ₁", "σ₂")}


def _run_brackets(cfg: RunConfig, params) -> _Outcome:
    n, R = cfg.geometry["n"], cfg.geometry["radius"]
    space = br.PhaseSpace(n)
    constraints = br.SYSTEMS[cfg.target](space, R)
    names = _SYMBOLS[cfg.target]
    rng = np.random.default_rng(cfg.knobs["seed"])
    points = br.on_shell_points(cfg.target, space, R, cfg.knobs["samples"], rng)
    verdict = br.classify_constraints(constraints, points)
    table = br.bracket_table(constraints, names)
    text = [f"{{{a},{b}}} = {poly}, {verdict.kind}" for a, b, poly in table]
    for name, c in zip(names, constraints):
        text.insert(0, f"{name} = {c}")
    results = {
        "constraints": {name: str(c) for name, c in zip(names, constraints)},
        "brackets": [{"pair": f"{a},{b}", "value": str(p), "zero": p.is_zero()} for a, b, p in table],
        "classification": verdict.kind,
        "min_abs_det": float(np.min(np.abs(verdict.determinants))),
        "max_abs_bracket": verdict.max_bracket,
    }
    rows = [[f"{{{a},{b}}}", str(p), verdict.kind] for a, b, p in table]
    return _Outcome(results, ["exact rational Poisson brackets"], text,
                    ["pair", "bracket", "classification"], rows)


def _run_spectrum(cfg: RunConfig, params) -> _Outcome:
    g, kn = cfg.geometry, cfg.knobs
    curve = geo.CurveSpec.circle(g["radius"]) if cfg.target == "circle" else geo.CurveSpec.ellipse(g["a"], g["b"])
    op = spc.build_curve_hamiltonian(curve, kn["n_grid"], params, with_vq=kn["with_vq"])
    count = min(kn["modes"], op.order)
    spec = spc.eigensolve_symmetric(op, count, method=kn["solver"])
    energies = spec.eigenvalues.tolist()
    analytic = None
    if cfg.target == "circle":
        vq = -params.hbar**2 / (8.0 * g["radius"] ** 2) if kn["with_vq"] else 0.0
        analytic = spc.circle_levels(g["radius"], count, vq, params).tolist()
    rows = [[i, e, None if analytic is None else analytic[i]] for i, e in enumerate(energies)]
    results = {
        "energies": energies,
        "analytic": analytic,
        "residual": spc.residual_bound(op, spec),
        "length": op.length,
    }
    text = [f"{i:3d}  {_fmt6(e)}" + ("" if analytic is None else f"  (analytic {_fmt6(analytic[i])})")
            for i, e in enumerate(energies)]
    prov = ["periodic central differences", f"eigensolver {kn['solver']}"]
    return _Outcome(results, prov, text, ["level", "energy", "analytic"], rows)


def _run_recipes(cfg: RunConfig, params) -> _Outcome:
    g = cfg.geometry
    table = spc.recipe_table(g["geometry"], g["radius"], cfg.knobs["lmax"], params, n=g["n"])
    rows = [list(r) for r in table.rows()]
    text = [f"{table.geometry}"]
    for name in spc.RECIPES:
        text.append(f"  {name:<20s} V_q = {_fmt6(table.constants[name])}")
    results = {"geometry": table.geometry, "constants": table.constants}
    return _Outcome(results, ["analytic levels plus recipe constants"], text,
                    ["recipe", "level", "degeneracy", "energy"], rows)


def _run_layersim(cfg: RunConfig, params) -> _Outcome:
    g, kn = cfg.geometry, cfg.knobs
    lcfg = ls.LayerConfig(
        eps=kn["eps"], confinement=kn["confinement"], n_perp=kn["ntrans"], m_max=kn["mmax"]
    )
    if cfg.target == "circle":
        res = ls.circle_band_spectrum(g["radius"], lcfg, params)
    elif cfg.target == "latitude":
        res = ls.latitude_band_spectrum(g["radius"], g["theta"], lcfg, params)
    else:
        curve = geo.CurveSpec.ellipse(g["a"], g["b"]) if g["shape"] == "ellipse" else geo.CurveSpec.circle(g["radius"])
        res = ls.curve_band_spectrum_2d(curve, lcfg, params, n_tangential=kn["ntan"], n_bands=kn["bands"])
    extrap = kn["extrapolate"]
    rows = []
    for row in res.rows():
        row = list(row)
        if not extrap:
            row[6] = row[7] = None
        rows.append(row)
    results = {"geometry": res.geometry, "modes": list(res.modes), "eps": list(res.eps)}
    if extrap:
        results["extrapolated"] = res.limit.tolist()
        results["fit_residual"] = res.fit_residual.tolist()
    text = [res.geometry]
    for i, m in enumerate(res.modes):
        ren = ", ".join(_fmt6(v) for v in res.renormalized[i])
        line = f"  m={m}: renormalized [{ren}]"
        if extrap:
            line += f" -> {_fmt6(res.limit[i])}"
        text.append(line)
    cols = ["geometry", "m", "eps", "E_raw", "E_perp", "E_renormalized", "E_extrapolated", "fit_residual"]
    return _Outcome(results, [f"{lcfg.confinement} layer, renormalized"], text, cols, rows)


_HANDLERS = {
    "vq": _run_vq,
    "brackets": _run_brackets,
    "spectrum": _run_spectrum,
    "recipes": _run_recipes,
    "layersim": _run_layersim,
}


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def render(record: ResultRecord, outcome: _Outcome, fmt: str) -> str:
    if fmt == "json":
        return record.to_json()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        if outcome.columns is not None:
            writer.writerow(outcome.columns)
            for row in _normalize(outcome.rows):
                writer.writerow([_csv_cell(v) for v in row])
        else:
            writer.writerow(["name", "value"])
            for key, value in record.results.items():
                writer.writerow([key, _csv_cell(value)])
        return buf.getvalue()
    return "\n".join(outcome.text) + "\n"


def run(cfg: RunConfig, stdout=None) -> ResultRecord:
    """Execute a parsed configuration and write its output."""
    start = time.perf_counter()
    params = pot.PhysicsParams(cfg.hbar)
    outcome = _HANDLERS[cfg.subcommand](cfg, params)
    duration = time.perf_counter() - start if cfg.timing else None
    record = ResultRecord(cfg.echo(), outcome.results, outcome.provenance, duration)
    text = render(record, outcome, cfg.fmt)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8", newline="")
    else:
        (stdout or sys.stdout).write(text)
    return record


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        run(cfg)
    except UsageError as exc:
        print(f"qreduce: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QReduceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"qreduce: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
