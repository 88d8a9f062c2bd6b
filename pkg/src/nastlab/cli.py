"""Command-line front end.

    nastlab nast --config run.json --out nast.csv
    nastlab wilson2d --group su2 --rep fundamental --area 2
    nastlab monodromy --level 3 --format json
    nastlab seifert --genus 2

Settings come from built-in defaults, then the JSON config, then flags.
Exit codes: 0 ok, 2 invariant violation, 64 config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np

from . import chernsimons, knotwords, quantization, stokes, yangmills2d
from .algebra import BranchWarning, build_rep
from .fields import make_connection

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_CONFIG = 64

COMMANDS = ("nast", "wilson2d", "monodromy", "skein", "seifert", "checks", "flat-demo")

_NUM = {"type": "number"}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "group": {"enum": ["su2", "su3"]},
        "representation": {"type": "string"},
        "field": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {"family": {"type": "string"}, "params": {"type": "object"}},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"N_list": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1}},
        },
        "steps_lhs_multiplier": {"type": "integer", "minimum": 1},
        "substeps": {"type": "integer", "minimum": 1},
        "jobs": {"type": "integer", "minimum": 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"unitarity": _NUM, "error": _NUM},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "path": {"type": ["string", "null"]},
                "timing": {"type": "boolean"},
            },
        },
        "areas": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "loops": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "regions": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["area", "members"],
                "properties": {
                    "area": {"type": "number", "minimum": 0},
                    "members": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                },
            },
        },
        "order": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "level": {"type": "number", "not": {"const": 0}},
        "reps": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        "include_swap": {"type": "boolean"},
        "genus": {"type": "integer", "minimum": 0, "maximum": 8},
        "a": _NUM,
        "seed": {"type": "integer", "minimum": 0},
        "action_grid": {"type": "integer", "minimum": 2},
    },
}

DEFAULTS = {
    "group": "su2",
    "representation": "fundamental",
    "field": {"family": "constant_noncommuting", "params": {}},
    "grid": {"N_list": [16, 32, 64, 128]},
    "steps_lhs_multiplier": 64,
    "substeps": 4,
    "jobs": 1,
    "tolerances": {"unitarity": 1e-9},
    "output": {"format": "csv", "path": None, "timing": True},
    "areas": [1.0],
    "level": 3,
    "include_swap": True,
    "genus": 1,
    "a": 0.5,
    "seed": 0,
    "action_grid": 64,
}


class ConfigError(Exception):
    pass


def fmt(x) -> str:
    """12 significant digits, always with a decimal point or exponent."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    s = f"{float(x):.12g}"
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _round(x):
    """JSON-safe copy with floats cut to 12 significant digits."""
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if not math.isfinite(x) else float(f"{x:.12g}")
    return x


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def load_config(args: argparse.Namespace) -> dict:
    user = {}
    if args.config:
        try:
            with open(args.config) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {args.config}: {exc}") from exc
    flags: dict = {}
    if args.group is not None:
        flags["group"] = args.group
    if args.rep is not None:
        flags["representation"] = args.rep
    if args.level is not None:
        flags["level"] = args.level
    if args.genus is not None:
        flags["genus"] = args.genus
    if args.area is not None:
        flags["areas"] = args.area
    output = {}
    if args.format is not None:
        output["format"] = args.format
    if args.out is not None:
        output["path"] = args.out
    if args.no_timing:
        output["timing"] = False
    if output:
        flags["output"] = output
    for doc in (user, flags):
        try:
            jsonschema.validate(doc, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            key = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid config at {key}: {exc.message}") from exc
    cfg = _merge(DEFAULTS, user)
    cfg = _merge(cfg, flags)
    try:
        build_rep(cfg["group"], cfg["representation"])
        for label in cfg.get("loops", []) + cfg.get("reps", []):
            build_rep(cfg["group"], label)
    except ValueError as exc:
        raise ConfigError(f"invalid representation: {exc}") from exc
    return cfg


# ---------------------------------------------------------------------------
# output


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _json_text(doc) -> str:
    return json.dumps(_round(doc), indent=2, sort_keys=True) + "\n"


def emit(cfg: dict, text: str) -> None:
    path = cfg["output"].get("path")
    if not path:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nastlab-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _render(cfg, header, rows, doc) -> str:
    return _csv_text(header, rows) if cfg["output"]["format"] == "csv" else _json_text(doc)


# ---------------------------------------------------------------------------
# commands


def cmd_nast(cfg: dict) -> tuple[str, int]:
    try:
        conn = make_connection(cfg["group"], cfg["representation"], cfg["field"]["family"], cfg["field"].get("params"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid field: {exc}") from exc
    if conn.chart != "square":
        raise ConfigError("field: nast needs a field on the unit square")
    N_list = sorted(cfg["grid"]["N_list"])
    mult, sub = cfg["steps_lhs_multiplier"], cfg["substeps"]

    def run(N):
        return stokes.nast_verify(conn, N, mult * N, sub)

    with ThreadPoolExecutor(max_workers=cfg["jobs"]) as pool:
        reports = list(pool.map(run, N_list))
    for prev, cur in zip(reports, reports[1:]):
        cur.est_order = stokes._order(prev.error, cur.error, cur.N / prev.N)
    timing = cfg["output"].get("timing", True)
    rows = [(r.N, r.error, r.est_order, r.runtime_ms if timing else None) for r in reports]
    tol_u = cfg["tolerances"].get("unitarity", 1e-9)
    tol_e = cfg["tolerances"].get("error")
    defects = [max(stokes._unitarity_defect(r.lhs), stokes._unitarity_defect(r.rhs)) for r in reports]
    bad = any(d > tol_u for d in defects) or (tol_e is not None and reports[-1].error > tol_e)
    doc = {
        "group": cfg["group"],
        "representation": cfg["representation"],
        "field": cfg["field"],
        "rows": [
            {"N": r.N, "error": r.error, "est_order": r.est_order, "runtime_ms": row[3], "unitarity_defect": d,
             "plaquette_max_times_N3": r.plaquette_stats["max_times_N3"]}
            for r, row, d in zip(reports, rows, defects)
        ],
        "invariant_violation": bad,
    }
    return _render(cfg, ["N", "error", "est_order", "runtime_ms"], rows, doc), EXIT_INVARIANT if bad else EXIT_OK


def cmd_wilson2d(cfg: dict) -> tuple[str, int]:
    group = cfg["group"]
    if "regions" in cfg:
        if "loops" not in cfg or "order" not in cfg:
            raise ConfigError("regions: block calculus needs 'loops', 'regions' and 'order'")
        loops = [build_rep(group, label) for label in cfg["loops"]]
        try:
            decomp = yangmills2d.RegionDecomposition(
                loops, [yangmills2d.Region(r["area"], tuple(r["members"])) for r in cfg["regions"]], cfg["order"]
            )
        except ValueError as exc:
            raise ConfigError(f"regions: {exc}") from exc
        try:
            value = yangmills2d.contract_blocks(decomp)
        except yangmills2d.UnsupportedTopologyError as exc:
            doc = {"error": "unsupported_topology", "message": str(exc)}
            return _render(cfg, ["error", "message"], [("unsupported_topology", str(exc))], doc), EXIT_INVARIANT
        spectra = []
        for r in decomp.regions:
            M = yangmills2d.m_block([loops[i] for i in sorted(r.members)], r.area)
            spectra.append(sorted(np.linalg.eigvalsh(M).tolist()))
        doc = {
            "loops": cfg["loops"],
            "regions": [{"area": r.area, "members": list(r.members), "spectrum": s} for r, s in zip(decomp.regions, spectra)],
            "order": cfg["order"],
            "value": value,
        }
        return _render(cfg, ["group", "loops", "value"], [(group, " ".join(cfg["loops"]), value)], doc), EXIT_OK
    rep = build_rep(group, cfg["representation"])
    rows = [(group, cfg["representation"], float(S), yangmills2d.wilson_expectation(rep, S)) for S in cfg["areas"]]
    doc = {"rows": [dict(zip(("group", "rep", "area", "value"), r)) for r in rows]}
    return _render(cfg, ["group", "rep", "area", "value"], rows, doc), EXIT_OK


def _pair(cfg):
    labels = cfg.get("reps") or [cfg["representation"]] * 2
    return labels, [build_rep(cfg["group"], label) for label in labels]


def _eig_rows(classes):
    return [{"re": v.real, "im": v.imag, "multiplicity": m} for v, m in sorted(classes, key=lambda c: (np.angle(c[0]), c[1]))]


def cmd_monodromy(cfg: dict) -> tuple[str, int]:
    labels, (R1, R2) = _pair(cfg)
    k = cfg["level"]
    res = chernsimons.monodromy_matrix(R1, R2, k)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BranchWarning)
        B = chernsimons.braiding_matrix(R1, R2, k)
    n_branch = sum(issubclass(w.category, BranchWarning) for w in caught)
    skein = None
    if labels[0] == labels[1]:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", BranchWarning)
                coeffs = chernsimons.skein_coefficients(R1, k, include_swap=cfg["include_swap"])
            skein = [{"re": c.real, "im": c.imag} for c in coeffs]
        except ValueError:
            skein = None
    doc = {
        "k": k,
        "reps": labels,
        "eigenvalues": _eig_rows(res.eigenvalues),
        "closed_form": _eig_rows(res.closed_form),
        "braiding_squared_error": float(np.linalg.norm(B @ B - res.matrix)),
        "skein": skein,
        "branch_warnings": n_branch,
    }
    rows = [(e["re"], e["im"], e["multiplicity"]) for e in doc["eigenvalues"]]
    return _render(cfg, ["re", "im", "multiplicity"], rows, doc), EXIT_INVARIANT if n_branch else EXIT_OK


def cmd_skein(cfg: dict) -> tuple[str, int]:
    rep = build_rep(cfg["group"], cfg["representation"])
    k = cfg["level"]
    swap = cfg.get("include_swap", False)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BranchWarning)
            coeffs, info = chernsimons.skein_coefficients(rep, k, include_swap=swap, return_info=True)
    except ValueError as exc:
        doc = {"error": "too_many_eigenvalue_classes", "message": str(exc)}
        return _render(cfg, ["error", "message"], [(doc["error"], str(exc))], doc), EXIT_INVARIANT
    doc = {
        "k": k,
        "rep": cfg["representation"],
        "include_swap": swap,
        "coefficients": [{"re": c.real, "im": c.imag} for c in coeffs],
        "residual": info["residual"],
        "branch_warnings": info["branch_warnings"],
    }
    rows = [(name, c.real, c.imag) for name, c in zip("abc", coeffs)]
    bad = info["branch_warnings"] > 0 or info["residual"] > 1e-10
    return _render(cfg, ["coefficient", "re", "im"], rows, doc), EXIT_INVARIANT if bad else EXIT_OK


def cmd_seifert(cfg: dict) -> tuple[str, int]:
    g = cfg["genus"]
    ok, trace = knotwords.verify_decomposition(g)
    doc = {"genus": g, "verdict": ok, "trace": trace}
    rows = [("trace", entry) for entry in trace] + [("verdict", "true" if ok else "false")]
    return _render(cfg, ["step", "entry"], rows, doc), EXIT_OK if ok else EXIT_INVARIANT


def cmd_checks(cfg: dict) -> tuple[str, int]:
    rows = quantization.identity_suite(seed=cfg["seed"], action_grid=cfg["action_grid"])
    table = [(r.name, r.lhs, r.rhs, r.error, r.tolerance, r.passed) for r in rows]
    doc = {"checks": [dict(zip(("check", "lhs", "rhs", "error", "tolerance", "pass"), t)) for t in table]}
    ok = all(r.passed for r in rows)
    return _render(cfg, ["check", "lhs", "rhs", "error", "tolerance", "pass"], table, doc), EXIT_OK if ok else EXIT_INVARIANT


def cmd_flat_demo(cfg: dict) -> tuple[str, int]:
    res = knotwords.flat_annulus_demo(cfg["a"])
    ok = res["max_curvature"] <= 1e-12 and res["distance_from_identity"] >= 0.5
    doc = {k: res[k] for k in ("a", "max_curvature", "distance_from_identity", "word")}
    doc["holonomy"] = [[{"re": z.real, "im": z.imag} for z in row] for row in res["holonomy"]]
    rows = [(res["a"], res["max_curvature"], res["distance_from_identity"])]
    return _render(cfg, ["a", "max_curvature", "distance_from_identity"], rows, doc), EXIT_OK if ok else EXIT_INVARIANT


HANDLERS = {
    "nast": cmd_nast,
    "wilson2d": cmd_wilson2d,
    "monodromy": cmd_monodromy,
    "skein": cmd_skein,
    "seifert": cmd_seifert,
    "checks": cmd_checks,
    "flat-demo": cmd_flat_demo,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--group", choices=["su2", "su3"])
    common.add_argument("--rep", help="fundamental, adjoint or spin(j)")
    common.add_argument("--level", type=float, help="Chern-Simons level k")
    common.add_argument("--genus", type=int)
    common.add_argument("--area", type=float, nargs="+", help="loop area(s)")
    common.add_argument("--no-timing", action="store_true", help="leave runtime_ms empty for byte-identical output")
    parser = _Parser(prog="nastlab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        text, code = HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    emit(cfg, text)
    if code == EXIT_INVARIANT:
        print(f"{args.command}: invariant violation", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
