"""Command-line front end.

Subcommands: prepare-cat, which-path, eraser, sweep, oracle-check.
Options may also come from a flat ``key = value`` file passed with
``--config``; explicit flags win over file values, which win over defaults.

Exit codes: 0 success, 2 usage error, 3 numerical/truncation failure,
4 impossible post-selection.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import oracle, screen
from .errors import CQEDError, ConfigError, ZeroProbability
from .protocols import CatPrepConfig, ProtocolReport, WhichPathConfig, run_cat_preparation, run_which_path

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_ZERO_PROB = 0, 2, 3, 4
MAX_SWEEP = 10_000
ORACLE_TOL = 1e-12

_ANGLE = re.compile(r"^\s*([+-])?\s*((?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi)?\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


class UsageError(Exception):
    pass


def parse_angle(text: str) -> float:
    """Radians from '1.57', 'pi', 'pi/2', '3pi/4', '0.5*pi'."""
    m = _ANGLE.match(text)
    if not m or (m.group(2) is None and m.group(3) is None):
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
    coef = float(m.group(2)) if m.group(2) is not None else 1.0
    val = coef * (math.pi if m.group(3) else 1.0)
    if m.group(4):
        den = float(m.group(4))
        if den == 0:
            raise argparse.ArgumentTypeError(f"invalid angle {text!r}: zero denominator")
        val /= den
    return -val if m.group(1) == "-" else val


def parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"invalid boolean {text!r}")


def _list_of(conv):
    def parse(text: str) -> list:
        return [conv(tok) for tok in text.split(",") if tok.strip()]

    return parse


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser, phi_default: str) -> None:
    p.add_argument("--config", help="flat key=value file supplying option defaults")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--report-file", default="report.json")
    p.add_argument("--dim", type=int, default=64, help="Fock levels kept per cavity")
    p.add_argument("--phi", type=parse_angle, default=phi_default, help="dispersive phase, e.g. pi or pi/2")
    p.add_argument("--trunc-tol", type=float, default=1e-12)
    p.add_argument("--seed", type=int, default=0)


def _add_screen(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim1", type=int)
    p.add_argument("--dim2", type=int)
    p.add_argument("--pattern-file", default="pattern.csv")
    p.add_argument("--grid-points", type=int, default=1024)
    p.add_argument("--grid-half-width", type=float, default=3.0, help="in envelope widths")
    p.add_argument("--slit-separation", type=float, default=10.0)
    p.add_argument("--distance", type=float, default=1.0, help="slit-to-screen distance L")
    p.add_argument("--wavenumber", type=float, default=1.0)
    p.add_argument("--sigma-env", type=float, default=1.0)
    p.add_argument("--plot-data", action="store_true", help="add an envelope-normalized column")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqed-eraser", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare-cat", help="cat-state preparation by dispersive interaction")
    _add_common(p, "pi/2")
    p.add_argument("--alpha", type=complex, default="2")
    p.add_argument("--c-e", type=complex, default=repr(1 / math.sqrt(2)))
    p.add_argument("--c-f", type=complex, default=repr(1 / math.sqrt(2)))
    p.add_argument("--detect", choices=["e", "f"], default="f")
    p.add_argument("--initial-cavity", type=complex, help="coherent amplitude of the empty cavity (default i*alpha)")

    p = sub.add_parser("which-path", help="double slit with one cavity per slit")
    _add_common(p, "pi")
    _add_screen(p)
    p.add_argument("--scheme", choices=["lambda", "cascade"], default="lambda")
    p.add_argument("--alpha1", type=complex, default="2")
    p.add_argument("--alpha2", type=complex, default="2")
    p.add_argument("--ramsey", action="store_true", help="rotate the atom into a superposition before the slits")
    p.add_argument("--condition-on", help="post-select this atomic level")

    p = sub.add_parser("eraser", help="cascade-atom scheme with optional R1/R2 zones")
    _add_common(p, "pi")
    _add_screen(p)
    p.add_argument("--alpha1", type=complex, default="2")
    p.add_argument("--alpha2", type=complex, default="2")
    p.add_argument("--r1", action="store_true", help="R1 zone before the slits")
    p.add_argument("--r2-position", choices=["none", "after_C1", "after_C2"], default="none")
    p.add_argument("--r2-scope", choices=["shared", "branch"], default="shared")
    p.add_argument("--condition-on", help="post-select this atomic level")

    p = sub.add_parser("sweep", help="batch over alpha x scheme x phase x ramsey x dim")
    _add_common(p, "pi")
    p.add_argument("--alphas", type=_list_of(complex), default="0.5,1,2")
    p.add_argument("--schemes", type=_list_of(str), default="lambda,cascade")
    p.add_argument("--phis", type=_list_of(parse_angle), default="pi")
    p.add_argument("--ramsey-options", type=_list_of(parse_bool), default="false,true")
    p.add_argument("--dims", type=_list_of(int), default="64")
    p.add_argument("--sweep-file", default="sweep.csv")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("oracle-check", help="structured kernels vs dense matrices")
    _add_common(p, "pi")
    p.set_defaults(dim=12)
    p.add_argument("--trials", type=int, default=100)
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def read_config_file(path: str) -> Dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def parse_config(argv: Sequence[str]) -> argparse.Namespace:
    """Parse argv, layering an optional --config file under the explicit flags."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        sub = _subparser(parser, ns.command)
        actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
        try:
            values = read_config_file(ns.config)
        except OSError as exc:
            sub.error(f"cannot read config file: {exc}")
        except UsageError as exc:
            sub.error(str(exc))
        defaults = {}
        for key, val in values.items():
            if key not in actions:
                sub.error(f"unknown config key {key!r}")
            action = actions[key]
            if isinstance(action, argparse._StoreTrueAction):
                try:
                    defaults[key] = parse_bool(val)
                except argparse.ArgumentTypeError as exc:
                    sub.error(f"config key {key!r}: {exc}")
            else:
                defaults[key] = val
        sub.set_defaults(**defaults)
        ns = parser.parse_args(argv)
    _validate(parser, ns)
    return ns


def _validate(parser, ns) -> None:
    sub = _subparser(parser, ns.command)
    if ns.command == "eraser" and ns.r2_position != "none" and not ns.r1:
        sub.error("--r2-position needs --r1: without the R1 superposition no which-path read-out exists")
    if ns.command == "which-path" and ns.condition_on is not None:
        basis = ("a", "b", "c") if ns.scheme == "lambda" else ("f", "g")
        if ns.condition_on not in basis:
            sub.error(f"--condition-on must be one of {basis} for scheme {ns.scheme}")
    if ns.command == "eraser" and ns.condition_on is not None and ns.condition_on not in ("f", "g"):
        sub.error("--condition-on must be f or g for the cascade scheme")
    if ns.command == "sweep":
        bad = [s for s in ns.schemes if s not in ("lambda", "cascade")]
        if bad:
            sub.error(f"unknown scheme(s) {bad}")
        n = len(ns.alphas) * len(ns.schemes) * len(ns.phis) * len(ns.ramsey_options) * len(ns.dims)
        if n > MAX_SWEEP:
            sub.error(f"sweep grid has {n} configurations, limit is {MAX_SWEEP}")
    if ns.dim < 1:
        sub.error("--dim must be >= 1")


# ---------------------------------------------------------------- output

def dump_json(obj, indent: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dump_json(str(k))}: {dump_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dump_json(v, indent + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _complex_pair(z) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _screen_model(ns) -> screen.ScreenModel:
    return screen.ScreenModel.default(
        n_points=ns.grid_points,
        half_width=ns.grid_half_width,
        separation=ns.slit_separation,
        L=ns.distance,
        k=ns.wavenumber,
        sigma_env=ns.sigma_env,
    )


def report_fields(report: ProtocolReport, model: Optional[screen.ScreenModel] = None) -> dict:
    out = {
        "protocol": report.protocol,
        "probabilities": report.outcome_probabilities,
        "condition_on": report.condition_on,
    }
    if model is not None:
        final = report.final_joint
        pattern = screen.intensity_pattern(final, model)
        ov = report.marker_overlap
        out.update(
            visibility_analytic=screen.visibility_analytic(final, strict=False),
            visibility_empirical=pattern.metadata["visibility_empirical"],
            distinguishability=screen.distinguishability(final, strict=False),
            cross_term_sign=screen.cross_term_sign(final),
            marker_overlap_re=None if ov is None else ov.real,
            marker_overlap_im=None if ov is None else ov.imag,
            path_probabilities=list(report.path_probabilities),
        )
    else:
        out.update(
            visibility_analytic=None,
            visibility_empirical=None,
            distinguishability=None,
            cross_term_sign=None,
            marker_overlap_re=None,
            marker_overlap_im=None,
        )
    out.update(
        cavity_fidelities=report.cavity_fidelities,
        cavity_purities=report.cavity_purities,
        norm=report.norm,
        dims=list(report.dims),
        truncation_tail=report.truncation_tail,
    )
    if report.which_path_witness is not None:
        out["which_path_witness"] = report.which_path_witness
    return out


def pattern_csv(report: ProtocolReport, model: screen.ScreenModel, plot_data: bool = False) -> str:
    final = screen.intensity_pattern(report.final_joint, model)
    cols = {"x": model.grid, "intensity": final.intensity}
    for lab, branch in report.branches.items():
        cols[f"intensity_cond_{lab}"] = screen.intensity_pattern(branch, model).intensity
    if plot_data:
        cols["intensity_envelope_normalized"] = final.envelope_normalized()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in zip(*cols.values()):
        w.writerow(fmt(v) for v in row)
    return buf.getvalue()


def _dims(ns):
    return (ns.dim1 or ns.dim, ns.dim2 or ns.dim)


def _parameters(ns) -> dict:
    params = {}
    for key, val in sorted(vars(ns).items()):
        if key in ("config", "out_dir", "report_file", "pattern_file", "sweep_file", "jobs"):
            continue
        if isinstance(val, complex):
            val = _complex_pair(val)
        elif isinstance(val, list):
            val = [_complex_pair(v) if isinstance(v, complex) else v for v in val]
        params[key] = val
    return params


def _run_single(ns) -> int:
    os.makedirs(ns.out_dir, exist_ok=True)
    if ns.command == "prepare-cat":
        cfg = CatPrepConfig(
            alpha=ns.alpha,
            c_e=ns.c_e,
            c_f=ns.c_f,
            detect=ns.detect,
            dim=ns.dim,
            initial_cavity=ns.initial_cavity,
            phase=ns.phi,
            trunc_tol=ns.trunc_tol,
        )
        report = run_cat_preparation(cfg)
        fields = report_fields(report)
    else:
        scheme = ns.scheme if ns.command == "which-path" else "cascade"
        cfg = WhichPathConfig(
            alpha1=ns.alpha1,
            alpha2=ns.alpha2,
            scheme=scheme,
            ramsey_before_slits=ns.ramsey if ns.command == "which-path" else ns.r1,
            r2_position=getattr(ns, "r2_position", "none"),
            r2_scope=getattr(ns, "r2_scope", "shared"),
            condition_on=ns.condition_on,
            dims=_dims(ns),
            phase=ns.phi,
            trunc_tol=ns.trunc_tol,
        )
        model = _screen_model(ns)
        report = run_which_path(cfg)
        fields = report_fields(report, model)
        _write(os.path.join(ns.out_dir, ns.pattern_file), pattern_csv(report, model, ns.plot_data))
    fields["parameters"] = _parameters(ns)
    _write(os.path.join(ns.out_dir, ns.report_file), dump_json(fields) + "\n")
    return EXIT_OK


SWEEP_HEADER = [
    "index", "scheme", "alpha_re", "alpha_im", "phi", "ramsey", "dim", "status",
    "norm", "p_slit1", "p_slit2", "visibility", "distinguishability", "v2_plus_d2",
    "marker_overlap_abs", "min_cavity_fidelity", "probabilities",
]


def _sweep_row(args) -> list:
    index, alpha, scheme, phi, ramsey, dim, trunc_tol = args
    head = [index, scheme, fmt(alpha.real), fmt(alpha.imag), fmt(phi), str(ramsey).lower(), dim]
    try:
        cfg = WhichPathConfig(
            alpha1=alpha, alpha2=alpha, scheme=scheme, ramsey_before_slits=ramsey,
            dims=(dim, dim), phase=phi, trunc_tol=trunc_tol,
        )
        rep = run_which_path(cfg)
    except CQEDError as exc:
        return head + [type(exc).__name__] + [""] * (len(SWEEP_HEADER) - len(head) - 1)
    v = screen.visibility_analytic(rep.final_joint, strict=False)
    d = screen.distinguishability(rep.final_joint, strict=False)
    ov = rep.marker_overlap
    probs = ";".join(f"{k}={fmt(p)}" for k, p in rep.outcome_probabilities.items())
    p1, p2 = rep.path_probabilities
    return head + [
        "ok", fmt(rep.norm), fmt(p1), fmt(p2), fmt(v), fmt(d), fmt(v * v + d * d),
        "" if ov is None else fmt(abs(ov)), fmt(min(rep.cavity_fidelities.values())), probs,
    ]


def sweep_table(ns) -> tuple:
    """Return (csv text, number of failed rows)."""
    grid = [
        (alpha, scheme, phi, ramsey, dim)
        for scheme in ns.schemes
        for alpha in ns.alphas
        for phi in ns.phis
        for ramsey in ns.ramsey_options
        for dim in ns.dims
    ]
    tasks = [(i, *g, ns.trunc_tol) for i, g in enumerate(grid)]
    if ns.jobs > 1:
        with ThreadPoolExecutor(max_workers=ns.jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    w.writerows(rows)
    failed = sum(1 for r in rows if r[7] != "ok")
    return buf.getvalue(), failed


def _run_sweep(ns) -> int:
    os.makedirs(ns.out_dir, exist_ok=True)
    text, failed = sweep_table(ns)
    _write(os.path.join(ns.out_dir, ns.sweep_file), text)
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def _run_oracle_check(ns) -> int:
    t0 = time.perf_counter()
    results = oracle.run_oracle_check(ns.dim, ns.trials, ns.seed)
    worst = max((dev for _, dev in results), default=0.0)
    ok = worst <= ORACLE_TOL
    print(
        f"oracle-check: {len(results)} trials, dims <= {ns.dim}, max deviation {worst:.3e} "
        f"(tol {ORACLE_TOL:.0e}) in {time.perf_counter() - t0:.2f}s: {'OK' if ok else 'MISMATCH'}"
    )
    return EXIT_OK if ok else EXIT_NUMERIC


def run_and_emit(ns) -> int:
    try:
        if ns.command == "sweep":
            return _run_sweep(ns)
        if ns.command == "oracle-check":
            return _run_oracle_check(ns)
        return _run_single(ns)
    except ZeroProbability as exc:
        print(f"error: post-selection impossible: {exc}", file=sys.stderr)
        return EXIT_ZERO_PROB
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CQEDError, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = parse_config(sys.argv[1:] if argv is None else argv)
    return run_and_emit(ns)


if __name__ == "__main__":
    sys.exit(main())
