"""Command-line front end.

Commands
--------
endpoints   solve for a spectral curve and print its data
stokes      trace the Stokes graph of a curve (JSON or SVG)
critical    trace critical loci in the S or λ plane (JSON or CSV)
vacua       list the one-cut vacua of the Gaussian or cubic model
split-scan  scan the prepotential across a cut-splitting point

Complex inputs are written ``re,im`` (a bare real number is also
accepted).  JSON documents have the top-level keys ``config``, ``result``
and ``diagnostics``; complex numbers are two-element arrays.

Exit codes: 0 success, 2 input error, 3 no result, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .curve import (ContinuationError, SolverError, SpectralCurve, one_cut_cubic_curve,
                    one_cut_cubic_from_beta, period_integral, puiseux_two_cut,
                    solve_two_cut_cubic)
from .poly import Potential
from .quad import QuadratureError

EXIT_OK, EXIT_INPUT, EXIT_NO_RESULT, EXIT_NUMERIC = 0, 2, 3, 4


class InputError(ValueError):
    """Malformed or inconsistent command-line input."""


class NoResultError(RuntimeError):
    """The command ran but found nothing to report."""


# -- serialization ----------------------------------------------------------

def parse_complex(text):
    """Parse ``re,im`` or ``re`` into a complex number."""
    parts = str(text).split(",")
    if len(parts) not in (1, 2):
        raise InputError(f"malformed complex number {text!r}; expected re,im")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise InputError(f"malformed complex number {text!r}; expected re,im") from None
    if not all(math.isfinite(v) for v in vals):
        raise InputError(f"non-finite complex number {text!r}")
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def to_json(obj):
    """Recursively convert to JSON-compatible values; complex -> [re, im]."""
    if isinstance(obj, (complex, np.complexfloating)):
        return [_finite(obj.real), _finite(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite(float(obj))
    if isinstance(obj, np.ndarray):
        return [to_json(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json(x) for x in obj]
    return obj


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def from_json_complex(v):
    """Inverse of :func:`to_json` for one complex number; plain reals are accepted."""
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def curve_to_dict(curve, model, w):
    """Curve data sufficient to rebuild the curve exactly with :func:`curve_from_dict`."""
    periods = [period_integral(curve, j) for j in range(curve.s)]
    return {
        "model": model,
        "w": w,
        "endpoints": [z for c in curve.cuts for z in (c.a_minus, c.a_plus)],
        "S": [c.S for c in curve.cuts],
        "cuts": [{"a_minus": c.a_minus, "a_plus": c.a_plus, "S": c.S, "beta": c.beta,
                  "delta": c.delta} for c in curve.cuts],
        "double_roots": list(curve.double_roots),
        "f_coeffs": curve.f_coeffs,
        "period_residuals": [abs(p - c.S) for p, c in zip(periods, curve.cuts)],
    }


def curve_from_dict(d):
    model = d["model"]
    if model == "gaussian":
        pot = Potential.gaussian()
    elif model == "cubic":
        pot = Potential.cubic(from_json_complex(d["w"]))
    else:
        raise InputError(f"unknown model {model!r} in input file")
    return SpectralCurve.from_endpoints(pot, [from_json_complex(z) for z in d["endpoints"]],
                                        [from_json_complex(s) for s in d["S"]])


def _load_file(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _threads():
    val = os.environ.get("SPECTOOL_THREADS")
    if val:
        try:
            n = int(val)
        except ValueError:
            raise InputError("SPECTOOL_THREADS must be a positive integer") from None
        if n < 1:
            raise InputError("SPECTOOL_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


# -- curve construction -----------------------------------------------------

def _require(cfg, name):
    if cfg.get(name) is None:
        raise InputError(f"--{name.replace('_', '-')} is required for this command")
    return cfg[name]


def build_curve(cfg):
    """Spectral curve described by the configuration (or by ``--from-file``)."""
    if cfg.get("from_file"):
        doc = _load_file(cfg["from_file"])
        data = doc.get("result", {}).get("curve", doc.get("curve"))
        if data is None:
            raise InputError("input file has no curve")
        curve = curve_from_dict(data)
        if cfg.get("S2") is None:
            return curve, data["model"], from_json_complex(data["w"]) if data["model"] == "cubic" else None
    model = cfg["model"]
    if model == "gaussian":
        from .prepotential import gaussian_curve
        S = _require(cfg, "S")
        if S == 0:
            raise InputError("S must be nonzero")
        return gaussian_curve(S), model, None
    w = _require(cfg, "w")
    if cfg.get("lambda_") is not None:
        lam = cfg["lambda_"]
        sign = 1 if cfg.get("sign", "plus") == "plus" else -1
        return one_cut_cubic_from_beta(w, sign * cmath.sqrt(w - lam)), model, w
    S = _require(cfg, "S")
    if cfg.get("S2") is None:
        k = cfg.get("branch")
        if k is None:
            raise InputError("--branch is required for the one-cut cubic model")
        return one_cut_cubic_curve(w, S, k), model, w
    return _two_cut(cfg, w, S, cfg["S2"]), model, w


def _two_cut(cfg, w, S1, S2):
    """Two-cut cubic curve from the best available starting guess."""
    guesses = []
    if cfg.get("from_file"):
        data = _load_file(cfg["from_file"])
        data = data.get("result", {}).get("curve", data.get("curve", {}))
        eps = [from_json_complex(z) for z in data.get("endpoints", [])]
        if len(eps) == 4:
            guesses.append(("file", eps))
    sigma = max(abs(S1), abs(S2)) / abs(w) ** 1.5
    if sigma < 0.2:
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            guesses.append(("puiseux", puiseux_two_cut(w, S1, S2)))
    last = None
    for _, guess in guesses:
        try:
            return solve_two_cut_cubic(w, S1, S2, guess)
        except (SolverError, QuadratureError) as exc:
            last = exc
    if cfg.get("branch") is not None:
        # open the double root -β of the one-cut curve at S₁ + S₂
        from .critical import open_split
        one = one_cut_cubic_curve(w, S1 + S2, cfg["branch"])
        return open_split(w, one, -one.cuts[0].beta, S1, S2)
    raise SolverError(f"no starting guess converged for the two-cut system: {last}")


# -- commands -----------------------------------------------------------------

def cmd_endpoints(cfg):
    curve, model, w = build_curve(cfg)
    data = curve_to_dict(curve, model, w)
    res = max(data["period_residuals"])
    return {"curve": data, "max_period_residual": res}, {}


def cmd_stokes(cfg):
    from .stokes import stokes_graph
    curve, model, w = build_curve(cfg)
    graph = stokes_graph(curve)
    result = {
        "curve": curve_to_dict(curve, model, w),
        "turning_points": [{"location": t.location, "multiplicity": t.multiplicity,
                            "kind": t.kind, "label": t.label} for t in graph.turning_points],
        "phases": graph.phases,
        "lines": [{"phase": l.phase, "start": l.start, "start_angle": l.start_angle,
                   "terminus": list(l.terminus), "finite": l.finite, "length": l.length,
                   "samples": l.samples} for l in graph.lines],
        "minimal_cut": graph.minimal_cut_flags,
        "events": graph.events,
    }
    diag = {"warnings": graph.warnings, "trace_errors": graph.errors}
    return result, diag


def cmd_critical(cfg):
    from .critical import (critical_loci_S, lambda_loci, locus_crossings, point_in_polygon,
                           refine_crossing)
    w = _require(cfg, "w")
    if cfg["model"] != "cubic":
        raise InputError("critical loci are only available for the cubic model")
    loci = []
    if cfg.get("plane", "S") == "lambda":
        sign = 1 if cfg.get("sign", "plus") == "plus" else -1
        for i, loc in enumerate(lambda_loci(w, sign)):
            loci.append({"name": f"lambda_{cfg.get('sign', 'plus')}_{i}", "locus": loc,
                         "contains_w": bool(loc.closed and point_in_polygon(w, loc.polyline))})
    else:
        branches = [cfg["branch"]] if cfg.get("branch") is not None else [0, 1, 2]
        with ThreadPoolExecutor(max_workers=min(_threads(), len(branches))) as pool:
            found = list(pool.map(lambda k: (k, critical_loci_S(w, k)), branches))
        for k, arcs in found:
            for i, loc in enumerate(arcs):
                entry = {"name": f"k{k}_{i}", "locus": loc}
                if cfg.get("probe_re") is not None:
                    x = cfg["probe_re"]
                    entry["crossings"] = [complex(x, refine_crossing(w, k, x, y))
                                          for y in locus_crossings(loc, x)]
                loci.append(entry)
    loci = [e for e in loci if len(e["locus"].polyline)]
    if not loci:
        raise NoResultError("no-locus-found: the seed scan found no sign change of the residual")
    summary = []
    for e in loci:
        loc = e["locus"]
        item = {"name": e["name"], "branch": loc.branch, "plane": loc.plane, "closed": loc.closed,
                "vertices": len(loc.polyline), "max_residual": loc.max_residual,
                "status": loc.status}
        for key in ("crossings", "contains_w"):
            if key in e:
                item[key] = e[key]
        summary.append(item)
    result = {"loci": summary}
    polylines = {e["name"]: e["locus"].polyline for e in loci}
    return result, {"polylines": polylines}


def cmd_vacua(cfg):
    from .prepotential import solve_vacua_cubic_one_cut, solve_vacua_gaussian
    N = _require(cfg, "N")
    Lam = _require(cfg, "Lambda")
    if N < 1:
        raise InputError("--N must be at least 1")
    if Lam == 0:
        raise InputError("--Lambda must be nonzero")
    if cfg["model"] == "gaussian":
        vac = solve_vacua_gaussian(N, Lam)
    else:
        vac = solve_vacua_cubic_one_cut(_require(cfg, "w"), N, Lam, on_degenerate="flag")
    rows = [{"label": list(v.label), "S": v.S_vev[0], "beta": v.beta, "W_low": v.W_low,
             "trPhi": v.trPhi, "residual": v.residual,
             "degenerate": "degenerate" in v.label} for v in vac]
    return {"vacua": rows}, {}


def cmd_split_scan(cfg):
    from .critical import splitting_scan
    w = _require(cfg, "w")
    if cfg["model"] != "cubic":
        raise InputError("split-scan is only available for the cubic model")
    k = cfg["branch"] if cfg.get("branch") is not None else 2
    opts = {}
    if cfg.get("path"):
        opts = _load_file(cfg["path"])
        if not isinstance(opts, dict):
            raise InputError("--path file must hold a JSON object")
    re_s = opts.get("re_s", cfg.get("probe_re"))
    if re_s is None:
        re_s = -abs(w) ** 1.5 / 4
    kwargs = {key: opts[key] for key in ("im_guess", "h", "levels") if key in opts}
    N_parts = tuple(cfg.get("Nparts") or (1, 1))
    rep = splitting_scan(w, k=k, re_s=re_s, N_parts=N_parts, **kwargs)
    tol = cfg.get("tol") or 1e-5
    result = {
        "T_c": rep.T_c, "S_c": complex(re_s, rep.T_c), "jumps": rep.jumps,
        "extrapolation_errors": rep.errors, "Lambda_c_sq": rep.Lambda_c_sq,
        "continuity_tolerance": tol,
        "continuous": {n: abs(rep.jumps[n]) < tol for n in ("F", "dF", "d2F")},
        "third_derivative_jump_detected": rep.third_order,
        "field_equation_residuals": rep.field_equation_residuals,
    }
    return result, {"samples": rep.samples}


COMMANDS = {"endpoints": cmd_endpoints, "stokes": cmd_stokes, "critical": cmd_critical,
            "vacua": cmd_vacua, "split-scan": cmd_split_scan}


# -- output -------------------------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def stokes_svg(result):
    """SVG 1.1 picture of a Stokes graph; viewport = turning-point box × 1.5."""
    tps = np.array([from_json_complex(t["location"]) for t in result["turning_points"]])
    cx = (tps.real.min() + tps.real.max()) / 2
    cy = (tps.imag.min() + tps.imag.max()) / 2
    half = max(tps.real.max() - tps.real.min(), tps.imag.max() - tps.imag.min(), 1e-6) / 2 * 1.5
    x0, y0, size = cx - half, -(cy + half), 2 * half
    phases = sorted({round(p, 12) for p in result["phases"]} |
                    {round(l["phase"], 12) for l in result["lines"]})
    stroke = size / 400
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="600" height="600" '
           f'viewBox="{x0:.6g} {y0:.6g} {size:.6g} {size:.6g}">']
    for l in result["lines"]:
        color = _PALETTE[phases.index(round(l["phase"], 12)) % len(_PALETTE)]
        pts = " ".join(f"{p[0]:.6g},{-p[1]:.6g}" for p in l["samples"])
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="{stroke:.3g}" points="{pts}"/>')
    for t in result["turning_points"]:
        z = t["location"]
        fill = "black" if t["multiplicity"] == 1 else "white"
        out.append(f'<circle cx="{z[0]:.6g}" cy="{-z[1]:.6g}" r="{3 * stroke:.3g}" fill="{fill}" '
                   f'stroke="black" stroke-width="{stroke / 2:.3g}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def polyline_csv(name, poly, cfg):
    buf = io.StringIO()
    meta = {"locus": name, "version": __version__, "w": cfg.get("w"), "plane": cfg.get("plane", "S")}
    buf.write("# " + json.dumps(to_json(meta)) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for z in poly:
        writer.writerow([repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


def vacua_csv(rows, cfg):
    buf = io.StringIO()
    buf.write("# " + json.dumps(to_json({"config": cfg, "version": __version__})) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for r in rows:
        cells = ["/".join(str(x) for x in r["label"])]
        for key in ("S", "beta", "W_low", "trPhi"):
            z = complex(r[key]) if r[key] is not None else complex("nan")
            cells += [repr(z.real), repr(z.imag)]
        cells.append(repr(r["residual"]))
        writer.writerow(cells)
    return buf.getvalue()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _document(cfg, result, diagnostics):
    return {"config": cfg, "version": __version__, "result": result, "diagnostics": diagnostics}


def emit(cfg, result, diagnostics):
    fmt = cfg.get("format") or "json"
    command = cfg["command"]
    out = cfg.get("out")
    if fmt == "json":
        if command == "critical":
            result = dict(result, polylines=diagnostics.pop("polylines"))
        _write(out, json.dumps(to_json(_document(cfg, result, diagnostics)), indent=1) + "\n")
    elif fmt == "svg":
        if command != "stokes":
            raise InputError("--format svg is only available for the stokes command")
        _write(out, stokes_svg(to_json(result)))
        if out not in (None, "-"):
            stem = os.path.splitext(out)[0]
            _write(stem + ".json", json.dumps(to_json(_document(cfg, result, diagnostics)), indent=1) + "\n")
    elif fmt == "csv":
        if command == "critical":
            polys = diagnostics.pop("polylines")
            if out in (None, "-"):
                if len(polys) != 1:
                    raise InputError("--out is required for CSV output of several loci")
                name, poly = next(iter(polys.items()))
                _write(None, polyline_csv(name, poly, cfg))
            else:
                stem = os.path.splitext(out)[0]
                files = {}
                for name, poly in polys.items():
                    fname = f"{stem}_{name}.csv"
                    _write(fname, polyline_csv(name, poly, cfg))
                    files[name] = fname
                result = dict(result, files=files)
                sys.stdout.write(json.dumps(to_json(_document(cfg, result, diagnostics)), indent=1) + "\n")
        elif command == "vacua":
            _write(out, vacua_csv(result["vacua"], cfg))
        else:
            raise InputError(f"--format csv is not available for {command}")


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser():
    p = _Parser(prog="spectralcut", description="Spectral curves, Stokes graphs and critical loci.")
    p.add_argument("--version", action="version", version=f"spectralcut {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--model", choices=["gaussian", "cubic"], default="cubic")
    p.add_argument("--w", type=str)
    p.add_argument("--S", type=str)
    p.add_argument("--S2", type=str)
    p.add_argument("--branch", type=int, choices=[0, 1, 2])
    p.add_argument("--lambda", dest="lambda_", type=str)
    p.add_argument("--sign", choices=["plus", "minus"], default="plus")
    p.add_argument("--plane", choices=["S", "lambda"], default="S")
    p.add_argument("--N", type=int)
    p.add_argument("--Nparts", type=str, help="comma-separated partition of N, e.g. 1,1")
    p.add_argument("--Lambda", type=str)
    p.add_argument("--probe-re", dest="probe_re", type=float)
    p.add_argument("--path", type=str)
    p.add_argument("--tol", type=float)
    p.add_argument("--out", type=str)
    p.add_argument("--format", choices=["json", "csv", "svg"], default="json")
    p.add_argument("--from-file", dest="from_file", type=str)
    return p


_VALUE_OPTIONS = {"--w", "--S", "--S2", "--lambda", "--Lambda", "--probe-re", "--tol"}


def _attach_negative_values(argv):
    """Rewrite ``--S -0.5,-3`` as ``--S=-0.5,-3`` so argparse keeps negative values."""
    out, i = [], 0
    argv = list(argv)
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1][:1] == "-" \
                and argv[i + 1][1:2] in set("0123456789.,"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def make_config(argv):
    args = build_parser().parse_args(_attach_negative_values(argv))
    cfg = vars(args)
    for key in ("w", "S", "S2", "lambda_", "Lambda"):
        if cfg.get(key) is not None:
            cfg[key] = parse_complex(cfg[key])
    if cfg.get("Nparts"):
        try:
            cfg["Nparts"] = [int(x) for x in cfg["Nparts"].split(",")]
        except ValueError:
            raise InputError("--Nparts must be comma-separated integers") from None
        if cfg.get("N") is None:
            cfg["N"] = sum(cfg["Nparts"])
    if cfg.get("tol") is not None and not cfg["tol"] > 0:
        raise InputError("--tol must be positive")
    return cfg


def _error(kind, message, code, cfg=None):
    doc = {"config": cfg, "version": __version__, "result": None,
           "diagnostics": {"error": {"type": kind, "message": message, "exit_code": code}}}
    sys.stdout.write(json.dumps(to_json(doc), indent=1) + "\n")
    return code


def main(argv=None):
    from .critical import GeometryError
    from .prepotential import SingularConfigurationError

    argv = sys.argv[1:] if argv is None else argv
    cfg = None
    try:
        cfg = make_config(argv)
        result, diagnostics = COMMANDS[cfg["command"]](cfg)
        emit(cfg, result, diagnostics)
        return EXIT_OK
    except InputError as exc:
        kind = "parse-error" if cfg is None else "input-error"
        return _error(kind, str(exc), EXIT_INPUT, cfg)
    except (GeometryError, NoResultError) as exc:
        return _error("no-result", str(exc), EXIT_NO_RESULT, cfg)
    except (SolverError, ContinuationError, QuadratureError, SingularConfigurationError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        return _error("numerical-failure", str(exc), EXIT_NUMERIC, cfg)
    except ValueError as exc:
        return _error("input-error", str(exc), EXIT_INPUT, cfg)


if __name__ == "__main__":
    sys.exit(main())
