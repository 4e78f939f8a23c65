"""Command-line front end.

Subcommands: ``curvatures``, ``reconstruct``, ``congruence``, ``invariants``,
``ranks``, ``presets`` and ``selfcheck``.  Exit codes: 0 success, 2
``not_congruent``, 3 ``inconclusive``, 1 errors.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np
from scipy.interpolate import RegularGridInterpolator, make_interp_spline
from threadpoolctl import threadpool_limits

from .congruence import KAPPA_TOL, TENSOR_TOL, WINDOW, WINDOW_SAMPLES, congruence_test
from .curves import CurveProvider, frenet
from .errors import ConfigError, GeometryError
from .geometry import MetricChart, orthonormal_frame
from .invariants import (homogeneous3_invariants, kappa_function, maurer_cartan_invariants,
                         stability_and_counts, surface_invariants)
from .presets import (curve_names, load_curve, load_preset, preset_names, preset_schema,
                      preset_selfcheck)
from .reconstruction import CurvatureSpec, initial_data_from_vectors, reconstruct

__all__ = ["main", "run", "parse_spec", "read_csv", "write_csv", "dumps"]

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONGRUENT, EXIT_INCONCLUSIVE = 0, 1, 2, 3
DEFAULT_SEED = 0

# ambient metric implied by each analytic curve preset
_CURVE_METRIC = {
    "circle": lambda p: ("euclidean", {"m": int(p.get("m", 2))}),
    "helix": lambda p: ("euclidean", {"m": 3}),
    "line": lambda p: ("euclidean", {"m": int(p.get("m", 2))}),
    "great_circle": lambda p: ("sphere", {"k": float(p.get("k", 1.0)), "m": int(p.get("m", 2))}),
    "torus_top_circle": lambda p: ("torus_example1", {}),
    "plane_circle": lambda p: ("euclidean", {"m": 2}),
}


# --- parsing and serialisation ------------------------------------------------------

def _scalar(text):
    text = text.strip()
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text.lower() in ("none", "null"):
        return None
    return text


def parse_spec(text):
    """Parse ``name``, ``name:k=v,k2=v2`` or ``name:v1,v2`` into (name, params).

    Positional values are returned as a list (schema order).
    """
    name, _, rest = text.partition(":")
    if not rest:
        return name, {}
    items = [s for s in rest.split(",") if s.strip()]
    if all("=" in s for s in items):
        return name, {k.strip(): _scalar(v) for k, v in (s.split("=", 1) for s in items)}
    if any("=" in s for s in items):
        raise ConfigError(f"mixed positional and keyword parameters in '{text}'")
    return name, [_scalar(s) for s in items]


def _spec_from_config(obj):
    if isinstance(obj, str):
        return parse_spec(obj)
    if isinstance(obj, dict) and "preset" in obj:
        return obj["preset"], obj.get("params", {})
    if isinstance(obj, dict) and "name" in obj:
        return obj["name"], obj.get("params", {})
    raise ConfigError(f"cannot read a preset spec from {obj!r}")


def _fmt(v):
    return repr(float(v))


def dumps(obj):
    """JSON with insertion key order; floats use the shortest exact repr."""

    def clean(o):
        if isinstance(o, dict):
            return {str(k): clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, np.ndarray):
            return clean(o.tolist())
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.bool_,)):
            return bool(o)
        return o

    return json.dumps(clean(obj), indent=2, allow_nan=True)


def write_csv(path, header, rows):
    """Write rows of numbers with a header; ``path='-'`` writes to stdout."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path):
    """Read a numeric CSV with a header row; returns (header, array)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row])
    return header, data


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


# --- metric and curve construction --------------------------------------------------

def tabulated_chart(path, label=None):
    """Metric from a CSV grid: columns ``x1..xm`` then ``g_ij`` for ``i <= j``.

    Values are interpolated multilinearly (lower accuracy than analytic
    presets: second derivatives of the metric are not continuous).
    """
    header, data = read_csv(path)
    ncol = data.shape[1]
    m = 1
    while m + m * (m + 1) // 2 < ncol:
        m += 1
    if m + m * (m + 1) // 2 != ncol:
        raise ConfigError(f"{path}: {ncol} columns do not describe a metric grid")
    axes = [np.unique(data[:, i]) for i in range(m)]
    shape = tuple(a.size for a in axes)
    if int(np.prod(shape)) != data.shape[0]:
        raise ConfigError(f"{path}: points do not form a regular grid")
    order = np.lexsort(data[:, :m][:, ::-1].T)
    vals = data[order, m:].reshape(shape + (ncol - m,))
    interp = RegularGridInterpolator(axes, vals, method="linear")
    iu = np.triu_indices(m)

    def metric(x):
        x = np.asarray(x, dtype=float)
        comp = interp(x.reshape(-1, m))
        out = np.zeros((comp.shape[0], m, m))
        out[:, iu[0], iu[1]] = comp
        out[:, iu[1], iu[0]] = comp
        return out.reshape(x.shape[:-1] + (m, m))

    return MetricChart(dim=m, metric=metric, lower=[a[0] for a in axes],
                       upper=[a[-1] for a in axes], label=label or f"tabulated({path})")


def csv_curve(path, degree=7):
    """Curve from a CSV of samples ``t, x1..xm`` via an interpolating spline."""
    _, data = read_csv(path)
    t, x = data[:, 0], data[:, 1:]
    spline = make_interp_spline(t, x, k=min(degree, len(t) - 1))

    def derivatives(s, order):
        return np.array([spline(s, nu=k) if k <= spline.k else np.zeros(x.shape[1])
                         for k in range(order + 1)])

    return CurveProvider(lambda s: spline(np.asarray(s)), derivatives, label=path,
                         analytic=False)


def _metric(spec_text, csv_path, curve_name=None, curve_params=None):
    if csv_path:
        return tabulated_chart(csv_path), None
    if spec_text is None:
        if curve_name not in _CURVE_METRIC:
            raise ConfigError("no metric given and none implied by the curve")
        name, params = _CURVE_METRIC[curve_name](
            curve_params if isinstance(curve_params, dict) else {})
    else:
        name, params = _spec_from_config(spec_text)
    desc = load_preset(name, params)
    return desc.chart, desc


def _curve(spec_text, csv_path):
    if csv_path:
        return csv_curve(csv_path), None, None
    if spec_text is None:
        raise ConfigError("a curve is required (preset spec or CSV)")
    name, params = _spec_from_config(spec_text)
    return load_curve(name, params), name, params


# --- subcommands ----------------------------------------------------------------------

def _times(args):
    if args.n <= 1:
        return np.array([args.t0])
    return np.linspace(args.t0, args.t1, args.n)


def cmd_curvatures(args):
    curve, cname, cparams = _curve(args.curve, args.curve_csv)
    chart, _ = _metric(args.preset, args.metric_csv, cname, cparams)
    m = chart.dim
    header = (["t"] + [f"kappa{i}" for i in range(m)] + [f"delta{k}" for k in range(1, m + 1)]
              + [f"X{i + 1}_{c + 1}" for i in range(m) for c in range(m)])
    rows = []
    for t in _times(args):
        fr = frenet(chart, curve.jet(t, m))
        rows.append([t, *fr.kappas, *fr.deltas, *fr.frame.T.ravel()])
    write_csv(args.out, header, rows)
    return EXIT_OK


def _kappa_spec(obj, t0):
    if isinstance(obj, dict) and "constant" in obj:
        return CurvatureSpec.constant(obj["constant"], t0)
    if isinstance(obj, dict) and "polynomial" in obj:
        return CurvatureSpec.polynomial(obj["polynomial"], t0)
    if isinstance(obj, (list, tuple)):
        return CurvatureSpec.constant(obj, t0)
    raise ConfigError("kappas must be a list or {'constant': [...]} / {'polynomial': [[...]]}")


def cmd_reconstruct(args):
    cfg = args.config_data
    for key in ("metric", "x0", "kappas", "t_span"):
        if key not in cfg:
            raise ConfigError(f"reconstruct config needs '{key}'")
    name, params = _spec_from_config(cfg["metric"])
    chart = load_preset(name, params).chart
    t0 = float(cfg.get("t0", 0.0))
    spec = _kappa_spec(cfg["kappas"], t0)
    if spec.m != chart.dim:
        raise ConfigError(f"{spec.m} curvatures given for a {chart.dim}-dimensional metric")
    x0 = np.asarray(cfg["x0"], dtype=float)
    if "vectors" in cfg:
        frame0 = initial_data_from_vectors(chart, x0, cfg["vectors"], spec)
    elif "frame0" in cfg:
        frame0 = np.asarray(cfg["frame0"], dtype=float)
    else:
        frame0 = orthonormal_frame(chart.g(x0), chart.orientation)
    step = float(cfg.get("step", args.step))
    res = reconstruct(chart, x0, frame0, spec, cfg["t_span"], step=step,
                      reorthonormalize=bool(cfg.get("reorthonormalize", False)))
    m = chart.dim
    header = (["t"] + [f"x{i + 1}" for i in range(m)]
              + [f"X{i + 1}_{c + 1}" for i in range(m) for c in range(m)])
    rows = [[t, *x, *Y.T.ravel()] for t, x, Y in zip(res.t, res.x, res.frames)]
    write_csv(args.out, header, rows)
    report = {"drift": res.drift, "drift_rate": res.drift_rate,
              "kappa_error": res.kappa_error, "samples": int(res.t.size),
              "measured": [[t, *k] for t, k in zip(res.measured_t, res.measured_kappas)]
              if res.measured_t is not None else []}
    if args.report:
        _emit(dumps(report), args.report)
    else:
        sys.stderr.write(dumps({k: v for k, v in report.items() if k != "measured"}) + "\n")
    return EXIT_OK


def cmd_congruence(args):
    ca, na, pa = _curve(args.a, args.a_csv)
    cb, nb, pb = _curve(args.b, args.b_csv)
    chart_a, _ = _metric(args.metric_a, args.metric_a_csv, na, pa)
    chart_b, _ = _metric(args.metric_b, args.metric_b_csv, nb, pb)
    rep = congruence_test(chart_a, ca, chart_b, cb, args.t0, criterion=args.criterion,
                          j_max=args.j_max, kappa_tol=args.kappa_tol,
                          tensor_tol=args.tensor_tol, window=args.window,
                          samples=args.samples, transport=args.transport)
    _emit(dumps(rep.as_dict()), args.out)
    return {"congruent": EXIT_OK, "not_congruent": EXIT_NOT_CONGRUENT,
            "inconclusive": EXIT_INCONCLUSIVE}[rep.verdict]


def cmd_invariants(args):
    curve, cname, cparams = _curve(args.curve, args.curve_csv)
    chart, desc = _metric(args.preset, args.metric_csv, cname, cparams)
    m = chart.dim
    kind = args.kind
    if kind == "auto":
        if desc is not None and desc.name == "g_kappa_tau":
            kind = "homogeneous3"
        elif desc is not None and desc.name == "solvable_group":
            kind = "maurer_cartan"
        elif m == 2 and not (desc is not None and desc.name == "euclidean"):
            kind = "surface"
        else:
            kind = "kappa"
    rows = []
    if kind == "surface":
        header = ["t", "I1", "I2", "I3", "I4"]
        for t in _times(args):
            rows.append([t, *surface_invariants(chart, curve.jet(t, 1))])
    elif kind == "homogeneous3":
        header = ["t", "kappa0_tilde", "I1", "kappa1"]
        for t in _times(args):
            rows.append(list(homogeneous3_invariants(desc, curve.jet(t, 2))))
    elif kind == "maurer_cartan":
        header = ["t", "I1", "I2", "I3"]
        for t in _times(args):
            rows.append([t, *maurer_cartan_invariants(desc, curve.jet(t, 1))])
    elif kind == "kappa":
        header = ["t"] + [f"kappa{i}" for i in range(m)]
        fs = [kappa_function(chart, i) for i in range(m)]
        for t in _times(args):
            jet = curve.jet(t, m)
            rows.append([t, *[f(jet) for f in fs]])
    else:
        raise ConfigError(f"unknown invariant kind '{kind}'")
    write_csv(args.out, header, rows)
    return EXIT_OK


def cmd_ranks(args):
    name, params = _spec_from_config(args.preset)
    desc = load_preset(name, params)
    tab = stability_and_counts(desc, args.rmax, samples=args.samples, seed=args.seed,
                               tol=args.rank_tol)
    out = {"preset": desc.name, "params": desc.params, "seed": args.seed,
           "samples": args.samples, **tab.as_dict()}
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_presets(args):
    out = {"presets": [], "curves": curve_names()}
    for name in preset_names():
        desc = load_preset(name, validate=False)
        consts = {k: v for k, v in desc.constants.items()}
        out["presets"].append({"name": name, "params": preset_schema(name), "dim": desc.dim,
                               "killing": [f.label for f in desc.killing],
                               "constants": consts})
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_selfcheck(args):
    names = preset_names() if args.preset is None else [args.preset]
    reports = []
    for item in names:
        name, params = parse_spec(item)
        reports.append(preset_selfcheck(name, params or None, seed=args.seed).as_dict())
    ok = all(r["pass"] for r in reports)
    _emit(dumps({"pass": ok, "reports": reports}), args.out)
    return EXIT_OK if ok else EXIT_ERROR


# --- argument handling ----------------------------------------------------------------

def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default {DEFAULT_SEED})")
    p.add_argument("--threads", type=int, default=None, help="cap on BLAS threads")
    p.add_argument("--config", default=None, help="JSON config file (keys as flag names)")
    p.add_argument("--out", default=None, help="output path ('-' or absent: stdout)")


def _add_curve_opts(p, sampled=True):
    p.add_argument("--preset", default=None, help="metric preset, e.g. euclidean:2")
    p.add_argument("--metric-csv", default=None, help="tabulated metric grid (CSV)")
    p.add_argument("--curve", default=None, help="curve preset, e.g. circle:r=1")
    p.add_argument("--curve-csv", default=None, help="curve samples t,x1..xm (CSV)")
    if sampled:
        p.add_argument("--t0", type=float, default=None)
        p.add_argument("--t1", type=float, default=None)
        p.add_argument("--n", type=int, default=None, help="number of samples")


def build_parser():
    ap = argparse.ArgumentParser(prog="frenetgeo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvatures", help="Frenet apparatus along a curve (CSV)")
    _add_common(p)
    _add_curve_opts(p)
    p.set_defaults(func=cmd_curvatures)

    p = sub.add_parser("reconstruct", help="curve from curvatures (config JSON)")
    _add_common(p)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--report", default=None, help="JSON round-trip report path")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("congruence", help="congruence report (JSON)")
    _add_common(p)
    p.add_argument("--a", default=None, help="first curve preset")
    p.add_argument("--b", default=None, help="second curve preset")
    p.add_argument("--a-csv", default=None)
    p.add_argument("--b-csv", default=None)
    p.add_argument("--metric-a", default=None)
    p.add_argument("--metric-b", default=None)
    p.add_argument("--metric-a-csv", default=None)
    p.add_argument("--metric-b-csv", default=None)
    p.add_argument("--criterion", default=None,
                   choices=["general", "symmetric", "constant_curvature"])
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--j-max", type=int, default=None)
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--kappa-tol", type=float, default=None)
    p.add_argument("--tensor-tol", type=float, default=None)
    p.add_argument("--transport", action="store_true", default=None)
    p.set_defaults(func=cmd_congruence)

    p = sub.add_parser("invariants", help="invariant traces along a curve (CSV)")
    _add_common(p)
    _add_curve_opts(p)
    p.add_argument("--kind", default=None,
                   choices=["auto", "surface", "homogeneous3", "maurer_cartan", "kappa"])
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("ranks", help="rank / N_r / k_r table (JSON)")
    _add_common(p)
    p.add_argument("--preset", default=None)
    p.add_argument("--rmax", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--rank-tol", type=float, default=None)
    p.set_defaults(func=cmd_ranks)

    p = sub.add_parser("presets", help="list presets (JSON)")
    _add_common(p)
    p.add_argument("action", nargs="?", default="list", choices=["list"])
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("selfcheck", help="run preset self checks (JSON)")
    _add_common(p)
    p.add_argument("--preset", default=None)
    p.set_defaults(func=cmd_selfcheck)
    return ap


_DEFAULTS = {
    "seed": DEFAULT_SEED, "t0": 0.0, "t1": 1.0, "n": 11, "step": 1e-3,
    "criterion": "general", "j_max": 2, "window": WINDOW, "samples": None,
    "kappa_tol": KAPPA_TOL, "tensor_tol": TENSOR_TOL, "transport": False,
    "kind": "auto", "rmax": 4, "rank_tol": 1e-8,
}
_SAMPLES_DEFAULT = {"congruence": WINDOW_SAMPLES, "ranks": 100}


def _merge_config(args):
    """Fill unset flags from ``--config``; a flag and a differing config value
    for the same key is an error."""
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    args.config_data = cfg
    for key, val in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr) or attr in ("config", "func", "command"):
            continue
        cur = getattr(args, attr)
        if cur is not None and cur != val:
            raise ConfigError(f"'{key}' given both as a flag ({cur!r}) and in the config "
                              f"({val!r})")
        setattr(args, attr, val)
    for key, val in _DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, val)
    if hasattr(args, "samples") and args.samples is None:
        args.samples = _SAMPLES_DEFAULT.get(args.command, 100)
    for key in ("kappa_tol", "tensor_tol", "rank_tol", "step", "window"):
        if hasattr(args, key) and getattr(args, key) is not None and getattr(args, key) <= 0:
            raise ConfigError(f"'{key}' must be positive")


def run(argv=None):
    """Run the CLI; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        np.random.seed(args.seed)
        if args.threads is not None:
            with threadpool_limits(limits=args.threads):
                return args.func(args)
        return args.func(args)
    except (GeometryError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
