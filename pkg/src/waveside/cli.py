"""Command-line workflows and the file formats that bind them.

Subcommands: ``simulate`` (scenario config -> trace CSV + truth manifest),
``extract`` (trace + prefix config -> spectral data JSON), ``reconstruct``
(trace + prefix config -> report JSON + q CSV), ``endpoint`` (trace +
prefix config -> far-end trace CSV, no Gelfand-Levitan involved) and
``roundtrip`` (simulate, reconstruct, endpoint, then score against the
manifest).

Formats: traces are CSV with a ``# waveside trace channel=...`` comment
line, a ``t,value`` header and 17-significant-digit decimal text, so
identical inputs produce byte-identical outputs.  Configs, manifests and
reports are versioned JSON; unknown config keys are rejected.  Reconstruct
configs carry only prefix data: scenario-only fields (length, H, potential
beyond epsilon) are refused as information leakage.

Exit codes: 0 success, 2 invalid input or config, 3 numeric failure.
"""

import argparse
import json
import sys
import numpy as np

from .model import (
    ROBIN, Scenario, Trace, ValidationError, ExtractionError,
    ConvergenceError, ALL_CHANNELS,
    measurement_channel, validate_scenario, known_prefix_of,
)
from .synth import synthesize_trace, field_at
from .modes import detect_modes, spectral_data_from_modes, resolvability_report
from .pipeline import TraceReconstructor
from .reconstruct import estimate_length, GL_MARGIN, GL_POINTS_PER_MODE
from .endpoint import far_end_profile

FORMAT_VERSION = 1

_POTENTIAL_KEYS = {
    "constant": {"kind", "value"},
    "linear": {"kind", "slope", "intercept"},
    "samples": {"kind", "values"},
}
_SCENARIO_KEYS = {"length", "variant", "h", "H", "epsilon", "potential", "grid"}
_PREFIX_KEYS = {"epsilon", "variant", "h", "potential", "grid"}
_LEAKY_KEYS = {"length", "ell", "H", "big_h"}
_NUMERIC_KEYS = {"modes", "max_modes", "dt", "duration", "gl_margin",
                 "gl_points_per_mode", "reference"}


def _reject_unknown(block, allowed, where):
    unknown = set(block) - allowed
    if unknown:
        raise ValidationError("unknown key(s) %s in %s"
                              % (sorted(unknown), where))


def _require(block, key, where):
    if key not in block:
        raise ValidationError("missing field %r in %s" % (key, where))
    return block[key]


def _potential_values(block, x, where):
    _require(block, "kind", where)
    kind = block["kind"]
    if kind not in _POTENTIAL_KEYS:
        raise ValidationError("unknown potential kind %r in %s" % (kind, where))
    _reject_unknown(block, _POTENTIAL_KEYS[kind], where)
    if kind == "constant":
        return np.full_like(x, float(_require(block, "value", where)))
    if kind == "linear":
        return (float(_require(block, "slope", where)) * x
                + float(block.get("intercept", 0.0)))
    values = np.asarray(_require(block, "values", where), dtype=float)
    if len(values) != len(x):
        raise ValidationError(
            "potential samples length %d does not match grid %d in %s"
            % (len(values), len(x), where))
    return values


def _load_config(path, kind):
    with open(path) as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise ValidationError("config root must be an object")
    if cfg.get("version") != FORMAT_VERSION:
        raise ValidationError("config version must be %d" % FORMAT_VERSION)
    _reject_unknown(cfg, {"version", kind, "numeric"}, "config root")
    block = _require(cfg, kind, "config")
    numeric = cfg.get("numeric", {})
    _reject_unknown(numeric, _NUMERIC_KEYS, "numeric block")
    return block, numeric


def scenario_from_config(block):
    _reject_unknown(block, _SCENARIO_KEYS, "scenario block")
    length = float(_require(block, "length", "scenario block"))
    variant = block.get("variant", ROBIN)
    n_grid = int(block.get("grid", 1001))
    x = np.linspace(0.0, length, n_grid)
    q = _potential_values(_require(block, "potential", "scenario block"), x,
                          "scenario potential")
    s = Scenario(length=length, H=float(_require(block, "H", "scenario block")),
                 epsilon=float(_require(block, "epsilon", "scenario block")),
                 q=q, variant=variant,
                 h=float(block["h"]) if variant == ROBIN else None)
    return validate_scenario(s)


def reconstructor_from_config(block, numeric):
    leaks = set(k for k in block) & _LEAKY_KEYS
    if leaks:
        raise ValidationError(
            "prefix config must not contain %s: information leakage, the "
            "inverse side only knows data near x=0" % sorted(leaks))
    _reject_unknown(block, _PREFIX_KEYS, "prefix block")
    epsilon = float(_require(block, "epsilon", "prefix block"))
    variant = block.get("variant", ROBIN)
    n_grid = int(block.get("grid", 257))
    x = np.linspace(0.0, epsilon, n_grid)
    q = _potential_values(_require(block, "potential", "prefix block"), x,
                          "prefix potential")
    return TraceReconstructor(
        epsilon=epsilon, variant=variant,
        h=float(block["h"]) if variant == ROBIN else 0.0,
        q_prefix_x=x, q_prefix=q,
        max_modes=int(numeric.get("max_modes", 40)),
        gl_margin=float(numeric.get("gl_margin", GL_MARGIN)),
        gl_points_per_mode=float(numeric.get("gl_points_per_mode",
                                             GL_POINTS_PER_MODE)),
        reference=numeric.get("reference", "interval"))


def write_trace(path, trace):
    with open(path, "w") as f:
        f.write("# waveside trace channel=%s t0=%s\n" % (trace.channel,
                                                         repr(trace.t0)))
        f.write("t,value\n")
        t = trace.t
        for i in range(len(trace.samples)):
            f.write("%.17g,%.17g\n" % (t[i], trace.samples[i]))


def read_trace(path):
    channel = None
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tokens in line[1:].split():
                    if tokens.startswith("channel="):
                        channel = tokens.split("=", 1)[1]
                continue
            if line.startswith("t,"):
                continue
            parts = line.split(",")
            rows.append((float(parts[0]), float(parts[1])))
    if len(rows) < 2:
        raise ValidationError("trace too short: %d rows" % len(rows))
    if channel is None:
        raise ValidationError("trace file lacks a channel marker")
    if channel not in ALL_CHANNELS:
        raise ValidationError("unknown channel %r in trace file" % channel)
    t = np.array([r[0] for r in rows])
    v = np.array([r[1] for r in rows])
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12):
        raise ValidationError("trace time grid must be uniform")
    return Trace(channel=channel, t0=float(t[0]), dt=float(dt), samples=v)


def _write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _manifest_path(trace_path):
    return trace_path + ".manifest.json"


def cmd_simulate(args):
    block, numeric = _load_config(args.config, "scenario")
    s = scenario_from_config(block)
    n_modes = int(numeric.get("modes", 30))
    duration = numeric.get("duration")
    dt = numeric.get("dt")
    trace = synthesize_trace(s, n_modes,
                             duration=float(duration) if duration else None,
                             dt=float(dt) if dt else None)
    write_trace(args.out, trace)
    manifest = {
        "version": FORMAT_VERSION,
        "kind": "manifest",
        "truth": {
            "length": s.length, "H": s.H, "epsilon": s.epsilon,
            "variant": s.variant, "h": s.h,
            "a1": ((s.h or 0.0) if s.variant == ROBIN else 0.0) + s.H
                  + 0.5 * float(np.trapezoid(s.q, s.x_grid)),
            "q_grid": list(s.x_grid), "q": list(s.q),
        },
        "numeric": {"modes": n_modes, "dt": trace.dt,
                    "n_samples": len(trace.samples)},
        "trace_file": args.out,
        "channel": trace.channel,
    }
    _write_json(_manifest_path(args.out), manifest)
    print("wrote %s (%d samples, channel %s) and manifest"
          % (args.out, len(trace.samples), trace.channel))
    return 0


def _checked_trace(path, variant):
    trace = read_trace(path)
    want = measurement_channel(variant)
    if trace.channel != want:
        raise ValidationError("channel %s not a measurement input (expected "
                              "%s for the %s variant)"
                              % (trace.channel, want, variant))
    return trace


def cmd_extract(args):
    block, numeric = _load_config(args.config, "prefix")
    recon = reconstructor_from_config(block, numeric)
    trace = _checked_trace(args.infile, recon.variant)
    mode_list = detect_modes(trace, recon.max_modes)
    data = spectral_data_from_modes(mode_list, recon.epsilon, recon.variant)
    report = resolvability_report(trace, mode_list)
    _write_json(args.out, {
        "version": FORMAT_VERSION, "kind": "spectral_data",
        "lam": list(data.lam), "alpha_sq": list(data.alpha_sq),
        "n_modes": len(data),
        "resolvability": {"nyquist_margin": report.nyquist_margin,
                          "gap_margin": report.gap_margin,
                          "residual": report.residual,
                          "flags": list(report.flags)},
    })
    print("wrote %s (%d modes)" % (args.out, len(data)))
    return 0


def _q_csv_path(report_path):
    stem = report_path[:-5] if report_path.endswith(".json") else report_path
    return stem + "_q.csv"


def cmd_reconstruct(args):
    block, numeric = _load_config(args.config, "prefix")
    recon = reconstructor_from_config(block, numeric)
    trace = _checked_trace(args.infile, recon.variant)
    recon.fit(trace)
    rep = recon.report_
    q_csv = _q_csv_path(args.out)
    with open(q_csv, "w") as f:
        f.write("x,q\n")
        for xv, qv in zip(rep.q_x, rep.q_hat):
            f.write("%.17g,%.17g\n" % (xv, qv))
    _write_json(args.out, {
        "version": FORMAT_VERSION, "kind": "report",
        "variant": rep.variant, "ell_hat": rep.ell_hat, "a1_hat": rep.a1_hat,
        "H_hat": rep.H_hat, "h_hat": rep.h_hat, "n_modes": rep.n_modes,
        "q_csv": q_csv,
        "residuals": {k: v for k, v in rep.diagnostics.items()},
    })
    print("wrote %s: ell=%.6g H=%.4g a1=%.4g (%d modes)"
          % (args.out, rep.ell_hat, rep.H_hat, rep.a1_hat, rep.n_modes))
    return 0


def cmd_endpoint(args):
    block, numeric = _load_config(args.config, "prefix")
    recon = reconstructor_from_config(block, numeric)
    trace = _checked_trace(args.infile, recon.variant)
    mode_list = detect_modes(trace, recon.max_modes)
    data = spectral_data_from_modes(mode_list, recon.epsilon, recon.variant)
    ell_hat = estimate_length(data, recon.variant)
    duration = numeric.get("duration")
    t_end = float(duration) if duration else trace.duration
    t = np.arange(0.0, t_end + 0.5 * trace.dt, trace.dt)
    far = far_end_profile(data, recon.epsilon, ell_hat, t, recon.variant)
    write_trace(args.out, far)
    print("wrote %s (far-end profile, %d samples, ell_hat=%.6g)"
          % (args.out, len(far.samples), ell_hat))
    return 0


def cmd_roundtrip(args):
    block, numeric = _load_config(args.config, "scenario")
    s = scenario_from_config(block)
    stem = args.out[:-5] if args.out.endswith(".json") else args.out

    trace_path = stem + "_trace.csv"
    sim = argparse.Namespace(config=args.config, out=trace_path)
    cmd_simulate(sim)
    trace = read_trace(trace_path)

    prefix = known_prefix_of(s)
    recon = TraceReconstructor(
        epsilon=s.epsilon, variant=s.variant,
        h=s.h if s.variant == ROBIN else 0.0,
        q_prefix_x=prefix.x, q_prefix=prefix.q,
        max_modes=int(numeric.get("max_modes", numeric.get("modes", 30))),
        gl_margin=float(numeric.get("gl_margin", GL_MARGIN)),
        gl_points_per_mode=float(numeric.get("gl_points_per_mode",
                                             GL_POINTS_PER_MODE)))
    recon.fit(trace)
    rep = recon.report_

    t_far = np.arange(0.0, min(trace.duration, 20.0) + 0.5 * trace.dt, trace.dt)
    far = recon.far_end(t_far)
    far_truth = field_at(s, s.length, t_far, rep.n_modes)

    q_true = np.interp(rep.q_x, s.x_grid, s.q)
    denom = float(np.sqrt(np.trapezoid(q_true ** 2, rep.q_x)))
    q_err = float(np.sqrt(np.trapezoid((rep.q_hat - q_true) ** 2, rep.q_x)))
    a1_true = ((s.h or 0.0) if s.variant == ROBIN else 0.0) + s.H \
        + 0.5 * float(np.trapezoid(s.q, s.x_grid))
    scorecard = {
        "version": FORMAT_VERSION, "kind": "scorecard",
        "metrics": {
            "ell_abs_err": abs(rep.ell_hat - s.length),
            "H_abs_err": abs(rep.H_hat - s.H),
            "a1_abs_err": abs(rep.a1_hat - a1_true),
            "q_l2_err": q_err,
            "q_l2_rel_err": q_err / denom if denom > 0 else q_err,
            "far_end_max_err": float(np.max(np.abs(far.samples
                                                   - far_truth.samples))),
        },
        "estimates": {"ell_hat": rep.ell_hat, "H_hat": rep.H_hat,
                      "a1_hat": rep.a1_hat, "h_hat": rep.h_hat,
                      "n_modes": rep.n_modes},
        "files": {"trace": trace_path, "manifest": _manifest_path(trace_path)},
    }
    _write_json(args.out, scorecard)
    for k, v in scorecard["metrics"].items():
        print("%-18s %.6g" % (k, v))
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="waveside",
        description="One-sided wave-medium recovery: simulate a boundary "
                    "trace, then reconstruct length, boundary constant and "
                    "potential from it.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, needs_in):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config file")
        if needs_in:
            sp.add_argument("--in", dest="infile", required=True,
                            help="input trace CSV")
        sp.add_argument("--out", required=True, help="output file")
        sp.set_defaults(fn=fn)

    add("simulate", cmd_simulate, needs_in=False)
    add("extract", cmd_extract, needs_in=True)
    add("reconstruct", cmd_reconstruct, needs_in=True)
    add("endpoint", cmd_endpoint, needs_in=True)
    add("roundtrip", cmd_roundtrip, needs_in=False)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValidationError, json.JSONDecodeError, FileNotFoundError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except (ExtractionError, ConvergenceError, np.linalg.LinAlgError,
            FloatingPointError) as e:
        print("numeric failure: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
