"""Swap Test simulation, export and decoherence characterisation.

Subcommands: sweep, export-qasm, ingest-counts, classify, tomography,
verify-derivation, replay.  Every command writes ``manifest.json`` next to its
outputs; ``replay`` re-runs a manifest.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, characterize, circuits, protocol, qcore, svg, tomography
from .config import Settings, load_settings, parse_angle, settings_from_dict
from .errors import (
    ConfigError,
    FormatError,
    IllConditionedAngleError,
    UnmatchedPointError,
)

SWEEP_COLUMNS = ["epsilon", "alpha", "p_one_exact", "p_joint_00_exact", "p_sampled",
                 "test_purity", "oracle", "abs_err"]
COMPARISON_COLUMNS = ["epsilon", "alpha", "p_sim", "p_exp", "abs_dev", "tvd", "shots"]
MATCH_TOL = 1e-9


def _num(x):
    return "" if x is None else repr(float(x))


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def apply_overrides(settings, seed=None, shots=None, exact=False):
    t = settings.template
    if seed is not None:
        t = replace(t, seed=seed)
    if shots is not None:
        t = replace(t, shots=shots)
    if exact:
        t = replace(t, shots=None)
    return Settings(t, settings.eps_grid, settings.alpha_grid)


def write_manifest(out_dir, command, settings, config_path=None, extra=None, outputs=()):
    manifest = {
        "tool": "swapchar",
        "version": __version__,
        "command": command,
        "config_path": None if config_path is None else str(config_path),
        "config": settings.to_dict(),
        "out_dir": str(out_dir),
        "seed": settings.template.seed,
        "shots": settings.template.shots,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "options": extra or {},
        "outputs": [Path(p).name for p in outputs],
    }
    return _write(Path(out_dir) / "manifest.json", _dump_json(manifest))


def counts_document(records, measured_roles):
    experiments = []
    for r in records:
        experiments.append({
            "epsilon": r.epsilon,
            "alpha": r.alpha,
            "counts": dict(r.counts.counts),
            "bit_order": "q0-left",
            "measured": list(measured_roles),
        })
    return {"experiments": experiments}


# --------------------------------------------------------------------------
# commands


def cmd_sweep(settings, out_dir, svg_plot=False):
    """Run the sweep; write results.csv (+ counts.json when sampling, + plot.svg)."""
    out_dir = Path(out_dir)
    res = protocol.run_sweep(settings.template, settings.eps_grid, settings.alpha_grid)
    rows = [
        [_num(r.epsilon), _num(r.alpha), _num(r.p_one_exact), _num(r.p_joint_00_exact),
         _num(r.p_sampled), _num(r.test_purity), _num(r.oracle), _num(r.abs_err)]
        for r in res.records
    ]
    outputs = [_write(out_dir / "results.csv", _csv_text(SWEEP_COLUMNS, rows))]
    if settings.template.shots is not None:
        roles = protocol.experiment_circuit(settings.template).measured_roles
        outputs.append(_write(out_dir / "counts.json", _dump_json(counts_document(res.records, roles))))
    if svg_plot:
        outputs.append(_write(out_dir / "plot.svg", sweep_svg(settings, res)))
    return res, outputs


def sweep_svg(settings, res):
    use00 = settings.template.control_measurement
    field = "p_joint_00_exact" if use00 else "p_one_exact"
    n_a = len(settings.alpha_grid)
    series = []
    for i, eps in enumerate(settings.eps_grid):
        recs = res.records[i * n_a:(i + 1) * n_a]
        series.append((f"eps={eps:.3f}", [r.alpha for r in recs], [getattr(r, field) for r in recs]))
    ylabel = "P(ancilla=0, control=0)" if use00 else "P(outcome 1)"
    return svg.line_plot(series, "alpha (rad)", ylabel, title=f"{settings.template.variant.value} swap test")


def cmd_export_qasm(settings, out_dir):
    """One OpenQASM 2.0 file per grid point, named eps{i}_alpha{j}.qasm."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, eps in enumerate(settings.eps_grid):
        for j, alpha in enumerate(settings.alpha_grid):
            circ = protocol.experiment_circuit(settings.template.at(eps, alpha))
            paths.append(_write(out_dir / f"eps{i}_alpha{j}.qasm", circuits.to_openqasm(circ)))
    return paths


def _match_point(settings, eps, alpha):
    for e in settings.eps_grid:
        for a in settings.alpha_grid:
            if abs(e - eps) <= MATCH_TOL and abs(a - alpha) <= MATCH_TOL:
                return e, a
    raise UnmatchedPointError(f"point (epsilon={eps!r}, alpha={alpha!r}) is not on the configured grid")


def load_counts_file(path):
    """Parse a counts JSON document into [(epsilon, alpha, CountsRecord)]."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return parse_counts_document(doc, str(path))


def parse_counts_document(doc, source="<counts>"):
    if not isinstance(doc, dict) or not isinstance(doc.get("experiments"), list):
        raise FormatError(f"{source}: expected an object with an 'experiments' list")
    if not doc["experiments"]:
        raise FormatError(f"{source}: 'experiments' is empty")
    out = []
    for k, exp in enumerate(doc["experiments"]):
        where = f"{source}: experiments[{k}]"
        if not isinstance(exp, dict):
            raise FormatError(f"{where}: expected an object")
        for key in ("epsilon", "alpha", "counts", "bit_order"):
            if key not in exp:
                raise FormatError(f"{where}: missing '{key}'")
        if exp["bit_order"] not in ("q0-left", "q0-right"):
            raise FormatError(f"{where}: bit_order must be 'q0-left' or 'q0-right'")
        if not isinstance(exp["counts"], dict) or not exp["counts"]:
            raise FormatError(f"{where}: 'counts' must be a non-empty object")
        try:
            eps, alpha = parse_angle(exp["epsilon"]), parse_angle(exp["alpha"])
            rec = qcore.CountsRecord(exp["counts"], exp["bit_order"], tuple(exp.get("measured", ())))
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
        out.append((eps, alpha, rec))
    return out


def _tvd(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def compare_counts(settings, experiments):
    """Per-point comparison of empirical counts against exact simulation."""
    points = []
    for eps, alpha, rec in experiments:
        e, a = _match_point(settings, eps, alpha)
        cfg = settings.template.at(e, a)
        circ = protocol.experiment_circuit(cfg)
        if rec.width != len(circ.measured):
            raise FormatError(
                f"bitstrings have {rec.width} bit(s) but the circuit measures {len(circ.measured)} "
                f"({', '.join(circ.measured_roles)})"
            )
        probs = circuits.outcome_probs(circ)
        freqs = rec.frequencies()
        p_sim = circuits.p_one_from(probs, circ.postprocess)
        p_exp = circuits.p_one_from(freqs, circ.postprocess)
        points.append({
            "epsilon": e,
            "alpha": a,
            "p_sim": p_sim,
            "p_exp": p_exp,
            "abs_dev": abs(p_sim - p_exp),
            "tvd": min(1.0, _tvd(probs, freqs)),
            "shots": rec.shots,
        })
    devs = [p["abs_dev"] for p in points]
    tvds = [p["tvd"] for p in points]
    summary = {
        "n_points": len(points),
        "max_abs_dev": max(devs),
        "mean_abs_dev": sum(devs) / len(devs),
        "max_tvd": max(tvds),
        "mean_tvd": sum(tvds) / len(tvds),
    }
    return {"points": points, "summary": summary}


def cmd_ingest_counts(settings, counts_path, out_dir):
    report = compare_counts(settings, load_counts_file(counts_path))
    out_dir = Path(out_dir)
    rows = [[_num(p[c]) if c != "shots" else str(p[c]) for c in COMPARISON_COLUMNS] for p in report["points"]]
    outputs = [
        _write(out_dir / "comparison.json", _dump_json(report)),
        _write(out_dir / "comparison.csv", _csv_text(COMPARISON_COLUMNS, rows)),
    ]
    return report, outputs


def _require_derivation_family(template):
    if not (protocol._is_derivation_family(template) and protocol.pauli_label(template) == "0"):
        raise ConfigError(
            "classification needs the toffoli variant with control measurement, "
            "r_prep '0', u_ctrl '+' and r_prot on X"
        )


def cmd_classify(settings, out_dir, counts_path=None, level=characterize.DEFAULT_LEVEL,
                 delta=characterize.DEFAULT_DELTA):
    """Classify each experiment as pure/mixed; counts come from a file or are simulated."""
    reports = []
    if counts_path is not None:
        for eps, alpha, rec in load_counts_file(counts_path):
            rep = characterize.classify_purity(rec, alpha, level=level, delta=delta)
            reports.append({"epsilon": eps, **rep.to_dict()})
    else:
        t = settings.template
        _require_derivation_family(t)
        if t.shots is None:
            raise ConfigError("classify from a config needs shots (set 'shots' or pass --shots)")
        for cfg in protocol.point_configs(t, settings.eps_grid, settings.alpha_grid):
            try:
                characterize._check_angle(cfg.alpha, characterize.DEFAULT_THRESHOLD)
            except IllConditionedAngleError as exc:
                reports.append({"epsilon": cfg.epsilon, "alpha": cfg.alpha, "error": str(exc)})
                continue
            counts = protocol.run_point(cfg).counts
            rep = characterize.classify_purity(counts, cfg.alpha, level=level, delta=delta)
            reports.append({"epsilon": cfg.epsilon, **rep.to_dict()})
    outputs = [_write(Path(out_dir) / "classification.json", _dump_json({"reports": reports}))]
    return reports, outputs


TOMO_COLUMNS = ["epsilon", "alpha", "bloch_x", "bloch_y", "bloch_z", "qst_fidelity", "qst_projected",
                "fidelity_ctrl", "fidelity_test", "purity_ctrl", "purity_test"]


def cmd_tomography(settings, out_dir, conditioning=tomography.ANCILLA_ZERO):
    """Tomography of the test qubit before the test, and post-test state analysis (CSWAP)."""
    rows = []
    for cfg in protocol.point_configs(settings.template, settings.eps_grid, settings.alpha_grid):
        rho = protocol.reduced_test_state(cfg)
        if cfg.shots is not None:
            q = tomography.sampled_qst(rho, cfg.shots, cfg.seed)
        else:
            q = tomography.QSTResult(tomography.qst_exact(rho), None, False)
        b = qcore.bloch_from_dm(q.dm)
        post = [None] * 4
        if cfg.variant is circuits.Variant.CSWAP:
            s = tomography.post_st_states(cfg, conditioning)
            post = [s.fidelity_ctrl, s.fidelity_test, s.purity_ctrl, s.purity_test]
        rows.append([_num(cfg.epsilon), _num(cfg.alpha), _num(b.x), _num(b.y), _num(b.z),
                     _num(qcore.state_fidelity(q.dm, rho)), str(q.projected).lower()]
                    + [_num(v) for v in post])
    return [_write(Path(out_dir) / "tomography.csv", _csv_text(TOMO_COLUMNS, rows))]


def cmd_verify_derivation(settings, out_dir):
    prep = protocol.pauli_label(settings.template) or "0"
    rows, worst = [], 0.0
    for e in settings.eps_grid:
        for a in settings.alpha_grid:
            rep = protocol.verify_derivation(e, a, prep)
            worst = max(worst, rep["abs_err"])
            rows.append([_num(e), _num(a), _num(rep["simulated"]), _num(rep["oracle"]), _num(rep["abs_err"])])
    path = _write(Path(out_dir) / "derivation.csv",
                  _csv_text(["epsilon", "alpha", "simulated", "oracle", "abs_err"], rows))
    return worst, [path]


# --------------------------------------------------------------------------
# argument handling


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--shots", type=int, help="override shots per point")
    p.add_argument("--exact", action="store_true", help="exact probabilities only, no sampling")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="swapchar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sweep", parents=[common], help="run an (epsilon, alpha) sweep")
    p.add_argument("--svg", action="store_true", help="also write plot.svg")
    sub.add_parser("export-qasm", parents=[common], help="write one OpenQASM 2.0 file per grid point")
    p = sub.add_parser("ingest-counts", parents=[common], help="compare external counts with simulation")
    p.add_argument("--counts", required=True, help="counts JSON file")
    p = sub.add_parser("classify", parents=[common], help="pure/mixed verdicts from counts")
    p.add_argument("--counts", help="counts JSON file (default: simulate from the config)")
    p.add_argument("--level", type=float, default=characterize.DEFAULT_LEVEL,
                   help="confidence level of the Wilson interval (default: %(default)s)")
    p.add_argument("--delta", type=float, default=characterize.DEFAULT_DELTA,
                   help="a pure verdict needs the Bloch-length interval above 1 - delta (default: %(default)s)")
    p = sub.add_parser("tomography", parents=[common], help="state tomography and post-test states")
    p.add_argument("--conditioning", choices=[tomography.ANCILLA_ZERO, tomography.UNCONDITIONAL],
                   default=tomography.ANCILLA_ZERO)
    sub.add_parser("verify-derivation", parents=[common], help="closed form vs simulation on the grid")
    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="output directory (default: the manifest's)")
    return parser


def _settings(args):
    if args.config:
        settings = load_settings(args.config)
    else:
        settings = settings_from_dict({})
    return apply_overrides(settings, args.seed, args.shots, args.exact)


def run(command, settings, out_dir, options, config_path=None):
    """Execute ``command`` and write its manifest; returns the process exit code."""
    code = 0
    if command == "sweep":
        res, outputs = cmd_sweep(settings, out_dir, options.get("svg", False))
        worst = res.max_abs_err()
        print(f"{len(res.records)} points -> {outputs[0]}" + ("" if worst is None else f"; max |oracle error| = {worst:.3e}"))
    elif command == "export-qasm":
        outputs = cmd_export_qasm(settings, out_dir)
        print(f"wrote {len(outputs)} OpenQASM file(s) to {out_dir}")
    elif command == "ingest-counts":
        report, outputs = cmd_ingest_counts(settings, options["counts"], out_dir)
        s = report["summary"]
        print(f"{s['n_points']} points; max |dev| = {s['max_abs_dev']:.4g}; max TVD = {s['max_tvd']:.4g}")
    elif command == "classify":
        reports, outputs = cmd_classify(settings, out_dir, options.get("counts"),
                                        options.get("level", characterize.DEFAULT_LEVEL),
                                        options.get("delta", characterize.DEFAULT_DELTA))
        for r in reports:
            if "error" in r:
                print(f"eps={r['epsilon']:.4f} alpha={r['alpha']:.4f}: skipped ({r['error']})")
            else:
                print(f"eps={r['epsilon']:.4f} alpha={r['alpha']:.4f}: {r['verdict']} (|r| = {r['bloch_norm_estimate']:.4f}, "
                      f"CI {r['confidence_interval'][0]:.4f}..{r['confidence_interval'][1]:.4f})")
    elif command == "tomography":
        outputs = cmd_tomography(settings, out_dir, options.get("conditioning", tomography.ANCILLA_ZERO))
        print(f"wrote {outputs[0]}")
    elif command == "verify-derivation":
        worst, outputs = cmd_verify_derivation(settings, out_dir)
        ok = worst < 1e-9
        print(f"max |simulated - closed form| = {worst:.3e} ({'ok' if ok else 'FAIL'})")
        code = 0 if ok else 1
    else:
        raise ValueError(f"unknown command {command!r}")
    write_manifest(out_dir, command, settings, config_path, options, outputs)
    return code


def replay(manifest_path, out_dir=None):
    with open(manifest_path, encoding="utf-8") as fh:
        man = json.load(fh)
    settings = settings_from_dict(man["config"], f"{manifest_path}:config")
    out = out_dir or man["out_dir"]
    return run(man["command"], settings, out, man.get("options", {}), man.get("config_path"))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            return replay(args.manifest, args.out)
        settings = _settings(args)
        options = {}
        for key in ("svg", "counts", "level", "delta", "conditioning"):
            if hasattr(args, key):
                options[key] = getattr(args, key)
        return run(args.command, settings, args.out, options, args.config)
    except (ConfigError, FormatError, UnmatchedPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
