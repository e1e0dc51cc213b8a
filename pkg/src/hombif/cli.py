"""Command line front end.

Exit status: 0 for a completed run (criterion met or not), 1 for a failed
``verify-example``, 2 for assumption failures, 3 for numerical failures,
4 for I/O and configuration errors, 5 for invalid input.
"""

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import homoclinic
from .config import RunConfig, load_config
from .errors import AssumptionError, ConfigError, HombifError

log = logging.getLogger("hombif")

EXAMPLE_SYSTEM = "paper_example_s7"


def fmt(x):
    return f"{float(x):.17g}"


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([r if isinstance(r, (int, str)) else fmt(r) for r in row])


def write_scan_csv(path, result):
    _write_csv(path, ["theta", "d", "sigma_min"], [(r.theta, r.d, r.sigma_min) for r in result.rows])


def write_orbit_csv(path, segment):
    n_comp = segment.states.shape[1]
    header = ["n"] + [f"x{i + 1}" for i in range(n_comp)]
    rows = [(int(n), *segment.states[j]) for j, n in enumerate(segment.indices)]
    _write_csv(path, header, rows)


def write_branch_csv(path, segments):
    _write_csv(
        path,
        ["eps", "lambda", "sup_norm", "residual"],
        [(s.eps, s.theta, s.amplitude, s.residual) for s in segments],
    )


def write_json(path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def truncation(config, family):
    t = config.truncation
    if "tol" in t:
        return homoclinic.truncation_lengths(family, t["tol"], config.samples)
    return t["n_minus"], t["n_plus"]


def _validated(config, family):
    diags = homoclinic.validate_assumptions(family, config.lambda0, K=min(config.samples, 64))
    for d in diags:
        log.info("%s %s (witness %.3e): %s", d.name, "ok" if d.passed else "FAILED", d.witness, d.message)
    if not all(d.passed for d in diags):
        raise AssumptionError(diags)
    return diags


def run_detect(config, out_dir):
    family = config.family()
    _validated(config, family)
    report = homoclinic.detect(family, config.samples, config.lambda0)
    if out_dir is not None:
        write_json(out_dir / "report.json", report.to_dict())
    return report


def run_scan(config, out_dir):
    family = config.family()
    report = run_detect(config, None)
    n_minus, n_plus = truncation(config, family)
    result = homoclinic.scan(family, config.samples, n_minus, n_plus, config.tolerances.crossing)
    report.scan = result.rows
    report.located = result.crossings
    if out_dir is not None:
        write_scan_csv(out_dir / "scan.csv", result)
        write_json(out_dir / "report.json", report.to_dict())
    return report


def run_solve(config, out_dir):
    family = config.family()
    report = run_scan(config, None)
    if not report.criterion_met and not report.located:
        log.warning("criterion not met and no crossing located; nothing to solve")
    else:
        n_minus, n_plus = truncation(config, family)
        crossing = report.located[0]
        for eps in config.eps:
            seg = homoclinic.branch_solve(family, crossing, eps, n_minus, n_plus, tol=config.tolerances.newton)
            report.branches.append(seg)
    if out_dir is not None:
        write_scan_csv(out_dir / "scan.csv", homoclinic.ScanResult(report.scan, report.located, config.samples))
        for seg in report.branches:
            write_orbit_csv(out_dir / f"orbit_{fmt(seg.eps)}.csv", seg)
        write_branch_csv(out_dir / "branch.csv", report.branches)
        write_json(out_dir / "report.json", report.to_dict())
    return report


GOLDEN = {"w1_plus": -1, "w1_minus": 1, "index": 0, "parity": -1, "criterion_met": True}


def run_verify_example(config, out_dir):
    """Full pipeline on the worked example; returns (report, list of mismatch strings)."""
    cfg = RunConfig(EXAMPLE_SYSTEM, K=config.K, truncation=config.truncation, lambda0=0.0,
                    tolerances=config.tolerances)
    report = run_scan(cfg, out_dir)
    mismatches = [
        f"{k}: expected {v}, got {getattr(report, k)}" for k, v in GOLDEN.items() if getattr(report, k) != v
    ]
    if len(report.located) != 1 or not report.located[0].contains(math.pi):
        mismatches.append(f"expected one crossing interval containing pi, got {report.located}")
    return report, mismatches


def build_parser():
    p = argparse.ArgumentParser(prog="hombif", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["detect", "scan", "solve", "verify-example", "dump-config"])
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--system", help="catalog system name (overrides the config)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--samples", type=int, help="loop samples K")
    p.add_argument("--eps", help="comma separated amplitudes")
    p.add_argument("--quiet", action="store_true")
    return p


def resolve_config(args):
    if args.config is not None:
        data = load_config(args.config).to_dict()
    else:
        data = {"system": EXAMPLE_SYSTEM}
    if args.system:
        data["system"] = args.system
    if args.samples is not None:
        data["K"] = args.samples
    if args.eps:
        try:
            data["eps"] = [float(e) for e in args.eps.split(",")]
        except ValueError:
            raise ConfigError(f"--eps must be a comma separated list of numbers, got {args.eps!r}") from None
    if args.out is not None:
        data["output"] = {"dir": str(args.out)}
    return RunConfig.from_dict(data)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    say = (lambda *a: None) if args.quiet else print
    try:
        config = resolve_config(args)
        out_dir = Path(config.output_dir) if config.output_dir else None
        if args.command == "dump-config":
            text = config.dumps()
            if out_dir is not None:
                out_dir.mkdir(parents=True, exist_ok=True)
                (out_dir / "config.json").write_text(text + "\n", encoding="utf-8")
            print(text)
            return 0
        if args.command == "verify-example":
            t0 = time.perf_counter()
            report, bad = run_verify_example(config, out_dir)
            say(report.summary())
            say(f"elapsed {time.perf_counter() - t0:.3f} s")
            for b in bad:
                print(f"MISMATCH {b}", file=sys.stderr)
            say("verify-example: " + ("FAILED" if bad else "all golden values reproduced"))
            return 1 if bad else 0
        runner = {"detect": run_detect, "scan": run_scan, "solve": run_solve}[args.command]
        if out_dir is None:
            out_dir = Path("out")
        report = runner(config, out_dir)
        say(report.summary())
        return 0
    except AssumptionError as exc:
        for d in exc.diagnostics:
            if not d.passed:
                print(f"{d.name} failed (witness {d.witness:.3e}): {d.message}", file=sys.stderr)
        return exc.exit_code
    except HombifError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
