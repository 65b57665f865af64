"""Command-line entry point.

    pigeonhole paradox   [--pre +++ --post RRR]
    pigeonhole meter     [--lambda-list 0.001,0.01,0.1] [--out sweep.csv]
    pigeonhole optics    [--scenario three-body --visibility 0.9 --phase -1.5708]
    pigeonhole hom       [--visibility 0.989]
    pigeonhole selftest

Exit codes: 0 success, 1 config or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .ensemble import (
    Ensemble,
    UndefinedRatioError,
    UndefinedWeakValueError,
    expansion_coefficients,
    overlap_normalized_ratio,
    success_probability,
    transition_ratio,
    verify_second_order_identity,
    weak_value,
)
from .meter import (
    WEAK_REGIME,
    GridOverflowError,
    MeterConfigError,
    MeterGrid,
    gaussian_meter,
    lambda_sweep,
    residual_exponent,
)
from .optics import (
    DetectionSetting,
    OpticsConfigError,
    PBSElement,
    apply_circuit,
    apply_pbs_parity,
    estimate_ratio,
    format_uncertainty,
    ghz_rrr_probability,
    hom_dip,
    outcome_distribution,
    prepare_input,
    sample_events,
    three_body_circuit,
    two_body_circuit,
)
from .quantum import (
    InvalidLabelError,
    apply,
    basis_ket,
    ghz_projector,
    parity_projector,
    qubit_pairs,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _observables(n: int) -> dict:
    obs = {f"S{i}{j}": parity_projector(i, j, n) for i, j in qubit_pairs(n)}
    if n >= 3:
        obs["S" + "".join(str(k) for k in range(1, n + 1))] = ghz_projector(n)
    return obs


def _show(z: complex) -> str:
    z = complex(round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0)
    return f"{z:.6g}"


def paradox_report(cfg: RunConfig) -> dict:
    e = Ensemble.from_labels(cfg.pre, cfg.post)
    rows = {}
    for name, op in _observables(e.dims).items():
        entry = {}
        try:
            w = weak_value(op, e)
            entry["weak_value"] = [w.real, w.imag]
            entry["overlap_normalized_ratio"] = overlap_normalized_ratio(op, e)
        except UndefinedWeakValueError:
            entry["weak_value"] = None
            entry["overlap_normalized_ratio"] = None
        try:
            entry["transition_ratio"] = transition_ratio(op, e)
        except UndefinedRatioError:
            entry["transition_ratio"] = None
        rows[name] = entry
    report = {
        "pre": cfg.pre,
        "post": cfg.post,
        "success_probability": success_probability(e),
        "observables": rows,
    }
    if e.dims == 3:
        grid = MeterGrid(cfg.npoints, cfg.spacing)
        report["expansion"] = expansion_coefficients(e, f_max=grid.max_wavenumber).to_json_dict()
    return report


def cmd_paradox(cfg: RunConfig) -> int:
    report = paradox_report(cfg)
    print(f"ensemble |{cfg.pre}> -> |{cfg.post}>")
    print(f"success probability  {report['success_probability']:.6g}")
    for name, row in report["observables"].items():
        w = row["weak_value"]
        wtxt = "undefined" if w is None else _show(complex(*w))
        ratio = row["transition_ratio"]
        rtxt = "undefined" if ratio is None else f"{ratio:.6g}"
        print(f"{name:<5} weak value {wtxt:<24} transition ratio {rtxt}")
    if "expansion" in report:
        ex = report["expansion"]
        for key in ("c0", "c1", "c2"):
            print(f"{key} = {_show(complex(*ex[key]))}")
        print(f"lambda_validity = {ex['lambda_validity']:.3g}")
    if cfg.out:
        if cfg.format == "json":
            _write(cfg.out, _json_text(report))
        else:
            rows = [["success_probability", "", report["success_probability"]]]
            for name, row in report["observables"].items():
                for key, val in row.items():
                    if isinstance(val, list):
                        rows.append([name, key + "_re", val[0]])
                        rows.append([name, key + "_im", val[1]])
                    else:
                        rows.append([name, key, "" if val is None else val])
            for key, val in report.get("expansion", {}).items():
                if isinstance(val, list):
                    rows.append(["expansion", key + "_re", val[0]])
                    rows.append(["expansion", key + "_im", val[1]])
                else:
                    rows.append(["expansion", key, val])
            _write(cfg.out, _csv_text(("observable", "quantity", "value"), rows))
    return EXIT_OK


def _meter_from(cfg: RunConfig):
    return gaussian_meter(MeterGrid(cfg.npoints, cfg.spacing), cfg.sigma)


def cmd_meter(cfg: RunConfig) -> int:
    e = Ensemble.from_labels(cfg.pre, cfg.post)
    meter = _meter_from(cfg)
    report = lambda_sweep(e, meter, cfg.lambdas)
    print(f"fit1 (linear pointer shift)          = {report.fit1:.6g}")
    print(f"fit2 (quadratic success-prob change) = {report.fit2:.6g}")
    if max(cfg.lambdas) > WEAK_REGIME * cfg.sigma:
        print(
            f"warning: lambda up to {max(cfg.lambdas):g} exceeds the weak regime "
            f"({WEAK_REGIME:g} sigma)",
            file=sys.stderr,
        )
    if cfg.out:
        out = Path(cfg.out)
        if cfg.format == "json":
            _write(out, _json_text(report.to_json_dict()))
        else:
            _write(out, _csv_text(report.csv_header, report.csv_rows()))
            _write(out.with_suffix(".json"), _json_text(report.fits_dict()))
    return EXIT_OK


def optics_record(cfg: RunConfig):
    if not -math.pi <= cfg.phase <= math.pi:
        raise OpticsConfigError(f"phase must lie in [-pi, pi], got {cfg.phase}")
    if cfg.event_total < 1:
        raise OpticsConfigError("event total must be at least 1")
    if cfg.scenario == "two-body":
        circuit = two_body_circuit(cfg.visibility, cfg.phase)
    else:
        circuit = three_body_circuit(cfg.visibility, cfg.phase, cfg.first_visibility)
    rho = apply_circuit(prepare_input(cfg.fidelity, cfg.pre), circuit)
    setting = DetectionSetting.uniform(cfg.basis, rho.dims)
    probs = outcome_distribution(rho, setting)
    return sample_events(probs, cfg.event_total, cfg.seed, setting), rho.trace


def cmd_optics(cfg: RunConfig) -> int:
    rec, pass_prob = optics_record(cfg)
    est, err = estimate_ratio(rec, cfg.target)
    model = rec.model_probs[rec.patterns.index(cfg.target)]
    print(f"scenario {cfg.scenario}: coincidence pass probability {pass_prob:.6g}")
    print(f"{cfg.target}: {rec.count(cfg.target)} of {rec.total} events (seed {rec.seed})")
    print(f"estimate {format_uncertainty(est, err)}  model {model:.6g}")
    if cfg.out:
        if cfg.format == "json":
            _write(cfg.out, _json_text(rec.to_json_dict()))
        else:
            _write(cfg.out, _csv_text(rec.csv_header, rec.csv_rows()))
    return EXIT_OK


def cmd_hom(cfg: RunConfig) -> int:
    curve = hom_dip(cfg.delays, cfg.visibility, cfg.coherence_time, cfg.baseline)
    print(f"fitted visibility {curve.visibility:.9g}")
    print(f"dip floor {min(curve.coincidence_rates):.6g} (baseline {curve.baseline:.6g})")
    if cfg.out:
        if cfg.format == "json":
            _write(cfg.out, _json_text(curve.to_json_dict()))
        else:
            _write(cfg.out, _csv_text(curve.csv_header, curve.csv_rows()))
    return EXIT_OK


def selftest_checks(cfg: RunConfig) -> list[tuple[str, bool, str]]:
    results = []

    ok, residual = verify_second_order_identity(3, drop_ghz_term=cfg.drop_ghz_term)
    results.append(("second-order operator identity", ok, f"residual {residual:.3g}"))

    meter = _meter_from(cfg)
    e = Ensemble.from_labels("+++", "RRR")
    slope = residual_exponent(e, meter)
    results.append(("cubic truncation residual", abs(slope - 3.0) <= 0.2, f"slope {slope:.4f}"))

    worst = 0.0
    rho0 = prepare_input(1.0)
    rl = DetectionSetting.uniform("RL")
    rrr = rl.patterns.index("RRR")
    for v in np.linspace(0.0, 1.0, 5):
        for theta in np.linspace(-math.pi, math.pi, 9):
            rho = apply_circuit(rho0, three_body_circuit(v, theta))
            p = outcome_distribution(rho, rl)[rrr]
            worst = max(worst, abs(p - ghz_rrr_probability(v, theta)))
    results.append(("GHZ closed form vs matrix", worst <= 1e-12, f"max deviation {worst:.3g}"))

    psi = basis_ket("+++")
    worst = 0.0
    for i, j in qubit_pairs(3):
        image = apply(parity_projector(i, j, 3), psi).amps
        rho = apply_pbs_parity(rho0, PBSElement((i, j)))
        worst = max(worst, float(np.max(np.abs(rho.matrix - np.outer(image, image.conj())))))
    results.append(("PBS vs projector", worst <= 1e-12, f"max deviation {worst:.3g}"))
    return results


def cmd_selftest(cfg: RunConfig) -> int:
    failed = []
    for name, ok, detail in selftest_checks(cfg):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        if not ok:
            failed.append(name)
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return EXIT_NUMERIC
    print("all checks passed")
    return EXIT_OK


COMMANDS = {
    "paradox": cmd_paradox,
    "meter": cmd_meter,
    "optics": cmd_optics,
    "hom": cmd_hom,
    "selftest": cmd_selftest,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="YAML run configuration; flags override its values")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--pre", help="pre-selected state label, e.g. +++")
    common.add_argument("--post", help="post-selected state label, e.g. RRR")
    common.add_argument("--npoints", type=int)
    common.add_argument("--spacing", type=float)
    common.add_argument("--sigma", type=float)
    common.add_argument("--save-config", dest="save_config", help="write the resolved config here")

    parser = _Parser(prog="pigeonhole", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("paradox", parents=[common], argument_default=argparse.SUPPRESS, help="weak values and transition ratios")

    p = sub.add_parser("meter", parents=[common], argument_default=argparse.SUPPRESS, help="pointer coupling-strength sweep")
    p.add_argument("--lambda-list", dest="lambdas", type=_float_list)

    p = sub.add_parser("optics", parents=[common], argument_default=argparse.SUPPRESS, help="PBS parity-check event counts")
    p.add_argument("--scenario", choices=("two-body", "three-body"))
    p.add_argument("--visibility", type=float, help="coherence kept by the probing PBS")
    p.add_argument("--first-visibility", dest="first_visibility", type=float)
    p.add_argument("--phase", type=float, help="net phase of the all-V branch (radians)")
    p.add_argument("--fidelity", type=float)
    p.add_argument("--total", type=int)
    p.add_argument("--basis", choices=("HV", "DA", "RL"))
    p.add_argument("--target")

    p = sub.add_parser("hom", parents=[common], argument_default=argparse.SUPPRESS, help="HOM dip calibration curve")
    p.add_argument("--visibility", type=float)
    p.add_argument("--delays", type=_float_list)
    p.add_argument("--coherence-time", dest="coherence_time", type=float)
    p.add_argument("--baseline", type=float)

    p = sub.add_parser("selftest", parents=[common], argument_default=argparse.SUPPRESS, help="run the numerical invariant checks")
    p.add_argument("--drop-ghz-term", dest="drop_ghz_term", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    save_path = args.pop("save_config", None)
    try:
        cfg = load_config(config_path, args)
        if save_path:
            Path(save_path).write_text(cfg.dumps(), encoding="utf-8")
        return COMMANDS[command](cfg)
    except GridOverflowError as exc:
        print(f"error: grid overflow at lambda={exc.lam:g}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, InvalidLabelError, MeterConfigError, OpticsConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
