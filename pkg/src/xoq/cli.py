"""Command-line interface: ``xoq verify|search|couplings|estimate|export``.

Exit codes: 0 success, 1 quality threshold not met, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import effective
from .dynamics import DEFAULT_MODE, MODES, get_configuration, sequence_propagator
from .metrics import CNOT, dephased_block, encoded_makhlin, export_matrix_heatmap, objective_report
from .sequences import SequenceFormatError, bundled_path, dump_sequence, load_sequence
from .synth import SearchConfig, run_search

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


def _resolve_path(name: str) -> Path:
    """Accept a real path or the bare name of a bundled sequence file."""
    p = Path(name)
    if p.exists():
        return p
    try:
        return bundled_path(name)
    except ValueError:
        raise InputError(f"no such file: {name}") from None


def _load(name: str):
    try:
        return load_sequence(_resolve_path(name))
    except (SequenceFormatError, ValueError, OSError) as exc:
        raise InputError(f"{name}: {exc}") from exc


def _read_json(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    return doc


def _fmt_c(z: complex) -> str:
    return f"{z.real:+.6f}{z.imag:+.6f}i"


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _verify_mode(seq, mode: str) -> dict:
    u5, u9 = sequence_propagator(seq, mode)
    rep = objective_report(u5, u9)
    mk = encoded_makhlin(u9)
    deviation = float(np.max(np.abs(np.abs(dephased_block(u9)) - np.abs(CNOT))))
    return {"mode": mode, "report": rep, "makhlin": mk, "max_block_deviation": deviation}


def cmd_verify(args) -> int:
    seq = _load(args.sequence)
    modes = MODES if args.mode == "both" else (args.mode,)
    results = [_verify_mode(seq, m) for m in modes]
    passed = False
    for r in results:
        rep, mk = r["report"], r["makhlin"]
        ok = rep.f_joint <= args.threshold
        if args.strict_phase:
            ok = ok and rep.phases_agree(args.phase_tol)
        passed = passed or ok
        print(f"[{r['mode']}]")
        print(f"  f9            {rep.f9:.6g}")
        print(f"  f_joint       {rep.f_joint:.6g}")
        print(f"  leakage       {rep.leakage:.6g}")
        print(f"  phase S0      {_fmt_c(rep.per_sector_phase[0])}")
        print(f"  phase S1      {_fmt_c(rep.per_sector_phase[1])}")
        print(f"  phase diff    {rep.phase_mismatch:.6g} rad")
        print(f"  makhlin G1    {_fmt_c(mk.g1)}")
        print(f"  makhlin G2    {mk.g2:+.6f}")
        print(f"  |block|-CNOT  {r['max_block_deviation']:.6g}")
        print(f"  status        {'PASS' if ok else 'FAIL'} (threshold {args.threshold})")
    return EXIT_OK if passed else EXIT_THRESHOLD


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def _search_config(args) -> SearchConfig:
    doc = _read_json(args.search_params) if args.search_params else {}
    env_seed = os.environ.get("XOQ_SEED")
    try:
        if env_seed is not None:
            doc["seed"] = int(env_seed)
        if args.seed is not None:
            doc["seed"] = args.seed
        return SearchConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise InputError(f"search parameters: {exc}") from exc


def cmd_search(args) -> int:
    try:
        configuration = get_configuration(args.config)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    config = _search_config(args)

    def progress(gen: int, f: float) -> None:
        if args.verbose:
            print(f"generation {gen}: best f = {f:.6g}", file=sys.stderr)

    report = run_search(config, configuration, callback=progress)
    out = Path(args.out)
    report_path = Path(args.report) if args.report else out.with_suffix(".report.json")
    try:
        dump_sequence(report.best_sequence(configuration), out)
        report_path.write_text(report.to_json(configuration) + "\n")
    except OSError as exc:
        raise InputError(str(exc)) from exc
    status = "reached" if report.reached_target else "not reached"
    print(
        f"best f = {report.best_f:.6g} after {report.generations} generations "
        f"({report.evaluations} evaluations); target {config.target_f} {status}"
    )
    print(f"sequence written to {out}; report written to {report_path}")
    return EXIT_OK if report.reached_target else EXIT_THRESHOLD


# ---------------------------------------------------------------------------
# couplings
# ---------------------------------------------------------------------------


def cmd_couplings(args) -> int:
    doc = _read_json(args.params)
    config = args.config or doc.get("configuration")
    if config not in ("A", "B"):
        raise InputError("configuration must be given as --config A|B or in the parameter file")
    try:
        params = effective.HubbardParameters.from_dict(doc)
        de = effective.energy_differences(params, config)
        couplings = effective.effective_couplings(params, config)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    scale = params.off_diagonal_scale()
    close = sorted(k for k, v in de.items() if v <= 10 * scale)
    if close:
        print(
            f"warning: {', '.join(close)} <= 10 x max off-diagonal parameter ({scale:g}); "
            "perturbative couplings may be inaccurate",
            file=sys.stderr,
        )
    print(json.dumps({"configuration": config, "J": couplings, "dE": de}, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def cmd_estimate(args) -> int:
    if args.sequence is not None:
        seq = _load(args.sequence)
        t_dimless = seq.total_time("simultaneous" if args.rule == "max" else "sequential")
    else:
        t_dimless = args.time
    if t_dimless < 0:
        raise InputError("dimensionless time must be nonnegative")
    if args.target_ns is not None:
        if args.target_ns <= 0 or t_dimless <= 0:
            raise InputError("consistency mode needs a positive target time and a nonempty sequence")
        jmax = effective.jmax_for_gate_time(t_dimless, args.target_ns)
    else:
        if args.tr is None or args.dest is None:
            raise InputError("--tr and --dest are required unless --target-ns is given")
        try:
            jmax = effective.DeviceParameters(args.tr, args.dest).jmax_ueV
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    est = effective.estimate_gate_time(jmax, t_dimless)
    print(f"Jmax            {est.jmax_ueV:.6g} ueV")
    print(f"T (h/Jmax)      {est.t_dimensionless:.6g}  [{args.rule} rule]")
    print(f"T               {est.t_ns:.4f} ns")
    return EXIT_OK


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def cmd_export(args) -> int:
    seq = _load(args.sequence)
    u5, u9 = sequence_propagator(seq, args.mode)
    u = u5 if args.sector == 5 else u9
    try:
        export_matrix_heatmap(u, args.out)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    print(f"{args.sector}x{args.sector} heatmap written to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xoq", description="Exchange-only two-qubit CNOT tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="evaluate a pulse sequence against the CNOT objectives")
    p.add_argument("--sequence", required=True, help="sequence JSON file or bundled file name")
    p.add_argument("--mode", choices=MODES + ("both",), default=DEFAULT_MODE)
    p.add_argument("--threshold", type=_positive, default=0.01, help="pass if f_joint <= threshold")
    p.add_argument("--strict-phase", action="store_true", help="also require equal S0 and S1 phases")
    p.add_argument("--phase-tol", type=_positive, default=0.05, help="radians, used with --strict-phase")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="run the genetic search")
    p.add_argument("--config", required=True, help="A, B, or the all-controllable A-free / B-free")
    p.add_argument("--search-params", help="JSON file with SearchConfig fields")
    p.add_argument("--seed", type=int, help="overrides XOQ_SEED and the parameter file")
    p.add_argument("--out", required=True, help="best sequence JSON")
    p.add_argument("--report", help="search report JSON (default: OUT with .report.json)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("couplings", help="effective exchange couplings from Hubbard parameters")
    p.add_argument("--params", required=True)
    p.add_argument("--config", choices=("A", "B"))
    p.set_defaults(func=cmd_couplings)

    p = sub.add_parser("estimate", help="physical gate time")
    p.add_argument("--tr", type=_positive, help="tunneling rate, micro-eV")
    p.add_argument("--dest", type=_positive, help="singlet-triplet splitting, micro-eV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--sequence")
    src.add_argument("--time", type=float, help="dimensionless time in h/Jmax")
    p.add_argument("--rule", choices=("max", "sum"), default="max")
    p.add_argument("--target-ns", type=float, help="back-solve Jmax so the sequence takes this long")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("export", help="modulus/phase CSV of a sector matrix")
    p.add_argument("--sequence", required=True)
    p.add_argument("--sector", type=int, choices=(5, 9), default=9)
    p.add_argument("--mode", choices=MODES, default=DEFAULT_MODE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
