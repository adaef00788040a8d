"""Command-line entry point: ``combsense {comb,simulate,oracle,sweep}``.

Exit status is 0 on success, 1 for configuration errors and 2 for runtime
errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import io, pipeline, plotting
from .config import ConfigError, ScenarioConfig, dump_config, load_config, parse_config, parse_number
from .signals import format_dbm

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
FLAT_WINDOW_DB = 5.0
FLAT_K_RANGE = 23

log = logging.getLogger("combsense")


def _fmt_metric(v: float, unit: str = "") -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "n/a"
    if math.isinf(v):
        return "inf (no spur above threshold)"
    return f"{v:.6g}{unit}"


def cmd_comb(cfg: ScenarioConfig, out: Path) -> List[str]:
    _, comb = pipeline.build_comb(cfg)
    io.write_comb(out / "comb.csv", comb, cfg.laser.frequency)
    n = comb.flat_count(FLAT_WINDOW_DB, FLAT_K_RANGE)
    lines = [
        f"lines_within_{FLAT_WINDOW_DB:g}db = {n}",
        f"k_range = [-{FLAT_K_RANGE}, {FLAT_K_RANGE}]",
        f"total_power_w = {io.fmt_float(comb.total_power())}",
    ]
    io.write_report(out / "comb_summary.txt", lines)
    plotting.plot_comb(comb, out / "comb.png", FLAT_WINDOW_DB)
    return lines


def metrics_lines(cfg: ScenarioConfig, res: pipeline.SimulationResult) -> List[str]:
    m = res.metrics
    lines = [
        f"e_r = {_fmt_metric(m.e_r)}",
        f"e_r_downconverted = {_fmt_metric(m.e_r_downconverted)}",
        f"sfdr_db = {_fmt_metric(m.sfdr)}",
        f"sfdr_all_spurs_db = {_fmt_metric(m.sfdr_all_spurs)}",
        f"threshold_dbm = {cfg.threshold:g}",
        f"compression_ratio = {cfg.compression_ratio:g}",
        f"spurious_count = {m.spurious_count}",
        f"unresolved_bins = {len(res.estimate.unresolved)}",
        f"detected_bands = {len(m.detected_bands)}",
    ]
    for i, b in enumerate(m.detected_bands, 1):
        lines.append(
            f"band {i}: center_hz = {io.fmt_float(b.center)}, width_hz = {io.fmt_float(b.width)}, "
            f"peak = {format_dbm(b.peak_dbm)}"
        )
    return lines


def cmd_simulate(cfg: ScenarioConfig, out: Path) -> List[str]:
    t0 = time.perf_counter()
    res = pipeline.simulate(cfg)
    runtime = time.perf_counter() - t0
    acq = res.acquisition
    io.write_grid(out / "input_spectrum.csv", acq.input_spectrum)
    io.write_grid(out / "downconverted_spectrum.csv", acq.measured)
    est = res.estimate
    io.write_spectrum(out / "reconstructed_spectrum.csv", est.freqs, est.values, est.impedance)
    lines = metrics_lines(cfg, res)
    io.write_report(out / "metrics.txt", lines)
    io.write_report(out / "runtime.txt", [f"runtime_s = {runtime:.3f}"])
    plotting.plot_spectra(acq.input_spectrum, acq.measured, est, out / "spectra.png", cfg.threshold)
    return lines + [f"runtime_s = {runtime:.3f}"]


def cmd_oracle(cfg: ScenarioConfig, out: Path, trials: Optional[int] = None) -> List[str]:
    rep = pipeline.oracle_trials(cfg, n_trials=trials)
    tr = rep.trials
    io.write_table(
        out / "oracle.csv",
        ["trial", "f_offset_hz", "true_size", "omp_support", "exhaustive_support", "omp_residual", "exhaustive_residual"],
        [
            list(range(len(tr))),
            [t.f_offset for t in tr],
            [len(t.true_support) for t in tr],
            [" ".join(map(str, t.omp_support)) for t in tr],
            [" ".join(map(str, t.exhaustive_support)) for t in tr],
            [t.omp_residual for t in tr],
            [t.exhaustive_residual for t in tr],
        ],
    )
    gaps = [t.omp_residual - t.exhaustive_residual_at_omp_size for t in tr]
    lines = [
        f"trials = {len(tr)}",
        f"max_sparsity = {cfg.oracle.max_sparsity}",
        f"snr_db = {cfg.oracle.snr_db:g}",
        f"support_match_rate = {rep.match_rate:.6g}",
        f"dominance_rate = {rep.dominance_rate:.6g}",
        f"max_residual_gap = {io.fmt_float(max(gaps))}",
    ]
    io.write_report(out / "oracle.txt", lines)
    return lines


def cmd_sweep(cfg: ScenarioConfig, out: Path, snr_list=None) -> List[str]:
    res = pipeline.detection_sweep(cfg, snr_list=snr_list)
    io.write_table(out / "sweep.csv", ["snr_db", "detection_rate"], [res.snr, res.rate])
    limit = "n/a" if math.isnan(res.limit) else f"{res.limit:g}"
    lines = [
        f"snr_reference = {cfg.sweep.snr_reference}",
        f"seeds = {res.trials}",
        f"required_rate = {res.required_rate:g}",
        f"detection_limit_db = {limit}",
    ]
    io.write_report(out / "sweep.txt", lines)
    plotting.plot_sweep(res, out / "sweep.png")
    return lines


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="combsense", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("comb", "generate the comb and report its flatness"),
        ("simulate", "run the end-to-end scenario"),
        ("oracle", "compare OMP against exhaustive search"),
        ("sweep", "single-tone detection-limit sweep"),
    ]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, help="key = value scenario file (defaults if omitted)")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--seed", type=int, help="override every configured seed")
        sp.add_argument("--quantize", choices=("on", "off"), help="'off' selects an ideal ADC")
        if name == "oracle":
            sp.add_argument("--trials", type=int)
        if name == "sweep":
            sp.add_argument("--snr-list", help="comma-separated SNRs in dB")
    return p


def _load(args) -> ScenarioConfig:
    if args.config is None:
        cfg = parse_config("")
    else:
        try:
            cfg = load_config(args.config)
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError("--config", str(exc)) from None
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.quantize is not None:
        cfg = cfg.with_quantization(args.quantize == "on")
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        cfg = _load(args)
        snr_list = None
        if args.command == "sweep" and args.snr_list:
            try:
                snr_list = [parse_number(s) for s in args.snr_list.split(",") if s.strip()]
            except ValueError as exc:
                raise ConfigError("--snr-list", str(exc)) from None
        if args.command == "oracle" and args.trials is not None and args.trials < 1:
            raise ConfigError("--trials", "must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or Path(cfg.output_dir or "out")
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "effective_config.cfg").write_text(dump_config(cfg))
        if args.command == "comb":
            lines = cmd_comb(cfg, out)
        elif args.command == "simulate":
            lines = cmd_simulate(cfg, out)
        elif args.command == "oracle":
            lines = cmd_oracle(cfg, out, args.trials)
        else:
            lines = cmd_sweep(cfg, out, snr_list)
    except Exception as exc:  # any failure past config validation is a runtime error
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print("\n".join(lines))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
