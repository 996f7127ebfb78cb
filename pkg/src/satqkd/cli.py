"""Command-line entry point: ``simulate --config cfg.yaml --scenario bb84 --seed 7 --out results/``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import bb84, e91
from .bb84 import Bb84Config, LossBudget
from .channel import LinkModels
from .config import SCENARIOS, ScenarioConfig, dump_config, from_dict, load_config
from .errors import ChannelError, ConfigError, DomainError, NumericError
from .orbitpass import generate_pass, pass_duration_above, pass_table

SIG_DIGITS = 6


def fmt(value: float) -> str:
    """Number formatting shared by every CSV/JSON artifact (6 significant digits)."""
    return f"{value:.{SIG_DIGITS}g}"


def _rounded(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over the target."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, data) -> None:
    write_atomic(path, json.dumps(_rounded(data), indent=2) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    write_atomic(path, buf.getvalue())


def budget_report(m: LinkModels, cfg: Bb84Config, seed: int) -> dict:
    """Zenith budget plus the upper end of its scintillation range."""
    zenith = math.pi / 2
    low = bb84.assemble_budget(zenith, m, cfg, bb84.sample_rng(seed, 0, 0))
    high = bb84.assemble_budget(zenith, m, cfg, bb84.sample_rng(seed, 0, 0),
                                scintillation_percentile=cfg.scintillation_percentile_max)
    data = low.to_dict()
    data["total_db_range"] = [low.total_db, high.total_db]
    data["scintillation_db_range"] = [low.entries["scintillation"], high.entries["scintillation"]]
    data["metadata"]["scintillation_percentile_max"] = cfg.scintillation_percentile_max
    return data


def format_budget_table(budget: LossBudget, total_range: tuple[float, float] | None = None) -> str:
    lines = [f"Loss budget at {math.degrees(budget.elevation):.1f} deg elevation",
             f"{'channel':<24}{'dB':>10}"]
    lines += [f"{name:<24}{value:>10.3f}" for name, value in budget.entries.items()]
    lines.append(f"{'total':<24}{budget.total_db:>10.3f}")
    if total_range is not None:
        lines.append(f"{'total range':<24}[{total_range[0]:.3f}, {total_range[1]:.3f}]")
    return "\n".join(lines)


def run_budget(cfg: ScenarioConfig, out: Path) -> dict:
    report = budget_report(cfg.models(), cfg.protocol.bb84, cfg.seed)
    write_json(out / "budget.json", report)
    return {"total_db_range": report["total_db_range"]}


def run_bb84(cfg: ScenarioConfig, out: Path) -> dict:
    m = cfg.models()
    samples = generate_pass(m.orbit)
    table = pass_table(samples)
    write_csv(out / "pass.csv", list(table), zip(*(map(float, col) for col in table.values())))
    result = bb84.simulate_pass(samples, m, cfg.protocol.bb84, cfg.seed)
    write_csv(out / "bb84_pass.csv", ["t_s", "elevation_deg", "total_loss_db", "qber", "key_rate_bps"],
              ([r.t, math.degrees(r.elevation), r.total_loss_db, r.qber, r.sifted_key_rate]
               for r in result.records))
    summary = {
        "active_time_s": result.active_time,
        "qber_threshold": result.qber_threshold,
        "pass_duration_s": pass_duration_above(m.orbit, m.orbit.min_elevation),
        "peak_key_rate_bps": max(r.sifted_key_rate for r in result.records),
        "min_qber": min(r.qber for r in result.records),
    }
    write_json(out / "bb84_summary.json", summary)
    return summary


def run_e91(cfg: ScenarioConfig, out: Path) -> dict:
    m = cfg.models()
    trace = e91.simulate_chsh_over_pass(generate_pass(m.orbit), m, cfg.protocol.e91, cfg.seed)
    write_csv(out / "e91_pass.csv", ["t_s", "S", "std_error", "n_pairs", "gamma_dop", "gamma_snr"],
              ([s.t, s.result.S, s.result.std_error, s.result.n_pairs, s.gamma_dop, s.gamma_snr]
               for s in trace))
    window = e91.validity_window(trace)
    values = [s.result.S for s in trace]
    summary = {
        "S_min": min(values),
        "S_max": max(values),
        "validity_window_s": list(window) if window else None,
        "n_pairs_per_step": cfg.protocol.e91.n_pairs_per_step,
    }
    write_json(out / "e91_summary.json", summary)
    return summary


def run_sweep(cfg: ScenarioConfig, out: Path) -> dict:
    base = cfg.models()
    totals = {}
    for altitude in cfg.protocol.sweep_altitudes:
        m = base.with_orbit(altitude=altitude)
        report = budget_report(m, cfg.protocol.bb84, cfg.seed)
        report["altitude_km"] = altitude / 1e3
        write_json(out / f"budget_{altitude / 1e3:g}km.json", report)
        totals[f"{altitude / 1e3:g}km"] = report["channels_db"]["geometric"]
    return {"geometric_db": totals}


RUNNERS = {"budget": run_budget, "bb84": run_bb84, "e91": run_e91, "sweep": run_sweep}


def run(cfg: ScenarioConfig, stdout=None) -> dict:
    """Execute the configured scenario, write its artifacts and print a summary."""
    stdout = stdout or sys.stdout
    out = Path(cfg.output_dir)
    write_atomic(out / "config_echo.yaml", dump_config(cfg))
    summary = RUNNERS[cfg.scenario](cfg, out)
    zenith = bb84.assemble_budget(math.pi / 2, cfg.models(), cfg.protocol.bb84)
    print(format_budget_table(zenith), file=stdout)
    for key, value in summary.items():
        print(f"{key}: {_rounded(value)}", file=stdout)
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description=__doc__)
    parser.add_argument("--config", type=Path, help="YAML scenario file (defaults if omitted)")
    parser.add_argument("--scenario", choices=SCENARIOS, help="overrides the file's scenario")
    parser.add_argument("--seed", type=int, help="overrides the file's seed (unsigned 64-bit)")
    parser.add_argument("--out", type=Path, help="overrides the file's output_dir")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else from_dict(None)
        overrides = {}
        if args.scenario is not None:
            overrides["scenario"] = args.scenario
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["output_dir"] = str(args.out)
        cfg = dataclasses.replace(cfg, **overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    try:
        run(cfg)
    except (ChannelError, DomainError, NumericError, ConfigError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
