"""Command-line runner for the equalization experiments.

Examples::

    cordic-lms                                  # TLMS, 32-stage CORDIC, defaults
    cordic-lms --algorithm hlms --cordic-steps 16
    cordic-lms --compare tlms,hlms --output curves/mse.csv
    cordic-lms --compare tlms:cordic,tlms:exact
    cordic-lms --dump-angle-table --cordic-steps 32

Exit status is 0 on success, 1 for usage errors and 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .channel import ChannelSpec, ExperimentConfig, make_source, reference_channel, run_ensemble
from .cordic import MAX_ITERATIONS, SCHEDULES, CordicMode, build_angle_table
from .filters import AlgorithmKind, CordicBackend, ExactBackend

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
ALGORITHMS = tuple(k.value for k in AlgorithmKind)
TRIGS = ("cordic", "exact")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class CliConfig:
    base: ExperimentConfig
    combos: list[tuple[AlgorithmKind, str]]
    output: Path
    output_given: bool = False
    dump_angle_table: bool = False
    cordic_steps: int = 32
    schedule: str = "standard"
    frac_bits: int = 48

    def backend(self, trig: str):
        if trig == "exact":
            return ExactBackend()
        return CordicBackend(self.cordic_steps, self.schedule, self.frac_bits)

    def experiments(self):
        """``(label, ExperimentConfig, output path)`` for each requested combo."""
        out = []
        multi = len(self.combos) > 1
        for kind, trig in self.combos:
            label = f"{kind.value}_{trig}" + (str(self.cordic_steps) if trig == "cordic" else "")
            path = self.output.with_name(f"{self.output.stem}_{label}{self.output.suffix}") if multi else self.output
            out.append((label, self.base.with_(kind=kind, backend=self.backend(trig)), path))
        return out


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _cordic_steps(text):
    v = int(text)
    if not 1 <= v <= MAX_ITERATIONS:
        raise argparse.ArgumentTypeError(f"must lie in [1, {MAX_ITERATIONS}], got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a non-negative number, got {text}")
    return v


def _frac_bits(text):
    v = int(text)
    if not 8 <= v <= 60:
        raise argparse.ArgumentTypeError(f"must lie in [8, 60], got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cordic-lms", description="TLMS/HLMS channel-equalization experiments with step-by-step CORDIC.")
    p.add_argument("--algorithm", choices=ALGORITHMS, default=None, help="adaptive algorithm (default tlms)")
    p.add_argument("--trig", choices=TRIGS, default="cordic", help="sin/cos evaluation backend")
    p.add_argument("--cordic-steps", type=_cordic_steps, default=32, help="CORDIC stages per evaluation")
    p.add_argument("--schedule", choices=SCHEDULES, default="standard", help="hyperbolic repeat schedule")
    p.add_argument("--taps", type=_positive_int, default=15)
    p.add_argument("--center", type=_positive_int, default=8, help="reference tap, 1-based")
    p.add_argument("--mu", type=_positive_float, default=0.0004)
    p.add_argument("--symbols", type=_positive_int, default=5000)
    p.add_argument("--runs", type=_positive_int, default=200)
    p.add_argument("--seed", type=_nonneg_int, default=0, help="base seed; run i uses seed+i")
    p.add_argument("--noise-var", type=_nonneg_float, default=0.077)
    p.add_argument("--power-db", type=float, default=10.0)
    p.add_argument("--training-len", type=_nonneg_int, default=None, help="symbols before decision-directed mode (default: all)")
    p.add_argument("--smoothing-window", type=_positive_int, default=100)
    p.add_argument("--output", default=None, help="CSV path (default mse.csv); with --compare a label is appended per combo")
    p.add_argument("--compare", default=None, help="comma list of ALGO or ALGO:TRIG, e.g. tlms,hlms")
    p.add_argument("--dump-angle-table", action="store_true", help="write the angle table CSV and exit")
    p.add_argument("--frac-bits", type=_frac_bits, default=48, help="fractional bits of the CORDIC datapath")
    return p


def _parse_compare(text, default_trig):
    combos = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise UsageError("empty entry in --compare")
        algo, _, trig = item.partition(":")
        if algo not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {algo!r} in --compare")
        trig = trig or default_trig
        if trig not in TRIGS:
            raise UsageError(f"unknown trig backend {trig!r} in --compare")
        combo = (AlgorithmKind(algo), trig)
        if combo in combos:
            raise UsageError(f"duplicate entry {item!r} in --compare")
        combos.append(combo)
    return combos


def parse_args(argv=None) -> CliConfig:
    """Parse and validate flags; usage problems exit with status 1."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.compare is not None:
            if ns.algorithm is not None:
                raise UsageError("--compare and --algorithm are mutually exclusive")
            if ns.dump_angle_table:
                raise UsageError("--dump-angle-table cannot be combined with --compare")
            combos = _parse_compare(ns.compare, ns.trig)
        else:
            combos = [(AlgorithmKind(ns.algorithm or "tlms"), ns.trig)]
        if ns.center > ns.taps:
            raise UsageError(f"--center {ns.center} exceeds --taps {ns.taps}")
        base = ExperimentConfig(
            source=make_source(ns.power_db),
            channel=ChannelSpec(reference_channel().taps, ns.noise_var),
            N=ns.taps,
            center=ns.center,
            mu=ns.mu,
            n_symbols=ns.symbols,
            n_runs=ns.runs,
            training_len=ns.training_len,
            base_seed=ns.seed,
            smoothing_window=ns.smoothing_window,
        )
    except (UsageError, ValueError) as exc:
        parser.error(str(exc))
    return CliConfig(
        base=base,
        combos=combos,
        output=Path(ns.output or "mse.csv"),
        output_given=ns.output is not None,
        dump_angle_table=ns.dump_angle_table,
        cordic_steps=ns.cordic_steps,
        schedule=ns.schedule,
        frac_bits=ns.frac_bits,
    )


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _format_summary(label, summary, path):
    drop = summary["drop_10db_at"]
    return (
        f"{label}: initial {summary['initial_db']:.3f} dB, final {summary['final_db']:.3f} dB, "
        f"10 dB drop at {'none' if drop is None else drop} -> {path}"
    )


def run(config: CliConfig, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        if config.dump_angle_table:
            kind = config.combos[0][0]
            mode = CordicMode.HYPERBOLIC if kind is AlgorithmKind.HLMS else CordicMode.CIRCULAR
            table = build_angle_table(mode, config.cordic_steps, config.schedule, config.frac_bits)
            if config.output_given:
                _write(config.output, table.to_csv())
            else:
                out.write(table.to_csv())
            return EXIT_OK
        for label, exp, path in config.experiments():
            curve = run_ensemble(exp)
            _write(path, curve.to_csv())
            print(_format_summary(label, curve.summary(), path), file=out)
    except OSError as exc:
        print(f"cordic-lms: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ArithmeticError, ValueError) as exc:
        print(f"cordic-lms: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
