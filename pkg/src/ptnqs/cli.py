"""Command-line entry points: run, sweep, oracle, plotdata."""

import argparse
import json
import sys
from pathlib import Path

from .harness import ExperimentConfig, RunRecord, emit_plot_data, run_experiment, sweep
from .oracles import j1j2_spectrum, precipice_spectrum


def _add_common(p):
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out-dir", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker processes for runs")


def _load_config(args):
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.raw["seed"] = args.seed
    return cfg


def cmd_run(args):
    cfg = _load_config(args)
    summary = run_experiment(cfg, out_dir=args.out_dir, threads=args.threads)
    print(json.dumps({
        "threshold": summary.threshold,
        "success_frequency": summary.success_frequency,
        "ci_2sigma": [summary.ci_low, summary.ci_high],
        "two_sem": summary.two_sem,
        "runs": len(summary.outputs),
    }, indent=2))


def cmd_sweep(args):
    cfg = _load_config(args)
    values = [json.loads(v) for v in args.values]
    rows, pair_probs = sweep(cfg, args.axis, values, out_dir=args.out_dir,
                             threads=args.threads)
    out = {"axis": args.axis,
           "points": [{"value": v, "success_frequency": f,
                       "ci_2sigma": [lo, hi], "two_sem": sem}
                      for v, f, lo, hi, sem in rows]}
    if pair_probs:
        out["end_of_run_swap_probabilities"] = {
            str(v): {f"{i}-{j}": p for (i, j), p in d.items()}
            for v, d in pair_probs.items()}
    print(json.dumps(out, indent=2))


def cmd_oracle(args):
    if args.problem == "precipice":
        result = precipice_spectrum(args.n, args.s, k_eigen=args.k)
    else:
        result = j1j2_spectrum(args.lx, args.ly, J1=args.j1, J2=args.j2,
                               boundary=args.boundary, weight=args.weight,
                               k_eigen=args.k)
    text = json.dumps(result.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)


def cmd_plotdata(args):
    records = [RunRecord.read_jsonl(p) for p in sorted(Path(args.runs_dir).glob("*/events.jsonl"))]
    emit_plot_data(records, args.out_dir, window=args.window)
    print(f"wrote plot data for {len(records)} runs to {args.out_dir}")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="ptnqs",
                                     description="Parallel-tempered NQS training")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment ensemble")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one hyperparameter axis")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", required=True,
                         choices=["samples", "replicas", "t_max", "network"])
    p_sweep.add_argument("--values", nargs="+", required=True,
                         help="axis values (JSON literals)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="exact reference spectra")
    p_oracle.add_argument("problem", choices=["precipice", "j1j2"])
    p_oracle.add_argument("--n", type=int, default=32)
    p_oracle.add_argument("--s", type=float, default=0.8)
    p_oracle.add_argument("--lx", type=int, default=4)
    p_oracle.add_argument("--ly", type=int, default=5)
    p_oracle.add_argument("--j1", type=float, default=1.0)
    p_oracle.add_argument("--j2", type=float, default=0.0)
    p_oracle.add_argument("--boundary", choices=["open", "periodic"], default="open")
    p_oracle.add_argument("--weight", type=int, default=None)
    p_oracle.add_argument("--k", type=int, default=2, help="number of eigenvalues")
    p_oracle.add_argument("--out", default=None, help="also write JSON here")
    p_oracle.set_defaults(func=cmd_oracle)

    p_plot = sub.add_parser("plotdata", help="emit CSV series from run logs")
    p_plot.add_argument("--runs-dir", required=True,
                        help="directory containing run*/events.jsonl")
    p_plot.add_argument("--out-dir", required=True)
    p_plot.add_argument("--window", type=int, default=50)
    p_plot.set_defaults(func=cmd_plotdata)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
