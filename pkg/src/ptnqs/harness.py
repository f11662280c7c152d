"""Experiment orchestration: config parsing, ensembles of independent PT
trainings, success detection, bootstrap statistics, and run logging."""

import copy
import csv
import json
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .ansatz import make_ansatz
from .hamiltonians import make_hamiltonian, Precipice, J1J2
from .oracles import precipice_spectrum, j1j2_spectrum
from .sampling import (ExactSectorSampler, ExactSymmetricSampler,
                       MetropolisExchange, MetropolisSampler,
                       estimate_moments, exact_sector_energy)
from .sectors import build_sector_hamiltonian, sector_states
from .sr import FixedStep, HeunStep, RegularizationSchedule, SrOptimizer
from .tempering import ReplicaPool, init_temperatures
from .training import PTSettings, ReplicaPayload, train


# ---------------------------------------------------------------------------
# configuration

DEFAULTS = {
    "optimizer": {
        "learning_rate_mode": "adaptive-heun",
        "eta": 1e-3,
        "heun_tol": 1e-8,
        "lambda0": 100.0,
        "lambda_decay": 0.9,
        "lambda_min": 1e-4,
        "solver": {"kind": "minres", "tol": 1e-6, "max_iter": 1000},
    },
    "tempering": {
        "n_replicas": 6,
        "t_min": 0.1,
        "t_max": 20.0,
        "init_shape": "cubic",
        "n_swap": 100,
        "temp_update_period": 200,
        "burn_in": 0,
        "pt_start": 0,
        "optimize_temperatures": True,
        "optimize_lowest": False,
    },
    "sampler": {"mode": "exact-symmetric", "n_samples": 200, "sweeps": 1,
                "burn_in_sweeps": 10},
    "runs": 1,
    "updates": 1000,
    "seed": 0,
    "log_every": 1,
    "dense_limit": 300,
}


def _merge(defaults, overrides):
    out = copy.deepcopy(defaults)
    for k, v in (overrides or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    """Validated experiment description; `raw` is the canonical dict that
    round-trips through JSON."""
    raw: dict

    @classmethod
    def from_dict(cls, d):
        raw = copy.deepcopy(d)
        if "problem" not in raw:
            raise ValueError("config requires a 'problem' section")
        prob = raw["problem"]
        for key in ("hamiltonian", "ansatz"):
            if key not in prob:
                raise ValueError(f"problem section requires '{key}'")
        prob["sampler"] = _merge(DEFAULTS["sampler"], prob.get("sampler"))
        raw["optimizer"] = _merge(DEFAULTS["optimizer"], raw.get("optimizer"))
        if raw.get("tempering") is not None:
            raw["tempering"] = _merge(DEFAULTS["tempering"], raw.get("tempering"))
        for key in ("runs", "updates", "seed", "log_every", "dense_limit"):
            raw.setdefault(key, DEFAULTS[key])
        raw.setdefault("success", None)
        return cls(raw)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_json(self):
        return json.dumps(self.raw, indent=2, sort_keys=True)

    def __getitem__(self, key):
        return self.raw[key]

    def get(self, key, default=None):
        return self.raw.get(key, default)


# ---------------------------------------------------------------------------
# run records

@dataclass
class RunRecord:
    """Append-only event log for one training run."""
    energy_rows: list = field(default_factory=list)   # (step, slot, energy, T, eta)
    swap_rows: list = field(default_factory=list)     # (step, i, j, p, swapped)
    temp_rows: list = field(default_factory=list)     # (step, [betas], [accepted slots])
    success_step: Optional[int] = None

    def energy_row(self, step, slot, energy, T, eta):
        self.energy_rows.append((step, slot, float(energy), float(T), float(eta)))

    def swap_event(self, step, outcomes):
        for o in outcomes:
            self.swap_rows.append((step, o.pair[0], o.pair[1],
                                   float(o.probability), bool(o.swapped)))

    def temperature_event(self, step, betas, accepted):
        self.temp_rows.append((step, [float(b) for b in betas],
                               [int(i) for i, _ in accepted]))

    def success_event(self, step):
        if self.success_step is None:
            self.success_step = step

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for step, slot, e, T, eta in self.energy_rows:
                fh.write(json.dumps({"type": "energy", "step": step, "slot": slot,
                                     "energy": e, "T": T, "eta": eta}) + "\n")
            for step, i, j, p, swapped in self.swap_rows:
                fh.write(json.dumps({"type": "swap", "step": step, "pair": [i, j],
                                     "p": p, "swapped": swapped}) + "\n")
            for step, betas, accepted in self.temp_rows:
                fh.write(json.dumps({"type": "temperatures", "step": step,
                                     "betas": betas, "accepted": accepted}) + "\n")
            if self.success_step is not None:
                fh.write(json.dumps({"type": "success", "step": self.success_step}) + "\n")

    @classmethod
    def read_jsonl(cls, path):
        rec = cls()
        with open(path) as fh:
            for line in fh:
                d = json.loads(line)
                if d["type"] == "energy":
                    rec.energy_rows.append((d["step"], d["slot"], d["energy"],
                                            d["T"], d["eta"]))
                elif d["type"] == "swap":
                    rec.swap_rows.append((d["step"], d["pair"][0], d["pair"][1],
                                          d["p"], d["swapped"]))
                elif d["type"] == "temperatures":
                    rec.temp_rows.append((d["step"], d["betas"],
                                          [int(i) for i in d["accepted"]]))
                elif d["type"] == "success":
                    rec.success_step = d["step"]
        return rec


# ---------------------------------------------------------------------------
# success rules

class ThresholdExactRule:
    """Success when the zero-temperature replica's exact energy crosses a
    threshold. The energy is the exact expectation at the replica's current
    parameters: an explicit fixed-weight sector evaluation when `sector` is
    given, otherwise a fresh batch from the replica's exact sampler (never
    the swap-window running average, which lags the current parameters)."""

    def __init__(self, threshold, comparison="below", relative_tol=None,
                 check_every=1, sector=None):
        self.threshold = threshold
        self.comparison = comparison
        self.relative_tol = relative_tol
        self.check_every = check_every
        self.sector = sector  # (sector_hamiltonian, states) for exact evaluation
        self.last_energy = np.nan

    def exact_energy(self, pool):
        payload = pool.slots[0].payload
        if self.sector is not None:
            H, states = self.sector
            return exact_sector_energy(payload.sampler.ansatz
                                       if hasattr(payload.sampler, "ansatz")
                                       else payload.sampler.chain.ansatz,
                                       payload.params, H, states)
        batch = payload.sampler.batch(payload.params)
        return float(np.real(batch.weights @ batch.local_energy))

    def __call__(self, step, pool):
        if step % self.check_every != 0:
            return False
        e = self.exact_energy(pool)
        self.last_energy = e
        if self.comparison == "below":
            return e < self.threshold
        if self.comparison == "relative":
            return abs(e - self.threshold) <= self.relative_tol * abs(self.threshold)
        raise ValueError(f"unknown comparison {self.comparison!r}")


def detect_success_sampled(ansatz, params, h, weight, threshold, rng,
                           rounds=1000, samples_per_round=1024,
                           sweeps=1, burn_in_sweeps=10, walkers=1):
    """Freeze the parameters and estimate the energy by repeated sampling
    rounds; success when the mean of the round means lies more than one
    standard error below the threshold.

    Returns (confirmed, mean_of_means, standard_error).
    """
    chain = MetropolisExchange(ansatz, h, weight, rng, sweeps=sweeps,
                               burn_in_sweeps=burn_in_sweeps, walkers=walkers)
    means = np.empty(rounds)
    for r in range(rounds):
        batch = chain.sample(params, samples_per_round)
        means[r] = np.real(batch.weights @ batch.local_energy)
    mu = means.mean()
    se = means.std(ddof=1) / np.sqrt(rounds)
    return bool(mu < threshold - se), float(mu), float(se)


class SampledSuccessRule:
    """Running-mean trigger plus freeze-and-resample confirmation for
    systems where exact expectations are out of reach.

    Watches the zero-temperature replica's per-update energy estimates
    over a 50-step window; when the running mean dips below the threshold
    by more than a third of the running standard deviation, the parameters
    are frozen and confirmed by `rounds` independent sampling rounds."""

    def __init__(self, threshold, h, weight, rng, window=50, margin=1.0 / 3.0,
                 rounds=1000, samples_per_round=1024, confirm_samples=512,
                 sweeps=1, walkers=1):
        self.threshold = threshold
        self.h = h
        self.weight = weight
        self.rng = rng
        self.window = window
        self.margin = margin
        self.rounds = rounds
        self.samples_per_round = samples_per_round
        self.confirm_samples = confirm_samples
        self.sweeps = sweeps
        self.walkers = walkers
        self.history = deque(maxlen=window)

    def _ansatz(self, pool):
        sampler = pool.slots[0].payload.sampler
        return sampler.chain.ansatz if hasattr(sampler, "chain") else sampler.ansatz

    def __call__(self, step, pool):
        self.history.append(pool.slots[0].e_inst)
        if len(self.history) < self.window:
            return False
        arr = np.asarray(self.history)
        mean, std = arr.mean(), arr.std(ddof=1)
        if not mean < self.threshold - self.margin * std:
            return False
        confirmed, _, _ = detect_success_sampled(
            self._ansatz(pool), pool.slots[0].payload.params, self.h, self.weight,
            self.threshold, self.rng, rounds=self.rounds,
            samples_per_round=self.samples_per_round, sweeps=self.sweeps,
            walkers=self.walkers)
        if not confirmed:
            self.history.clear()  # avoid immediate re-trigger on the same window
        return confirmed

    def confirm_at_termination(self, pool):
        return detect_success_sampled(
            self._ansatz(pool), pool.slots[0].payload.params, self.h, self.weight,
            self.threshold, self.rng, rounds=self.rounds,
            samples_per_round=self.confirm_samples, sweeps=self.sweeps,
            walkers=self.walkers)


# ---------------------------------------------------------------------------
# builders

def build_hamiltonian(cfg):
    d = dict(cfg["problem"]["hamiltonian"])
    return make_hamiltonian(d.pop("kind"), **d)


def build_ansatz(cfg, h):
    d = dict(cfg["problem"]["ansatz"])
    d.pop("init_scale", None)
    return make_ansatz(d.pop("kind"), h.n, **d)


def build_sampler(cfg, ansatz, h, rng):
    s = cfg["problem"]["sampler"]
    mode = s["mode"]
    if mode == "exact-symmetric":
        return ExactSymmetricSampler(ansatz, h)
    if mode == "exact-sector":
        return ExactSectorSampler(ansatz, h, s.get("weight", h.n // 2))
    if mode == "metropolis":
        return MetropolisSampler(ansatz, h, s.get("weight", h.n // 2),
                                 s["n_samples"], rng, sweeps=s.get("sweeps", 1),
                                 burn_in_sweeps=s.get("burn_in_sweeps", 10),
                                 walkers=s.get("walkers", 1))
    raise ValueError(f"unknown sampler mode {mode!r}")


def build_optimizer(cfg):
    o = cfg["optimizer"]
    schedule = RegularizationSchedule(o["lambda0"], o["lambda_decay"], o["lambda_min"])
    if o["learning_rate_mode"] == "fixed":
        controller = FixedStep(eta=o["eta"])
    elif o["learning_rate_mode"] == "adaptive-heun":
        controller = HeunStep(tol=o["heun_tol"], eta=o["eta"])
    else:
        raise ValueError(f"unknown learning_rate_mode {o['learning_rate_mode']!r}")
    return SrOptimizer(controller=controller, schedule=schedule,
                       solver_tol=o["solver"]["tol"],
                       solver_max_iter=o["solver"]["max_iter"],
                       solver_kind=o["solver"]["kind"])


def resolve_threshold(cfg, oracle_cache=None):
    """Success thresholds come from the oracle or an explicit constant in
    the config, never from logic."""
    s = cfg.get("success")
    if s is None or "threshold" in s and s["threshold"] is not None:
        return None if s is None else float(s["threshold"])
    ref = s.get("reference")
    hd = cfg["problem"]["hamiltonian"]
    key = (ref, json.dumps(hd, sort_keys=True))
    if oracle_cache is not None and key in oracle_cache:
        return oracle_cache[key]
    if ref == "oracle-ground" and hd["kind"] == "precipice":
        value = float(precipice_spectrum(hd["n"], hd.get("s", 0.8)).eigenvalues[0])
    elif ref in ("oracle-ground", "oracle-first-excited") and hd["kind"] == "j1j2":
        spec = j1j2_spectrum(hd["Lx"], hd["Ly"], hd.get("J1", 1.0), hd.get("J2", 0.0),
                             hd.get("boundary", "open"),
                             cfg["problem"]["sampler"].get("weight"))
        value = float(spec.eigenvalues[0 if ref == "oracle-ground" else 1])
    else:
        raise ValueError(f"cannot resolve success threshold reference {ref!r}")
    if oracle_cache is not None:
        oracle_cache[key] = value
    return value


def build_success_rule(cfg, h, ansatz, threshold, rng):
    s = cfg.get("success")
    if s is None:
        return None
    kind = s["kind"]
    if kind == "threshold-exact":
        sector = None
        if s.get("exact_sector", False):
            weight = cfg["problem"]["sampler"].get("weight", h.n // 2)
            sector = (build_sector_hamiltonian(h, weight), sector_states(h.n, weight))
        return ThresholdExactRule(threshold,
                                  comparison=s.get("comparison", "below"),
                                  relative_tol=s.get("relative_tol"),
                                  check_every=s.get("check_every", 1),
                                  sector=sector)
    if kind == "threshold-sampled":
        weight = cfg["problem"]["sampler"].get("weight", h.n // 2)
        return SampledSuccessRule(threshold, h, weight, rng,
                                  window=s.get("window", 50),
                                  rounds=s.get("rounds", 1000),
                                  samples_per_round=s.get("samples_per_round", 1024),
                                  confirm_samples=s.get("confirm_samples", 512),
                                  sweeps=cfg["problem"]["sampler"].get("sweeps", 1),
                                  walkers=cfg["problem"]["sampler"].get("walkers", 1))
    raise ValueError(f"unknown success kind {kind!r}")


# ---------------------------------------------------------------------------
# single runs and ensembles

@dataclass
class RunOutput:
    run_index: int
    seed_entropy: int
    success: bool
    success_step: Optional[int]
    final_energy: float
    record: RunRecord
    failed: Optional[str] = None


def run_single(cfg, run_index, threshold=None):
    """One independent training run with its own seed tree."""
    if not isinstance(cfg, ExperimentConfig):
        cfg = ExperimentConfig.from_dict(cfg)
    base = np.random.SeedSequence(entropy=cfg["seed"], spawn_key=(run_index,))
    children = base.spawn(4)
    init_rng = np.random.default_rng(children[0])
    coord_rng = np.random.default_rng(children[1])
    success_rng = np.random.default_rng(children[2])
    sampler_seed = children[3]

    h = build_hamiltonian(cfg)
    tempering_cfg = cfg.get("tempering")
    if tempering_cfg is not None:
        temps = init_temperatures(tempering_cfg["n_replicas"], tempering_cfg["t_min"],
                                  tempering_cfg["t_max"], tempering_cfg["init_shape"])
        pt = PTSettings(n_swap=tempering_cfg["n_swap"],
                        temp_update_period=tempering_cfg["temp_update_period"],
                        burn_in=tempering_cfg["burn_in"],
                        pt_start=tempering_cfg["pt_start"],
                        optimize_temperatures=tempering_cfg["optimize_temperatures"])
    else:
        temps = np.array([0.0])
        pt = None

    scale = cfg["problem"]["ansatz"].get("init_scale", 0.01)
    payloads = []
    sampler_children = sampler_seed.spawn(len(temps))
    for k in range(len(temps)):
        ansatz = build_ansatz(cfg, h)
        params = ansatz.init_parameters(init_rng, scale=scale)
        sampler = build_sampler(cfg, ansatz, h, np.random.default_rng(sampler_children[k]))
        payloads.append(ReplicaPayload(params=params, optimizer=build_optimizer(cfg),
                                       sampler=sampler))
    pool = ReplicaPool(temps, payloads,
                       optimize_lowest=bool(tempering_cfg and
                                            tempering_cfg.get("optimize_lowest", False)))

    if threshold is None:
        threshold = resolve_threshold(cfg)
    ansatz0 = payloads[0].sampler.ansatz if hasattr(payloads[0].sampler, "ansatz") \
        else payloads[0].sampler.chain.ansatz
    rule = build_success_rule(cfg, h, ansatz0, threshold, success_rng)

    record = RunRecord()
    failed = None
    try:
        result = train(pool, cfg["updates"], coord_rng, pt=pt, recorder=record,
                       success_fn=rule, dense_limit=cfg["dense_limit"],
                       log_every=cfg["log_every"],
                       stop_on_success=bool(cfg.get("stop_on_success", False)))
        success_step = result.success_step
    except FloatingPointError as exc:
        failed = str(exc)
        success_step = None

    if failed is None and isinstance(rule, ThresholdExactRule):
        final_energy = rule.exact_energy(pool)
    elif failed is None and isinstance(rule, SampledSuccessRule):
        # freeze-and-resample estimate; comparable across arms, unlike the
        # swap-window average whose span depends on the swap cadence
        confirmed, final_energy, _ = rule.confirm_at_termination(pool)
        if confirmed and success_step is None:
            success_step = cfg["updates"]
    elif failed is None:
        final_energy = pool.slots[0].e_last
    else:
        final_energy = np.nan
    return RunOutput(run_index=run_index, seed_entropy=cfg["seed"],
                     success=success_step is not None, success_step=success_step,
                     final_energy=float(final_energy), record=record, failed=failed)


def _run_single_worker(args):
    cfg_dict, run_index, threshold = args
    return run_single(ExperimentConfig.from_dict(cfg_dict), run_index, threshold)


@dataclass
class ExperimentSummary:
    config: dict
    threshold: Optional[float]
    outputs: list
    success_frequency: float
    ci_low: float
    ci_high: float
    two_sem: float

    @property
    def success_flags(self):
        return [o.success for o in self.outputs if o.failed is None]


def bootstrap_ci(flags, resamples=10_000, level=0.9545, rng=None):
    """Percentile bootstrap interval for a success frequency, plus twice
    the binomial standard error of the mean for cross-checking."""
    flags = np.asarray(flags, dtype=float)
    if len(flags) == 0:
        raise ValueError("need at least one success flag")
    rng = rng if rng is not None else np.random.default_rng(0)
    freq = flags.mean()
    draws = rng.choice(flags, size=(resamples, len(flags)), replace=True).mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(draws, [alpha, 1.0 - alpha])
    two_sem = 2.0 * np.sqrt(freq * (1.0 - freq) / len(flags))
    return float(freq), float(lo), float(hi), float(two_sem)


def run_experiment(cfg, out_dir=None, threads=1):
    """Execute `runs` independent trainings and aggregate success statistics.

    Runs that hit non-finite energies are marked failed-numeric and
    excluded from the frequency (with the reason logged)."""
    if not isinstance(cfg, ExperimentConfig):
        cfg = ExperimentConfig.from_dict(cfg)
    threshold = resolve_threshold(cfg)
    n_runs = cfg["runs"]
    jobs = [(cfg.raw, i, threshold) for i in range(n_runs)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(_run_single_worker, jobs))
    else:
        outputs = [_run_single_worker(j) for j in jobs]

    flags = [o.success for o in outputs if o.failed is None]
    freq, lo, hi, two_sem = bootstrap_ci(flags) if flags else (0.0, 0.0, 0.0, 0.0)
    summary = ExperimentSummary(config=cfg.raw, threshold=threshold, outputs=outputs,
                                success_frequency=freq, ci_low=lo, ci_high=hi,
                                two_sem=two_sem)
    if out_dir is not None:
        write_experiment(summary, out_dir)
    return summary


def write_experiment(summary, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(summary.config, indent=2, sort_keys=True))
    for o in summary.outputs:
        run_dir = out / "runs" / f"run{o.run_index:03d}"
        run_dir.mkdir(parents=True, exist_ok=True)
        o.record.write_jsonl(run_dir / "events.jsonl")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "success", "success_step", "final_energy", "failed"])
        for o in summary.outputs:
            w.writerow([o.run_index, int(o.success),
                        o.success_step if o.success_step is not None else "",
                        f"{o.final_energy:.12g}", o.failed or ""])
    stats = {"threshold": summary.threshold,
             "success_frequency": summary.success_frequency,
             "ci_2sigma": [summary.ci_low, summary.ci_high],
             "two_sem": summary.two_sem,
             "n_runs": len(summary.outputs),
             "n_failed": sum(1 for o in summary.outputs if o.failed is not None)}
    (out / "stats.json").write_text(json.dumps(stats, indent=2))


# ---------------------------------------------------------------------------
# sweeps

SWEEP_AXES = {
    "samples": ("problem", "sampler", "n_samples"),
    "replicas": ("tempering", "n_replicas"),
    "t_max": ("tempering", "t_max"),
    "network": ("problem", "ansatz"),
}


def _set_path(d, path, value):
    for key in path[:-1]:
        d = d[key]
    if isinstance(value, dict) and isinstance(d.get(path[-1]), dict):
        d[path[-1]] = _merge(d[path[-1]], value)
    else:
        d[path[-1]] = value


def sweep(cfg, axis, values, out_dir=None, threads=1):
    """Run the experiment once per axis value; returns per-point summaries
    as (value, frequency, ci_low, ci_high, two_sem) plus, for replica
    sweeps, end-of-run mean swap probabilities per pair."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}")
    if not isinstance(cfg, ExperimentConfig):
        cfg = ExperimentConfig.from_dict(cfg)
    rows = []
    pair_probs = {}
    for value in values:
        point = copy.deepcopy(cfg.raw)
        _set_path(point, SWEEP_AXES[axis], value)
        point_dir = None if out_dir is None else Path(out_dir) / f"{axis}_{value}"
        summary = run_experiment(ExperimentConfig.from_dict(point),
                                 out_dir=point_dir, threads=threads)
        rows.append((value, summary.success_frequency, summary.ci_low,
                     summary.ci_high, summary.two_sem))
        if axis == "replicas":
            pair_probs[value] = end_of_run_swap_probabilities(
                [o.record for o in summary.outputs if o.failed is None])
    if out_dir is not None:
        with open(Path(out_dir) / "sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([axis, "success_frequency", "ci_low", "ci_high", "two_sem"])
            for row in rows:
                w.writerow(row)
    return rows, pair_probs


def end_of_run_swap_probabilities(records, window=50):
    """Mean swap probability per neighbor pair over each run's final
    `window` attempts, averaged across runs."""
    acc = {}
    for rec in records:
        by_pair = {}
        for step, i, j, p, _ in rec.swap_rows:
            by_pair.setdefault((i, j), []).append(p)
        for pair, ps in by_pair.items():
            acc.setdefault(pair, []).append(np.mean(ps[-window:]))
    return {pair: float(np.mean(v)) for pair, v in sorted(acc.items())}


# ---------------------------------------------------------------------------
# plot data

def running_mean(x, window):
    x = np.asarray(x, dtype=float)
    if len(x) < window:
        return np.empty(0)
    c = np.concatenate([[0.0], np.cumsum(x)])
    return (c[window:] - c[:-window]) / window


def emit_plot_data(records, out_dir, window=50):
    """Write the series behind the reported figures: per-pair swap
    probability running averages, per-replica energy traces, beta
    trajectories, and the ensemble success-vs-updates curve."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not records:
        raise ValueError("no records to plot")
    rec = records[0]

    by_pair = {}
    for step, i, j, p, _ in rec.swap_rows:
        by_pair.setdefault((i, j), []).append((step, p))
    with open(out / "swap_probability_running.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pair", "attempt", "step", "running_mean_p"])
        for pair, rows in sorted(by_pair.items()):
            steps = [r[0] for r in rows]
            rm = running_mean([r[1] for r in rows], window)
            for k, val in enumerate(rm):
                w.writerow([f"{pair[0]}-{pair[1]}", k + window, steps[k + window - 1],
                            f"{val:.8g}"])

    with open(out / "energy_traces.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "slot", "energy", "T"])
        for step, slot, e, T, _ in rec.energy_rows:
            w.writerow([step, slot, f"{e:.12g}", f"{T:.8g}"])

    with open(out / "beta_traces.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step"] + [f"beta_{i}" for i in range(
            len(rec.temp_rows[0][1]) if rec.temp_rows else 0)])
        for step, betas, _ in rec.temp_rows:
            w.writerow([step] + [f"{b:.10g}" for b in betas])

    steps = sorted({s for r in records for s, *_ in r.energy_rows} | {0})
    n = len(records)
    with open(out / "success_curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "success_frequency"])
        for s in steps:
            frac = sum(1 for r in records
                       if r.success_step is not None and r.success_step <= s) / n
            w.writerow([s, f"{frac:.8g}"])
