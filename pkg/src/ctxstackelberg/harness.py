"""Experiment runner: play learners against environments and measure regret.

Regret is measured against the best policy in hindsight restricted to the
extreme-point menus ``E_z(delta)``: for each distinct context the benchmark
plays the menu point with the highest total utility over the rounds that
showed that context. Learner utility is the expected utility of the
committed mixed strategy (realized draws are kept in the transcript).
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ._validation import ConfigurationError
from .environments import SCENARIOS, build_olt_instance, make_environment
from .game import follower_best_response, play_round
from .geometry import ExtremePointCache
from .instance_io import load_instance
from .instances import BUILTIN
from .learners import ALGORITHMS, default_delta, make_leader
from .learners.base import build_context_table, first_argmax

WORKERS_ENV = "CTXSTACKELBERG_WORKERS"
REGRET_FLOOR = 1e-6


@dataclass
class Transcript:
    records: list
    instance_ref: str = ""
    scenario: str = ""
    seed: int = 0
    alg: str = ""

    @property
    def horizon(self):
        return len(self.records)

    def contexts(self):
        return [r.context for r in self.records]

    def types(self):
        return [r.follower_type for r in self.records]


@dataclass
class RegretReport:
    cumulative_regret: np.ndarray
    benchmark_utility: np.ndarray
    learner_utility: np.ndarray
    benchmark_slack: float = 1.0
    metadata: dict = field(default_factory=dict)

    @property
    def horizon(self):
        return len(self.cumulative_regret)

    @property
    def final_regret(self):
        return float(self.cumulative_regret[-1])


@dataclass
class Benchmark:
    """Hindsight policy: one mixed strategy per distinct context key."""

    policy: dict
    value: dict

    def __call__(self, z):
        return self.policy[z.key]

    @property
    def total(self):
        return float(sum(self.value.values()))


def benchmark_policy(game, contexts, types, delta):
    """Best ``E_z(delta)`` point per distinct context against the realized follower types."""
    if len(contexts) != len(types):
        raise ValueError("contexts and types must have equal length")
    counts, first = {}, {}
    for z, i in zip(contexts, types):
        c = counts.get(z.key)
        if c is None:
            c = counts[z.key] = np.zeros(game.n_types)
            first[z.key] = z
        c[i] += 1
    cache = ExtremePointCache(game, delta)
    policy, value = {}, {}
    for key, c in counts.items():
        table = build_context_table(game, cache(first[key]), first[key])
        totals = table.per_type @ c
        e = first_argmax(totals)
        policy[key] = table.points[e].copy()
        value[key] = float(totals[e])
    return Benchmark(policy, value)


def compute_regret(game, transcript, delta=None, metadata=None):
    """Cumulative regret curve of a transcript against its own hindsight benchmark."""
    records = transcript.records
    if not records:
        raise ValueError("empty transcript")
    delta = default_delta(len(records)) if delta is None else delta
    bench = benchmark_policy(game, transcript.contexts(), transcript.types(), delta)
    cache = {}
    per_round = np.empty(len(records))
    for t, r in enumerate(records):
        key = (r.context.key, r.follower_type)
        u = cache.get(key)
        if u is None:
            x = bench(r.context)
            payoff = x @ game.leader_matrix(r.context)
            u = cache[key] = float(payoff[follower_best_response(game, r.follower_type, r.context, x)])
        per_round[t] = u
    learner = np.cumsum([r.expected_utility for r in records])
    benchmark = np.cumsum(per_round)
    meta = {"alg": transcript.alg, "scenario": transcript.scenario, "seed": transcript.seed,
            "delta": delta, **(metadata or {})}
    return RegretReport(benchmark - learner, benchmark, learner, 1.0, meta)


def expected_regret_report(reports):
    """Mean and standard deviation of the regret curves across seeds."""
    if not reports:
        raise ValueError("need at least one report")
    horizons = {r.horizon for r in reports}
    if len(horizons) != 1:
        raise ValueError(f"reports have different horizons: {sorted(horizons)}")
    curves = np.vstack([r.cumulative_regret for r in reports])
    mean = curves.mean(axis=0)
    t = np.arange(1, curves.shape[1] + 1)
    return {"t": t, "mean_regret": mean, "std_regret": curves.std(axis=0),
            "mean_avg_regret": mean / t, "n_seeds": len(reports)}


def seed_streams(seed, n_seeds):
    """Independent (environment, learner, play) generators for each replicate."""
    out = []
    for child in np.random.SeedSequence(seed).spawn(n_seeds):
        env, learner, play = child.spawn(3)
        out.append((np.random.default_rng(env), np.random.default_rng(learner), np.random.default_rng(play)))
    return out


def run_episode(game, env, leader, horizon, play_rng, env_rng=None, learner_id=None):
    """Play ``horizon`` rounds; returns the list of round records."""
    env.reset(env_rng, learner_id or type(leader).__name__)
    leader.fit(game, horizon)
    full = leader.feedback == "full"
    records = []
    for t in range(horizon):
        z = env.next_context()
        x = leader.predict(z)
        i = env.next_follower(x)
        rec = play_round(game, z, x, i, play_rng, t=t, type_revealed=full)
        leader.partial_fit(z, x, follower_type=i if full else None, follower_action=rec.follower_action)
        records.append(rec)
    return records


def run_seed(game, scenario, alg, horizon, seed, index, n_seeds, params=None, follower_probs=None,
             instance_ref=""):
    params = dict(params or {})
    env_rng, learner_rng, play_rng = seed_streams(seed, n_seeds)[index]
    env = make_environment(scenario, game, horizon, follower_probs=follower_probs, rng=env_rng)
    leader = make_leader(alg, seed=learner_rng, **params)
    records = run_episode(game, env, leader, horizon, play_rng, env_rng, learner_id=alg)
    transcript = Transcript(records, instance_ref, scenario, index, alg)
    report = compute_regret(game, transcript, params.get("delta"),
                            metadata={"params": {k: v for k, v in params.items() if v is not None}})
    extras = {}
    if scenario == "olt-lower-bound":
        extras["olt_consistent"] = env.adversary.consistent()
    return transcript, report, extras


# ---------------------------------------------------------------- config / files

PARAM_KEYS = ("delta", "eta", "M", "N", "Z")


def resolve_instance(ref, scenario):
    """Load an instance file, or a built-in instance named ``builtin:<name>``."""
    if ref in (None, ""):
        if scenario == "olt-lower-bound":
            return build_olt_instance(), "builtin:olt"
        raise ConfigurationError("instance: required for this scenario")
    if str(ref).startswith("builtin:"):
        name = str(ref).split(":", 1)[1]
        if name not in BUILTIN:
            raise ConfigurationError(f"instance: unknown built-in {name!r}; choose from {', '.join(BUILTIN)}")
        return BUILTIN[name](), str(ref)
    path = Path(ref)
    if not path.is_file():
        raise ConfigurationError(f"instance: file not found: {ref}")
    return load_instance(path), str(ref)


def validate_config(config):
    """Check a run config and fill defaults; raises ConfigurationError naming the field."""
    cfg = dict(config)
    if cfg.get("scenario") not in SCENARIOS:
        raise ConfigurationError(f"scenario: must be one of {', '.join(SCENARIOS)}, got {cfg.get('scenario')!r}")
    if cfg.get("alg") not in ALGORITHMS:
        raise ConfigurationError(f"alg: must be one of {', '.join(ALGORITHMS)}, got {cfg.get('alg')!r}")
    for key, default in (("T", None), ("seeds", 1), ("seed", 0)):
        value = cfg.get(key, default)
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < (0 if key == "seed" else 1):
            raise ConfigurationError(f"{key}: expected a {'non-negative' if key == 'seed' else 'positive'} integer, got {value!r}")
        cfg[key] = int(value)
    for key in PARAM_KEYS:
        value = cfg.get(key)
        if value is not None and (not isinstance(value, (int, float)) or value <= 0):
            raise ConfigurationError(f"{key}: expected a positive number, got {value!r}")
        if value is not None and key in ("M", "N", "Z"):
            if int(value) != value:
                raise ConfigurationError(f"{key}: expected an integer, got {value!r}")
            cfg[key] = int(value)
    if cfg.get("follower_probs") is not None:
        probs = np.asarray(cfg["follower_probs"], dtype=float)
        if probs.ndim != 1 or np.any(probs < 0) or abs(probs.sum() - 1) > 1e-9:
            raise ConfigurationError("follower_probs: must be a probability vector")
    return cfg


def _job(args):
    return run_seed(*args)


def run_many(cfg, game, instance_ref):
    params = {k: cfg.get(k) for k in PARAM_KEYS}
    jobs = [(game, cfg["scenario"], cfg["alg"], cfg["T"], cfg["seed"], i, cfg["seeds"], params,
             cfg.get("follower_probs"), instance_ref) for i in range(cfg["seeds"])]
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_job, jobs))
    return [_job(j) for j in jobs]


def write_transcript(path, transcript, report):
    with open(path, "w", encoding="utf-8") as fh:
        for rec, bench, reg in zip(transcript.records, np.diff(report.benchmark_utility, prepend=0.0),
                                   report.cumulative_regret):
            row = rec.to_dict()
            row["benchmark_utility"] = float(bench)
            row["cumulative_regret"] = float(reg)
            fh.write(json.dumps(row) + "\n")


def write_aggregate_csv(path, agg):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "mean_regret", "std_regret", "mean_avg_regret"])
        for row in zip(agg["t"], agg["mean_regret"], agg["std_regret"], agg["mean_avg_regret"]):
            w.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])


def run_experiment(config, out_dir=None):
    """Run every seed of a config and write transcripts, the aggregate CSV and metadata.

    Returns ``(aggregate, results)`` where ``results`` holds the per-seed
    ``(transcript, report, extras)`` triples.
    """
    cfg = validate_config(config)
    game, ref = resolve_instance(cfg.get("instance"), cfg["scenario"])
    results = run_many(cfg, game, ref)
    agg = expected_regret_report([r for _, r, _ in results])
    out = out_dir or cfg.get("out")
    if out:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        for transcript, report, _ in results:
            write_transcript(out / f"transcript_seed{transcript.seed}.jsonl", transcript, report)
        write_aggregate_csv(out / "aggregate.csv", agg)
        meta = {
            "instance": ref, "scenario": cfg["scenario"], "alg": cfg["alg"], "T": cfg["T"],
            "seeds": cfg["seeds"], "seed": cfg["seed"],
            "params": {k: cfg.get(k) for k in PARAM_KEYS},
            "final_mean_regret": float(agg["mean_regret"][-1]),
            "final_std_regret": float(agg["std_regret"][-1]),
            "benchmark_slack": 1.0,
            "extras": [e for _, _, e in results],
        }
        (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return agg, results


def fit_regret_exponent(horizons, regrets):
    """Least-squares slope of ``log R`` against ``log T`` and its standard error."""
    horizons = np.asarray(horizons, dtype=float)
    regrets = np.asarray(regrets, dtype=float)
    if horizons.shape != regrets.shape or horizons.size < 3:
        raise ValueError("need at least three (T, R) pairs")
    if np.any(horizons <= 0) or horizons.max() < 8 * horizons.min():
        raise ValueError("horizons must be positive and span at least a factor of 8")
    fit = stats.linregress(np.log(horizons), np.log(np.maximum(regrets, REGRET_FLOOR)))
    return float(fit.slope), float(fit.stderr)


def run_sweep(config, out_dir=None):
    """Run a config once per horizon in ``config['T']`` and fit the regret exponent."""
    horizons = config.get("T")
    if not isinstance(horizons, list) or len(horizons) < 3:
        raise ConfigurationError("T: a sweep needs a list of at least three horizons")
    out = Path(out_dir or config.get("out") or "sweep_out")
    finals = []
    for horizon in horizons:
        agg, _ = run_experiment({**config, "T": horizon}, out / f"T{horizon}")
        finals.append(float(agg["mean_regret"][-1]))
    slope, stderr = fit_regret_exponent(horizons, finals)
    summary = {"T": horizons, "mean_final_regret": finals, "slope": slope, "slope_stderr": stderr,
               "alg": config.get("alg"), "scenario": config.get("scenario")}
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
