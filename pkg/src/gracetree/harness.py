"""Seeded labelling campaigns: per-trial records, summaries, artifacts.

One experiment sweeps a list of tree orders.  Trial (i, k) draws every
random input from the spawn key (i, k) under the root seed, so records
are reproducible individually and independent of execution order.
Wall-clock time appears only in the records CSV; summaries and
labelling files are pure functions of (seed, config).
"""

from __future__ import annotations

import dataclasses
import io
import json
import os
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from scipy.stats import beta as _beta

from .intervals import IntervalSystem
from .labeller import LabelResult, run_labelling
from .params import ParamError, Params, derive_practical_params
from .prepare import Plan, prepare_plan
from .quasirandom import QuasiReport, QuasiSampleSpec, check_quasi
from .rng import Rng
from .trees import Tree, parse_tree, random_tree
from .verify import Labelling, verify_graceful


@dataclass(frozen=True)
class ExperimentConfig:
    """All inputs of a campaign.  tree_source is "random" or a path to
    a tree file (then every n entry must equal that tree's order)."""

    n: Tuple[int, ...]
    gamma: Fraction
    m: int
    ell: int
    trials: int
    seed: int
    retries: int = 3
    checkpoint_every: int = 500
    quasi_per_kind: int = 32
    quasi_used_cap: int = 256
    max_component: Optional[int] = None
    tree_source: str = "random"

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(x) for x in self.n))
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        if not self.n:
            raise ParamError("n list must not be empty")
        if self.trials < 0:
            raise ParamError("trials must be >= 0")
        if self.retries < 0:
            raise ParamError("retries must be >= 0")
        if self.checkpoint_every < 0:
            raise ParamError("checkpoint_every must be >= 0")
        if self.quasi_per_kind < 0:
            raise ParamError("quasi_per_kind must be >= 0")
        if self.max_component is not None and self.max_component < 2:
            raise ParamError("max_component must be >= 2")
        for n in self.n:
            derive_practical_params(n, self.gamma, self.m, self.ell)

    def params_for(self, n: int) -> Params:
        return derive_practical_params(n, self.gamma, self.m, self.ell)


def config_to_json(cfg: ExperimentConfig) -> str:
    d = dataclasses.asdict(cfg)
    d["n"] = list(cfg.n)
    d["gamma"] = str(cfg.gamma)
    return json.dumps(d, indent=2, sort_keys=True)


def config_from_json(text: str) -> ExperimentConfig:
    d = json.loads(text)
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    extra = set(d) - known
    if extra:
        raise ParamError(f"unknown config keys: {sorted(extra)}")
    if "gamma" in d and isinstance(d["gamma"], str):
        d["gamma"] = Fraction(d["gamma"])
    return ExperimentConfig(**d)


@dataclass(frozen=True)
class TrialRecord:
    n: int
    trial: int
    seed_key: str
    attempts: int
    outcome: str  # "success" | "fail"
    failure_site: str  # site of the last failed attempt, "" if none
    failure_step: int  # -1 if none
    quasi1_max_dev: float  # -1.0 when no checkpoint fired
    quasi2_max_dev: float
    quasi_ok: bool  # both deviations within alpha(t) at every checkpoint
    corv_hits: int
    core_hits: int
    steps: int
    wall_time: float


@dataclass(frozen=True)
class TrialResult:
    record: TrialRecord
    result: LabelResult
    reports: Tuple[QuasiReport, ...]  # checkpoints of the last attempt
    labelling: Optional[Labelling]
    tree: Tree
    params: Params


def _load_tree(cfg: ExperimentConfig, n: int, rng: Rng) -> Tree:
    if cfg.tree_source == "random":
        return random_tree(n, rng)
    with open(cfg.tree_source, "r", encoding="utf-8") as fh:
        t = parse_tree(fh.read())
    if t.n != n:
        raise ParamError(
            f"tree file has order {t.n}, config lists n = {n}")
    return t


def run_trial(cfg: ExperimentConfig, n_index: int, trial: int, *,
              collect_trace: bool = False) -> TrialResult:
    """One seeded trial.  Spawn keys under the root seed: (n_index,
    trial) -> 0 tree, 1 labelling (attempt k replans from child(k, 0)
    and draws from child(k, 1)), 2 quasi sampling."""
    n = cfg.n[n_index]
    params = cfg.params_for(n)
    sys = IntervalSystem(params.n_tilde, params.m, params.ell)
    root = Rng(cfg.seed).child(n_index, trial)
    t0 = time.perf_counter()
    tree = _load_tree(cfg, n, root.child(0))
    label_rng = root.child(1)
    quasi_rng = root.child(2)

    reports: List[QuasiReport] = []
    spec = QuasiSampleSpec(per_kind=cfg.quasi_per_kind,
                           used_cap=cfg.quasi_used_cap)

    def on_checkpoint(state, t):
        if reports and t <= reports[-1].checkpoint:
            reports.clear()  # a retry started a fresh attempt
        reports.append(check_quasi(state.a_bits, state.c_bits, sys,
                                   float(params.alpha(t)), spec,
                                   quasi_rng, t=t))

    def build_plan(r: Rng) -> Plan:
        kw = {}
        if cfg.max_component is not None:
            kw["max_component"] = cfg.max_component
        return prepare_plan(tree, sys, r, **kw)

    res = run_labelling(build_plan(label_rng.child(0).child(0)), sys,
                        label_rng, max_retries=cfg.retries,
                        checkpoint_every=cfg.checkpoint_every,
                        on_checkpoint=on_checkpoint,
                        collect_trace=collect_trace, replan=build_plan)

    labelling = None
    if res.success:
        labelling = Labelling(tree, res.psi, params.n_tilde)
        rep = verify_graceful(labelling)
        if not rep.ok:
            raise RuntimeError(
                f"completed labelling failed verification: {rep.reason}")

    corv = core = steps = 0
    if res.trace:
        steps = len(res.trace)
        corv = sum(1 for row in res.trace if row.corv_label >= 0)
        core = sum(1 for row in res.trace if row.core_diff >= 0)
    last_fail = res.failures[-1] if res.failures else None
    q1 = max((r.quasi1_max_dev for r in reports), default=-1.0)
    q2 = max((r.quasi2_max_dev for r in reports), default=-1.0)
    record = TrialRecord(
        n=n,
        trial=trial,
        seed_key=f"{cfg.seed}:{n_index},{trial}",
        attempts=res.attempts,
        outcome="success" if res.success else "fail",
        failure_site="" if last_fail is None else last_fail.site,
        failure_step=-1 if last_fail is None else last_fail.step,
        quasi1_max_dev=q1,
        quasi2_max_dev=q2,
        quasi_ok=all(r.ok for r in reports),
        corv_hits=corv,
        core_hits=core,
        steps=steps,
        wall_time=time.perf_counter() - t0,
    )
    return TrialResult(record=record, result=res, reports=tuple(reports),
                       labelling=labelling, tree=tree, params=params)


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    records: Tuple[TrialRecord, ...]
    labellings: Dict[Tuple[int, int], Labelling]  # (n, trial) -> labelling
    summary: dict


def exact_binomial_ci(k: int, n: int, level: float = 0.95) -> Tuple[float, float]:
    """Equal-tailed exact (Clopper-Pearson) interval for k successes of n."""
    if not 0 <= k <= n or n < 1:
        raise ValueError(f"need 0 <= k <= n with n >= 1, got k={k}, n={n}")
    a = (1 - level) / 2
    lo = 0.0 if k == 0 else float(_beta.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(_beta.ppf(1 - a, k + 1, n - k))
    return lo, hi


def _summarize(cfg: ExperimentConfig,
               records: Tuple[TrialRecord, ...]) -> dict:
    per_n = []
    for n in cfg.n:
        rows = [r for r in records if r.n == n]
        trials = len(rows)
        succ = sum(r.outcome == "success" for r in rows)
        first = sum(r.outcome == "success" and r.attempts == 1 for r in rows)
        hist: Dict[str, int] = {}
        for r in rows:
            if r.failure_site:
                hist[r.failure_site] = hist.get(r.failure_site, 0) + 1
        entry = {
            "n": n,
            "trials": trials,
            "successes": succ,
            "first_attempt_successes": first,
            "rate_defined": trials > 0,
            "rate": None,
            "ci95": None,
            "mean_attempts": None,
            "last_failure_sites": hist,
            "quasi_ok_trials": sum(r.quasi_ok for r in rows),
            "corv_hits": sum(r.corv_hits for r in rows),
            "core_hits": sum(r.core_hits for r in rows),
            "steps": sum(r.steps for r in rows),
        }
        if trials:
            lo, hi = exact_binomial_ci(succ, trials)
            entry["rate"] = succ / trials
            entry["ci95"] = [lo, hi]
            entry["mean_attempts"] = sum(r.attempts for r in rows) / trials
        per_n.append(entry)
    return {"config": json.loads(config_to_json(cfg)), "per_n": per_n}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """All trials in index order.  Records never keep traces; use
    run_trial directly for step-level audits."""
    records: List[TrialRecord] = []
    labellings: Dict[Tuple[int, int], Labelling] = {}
    for i in range(len(cfg.n)):
        for k in range(cfg.trials):
            tr = run_trial(cfg, i, k, collect_trace=True)
            records.append(tr.record)
            if tr.labelling is not None:
                labellings[(cfg.n[i], k)] = tr.labelling
    rec = tuple(records)
    return ExperimentResult(config=cfg, records=rec, labellings=labellings,
                            summary=_summarize(cfg, rec))


RECORD_COLUMNS = ("n", "trial", "seed_key", "attempts", "outcome",
                  "failure_site", "failure_step", "quasi1_max_dev",
                  "quasi2_max_dev", "quasi_ok", "corv_hits", "core_hits",
                  "steps", "wall_time")


def records_csv(records) -> str:
    out = io.StringIO()
    out.write(",".join(RECORD_COLUMNS) + "\n")
    for r in records:
        out.write(f"{r.n},{r.trial},{r.seed_key},{r.attempts},{r.outcome},"
                  f"{r.failure_site},{r.failure_step},"
                  f"{r.quasi1_max_dev:.10g},{r.quasi2_max_dev:.10g},"
                  f"{int(r.quasi_ok)},{r.corv_hits},{r.core_hits},{r.steps},"
                  f"{r.wall_time:.6f}\n")
    return out.getvalue()


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True)


def labelling_to_json(lab: Labelling) -> str:
    labels = [lab.psi[v] for v in range(1, lab.tree.n + 1)]
    return json.dumps({"n": lab.tree.n, "m": lab.m, "labels": labels},
                      indent=2)


def labelling_from_json(text: str, tree: Tree) -> Labelling:
    d = json.loads(text)
    if d["n"] != tree.n:
        raise ValueError(f"labelling is for n = {d['n']}, tree has {tree.n}")
    labels = d["labels"]
    if len(labels) != tree.n:
        raise ValueError(f"expected {tree.n} labels, got {len(labels)}")
    return Labelling(tree, {v: labels[v - 1] for v in range(1, tree.n + 1)},
                     d["m"])


TRACE_COLUMNS = ("t", "chosen_label", "edge_label_removed", "rv", "re",
                 "size_A", "size_C", "quasi1_max_dev",
                 "quasi2_max_sampled_dev")


def trace_csv(result: LabelResult, reports=()) -> str:
    """Step rows in t order; each checkpoint adds one row carrying the
    two sampled deviations, the other columns blank."""
    if result.trace is None:
        raise ValueError("labelling was run without trace collection")
    by_t = {r.checkpoint: r for r in reports}
    out = io.StringIO()
    out.write(",".join(TRACE_COLUMNS) + "\n")
    for row in result.trace:
        out.write(f"{row.t},{row.label},{row.edge_label},{row.corv_label},"
                  f"{row.core_diff},{row.size_a},{row.size_c},,\n")
        rep = by_t.get(row.t)
        if rep is not None:
            out.write(f"{row.t},,,,,{row.size_a},{row.size_c},"
                      f"{rep.quasi1_max_dev:.10g},"
                      f"{rep.quasi2_max_dev:.10g}\n")
    return out.getvalue()


def write_experiment(result: ExperimentResult, out_dir: str) -> List[str]:
    """records.csv, summary.json, labellings/n{n}-t{k}.json; returns the
    paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    def put(rel: str, text: str) -> None:
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        paths.append(path)

    put("records.csv", records_csv(result.records))
    put("summary.json", summary_json(result.summary) + "\n")
    for (n, k), lab in sorted(result.labellings.items()):
        put(os.path.join("labellings", f"n{n}-t{k}.json"),
            labelling_to_json(lab) + "\n")
    return paths
