"""Monte Carlo experiment orchestration with reproducible seeding.

A config names a hard-instance construction, a learner, a grid of sample
sizes, and a trial budget.  Every trial re-derives its randomness from
(base_seed, n, trial_index) through the counter-based generators in
:mod:`hallab.rng`, so execution order and worker count never change any
record.  Trial records serialize to JSONL, per-n summaries to CSV, and a
``plot/`` directory collects two-column data files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .adversaries import (
    CONSTRUCTION_NAMES,
    appendix_ensemble,
    example1_instance,
    example4_instance,
    example5_instance,
    theorem1_coupled_trial,
    theorem3_ensemble,
)
from .concepts import AnchoredConceptClass, Concept, ConceptClass, version_space
from .learners import LearnedModel, LearnerSpec, effective_budget, learn
from .measures import CMP_TOL, Dist, InfoMeasure, Sample, Universe, hall, info
from .rng import derive_int, generator

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "SummaryRow",
    "RunResult",
    "sample_from",
    "required_n",
    "wilson_interval",
    "run_trials",
    "complexity_curve",
]

SCHEMA_VERSION = "v1"


def sample_from(q: Dist, n: int, seed: int) -> Sample:
    """n independent draws from q by inverse CDF over the atom order."""
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    if n == 0:
        return Sample(q.universe, (), seed=seed)
    rng = generator(seed)
    u = rng.random(n)
    cdf = np.cumsum(q.w)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, q.universe.size - 1)
    return Sample(q.universe, tuple(int(i) for i in idx), seed=seed)


def required_n(d: int, eps: float, delta: float) -> int:
    """Explicit realizable uniform-convergence sample size.

    ceil((4 / eps) * (d * log2(16 / eps) + log2(2 / delta))); decreasing in
    eps and delta, linear in the dimension d.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    if not (0.0 < eps < 1.0 and 0.0 < delta < 1.0):
        raise ValueError("eps and delta must lie in (0, 1)")
    return math.ceil((4.0 / eps) * (d * math.log2(16.0 / eps) + math.log2(2.0 / delta)))


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial rate."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p_hat * (1 - p_hat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LearnerConfig:
    """Learner description as it appears in experiment configs.

    Concept classes and hypothesis lists come from the construction; the
    config only picks the rule, its information measure, and its budget.
    """

    kind: str
    measure_kind: str = "out_of_sample"
    alpha: float | None = None
    eps: float = 0.0
    fixed_choice_seed: int = 0

    def measure(self) -> InfoMeasure:
        if self.measure_kind == "renyi":
            return InfoMeasure.renyi(self.alpha)
        return InfoMeasure(self.measure_kind)

    @classmethod
    def from_json(cls, obj: dict) -> "LearnerConfig":
        return cls(
            kind=obj["kind"],
            measure_kind=obj.get("measure", "out_of_sample"),
            alpha=obj.get("alpha"),
            eps=float(obj.get("eps", 0.0)),
            fixed_choice_seed=int(obj.get("fixed_choice_seed", 0)),
        )

    def to_json(self) -> dict:
        out = {"kind": self.kind, "measure": self.measure_kind, "eps": self.eps,
               "fixed_choice_seed": self.fixed_choice_seed}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    construction: str
    params: dict
    learner: LearnerConfig
    n_values: tuple[int, ...]
    trials: int
    epsilon: float
    delta: float
    gamma: float = 0.0
    base_seed: int = 0
    output_dir: str | None = None

    def __post_init__(self):
        if self.construction not in CONSTRUCTION_NAMES:
            raise ValueError(f"unknown construction {self.construction!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not (0.0 < self.epsilon < 1.0 and 0.0 < self.delta < 1.0):
            raise ValueError("epsilon and delta must lie in (0, 1)")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        if obj.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema {obj.get('schema')!r}")
        c = obj["construction"]
        return cls(
            construction=c["name"],
            params=dict(c.get("params", {})),
            learner=LearnerConfig.from_json(obj["learner"]),
            n_values=tuple(obj["n_values"]),
            trials=int(obj["trials"]),
            epsilon=float(obj["epsilon"]),
            delta=float(obj["delta"]),
            gamma=float(obj.get("gamma", 0.0)),
            base_seed=int(obj.get("base_seed", 0)),
            output_dir=obj.get("output_dir"),
        )

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "construction": {"name": self.construction, "params": self.params},
            "learner": self.learner.to_json(),
            "n_values": list(self.n_values),
            "trials": self.trials,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "gamma": self.gamma,
            "base_seed": self.base_seed,
            "output_dir": self.output_dir,
        }


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    n: int
    hall_value: float | None
    info_learned: float | None
    info_demonstrator: float | None
    version_space_size: int
    feasibility_flag: bool | None
    relaxed_flag: bool
    wall_time: float = 0.0
    error: str | None = None

    _ROW_FIELDS = (
        "trial_index", "seed", "n", "hall_value", "info_learned",
        "info_demonstrator", "version_space_size", "feasibility_flag",
        "relaxed_flag", "error",
    )

    def row(self) -> dict:
        """Deterministic JSONL payload; wall_time is timing telemetry and is
        deliberately left out so reruns are byte-identical."""
        return {name: getattr(self, name) for name in self._ROW_FIELDS}


@dataclass(frozen=True)
class SummaryRow:
    n: int
    trials: int
    failures: int
    hall_ge_eps_rate: float
    wilson_lo: float
    wilson_hi: float
    mean_hall: float
    se_hall: float
    info_dominance_rate: float | None
    feasible_trials: int

    _FIELDS = (
        "n", "trials", "failures", "hall_ge_eps_rate", "wilson_lo", "wilson_hi",
        "mean_hall", "se_hall", "info_dominance_rate", "feasible_trials",
    )


# ---------------------------------------------------------------------------
# construction drivers
# ---------------------------------------------------------------------------

class _Driver:
    """Per-construction trial logic; built once, then called per trial."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg

    def run(self, n: int, index: int) -> TrialRecord:
        raise NotImplementedError

    def _record(self, n, index, seed, **kw) -> TrialRecord:
        return TrialRecord(trial_index=index, seed=seed, n=n, **kw)


def _trial_seed(cfg: ExperimentConfig, n: int, index: int) -> int:
    return derive_int(cfg.base_seed, f"{n}:{index}".encode())


class _Theorem3Driver(_Driver):
    def __init__(self, cfg):
        super().__init__(cfg)
        p = cfg.params
        self.d = int(p["d"])
        self.eps_prime = float(p["eps_prime"])
        self.ensemble = theorem3_ensemble(self.d, self.eps_prime, seed=cfg.base_seed)
        explicit = bool(p.get("explicit_class", self.d <= 10))
        universe = Universe(2 * self.d + 1)
        if explicit:
            concepts = [
                Concept.of(universe, {0} | set(extra))
                for extra in combinations(range(1, 2 * self.d + 1), self.d)
            ]
            self.cls: ConceptClass | AnchoredConceptClass = ConceptClass(
                universe, concepts, name=f"anchored(d={self.d})"
            )
        else:
            self.cls = AnchoredConceptClass(universe, anchor=0, member_size=self.d + 1)

    def _spec(self) -> LearnerSpec:
        lc = self.cfg.learner
        if lc.kind == "empirical":
            return LearnerSpec("empirical")
        return LearnerSpec(lc.kind, measure=lc.measure(), eps=lc.eps, concept_class=self.cls)

    def _q_feasible(self, q: Dist, sample: Sample, budget: float) -> bool:
        if isinstance(self.cls, AnchoredConceptClass):
            core = self.cls.consistent_core(sample.atom_set())
            if core is None:
                return True
            return self.cls.worst_outside_mass(q, core) <= budget + CMP_TOL
        consistent = version_space(self.cls, sample)
        return all(hall(q, c) <= budget + CMP_TOL for c in consistent.concepts)

    def run(self, n, index):
        seed = _trial_seed(self.cfg, n, index)
        inst = self.ensemble.draw(seed)
        sample = sample_from(inst.q, n, seed)
        spec = self._spec()
        model = learn(spec, sample)
        measure = self.cfg.learner.measure()
        feas = None
        if spec.kind == "improper_max_info":
            feas = self._q_feasible(inst.q, sample, effective_budget(spec.eps))
        return self._record(
            n, index, seed,
            hall_value=hall(model.dist, inst.facts),
            info_learned=info(measure, model.dist, sample),
            info_demonstrator=info(measure, inst.q, sample),
            version_space_size=model.version_space_size,
            feasibility_flag=feas,
            relaxed_flag=model.relaxed,
        )


class _Example4Driver(_Driver):
    def __init__(self, cfg):
        super().__init__(cfg)
        self.bundle = example4_instance()

    def run(self, n, index):
        seed = _trial_seed(self.cfg, n, index)
        b = self.bundle
        q = b["instance"].q
        sample = sample_from(q, n, seed)
        lc = self.cfg.learner
        spec = LearnerSpec(
            "proper_max_info", measure=lc.measure(), eps=lc.eps,
            concept_class=b["concept_class"], hypotheses=b["hypotheses"],
        )
        model = learn(spec, sample)
        facts = b["adversarial_facts"](model.hypothesis_index + 1)
        measure = lc.measure()
        return self._record(
            n, index, seed,
            hall_value=hall(model.dist, facts),
            info_learned=info(measure, model.dist, sample),
            info_demonstrator=info(measure, q, sample),
            version_space_size=model.version_space_size,
            feasibility_flag=not model.relaxed,
            relaxed_flag=model.relaxed,
        )


class _Example1Driver(_Driver):
    def __init__(self, cfg):
        super().__init__(cfg)
        sizes = tuple(cfg.params.get("sizes", (4, 4, 4)))
        self.bundle = example1_instance(sizes)

    def run(self, n, index):
        seed = _trial_seed(self.cfg, n, index)
        b = self.bundle
        q = b["instance"].q
        sample = sample_from(q, n, seed)
        lc = self.cfg.learner
        spec = LearnerSpec("fixed", hypotheses=b["hypotheses"],
                           fixed_choice_seed=lc.fixed_choice_seed)
        model = learn(spec, sample)
        facts = b["adversarial_facts"](model.hypothesis_index + 1)
        measure = lc.measure()
        return self._record(
            n, index, seed,
            hall_value=hall(model.dist, facts),
            info_learned=info(measure, model.dist, sample),
            info_demonstrator=info(measure, q, sample),
            version_space_size=0,
            feasibility_flag=None,
            relaxed_flag=False,
        )


class _Theorem1Driver(_Driver):
    def __init__(self, cfg):
        super().__init__(cfg)
        p = cfg.params
        self.atoms_per_side = int(p["atoms_per_side"])
        self.tilde_size = int(p["tilde_size"])

    def run(self, n, index):
        seed = _trial_seed(self.cfg, n, index)
        trial = theorem1_coupled_trial(n, self.atoms_per_side, self.tilde_size, seed)
        lc = self.cfg.learner
        spec = LearnerSpec("fixed", hypotheses=trial["hypotheses"],
                           fixed_choice_seed=lc.fixed_choice_seed)
        model = learn(spec, trial["sample"])
        adverse = trial["branches"][1 - model.hypothesis_index]
        measure = lc.measure()
        return self._record(
            n, index, seed,
            hall_value=hall(model.dist, adverse["instance"].facts),
            info_learned=info(measure, model.dist, trial["sample"]),
            info_demonstrator=info(measure, adverse["instance"].q, trial["sample"]),
            version_space_size=0,
            feasibility_flag=None,
            relaxed_flag=False,
        )


class _Example5Driver(_Driver):
    def __init__(self, cfg):
        super().__init__(cfg)
        p = cfg.params
        self.bundle = example5_instance(int(p["d"]), int(p["a_size"]))

    def run(self, n, index):
        seed = _trial_seed(self.cfg, n, index)
        b = self.bundle
        q = b["block_uniform"]
        sample = sample_from(q, n, seed)
        model = LearnedModel(q)  # the always-uniform-over-the-block strategy
        worst = max(hall(model.dist, c) for c in b["concept_class"].concepts)
        measure = self.cfg.learner.measure()
        return self._record(
            n, index, seed,
            hall_value=worst,
            info_learned=info(measure, model.dist, sample),
            info_demonstrator=info(measure, q, sample),
            version_space_size=len(b["concept_class"]),
            feasibility_flag=None,
            relaxed_flag=False,
        )


class _AppendixDriver(_Driver):
    def __init__(self, cfg):
        super().__init__(cfg)
        self.ensemble = appendix_ensemble(int(cfg.params["d"]), seed=cfg.base_seed)

    def run(self, n, index):
        seed = _trial_seed(self.cfg, n, index)
        inst = self.ensemble.draw(seed)
        sample = sample_from(inst.q, n, seed)
        spec = LearnerSpec("empirical")
        model = learn(spec, sample)
        measure = self.cfg.learner.measure()
        return self._record(
            n, index, seed,
            hall_value=hall(model.dist, inst.facts),
            info_learned=info(measure, model.dist, sample),
            info_demonstrator=info(measure, inst.q, sample),
            version_space_size=0,
            feasibility_flag=None,
            relaxed_flag=False,
        )


_DRIVERS = {
    "theorem3": _Theorem3Driver,
    "example4": _Example4Driver,
    "example1": _Example1Driver,
    "theorem1": _Theorem1Driver,
    "example5": _Example5Driver,
    "appendix": _AppendixDriver,
}


def _build_driver(cfg: ExperimentConfig) -> _Driver:
    return _DRIVERS[cfg.construction](cfg)


# worker-process driver cache, keyed by the config payload
_WORKER_DRIVER: _Driver | None = None
_WORKER_KEY: str | None = None


def _init_worker(cfg_json: str) -> None:
    global _WORKER_DRIVER, _WORKER_KEY
    _WORKER_KEY = cfg_json
    _WORKER_DRIVER = _build_driver(ExperimentConfig.from_json(json.loads(cfg_json)))


def _worker_task(args: tuple[int, int]) -> TrialRecord:
    n, index = args
    return _run_one(_WORKER_DRIVER, n, index)


def _run_one(driver: _Driver, n: int, index: int) -> TrialRecord:
    start = time.perf_counter()
    try:
        record = driver.run(n, index)
    except Exception as exc:  # failed trials become error records, never aborts
        record = TrialRecord(
            trial_index=index, seed=_trial_seed(driver.cfg, n, index), n=n,
            hall_value=None, info_learned=None, info_demonstrator=None,
            version_space_size=0, feasibility_flag=None, relaxed_flag=False,
            error=f"{type(exc).__name__}: {exc}",
        )
    record.wall_time = time.perf_counter() - start
    return record


# ---------------------------------------------------------------------------
# running and aggregating
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    summaries: list[SummaryRow]

    def jsonl(self) -> str:
        return "".join(json.dumps(r.row(), sort_keys=True) + "\n" for r in self.records)

    def summary_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SummaryRow._FIELDS)
        for s in self.summaries:
            writer.writerow([getattr(s, f) if getattr(s, f) is not None else "" for f in SummaryRow._FIELDS])
        return buf.getvalue()


def _summarize(cfg: ExperimentConfig, n: int, records: Sequence[TrialRecord]) -> SummaryRow:
    done = [r for r in records if r.error is None]
    failures = len(records) - len(done)
    halls = np.array([r.hall_value for r in done], dtype=float)
    count = len(done)
    if count == 0:
        return SummaryRow(n, 0, failures, 0.0, 0.0, 1.0, 0.0, 0.0, None, 0)
    hits = int(np.sum(halls >= cfg.epsilon))
    lo, hi = wilson_interval(hits, count)
    mean = float(np.mean(halls))
    se = float(np.std(halls, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    feas = [r for r in done if r.feasibility_flag]
    dominance = None
    if feas:
        dominated = sum(
            1 for r in feas if r.info_learned >= r.info_demonstrator - CMP_TOL
        )
        dominance = dominated / len(feas)
    return SummaryRow(n, count, failures, hits / count, lo, hi, mean, se, dominance, len(feas))


def run_trials(cfg: ExperimentConfig, workers: int = 1) -> RunResult:
    """Run every (n, trial) cell of the config and aggregate summaries.

    Trials are pure functions of (config, n, trial_index); with workers > 1
    they are farmed to a process pool and folded back in index order, so the
    records match the serial run exactly.
    """
    tasks = [(n, idx) for n in cfg.n_values for idx in range(cfg.trials)]
    if workers > 1:
        cfg_json = json.dumps(cfg.to_json(), sort_keys=True)
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(cfg_json,)
        ) as pool:
            records = list(pool.map(_worker_task, tasks, chunksize=max(1, len(tasks) // (workers * 8))))
    else:
        driver = _build_driver(cfg)
        records = [_run_one(driver, n, idx) for n, idx in tasks]
    by_n: dict[int, list[TrialRecord]] = {n: [] for n in cfg.n_values}
    for rec in records:
        by_n[rec.n].append(rec)
    for n in cfg.n_values:
        by_n[n].sort(key=lambda r: r.trial_index)
    ordered = [r for n in cfg.n_values for r in by_n[n]]
    summaries = [_summarize(cfg, n, by_n[n]) for n in cfg.n_values]
    result = RunResult(cfg, ordered, summaries)
    if cfg.output_dir:
        _write_outputs(result)
    return result


def complexity_curve(cfg: ExperimentConfig, workers: int = 1) -> RunResult:
    """Sample-complexity curve: one summary row per n, n strictly increasing."""
    if any(a >= b for a, b in zip(cfg.n_values, cfg.n_values[1:])):
        raise ValueError("n_values must be strictly increasing")
    return run_trials(cfg, workers=workers)


def _write_outputs(result: RunResult) -> None:
    out = Path(result.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trials.jsonl").write_text(result.jsonl())
    (out / "summary.csv").write_text(result.summary_csv())
    (out / "config.json").write_text(json.dumps(result.config.to_json(), sort_keys=True, indent=2) + "\n")
    plot = out / "plot"
    plot.mkdir(exist_ok=True)
    columns = {
        "hall_ge_eps_vs_n.dat": "hall_ge_eps_rate",
        "mean_hall_vs_n.dat": "mean_hall",
        "info_dominance_vs_n.dat": "info_dominance_rate",
    }
    for fname, attr in columns.items():
        lines = []
        for s in result.summaries:
            value = getattr(s, attr)
            if value is None:
                continue
            lines.append(f"{s.n} {value!r}\n")
        (plot / fname).write_text("".join(lines))
