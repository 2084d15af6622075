"""Improper learning under a concept class: safe and still informative.

The facts set is known to be one of the anchored fixed-size concepts.  The
learner maximizes out-of-sample mass while refusing to put more than its
budget outside any concept still consistent with the sample.  As the sample
grows the version space shrinks toward the truth and the constraint stops
binding anywhere except against near-truths.
"""

from hallab import hall, info, required_n, sample_from
from hallab.concepts import AnchoredConceptClass
from hallab.harness import ExperimentConfig, LearnerConfig, run_trials
from hallab.learners import LearnerSpec, learn_improper
from hallab.measures import InfoMeasure, Universe
from hallab.adversaries import theorem3_ensemble

d, eps = 8, 0.1
universe = Universe(2 * d + 1)
cls = AnchoredConceptClass(universe, anchor=0, member_size=d + 1)
ensemble = theorem3_ensemble(d, eps_prime=0.3, seed=4)
inst = ensemble.draw(0)
measure = InfoMeasure.out_of_sample()

print(f"anchored class over {universe.size} atoms: {len(cls):,} concepts")
print(f"true facts set: {sorted(inst.facts.members)}")
print(f"\n{'n':>5s} {'|C_n|':>10s} {'hall(model, T*)':>16s} {'info(model)':>12s} {'info(q)':>9s}")
for n in (2, 5, 20, 80, 320):
    sample = sample_from(inst.q, n, seed=10 + n)
    spec = LearnerSpec("improper_max_info", measure=measure, eps=eps, concept_class=cls)
    model = learn_improper(spec, sample)
    print(
        f"{n:5d} {model.version_space_size:10,d} {hall(model.dist, inst.facts):16.4f} "
        f"{info(measure, model.dist, sample):12.4f} {info(measure, inst.q, sample):9.4f}"
    )

n_star = required_n(d, eps, 0.1)
print(f"\nuniform-convergence sample size for (d={d}, eps={eps}, delta=0.1): {n_star}")

cfg = ExperimentConfig(
    construction="theorem3",
    params={"d": d, "eps_prime": 0.3, "explicit_class": True},
    learner=LearnerConfig(kind="improper_max_info", measure_kind="out_of_sample", eps=eps),
    n_values=(50, 200, 800, n_star),
    trials=150,
    epsilon=eps,
    delta=0.1,
    base_seed=2,
)
result = run_trials(cfg)
print(f"\nsample-complexity curve ({cfg.trials} trials per n):")
print(f"{'n':>6s} {'Pr[hall>=eps]':>14s} {'wilson hi':>10s} {'dominance':>10s}")
for row in result.summaries:
    dom = "-" if row.info_dominance_rate is None else f"{row.info_dominance_rate:.3f}"
    print(f"{row.n:6d} {row.hall_ge_eps_rate:14.3f} {row.wilson_hi:10.3f} {dom:>10s}")
print("the rate is zero well before the bound: the budget never lets the")
print("model stray from any still-consistent concept, truth included")
