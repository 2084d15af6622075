"""Lower-bound machinery at desk scale.

First the small-sample dichotomy on the anchored ensemble: at n well below
the dimension-over-epsilon threshold, the constrained learner either stays
within the hallucination budget but cannot match the demonstrator's
information, or, given enough budget to be information-dominant, must leak
far more than epsilon on average.  Then the packing-plus-Fano route: many
half-size supports, pairwise barely overlapping, all sitting at KL exactly
log 2 from uniform, so a handful of observations cannot identify one.
"""

import math

from hallab import fano_bound, kl
from hallab.concepts import packing_construct
from hallab.harness import ExperimentConfig, LearnerConfig, run_trials
from hallab.measures import Dist, binary_entropy, entropy_threshold_root

d, eps = 32, 0.02
eps_prime = 11 * eps
n = math.floor(d / (4 * eps_prime))
print(f"anchored ensemble: d={d}, eps={eps}, eps'={eps_prime}, n={n}")

for budget, label, trials in ((eps, "budget eps (safe arm)", 1500), (eps_prime, "budget eps' (dominant arm)", 1500)):
    cfg = ExperimentConfig(
        construction="theorem3",
        params={"d": d, "eps_prime": eps_prime, "explicit_class": False},
        learner=LearnerConfig(kind="improper_max_info", measure_kind="out_of_sample", eps=budget),
        n_values=(n,),
        trials=trials,
        epsilon=eps,
        delta=eps,
        base_seed=5,
    )
    row = run_trials(cfg).summaries[0]
    dom = "never feasible" if row.info_dominance_rate is None else f"{row.info_dominance_rate:.2f}"
    print(
        f"  {label:27s} mean hall {row.mean_hall:.4f}, demonstrator-feasibility "
        f"{row.feasible_trials}/{row.trials}, dominance {dom}"
    )
print(f"  target 3*eps'/16 = {3 * eps_prime / 16:.5f}: the dominant arm sits far above it,")
print("  the safe arm can never certify the demonstrator's information")

print("\npacking of half-size supports over 64 atoms:")
packing = packing_construct(64, seed=0)
cls = packing.concept_class
print(f"  achieved {len(cls)} sets (target {packing.provenance['target_size']:.2f}),")
uniform = Dist.uniform(cls.universe)
kls = [kl(Dist.uniform(cls.universe, c.members), uniform) for c in cls]
print(f"  pairwise intersections <= 16, KL to uniform = {kls[0]:.6f} = log 2 for every member")

print("\nidentification error lower bound (Fano):")
for n_obs in (0, 1, 2, 4, 8):
    print(f"  n={n_obs}: error >= {fano_bound(n_obs, len(cls), math.log(2)):.3f}")

root_bits = entropy_threshold_root(bits=True)
root_nats = entropy_threshold_root(bits=False)
print(f"\nentropy budget threshold h(2e) + 5e = 1:")
print(f"  root = {root_bits:.6f} in bits, {root_nats:.6f} in nats")
print(f"  check (bits): h(2r) + 5r = {binary_entropy(2 * root_bits, bits=True) + 5 * root_bits:.6f}")
