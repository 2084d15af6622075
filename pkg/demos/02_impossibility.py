"""Why no proper learner can be competitively non-hallucinating.

Two ways to defeat any learner restricted to a two-element hypothesis
class: the disjoint-support construction, where the sample says nothing
about which hypothesis is safe, and the two-branch construction, where the
observed sample is statistically consistent with both worlds and the
adversary simply claims the one that makes the learner's pick leak.
"""

from hallab import agnostic_excess, hall, hall_eps, sample_from
from hallab.adversaries import example1_instance, theorem1_coupled_trial
from hallab.learners import LearnerSpec, learn_fixed

# --- disjoint supports -----------------------------------------------------
bundle = example1_instance(sizes=(8, 8, 8))
q = bundle["instance"].q
p1, p2 = bundle["hypotheses"]

spec = LearnerSpec("fixed", hypotheses=(p1, p2), fixed_choice_seed=0)
sample = sample_from(q, 12, seed=1)
model = learn_fixed(spec, sample)
facts = bundle["adversarial_facts"](model.hypothesis_index + 1)

pair = agnostic_excess(model.dist, [p1, p2], facts)
print("disjoint-support round:")
print(f"  learner picked hypothesis {model.hypothesis_index + 1}")
print(f"  hall(picked, adversarial facts) = {pair.learned:.0f}")
print(f"  best in class                   = {pair.best_in_class:.0f}")
for alpha in (1.0, 2.0, 5.0):
    eps = 1 / (2 * alpha + 1)
    print(f"  alpha={alpha:g}: excess {pair.excess(alpha):.3f} >= 1 - 2*alpha*eps = {1 - 2 * alpha * eps:.3f}")
print(f"  relative rate of either hypothesis w.r.t. q: {hall_eps(p1, q, 0.3):.0f} (support disjoint)")

# --- two indistinguishable branches ----------------------------------------
print("\ncoupled two-branch rounds (n=20, m=4,000, M=400,000):")
for seed in range(3):
    trial = theorem1_coupled_trial(20, 400_000, 4000, seed=seed)
    model = learn_fixed(LearnerSpec("fixed", hypotheses=trial["hypotheses"], fixed_choice_seed=7), trial["sample"])
    adverse = trial["branches"][1 - model.hypothesis_index]
    value = hall(model.dist, adverse["instance"].facts)
    print(
        f"  round {seed}: picked p{model.hypothesis_index + 1}, "
        f"adverse branch {2 - model.hypothesis_index} gives hall = {value:.4f}"
    )
print("  the sample has positive likelihood under both branches, so the")
print("  adverse world is always a consistent explanation of the data")
