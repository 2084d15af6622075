"""Tour of the measure layer: hallucination rates on a toy fact universe.

A tiny world of eight statements, the first five true.  A careful model
stays on the facts; a sloppy one leaks mass outside; the relative rate
shows how leakage looks from the demonstrator's point of view.
"""

from hallab import (
    Dist,
    EventSet,
    InfoMeasure,
    Universe,
    hall,
    hall_eps,
    info,
    kl,
    smoothness_certificate,
    tv,
)

universe = Universe(8, labels=tuple(f"claim-{i}" for i in range(8)))
facts = EventSet.of(universe, {0, 1, 2, 3, 4})

demonstrator = Dist.uniform(universe, {0, 1, 2})           # faithful: never leaves the facts
careful = Dist.from_mapping(universe, {0: 0.4, 1: 0.3, 2: 0.2, 4: 0.1})
sloppy = Dist.from_mapping(universe, {0: 0.3, 1: 0.3, 5: 0.2, 7: 0.2})

print("hallucination rates against the facts set {0..4}:")
for name, model in [("demonstrator", demonstrator), ("careful", careful), ("sloppy", sloppy)]:
    print(f"  {name:13s} hall = {hall(model, facts):.3f}")

print("\nrelative rates w.r.t. the demonstrator (worst mass on q-rare events):")
for eps in (0.0, 0.1, 0.3):
    print(
        f"  eps={eps:.1f}:  careful {hall_eps(careful, demonstrator, eps):.3f}   "
        f"sloppy {hall_eps(sloppy, demonstrator, eps):.3f}"
    )

sigma = smoothness_certificate(careful, demonstrator)
print(f"\nsmoothness of careful w.r.t. demonstrator: sigma = {sigma:.3f}")
print("  (sigma = 0: some atom of the model carries mass the demonstrator never emits)")

print("\ndistances and information:")
print(f"  tv(careful, sloppy)   = {tv(careful, sloppy):.3f}")
print(f"  kl(demo, uniform)     = {kl(demonstrator, Dist.uniform(universe)):.3f}")
print(f"  H(careful)            = {info(InfoMeasure.shannon(), careful):.3f} nats")
print(f"  H_2(careful)          = {info(InfoMeasure.renyi(2.0), careful):.3f} nats")
