"""Command line surface.

Subcommands mirror the library layout:

  measure hall|hall-eps|tv|kl|entropy     scalar measures on distributions
  concepts vc|version-space|packing       concept-class utilities
  solve max-info                          constrained information maximization
  learn empirical|improper|proper|fixed   run a learning rule on a sample
  adversary gen <name>                    emit a hard instance
  experiment run|curve <config.json>      Monte Carlo experiments
  bounds fano|required-n|entropy-threshold  closed-form bound calculators

Inputs are JSON documents; results print as JSON (or CSV for experiment
summaries with --format csv).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import adversaries, concepts, harness, learners, measures, solvers
from .concepts import concept_class_from_json, concept_class_to_json
from .measures import (
    EventSet,
    InfoMeasure,
    Sample,
    Universe,
    dist_from_json,
    dist_to_json,
    event_from_json,
)


def _load(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _emit(obj, args) -> None:
    if isinstance(obj, str):
        text = obj
    else:
        text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _measure_arg(args) -> InfoMeasure:
    if args.renyi_alpha is not None:
        return InfoMeasure.renyi(args.renyi_alpha)
    return InfoMeasure(args.measure)


def _sample_from_json(obj: dict) -> Sample:
    universe = Universe(int(obj["universe_size"]))
    return Sample(universe, tuple(int(p) for p in obj["points"]), seed=int(obj.get("seed", 0)))


def _region_from_json(obj: dict) -> solvers.FeasibleRegion:
    universe = Universe(int(obj["universe_size"]))
    cons = [
        (EventSet.of(universe, (int(a) for a in c["members"])), float(c["eps"]))
        for c in obj["constraints"]
    ]
    return solvers.FeasibleRegion(universe, cons)


# ---------------------------------------------------------------------------
# measure subcommands
# ---------------------------------------------------------------------------

def _cmd_measure(args) -> None:
    p = dist_from_json(_load(args.dist))
    if args.which == "hall":
        t = event_from_json(p.universe, _load(args.event))
        _emit({"hall": measures.hall(p, t)}, args)
    elif args.which == "hall-eps":
        q = dist_from_json(_load(args.dist_q))
        _emit({"hall_eps": measures.hall_eps(p, q, args.eps)}, args)
    elif args.which == "tv":
        q = dist_from_json(_load(args.dist_q))
        _emit({"tv": measures.tv(p, q)}, args)
    elif args.which == "kl":
        q = dist_from_json(_load(args.dist_q))
        _emit({"kl": measures.kl(p, q)}, args)
    else:  # entropy
        sample = _sample_from_json(_load(args.sample)) if args.sample else None
        m = _measure_arg(args)
        _emit({"info": measures.info(m, p, sample), "measure": m.kind}, args)


def _cmd_concepts(args) -> None:
    if args.which == "packing":
        result = concepts.packing_construct(args.d, seed=args.seed, max_tries=args.max_tries)
        _emit({"class": concept_class_to_json(result.concept_class),
               "provenance": result.provenance}, args)
        return
    cls = concept_class_from_json(_load(args.cls))
    if args.which == "vc":
        report = concepts.vc_dimension(cls, cap=args.cap)
        _emit({"dimension": report.dimension, "saturated": report.saturated,
               "witness": list(report.witness) if report.witness else None}, args)
    else:  # version-space
        sample = _sample_from_json(_load(args.sample))
        vs = concepts.version_space(cls, sample)
        _emit(concept_class_to_json(vs), args)


def _cmd_solve(args) -> None:
    region = _region_from_json(_load(args.region))
    sample = _sample_from_json(_load(args.sample)) if args.sample else None
    report = solvers.max_info(_measure_arg(args), region, sample)
    _emit(solvers.solver_report_to_json(report), args)


def _cmd_learn(args) -> None:
    sample = _sample_from_json(_load(args.sample))
    obj = _load(args.spec) if args.spec else {}
    kind = args.kind
    measure = None
    if "measure" in obj:
        measure = InfoMeasure.renyi(obj["alpha"]) if obj["measure"] == "renyi" else InfoMeasure(obj["measure"])
    cls = concept_class_from_json(obj["class"]) if "class" in obj else None
    hypotheses = tuple(dist_from_json(h) for h in obj.get("hypotheses", [])) or None
    spec = learners.LearnerSpec(
        kind={"improper": "improper_max_info", "proper": "proper_max_info"}.get(kind, kind),
        measure=measure,
        eps=float(obj.get("eps", 0.0)),
        concept_class=cls,
        hypotheses=hypotheses,
        fixed_choice_seed=int(obj.get("fixed_choice_seed", args.seed)),
    )
    model = learners.learn(spec, sample)
    out = {
        "dist": dist_to_json(model.dist),
        "version_space_size": model.version_space_size,
        "relaxed": model.relaxed,
        "version_space_empty": model.version_space_empty,
        "hypothesis_index": model.hypothesis_index,
    }
    if model.solver_report is not None:
        out["solver_report"] = solvers.solver_report_to_json(model.solver_report)
    _emit(out, args)


def _cmd_adversary(args) -> None:
    name = args.name
    params = _load(args.params) if args.params else {}
    seed = args.seed

    def inst_json(inst):
        return {"q": dist_to_json(inst.q), "facts": sorted(inst.facts.members), "meta": inst.meta}

    if name == "example1":
        b = adversaries.example1_instance(
            tuple(params.get("sizes", (4, 4, 4))), params.get("learner_output_index", 1)
        )
        _emit({"instance": inst_json(b["instance"]),
               "hypotheses": [dist_to_json(h) for h in b["hypotheses"]]}, args)
    elif name == "theorem1":
        b = adversaries.theorem1_ensemble(
            int(params["n"]), int(params["atoms_per_side"]), int(params["tilde_size"]),
            int(params.get("branch", 1)), seed,
        )
        _emit({"instance": inst_json(b["instance"])}, args)
    elif name == "example4":
        b = adversaries.example4_instance()
        _emit({"instance": inst_json(b["instance"]),
               "class": concept_class_to_json(b["concept_class"])}, args)
    elif name == "theorem3":
        ensemble = adversaries.theorem3_ensemble(int(params["d"]), float(params["eps_prime"]), seed)
        inst = ensemble.draw(int(params.get("draw_seed", 0)))
        _emit({"instance": inst_json(inst)}, args)
    elif name == "example5":
        b = adversaries.example5_instance(int(params["d"]), int(params["a_size"]))
        _emit({"instance": inst_json(b["instance"]),
               "class": concept_class_to_json(b["concept_class"])}, args)
    else:  # appendix
        ensemble = adversaries.appendix_ensemble(int(params["d"]), seed)
        inst = ensemble.draw(int(params.get("draw_seed", 0)))
        _emit({"instance": inst_json(inst)}, args)


def _cmd_experiment(args) -> None:
    cfg = harness.ExperimentConfig.from_json(_load(args.config))
    runner = harness.complexity_curve if args.which == "curve" else harness.run_trials
    result = runner(cfg, workers=args.workers)
    if args.format == "csv":
        _emit(result.summary_csv(), args)
    else:
        _emit([s.__dict__ for s in result.summaries], args)


def _cmd_bounds(args) -> None:
    if args.which == "fano":
        _emit({"fano": adversaries.fano_bound(args.n, args.class_size, args.kl_sup)}, args)
    elif args.which == "required-n":
        _emit({"required_n": harness.required_n(args.d, args.eps, args.delta)}, args)
    else:  # entropy-threshold
        _emit({
            "root_bits": measures.entropy_threshold_root(bits=True, tol=args.tol),
            "root_nats": measures.entropy_threshold_root(bits=False, tol=args.tol),
        }, args)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(prog="hallab", description=__doc__,
                                   formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = root.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="scalar measures on distributions")
    msub = m.add_subparsers(dest="which", required=True)
    for which in ("hall", "hall-eps", "tv", "kl", "entropy"):
        p = msub.add_parser(which)
        p.add_argument("--dist", required=True, help="distribution JSON file")
        if which == "hall":
            p.add_argument("--event", required=True, help="event set JSON file")
        if which in ("hall-eps", "tv", "kl"):
            p.add_argument("--dist-q", required=True, dest="dist_q")
        if which == "hall-eps":
            p.add_argument("--eps", type=float, required=True)
        if which == "entropy":
            p.add_argument("--measure", choices=("shannon", "out_of_sample"), default="shannon")
            p.add_argument("--renyi-alpha", type=float, default=None, dest="renyi_alpha")
            p.add_argument("--sample", default=None)
        _add_common(p)
        p.set_defaults(func=_cmd_measure)

    c = sub.add_parser("concepts", help="concept class utilities")
    csub = c.add_subparsers(dest="which", required=True)
    for which in ("vc", "version-space", "packing"):
        p = csub.add_parser(which)
        if which == "packing":
            p.add_argument("--d", type=int, required=True)
            p.add_argument("--max-tries", type=int, default=10_000, dest="max_tries")
        else:
            p.add_argument("--class", required=True, dest="cls")
        if which == "vc":
            p.add_argument("--cap", type=int, default=20)
        if which == "version-space":
            p.add_argument("--sample", required=True)
        _add_common(p)
        p.set_defaults(func=_cmd_concepts)

    s = sub.add_parser("solve", help="constrained information maximization")
    ssub = s.add_subparsers(dest="which", required=True)
    p = ssub.add_parser("max-info")
    p.add_argument("--region", required=True)
    p.add_argument("--measure", choices=("shannon", "out_of_sample"), default="out_of_sample")
    p.add_argument("--renyi-alpha", type=float, default=None, dest="renyi_alpha")
    p.add_argument("--sample", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_solve)

    l = sub.add_parser("learn", help="run a learning rule on a sample")
    l.add_argument("kind", choices=("empirical", "improper", "proper", "fixed"))
    l.add_argument("--spec", default=None, help="learner spec JSON file")
    l.add_argument("--sample", required=True)
    _add_common(l)
    l.set_defaults(func=_cmd_learn)

    a = sub.add_parser("adversary", help="hard instance generators")
    asub = a.add_subparsers(dest="which", required=True)
    p = asub.add_parser("gen")
    p.add_argument("name", choices=adversaries.CONSTRUCTION_NAMES)
    p.add_argument("--params", default=None, help="parameter JSON file")
    _add_common(p)
    p.set_defaults(func=_cmd_adversary)

    e = sub.add_parser("experiment", help="Monte Carlo experiments")
    esub = e.add_subparsers(dest="which", required=True)
    for which in ("run", "curve"):
        p = esub.add_parser(which)
        p.add_argument("config", help="experiment config JSON file")
        _add_common(p)
        p.set_defaults(func=_cmd_experiment)

    b = sub.add_parser("bounds", help="closed-form bound calculators")
    bsub = b.add_subparsers(dest="which", required=True)
    p = bsub.add_parser("fano")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--class-size", type=int, required=True, dest="class_size")
    p.add_argument("--kl-sup", type=float, required=True, dest="kl_sup")
    _add_common(p)
    p.set_defaults(func=_cmd_bounds)
    p = bsub.add_parser("required-n")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_bounds)
    p = bsub.add_parser("entropy-threshold")
    p.add_argument("--tol", type=float, default=1e-6)
    _add_common(p)
    p.set_defaults(func=_cmd_bounds)

    return root


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
