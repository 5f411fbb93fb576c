"""Full analysis report for one observable.

Every number is stored as ``{"value": ..., "source": ...}`` where ``source``
names the result it instantiates, so downstream scripts can audit a report
field by field. The JSON layout is versioned by :data:`SCHEMA`.
"""

import hashlib

from . import __version__, config
from .errors import CapExceededError
from .linalg import vector_to_json
from .multishot import (
    binarization_consistency_check,
    binary_perfect_verdict,
    error_curve,
    nonbinary_perfect_plan,
)
from .partial import anti_plan, identical_effect_clusters, find_unit_subsets, minerror_anti, minerror_partial
from .single_shot import binary_single_shot_error, single_shot_report

SCHEMA = "povm-labeler/1"

CLUSTER_NOTE = (
    "cluster min_error is 1 - lambda_max(m * M) for a cluster of m equal effects M; "
    "an alternative reading scales the largest member operator norm by m, which "
    "coincides for identical effects"
)


def _tag(value, source):
    return {"value": value, "source": source}


def input_digest(data):
    return hashlib.sha256(data).hexdigest()


def analyze(obs, shots_max=5, digest=None):
    """Collect every verdict and probability for ``obs`` into a JSON-able dict."""
    single = single_shot_report(obs)
    out = {
        "schema": SCHEMA,
        "observable": {"dim": obs.dim, "n": obs.n, "labels": list(obs.labels)},
        "single_shot": {
            "alpha": _tag(single.alpha, "single-shot-optimum"),
            "success_probability": _tag(single.success_probability, "single-shot-optimum"),
            "optimal_effect_index": single.optimal_effect_index,
            "optimal_probe": vector_to_json(single.optimal_probe),
            "perfect_possible": _tag(
                single.perfect_possible,
                "binary-rank-criterion" if obs.n == 2 else "nonbinary-single-shot-no-perfect",
            ),
            "unambiguous_possible": _tag(
                single.unambiguous_possible,
                "binary-unambiguous-equals-perfect"
                if obs.n == 2
                else "nonbinary-unambiguous-impossible",
            ),
            "unambiguous_failure_probability": _tag(
                single.failure_probability,
                "binary-unambiguous-equals-perfect"
                if obs.n == 2
                else "nonbinary-unambiguous-impossible",
            ),
        },
        "multi_shot": _multi_shot(obs, shots_max),
        "partial": _partial(obs),
        "anti": _anti(obs),
        "provenance": {
            "tool": "povm-labeler",
            "version": __version__,
            "tol": obs.tol,
            "near_unit_band": config.NEAR_UNIT_BAND,
            "shots_max": shots_max,
            "input_sha256": digest,
        },
    }
    return out


def _multi_shot(obs, shots_max):
    if obs.n == 2:
        curve = error_curve(obs, shots_max)
        return {
            "kind": "binary",
            "single_shot_error": _tag(binary_single_shot_error(obs), "binary-single-shot-error"),
            "perfect_labeling_any_shots": _tag(binary_perfect_verdict(obs), "binary-multishot-no-go"),
            "error_curve": {
                "shots": list(curve.shots),
                "errors": _tag(list(curve.errors), "binary-multishot-norm"),
                "best_so_far": _tag(list(curve.best_so_far), "binary-multishot-norm"),
                "regime": "formula extrapolation" if curve.extrapolated else "qubit",
            },
        }
    plan = nonbinary_perfect_plan(obs)
    consistent = binarization_consistency_check(obs) if plan.feasible else None
    return {
        "kind": "non-binary",
        "perfect_plan": {
            "feasible": _tag(plan.feasible, "unit-eigenvalue-perfect-labeling"),
            "shots_required": _tag(plan.shots_required, "unit-eigenvalue-perfect-labeling"),
            "unit_effect_count": _tag(plan.unit_effect_count, "unit-eigenvalue-perfect-labeling"),
            "near_unit_effects": list(plan.near_unit_effects),
            "probes": [{"effect": k, "probe": vector_to_json(v)} for v, k in plan.probes],
            "verdict": (
                f"perfectly labelable in {plan.shots_required} shots"
                if plan.feasible
                else f"not perfectly labelable in {plan.shots_required} shots; "
                "more shots are claimed not to help (untested)"
            ),
        },
        "binarizations_perfect": _tag(consistent, "binarization-consistency"),
    }


def _partial(obs):
    try:
        subsets = find_unit_subsets(obs)
    except CapExceededError as exc:
        return {"skipped": str(exc)}
    clusters = identical_effect_clusters(obs)
    return {
        "unit_subsets": [
            {
                "effects": sorted(s),
                "probe": vector_to_json(v),
                "min_error": _tag(minerror_partial(obs, s), "partial-labeling-min-error"),
            }
            for s, v in subsets
        ],
        "clusters": [
            {
                "effects": sorted(c.members),
                "summed_top_eigenvalue": _tag(c.summed_top_eigenvalue, "identical-effect-clusters"),
                "member_top_eigenvalue": _tag(c.member_top_eigenvalue, "identical-effect-clusters"),
                "unit": c.is_unit(obs.tol),
                "probe": vector_to_json(c.probe),
                "min_error": _tag(
                    max(0.0, 1.0 - c.summed_top_eigenvalue), "partial-labeling-min-error"
                ),
            }
            for c in clusters
        ],
        "note": CLUSTER_NOTE,
    }


def _anti(obs):
    plan = anti_plan(obs)
    return {
        "exclusions": [{"effect": x, "probe": vector_to_json(v)} for x, v in plan.exclusions],
        "min_error": [
            {"effect": x, "value": minerror_anti(obs, x), "source": "anti-labeling-min-error"}
            for x in range(obs.n)
        ],
    }


def _fmt(x):
    return f"{x:.12g}"


def to_text(report):
    """Human-readable rendering; no stability promise."""
    o = report["observable"]
    s = report["single_shot"]
    lines = [
        f"observable: d={o['dim']} n={o['n']} labels={', '.join(o['labels'])}",
        "single shot:",
        f"  alpha                 {_fmt(s['alpha']['value'])}",
        f"  success probability   {_fmt(s['success_probability']['value'])}",
        f"  optimal effect index  {s['optimal_effect_index']}",
        f"  perfect possible      {s['perfect_possible']['value']}",
        f"  unambiguous possible  {s['unambiguous_possible']['value']}",
    ]
    m = report["multi_shot"]
    lines.append("multi shot:")
    if m["kind"] == "binary":
        c = m["error_curve"]
        lines.append(f"  perfect labeling in any number of shots: {m['perfect_labeling_any_shots']['value']}")
        lines.append(f"  error curve ({c['regime']}):")
        for n, e, b in zip(c["shots"], c["errors"]["value"], c["best_so_far"]["value"]):
            lines.append(f"    n={n:<3d} p_e={_fmt(e):<16s} best<=n={_fmt(b)}")
    else:
        p = m["perfect_plan"]
        lines.append(f"  {p['verdict']}")
        lines.append(f"  effects with eigenvalue 1: {p['unit_effect_count']['value']}")
        if p["near_unit_effects"]:
            lines.append(f"  near misses (within {report['provenance']['near_unit_band']:g}): {p['near_unit_effects']}")
        if m["binarizations_perfect"]["value"] is not None:
            lines.append(f"  every binarization perfectly labelable: {m['binarizations_perfect']['value']}")
    part = report["partial"]
    lines.append("partial labeling:")
    if "skipped" in part:
        lines.append(f"  skipped: {part['skipped']}")
    else:
        if not part["unit_subsets"]:
            lines.append("  no unit-eigenvalue subset; not applicable")
        for u in part["unit_subsets"]:
            lines.append(f"  subset {u['effects']}")
        for c in part["clusters"]:
            lines.append(
                f"  cluster {c['effects']} unit={c['unit']} min_error={_fmt(c['min_error']['value'])}"
            )
    a = report["anti"]
    lines.append("anti-labeling:")
    lines.append(f"  excludable effects: {[e['effect'] for e in a['exclusions']]}")
    lines.append(
        "  min error per effect: " + ", ".join(_fmt(e["value"]) for e in a["min_error"])
    )
    pv = report["provenance"]
    lines.append(f"provenance: {pv['tool']} {pv['version']} tol={pv['tol']:g} sha256={pv['input_sha256']}")
    return "\n".join(lines)
