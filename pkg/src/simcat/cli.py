"""Command-line interface: feasibility checks, sampling runs, classification.

Exit codes: 0 on success, 1 when the mathematics says no (an infeasible
deck or unsatisfiable requirements), 2 when the invocation or the
document itself cannot be read.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click
import numpy as np

from .document import (
    DocumentError,
    ProblemDocument,
    document_hierarchy,
    document_problem,
    document_systems,
    parse_document,
)
from .hierarchy import ValidationError
from .robust import InfeasibleRequirements, enumerate_optima
from .sampler import compile_polytope, hit_and_run
from .smaa import AssignmentDistribution, run_smaa
from .srf import feasibility_check


def _load(path: str) -> ProblemDocument:
    try:
        return parse_document(Path(path).read_text())
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e}") from e


def feasibility_reports(doc: ProblemDocument):
    h = document_hierarchy(doc)
    systems = document_systems(doc, h)
    return h, systems, {cat: feasibility_check(s) for cat, s in systems.items()}


def compute_distribution(
    doc: ProblemDocument,
    samples: int,
    seed: int,
    problem=None,
    nodes=None,
) -> AssignmentDistribution:
    """Sample every category's polytope and tally the assignments."""
    h, systems, reports = feasibility_reports(doc)
    bad = [cat for cat, rep in reports.items() if not rep.feasible]
    if bad:
        raise InfeasibleCategory(bad, reports)
    if problem is None:
        problem = document_problem(doc, h)
    batches = {}
    for idx, cat in enumerate(doc.categories):
        poly = compile_polytope(systems[cat], reports[cat])
        batches[cat] = hit_and_run(
            poly,
            samples,
            seed=np.random.SeedSequence((seed, idx)),
            burn_in=doc.smaa.burn_in,
            thinning=doc.smaa.thinning,
        )
    return run_smaa(problem, batches, nodes=nodes)


class InfeasibleCategory(Exception):
    """At least one category's elicitation admits no weights."""

    def __init__(self, bad, reports):
        super().__init__(f"infeasible categories: {', '.join(bad)}")
        self.bad = bad
        self.reports = reports


def _report_lines(reports) -> list[str]:
    lines = []
    for cat, rep in reports.items():
        if rep.feasible:
            lines.append(f"{cat}: feasible  eps={rep.epsilon:.6g}")
        else:
            lines.append(f"{cat}: INFEASIBLE")
    return lines


def _set_label(mask: int, categories, dummy: str) -> str:
    if mask == 0:
        return dummy
    return "+".join(c for j, c in enumerate(categories) if mask & (1 << j))


def distribution_payload(dist: AssignmentDistribution, seed: int) -> dict:
    nodes = {}
    for nid, name in zip(dist.nodes, dist.node_names):
        per_action = {}
        for a in dist.actions:
            counts = dist.counts[(nid, a)]
            sets = {}
            for mask, c in enumerate(counts):
                if not c:
                    continue
                label = _set_label(mask, dist.categories, dist.dummy)
                sets[label] = {
                    "count": int(c),
                    "pct": round(100.0 * int(c) / dist.sample_count, 3),
                }
            marginals = {
                cat: round(pct, 3)
                for cat, pct in dist.marginals(nid, a).items()
            }
            per_action[a] = {"sets": sets, "marginals": marginals}
        nodes[name] = per_action
    return {
        "samples": dist.sample_count,
        "seed": seed,
        "categories": list(dist.categories),
        "dummy": dist.dummy,
        "actions": list(dist.actions),
        "nodes": nodes,
    }


def distribution_from_payload(payload: dict) -> AssignmentDistribution:
    """Rebuild a distribution from the structured result document."""
    categories = tuple(payload["categories"])
    dummy = payload["dummy"]
    actions = tuple(payload["actions"])
    node_names = tuple(payload["nodes"])
    node_ids = tuple((i,) for i in range(len(node_names)))
    index = {c: j for j, c in enumerate(categories)}
    counts = {}
    for nid, name in zip(node_ids, node_names):
        for a in actions:
            arr = np.zeros(1 << len(categories), dtype=np.int64)
            for label, cell in payload["nodes"][name][a]["sets"].items():
                mask = 0
                if label != dummy:
                    for c in label.split("+"):
                        mask |= 1 << index[c]
                arr[mask] = cell["count"]
            counts[(nid, a)] = arr
    return AssignmentDistribution(
        nodes=node_ids,
        node_names=node_names,
        actions=actions,
        categories=categories,
        dummy=dummy,
        sample_count=int(payload["samples"]),
        counts=counts,
    )


def _node_csv(payload: dict, name: str) -> str:
    categories = payload["categories"]
    dummy = payload["dummy"]
    per_action = payload["nodes"][name]
    index = {c: j for j, c in enumerate(categories)}

    def mask_of(label: str) -> int:
        if label == dummy:
            return 0
        m = 0
        for c in label.split("+"):
            m |= 1 << index[c]
        return m

    labels = {label for cells in per_action.values() for label in cells["sets"]}
    nonzero = sorted((l for l in labels if l != dummy), key=mask_of)
    set_columns = nonzero + ([dummy] if dummy in labels else [])
    marg_columns = categories + [dummy]

    lines = [
        ",".join(
            ["action"]
            + [f"set:{label}" for label in set_columns]
            + [f"b:{c}" for c in marg_columns]
        )
    ]
    for a, cells in per_action.items():
        row = [a]
        for label in set_columns:
            pct = cells["sets"].get(label, {}).get("pct", 0.0)
            row.append(f"{pct:.3f}")
        for c in marg_columns:
            row.append(f"{cells['marginals'][c]:.3f}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _dump_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


@click.group()
def main() -> None:
    """Hierarchical likeness classification under sampled weights."""


@main.command()
@click.argument("file", type=click.Path())
def check(file: str) -> None:
    """Validate a problem document and test every category's deck."""
    try:
        doc = _load(file)
        document_problem(doc)  # full cross-validation, not just feasibility
        _, _, reports = feasibility_reports(doc)
    except (DocumentError, ValidationError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    for line in _report_lines(reports):
        click.echo(line)
    if any(not rep.feasible for rep in reports.values()):
        sys.exit(1)


@main.command()
@click.argument("file", type=click.Path())
@click.option("--samples", type=int, default=None, help="draws per category")
@click.option("--seed", type=int, default=None, help="sampling seed")
@click.option(
    "--out",
    envvar="SIMCAT_OUT",
    default=".",
    type=click.Path(file_okay=False),
    help="output directory (env SIMCAT_OUT)",
)
def smaa(file: str, samples: int | None, seed: int | None, out: str) -> None:
    """Sample the weight polytopes and write assignment frequencies."""
    try:
        doc = _load(file)
        problem = document_problem(doc)
    except (DocumentError, ValidationError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    n = samples if samples is not None else doc.smaa.samples
    s = seed if seed is not None else doc.smaa.seed
    try:
        dist = compute_distribution(doc, n, s, problem=problem)
    except InfeasibleCategory as e:
        for line in _report_lines(e.reports):
            click.echo(line, err=True)
        click.echo(f"error: {e}", err=True)
        sys.exit(1)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = distribution_payload(dist, s)
    _dump_json(out_dir / "result.json", payload)
    _dump_json(
        out_dir / "manifest.json",
        {
            "input_sha256": hashlib.sha256(Path(file).read_bytes()).hexdigest(),
            "samples": n,
            "seed": s,
            "burn_in": doc.smaa.burn_in,
            "thinning": doc.smaa.thinning,
        },
    )
    for name in payload["nodes"]:
        (out_dir / f"{name}.csv").write_text(_node_csv(payload, name))
    click.echo(f"wrote {len(payload['nodes'])} node tables to {out_dir}")


@main.command()
@click.argument("file", type=click.Path())
@click.option(
    "--dist",
    envvar="SIMCAT_OUT",
    default=".",
    type=click.Path(file_okay=False),
    help="directory holding result.json from a sampling run",
)
@click.option("--node", default=None, help="node to classify (default: root)")
@click.option(
    "--out",
    envvar="SIMCAT_OUT",
    default=".",
    type=click.Path(file_okay=False),
    help="output directory (env SIMCAT_OUT)",
)
def classify(file: str, dist: str, node: str | None, out: str) -> None:
    """Turn sampled frequencies into loss-minimal classifications."""
    try:
        doc = _load(file)
        req = doc.requirements.build()
        result_path = Path(dist) / "result.json"
        if not result_path.exists():
            raise DocumentError(f"no sampling result at {result_path}")
        payload = json.loads(result_path.read_text())
        distribution = distribution_from_payload(payload)
        target = node if node is not None else doc.hierarchy.name
        distribution.resolve_node(target)
    except KeyError as e:
        click.echo(f"error: {e.args[0]}", err=True)
        sys.exit(2)
    except (DocumentError, ValidationError, json.JSONDecodeError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)

    try:
        optima = enumerate_optima(distribution, target, req)
    except InfeasibleRequirements as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)

    loss = optima[0].loss
    click.echo(f"node {target}: L* = {loss:.3f}, {len(optima)} classifications")
    width = max(len(a) for a in distribution.actions)
    header = "action".ljust(width) + "".join(
        f"  {_ordinal(i + 1):>4}" for i in range(len(optima))
    )
    click.echo(header)
    for a in distribution.actions:
        cells = "".join(
            f"  {'+'.join(s.assignment[a]) or '-':>4}" for s in optima
        )
        click.echo(a.ljust(width) + cells)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _dump_json(
        out_dir / f"classification_{target}.json",
        {
            "node": target,
            "loss": round(loss, 6),
            "count": len(optima),
            "optima": [
                {a: list(s.assignment[a]) for a in distribution.actions}
                for s in optima
            ],
        },
    )


def _ordinal(i: int) -> str:
    suffix = {1: "st", 2: "nd", 3: "rd"}.get(i if i < 20 else i % 10, "th")
    return f"{i}{suffix}"


if __name__ == "__main__":
    main()
