"""Instance generation, the on-disk game format, and report emission.

Game documents are flat JSON: a horizon, a node list with per-node payoffs
(roots carry no parent, leaves carry terminal payoffs), and a free-form meta
object.  Profiles map node ids to (atom, uniform, wait) probabilities.
Serialization uses sorted keys and shortest round-trip floats, so documents
are byte-stable under save/load/save.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .core import (
    BehavioralProfile,
    EventTree,
    PayoffProcess,
    validate_instance,
)

FAMILIES = ("random", "war-of-attrition", "preemption")


class SchemaError(ValueError):
    """A game document violates the file schema."""


@dataclass(frozen=True)
class GeneratorSpec:
    """Deterministic instance recipe; the same spec and seed give identical bytes."""

    family: str = "random"
    depth: int = 3
    branching: int = 2
    payoff_range: float = 1.0
    zero_sum: bool = False
    convexity: bool = False
    seed: int = 0


def generate(spec: GeneratorSpec) -> tuple[EventTree, PayoffProcess]:
    """Build a seeded instance of the requested family."""
    if spec.depth < 0:
        raise ValueError(f"depth must be >= 0, got {spec.depth}")
    if spec.branching < 1:
        raise ValueError(f"branching must be >= 1, got {spec.branching}")
    if spec.payoff_range <= 0:
        raise ValueError(f"payoff_range must be positive, got {spec.payoff_range}")
    if spec.family not in FAMILIES:
        raise ValueError(f"unknown family {spec.family!r}; choose from {FAMILIES}")
    rng = random.Random(spec.seed)

    children: dict[str, list[tuple[str, float]]] = {}
    counter = 0
    frontier = ["n0"]
    for d in range(spec.depth):
        next_frontier = []
        for node in frontier:
            width = rng.randint(1, spec.branching)
            kids = []
            weights = [rng.random() + 0.1 for _ in range(width)]
            total = sum(weights)
            probs = [w / total for w in weights]
            probs[-1] = 1.0 - sum(probs[:-1])
            for p in probs:
                counter += 1
                kid = f"n{counter}"
                kids.append((kid, p))
                next_frontier.append(kid)
            children[node] = kids
        frontier = next_frontier
    tree = EventTree.build("n0", children)

    r = spec.payoff_range
    x1: dict[str, float] = {}
    y1: dict[str, float] = {}
    z1: dict[str, float] = {}
    x2: dict[str, float] = {}
    y2: dict[str, float] = {}
    z2: dict[str, float] = {}
    xi1: dict[str, float] = {}
    xi2: dict[str, float] = {}

    if spec.family == "war-of-attrition":
        # waiting accrues cost; being conceded to beats conceding
        win = [rng.uniform(0.4, 1.0) * r for _ in (1, 2)]
        cost = [rng.uniform(0.05, 0.2) * r for _ in (1, 2)]
    elif spec.family == "preemption":
        prize = [rng.uniform(0.4, 1.0) * r for _ in (1, 2)]
        decay = [rng.uniform(0.0, 0.15) * r for _ in (1, 2)]

    for node in tree.nodes:
        d = tree.depth[node]
        if spec.family == "random":
            x1[node] = rng.uniform(-r, r)
            y1[node] = rng.uniform(-r, r)
            z1[node] = rng.uniform(-r, r)
            x2[node] = rng.uniform(-r, r)
            y2[node] = rng.uniform(-r, r)
            z2[node] = rng.uniform(-r, r)
        elif spec.family == "war-of-attrition":
            for x, y, z, k in ((x1, y1, z1, 0), (x2, y2, z2, 1)):
                drift = -cost[k] * d + rng.uniform(-0.05, 0.05) * r
                x[node] = drift - rng.uniform(0.1, 0.5) * r
                y[node] = drift + win[k]
                z[node] = rng.uniform(min(x[node], y[node]) - 0.1 * r, max(x[node], y[node]) + 0.1 * r)
        else:
            for x, y, z, k in ((x1, y1, z1, 0), (x2, y2, z2, 1)):
                mover = prize[k] - decay[k] * d + rng.uniform(-0.05, 0.05) * r
                x[node] = mover
                y[node] = mover - rng.uniform(0.1, 0.6) * r
                z[node] = rng.uniform(y[node] - 0.1 * r, x[node])
        if tree.is_leaf(node):
            if spec.family == "random":
                xi1[node] = rng.uniform(-r, r)
                xi2[node] = rng.uniform(-r, r)
            elif spec.family == "war-of-attrition":
                xi1[node] = -cost[0] * (d + 1)
                xi2[node] = -cost[1] * (d + 1)
            else:
                xi1[node] = rng.uniform(-0.2, 0.2) * r
                xi2[node] = rng.uniform(-0.2, 0.2) * r

    if spec.convexity:
        for x, y, z in ((x1, y1, z1), (x2, y2, z2)):
            for node in tree.nodes:
                z[node] = min(max(z[node], min(x[node], y[node])), max(x[node], y[node]))
    if spec.zero_sum:
        for node in tree.nodes:
            x2[node] = -x1[node]
            y2[node] = -y1[node]
            z2[node] = -z1[node]
        for leaf in tree.leaves:
            xi2[leaf] = -xi1[leaf]

    payoffs = PayoffProcess(x1=x1, y1=y1, z1=z1, x2=x2, y2=y2, z2=z2, xi1=xi1, xi2=xi2)
    return tree, payoffs


# ---------------------------------------------------------------------------
# File format


def instance_to_doc(
    tree: EventTree, payoffs: PayoffProcess, profile: Optional[BehavioralProfile] = None
) -> dict:
    nodes = []
    for node in tree.nodes:
        entry: dict[str, object] = {
            "id": node,
            "depth": tree.depth[node],
            "X1": payoffs.x1[node],
            "Y1": payoffs.y1[node],
            "Z1": payoffs.z1[node],
            "X2": payoffs.x2[node],
            "Y2": payoffs.y2[node],
            "Z2": payoffs.z2[node],
        }
        parent = tree.parent[node]
        if parent is not None:
            entry["parent"] = parent
            entry["prob"] = dict(tree.children[parent])[node]
        if tree.is_leaf(node):
            entry["xi1"] = payoffs.xi1[node]
            entry["xi2"] = payoffs.xi2[node]
        nodes.append(entry)
    doc: dict[str, object] = {"horizon": tree.horizon, "nodes": nodes, "meta": {}}
    if profile is not None:
        doc["profile"] = profile_to_doc(profile)
    return doc


def profile_to_doc(profile: BehavioralProfile) -> dict:
    return {
        "player1": {n: list(mix) for n, mix in profile.player1.items()},
        "player2": {n: list(mix) for n, mix in profile.player2.items()},
    }


def profile_from_doc(doc: dict) -> BehavioralProfile:
    for side in ("player1", "player2"):
        if side not in doc or not isinstance(doc[side], dict):
            raise SchemaError(f"profile.{side}: missing or not an object")
        for node, mix in doc[side].items():
            if not isinstance(mix, list) or len(mix) != 3:
                raise SchemaError(f"profile.{side}.{node}: expected [atom, uniform, wait]")
    return BehavioralProfile(
        player1={n: tuple(m) for n, m in doc["player1"].items()},
        player2={n: tuple(m) for n, m in doc["player2"].items()},
    )


_NODE_FIELDS = ("X1", "Y1", "Z1", "X2", "Y2", "Z2")


def instance_from_doc(doc: dict) -> tuple[EventTree, PayoffProcess, Optional[BehavioralProfile]]:
    if not isinstance(doc, dict):
        raise SchemaError("document root: expected an object")
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise SchemaError("nodes: expected a non-empty array")
    children: dict[str, list[tuple[str, float]]] = {}
    roots = []
    payload: dict[str, dict] = {}
    for idx, entry in enumerate(nodes):
        where = f"nodes[{idx}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: expected an object")
        node = entry.get("id")
        if not isinstance(node, str):
            raise SchemaError(f"{where}.id: expected a string")
        if node in payload:
            raise SchemaError(f"{where}.id: duplicate node id {node!r}")
        payload[node] = entry
        for name in _NODE_FIELDS:
            if not isinstance(entry.get(name), (int, float)):
                raise SchemaError(f"{where}.{name}: expected a number")
        if "parent" in entry:
            parent = entry["parent"]
            if not isinstance(parent, str):
                raise SchemaError(f"{where}.parent: expected a string")
            prob = entry.get("prob")
            if not isinstance(prob, (int, float)):
                raise SchemaError(f"{where}.prob: expected a number for node {node!r}")
            children.setdefault(parent, []).append((node, float(prob)))
        else:
            roots.append(node)
    if len(roots) != 1:
        raise SchemaError(f"nodes: expected exactly one root, found {len(roots)}")
    for parent in children:
        if parent not in payload:
            raise SchemaError(f"nodes: parent {parent!r} is not a declared node")
    tree = EventTree.build(roots[0], children)
    horizon = doc.get("horizon")
    if horizon != tree.horizon:
        raise SchemaError(f"horizon: declared {horizon!r}, computed {tree.horizon}")
    for node, entry in payload.items():
        declared = entry.get("depth")
        if declared != tree.depth[node]:
            raise SchemaError(f"node {node}: depth {declared!r} inconsistent with structure")
    tables = {name: {} for name in _NODE_FIELDS}
    xi1: dict[str, float] = {}
    xi2: dict[str, float] = {}
    for node, entry in payload.items():
        for name in _NODE_FIELDS:
            tables[name][node] = float(entry[name])
        if tree.is_leaf(node):
            for name, table in (("xi1", xi1), ("xi2", xi2)):
                if not isinstance(entry.get(name), (int, float)):
                    raise SchemaError(f"node {node}: leaf missing numeric {name}")
                table[node] = float(entry[name])
    payoffs = PayoffProcess(
        x1=tables["X1"],
        y1=tables["Y1"],
        z1=tables["Z1"],
        x2=tables["X2"],
        y2=tables["Y2"],
        z2=tables["Z2"],
        xi1=xi1,
        xi2=xi2,
    )
    issues = validate_instance(tree, payoffs)
    if issues:
        raise SchemaError("; ".join(issues))
    profile = None
    if "profile" in doc:
        profile = profile_from_doc(doc["profile"])
    return tree, payoffs, profile


def save(
    path: Union[str, Path],
    tree: EventTree,
    payoffs: PayoffProcess,
    profile: Optional[BehavioralProfile] = None,
) -> None:
    doc = instance_to_doc(tree, payoffs, profile)
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load(path: Union[str, Path]) -> tuple[EventTree, PayoffProcess, Optional[BehavioralProfile]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return instance_from_doc(doc)


# ---------------------------------------------------------------------------
# CSV report


def write_report_csv(
    path: Union[str, Path],
    tree: EventTree,
    v1: dict[str, float],
    v2: dict[str, float],
    mu1: set[str],
    mu2: set[str],
    cases: Optional[dict[str, str]] = None,
    gaps: Optional[tuple[float, float]] = None,
) -> None:
    """Per-node value report; gaps, when present, land in a footer record."""
    cases = cases or {}
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["node_id", "depth", "v1", "v2", "mu1_hit", "mu2_hit", "case"])
        for node in tree.nodes:
            writer.writerow(
                [
                    node,
                    tree.depth[node],
                    repr(v1[node]),
                    repr(v2[node]),
                    int(node in mu1),
                    int(node in mu2),
                    cases.get(node, ""),
                ]
            )
        if gaps is not None:
            writer.writerow(["gaps", "", repr(gaps[0]), repr(gaps[1]), "", "", ""])
