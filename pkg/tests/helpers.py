"""Shared instance builders for the test suite."""

from __future__ import annotations

import random

from dynkin import EventTree, GeneratorSpec, PayoffProcess, generate


def uniform_tree(depth: int, branching: int = 2) -> EventTree:
    """Complete tree with equal child probabilities."""
    children: dict[str, list[tuple[str, float]]] = {}
    counter = 0
    frontier = ["n0"]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            kids = []
            for _ in range(branching):
                counter += 1
                kids.append((f"n{counter}", 1.0 / branching))
            children[node] = kids
            nxt.extend(k for k, _ in kids)
        frontier = nxt
    return EventTree.build("n0", children)


def chain_tree(depth: int) -> EventTree:
    children = {f"n{d}": [(f"n{d + 1}", 1.0)] for d in range(depth)}
    return EventTree.build("n0", children)


def constant_payoffs(
    tree: EventTree,
    x: float,
    y: float,
    z: float,
    xi: float,
    zero_sum: bool = True,
    x2: float | None = None,
    y2: float | None = None,
    z2: float | None = None,
    xi2: float | None = None,
) -> PayoffProcess:
    """Node-constant payoffs; player 2 defaults to the zero-sum complement."""
    if x2 is None:
        x2, y2, z2, xi2 = (-x, -y, -z, -xi) if zero_sum else (x, y, z, xi)
    nodes = tree.nodes
    leaves = tree.leaves
    return PayoffProcess(
        x1={n: x for n in nodes},
        y1={n: y for n in nodes},
        z1={n: z for n in nodes},
        x2={n: x2 for n in nodes},
        y2={n: y2 for n in nodes},
        z2={n: z2 for n in nodes},
        xi1={n: xi for n in leaves},
        xi2={n: xi2 for n in leaves},
    )


def single_node_payoffs(x1, y1, z1, xi1, x2, y2, z2, xi2) -> tuple[EventTree, PayoffProcess]:
    tree = EventTree.build("n0", {})
    return tree, PayoffProcess(
        x1={"n0": x1},
        y1={"n0": y1},
        z1={"n0": z1},
        x2={"n0": x2},
        y2={"n0": y2},
        z2={"n0": z2},
        xi1={"n0": xi1},
        xi2={"n0": xi2},
    )


def corpus(
    count: int,
    seed0: int = 0,
    depth_lo: int = 2,
    depth_hi: int = 6,
    branching_hi: int = 3,
    families: tuple[str, ...] = ("random", "war-of-attrition", "preemption"),
    **spec_kw,
) -> list[tuple[EventTree, PayoffProcess]]:
    """Deterministic mixed-family corpus; same arguments give the same list."""
    out = []
    span = depth_hi - depth_lo + 1
    for k in range(count):
        spec = GeneratorSpec(
            family=families[k % len(families)],
            depth=depth_lo + k % span,
            branching=1 + k % branching_hi,
            seed=seed0 + k,
            **spec_kw,
        )
        out.append(generate(spec))
    return out


# Tree shapes for the exact brute-force corpus: small enough to enumerate.
DYADIC_SHAPES: list[dict[str, list[tuple[str, float]]]] = [
    {},
    {"r": [("a", 1.0)]},
    {"r": [("a", 1.0)], "a": [("b", 1.0)]},
    {"r": [("a", 0.5), ("b", 0.5)]},
    {"r": [("a", 0.25), ("b", 0.75)]},
    {"r": [("a", 0.25), ("b", 0.25), ("c", 0.5)]},
    {"r": [("a", 1.0)], "a": [("b", 0.5), ("c", 0.5)]},
    {"r": [("a", 0.5), ("b", 0.5)], "a": [("c", 1.0)], "b": [("d", 1.0)]},
    {"r": [("a", 0.5), ("b", 0.5)], "a": [("c", 0.5), ("d", 0.5)], "b": [("e", 0.25), ("f", 0.75)]},
    {"r": [("a", 0.5), ("b", 0.5)], "a": [("c", 0.25), ("d", 0.75)], "b": [("e", 1.0)]},
]


def dyadic_instance(shape: dict, seed: int) -> tuple[EventTree, PayoffProcess]:
    """Small instance whose payoffs and probabilities are exact in binary."""
    tree = EventTree.build("r", shape)
    rng = random.Random(seed)

    def dy() -> float:
        return rng.randrange(-16, 17) / 8.0

    tables = {k: {n: dy() for n in tree.nodes} for k in ("x1", "y1", "z1", "x2", "y2", "z2")}
    terms = {k: {n: dy() for n in tree.leaves} for k in ("xi1", "xi2")}
    return tree, PayoffProcess(**tables, **terms)


DYADIC_MIXES = [
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (0.5, 0.5, 0.0),
    (0.5, 0.0, 0.5),
    (0.0, 0.5, 0.5),
    (0.25, 0.25, 0.5),
    (0.25, 0.5, 0.25),
]


def dyadic_mixes(tree: EventTree, seed: int) -> dict[str, tuple[float, float, float]]:
    rng = random.Random(seed)
    return {n: DYADIC_MIXES[rng.randrange(len(DYADIC_MIXES))] for n in tree.nodes}


def zero_sum_push_table(
    tree: EventTree, payoffs: PayoffProcess, fragment: dict, player: int
) -> dict[str, float]:
    """Per-node worst payoff for ``player`` using ``fragment`` against a
    minimizing opponent, by exact backward induction over pure stops."""
    if player == 1:
        own, opp, sim, xi = payoffs.x1, payoffs.y1, payoffs.z1, payoffs.xi1
    else:
        own, opp, sim, xi = payoffs.y2, payoffs.x2, payoffs.z2, payoffs.xi2
    vals: dict[str, float] = {}
    for node in reversed(tree.nodes):
        if tree.is_leaf(node):
            cont = xi[node]
        else:
            cont = sum(p * vals[c] for c, p in tree.children[node])
        a, u, w = fragment[node]
        vals[node] = min(
            a * sim[node] + (u + w) * opp[node],
            a * own[node] + (u + w) * opp[node],
            (a + u) * own[node] + w * opp[node],
            (a + u) * own[node] + w * cont,
        )
    return vals


def zero_sum_push(
    tree: EventTree, payoffs: PayoffProcess, fragment: dict, player: int
) -> float:
    return zero_sum_push_table(tree, payoffs, fragment, player)[tree.root]
