"""Event-tree model of two-player stopping games with frame-constant payoffs.

A game runs on a finite tree whose nodes sit at integer depths ("frames").
Frame d covers the real-time interval [d, d+1); every payoff process is
constant on each frame, so all timing questions inside a frame reduce to a
small set of stage actions.  Player 1 stopping first pays (X1, X2), player 2
first pays (Y1, Y2), a simultaneous atom pays (Z1, Z2), and never stopping
pays the terminal (xi1, xi2) at the reached leaf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple, Optional

PROB_TOL = 1e-12
DEFAULT_REL_TOL = 1e-9


class ModelViolationError(RuntimeError):
    """An internal consistency check failed; this signals a solver bug."""


class InstanceError(ValueError):
    """The tree/payoff instance violates a structural invariant."""


class ProfileError(ValueError):
    """A behavioral profile is malformed for the given tree."""


class ConvexityError(ValueError):
    """A simultaneous payoff falls outside the span of the unilateral ones."""


class StageAction(Enum):
    """What a player does with the frame at one node.

    ATOM stops exactly at the frame's left endpoint, UNIFORM stops at a
    uniformly drawn interior time, WAIT survives the frame.  EARLY and LATE
    are deviation-analysis limits: a stop just after the left endpoint or
    just before the right one.  Constructed strategies never use them.
    """

    ATOM = "atom"
    UNIFORM = "uniform"
    WAIT = "wait"
    EARLY = "early"
    LATE = "late"


PLAYER_ACTIONS = (StageAction.ATOM, StageAction.UNIFORM, StageAction.WAIT)
DEVIATOR_ACTIONS = (
    StageAction.ATOM,
    StageAction.EARLY,
    StageAction.LATE,
    StageAction.WAIT,
)

# Stop position inside a frame; a strictly smaller rank stops first.
# Two EARLYs (or two LATEs) share a limit and have no defined order.
_RANK = {
    StageAction.ATOM: 0,
    StageAction.EARLY: 1,
    StageAction.UNIFORM: 2,
    StageAction.LATE: 3,
    StageAction.WAIT: 4,
}

Mix = tuple[float, float, float]

ATOM_MIX: Mix = (1.0, 0.0, 0.0)
UNIFORM_MIX: Mix = (0.0, 1.0, 0.0)
WAIT_MIX: Mix = (0.0, 0.0, 1.0)


class PayoffPair(NamedTuple):
    g1: float
    g2: float


@dataclass
class EventTree:
    """Finite filtered tree; every leaf sits at the same depth (the horizon).

    ``nodes`` is breadth-first (parents before children); ``children`` maps a
    node to its (child, probability) list, probabilities summing to one.
    """

    root: str
    nodes: list[str]
    depth: dict[str, int]
    children: dict[str, list[tuple[str, float]]]
    parent: dict[str, Optional[str]] = field(init=False, repr=False)
    _leaves: list[str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        parent: dict[str, Optional[str]] = {self.root: None}
        for node in self.nodes:
            for child, _ in self.children.get(node, ()):
                parent[child] = node
        self.parent = parent
        self._leaves = [n for n in self.nodes if not self.children.get(n)]

    @classmethod
    def build(cls, root: str, children: dict[str, list[tuple[str, float]]]) -> "EventTree":
        """Derive depths and breadth-first order from a child map."""
        depth = {root: 0}
        order = [root]
        queue = [root]
        while queue:
            node = queue.pop(0)
            for child, _ in children.get(node, ()):
                if child in depth:
                    raise InstanceError(f"node {child!r} has more than one parent")
                depth[child] = depth[node] + 1
                order.append(child)
                queue.append(child)
        known = set(order)
        for node in children:
            if node not in known:
                raise InstanceError(f"node {node!r} is not reachable from the root")
        full = {n: list(children.get(n, [])) for n in order}
        return cls(root=root, nodes=order, depth=depth, children=full)

    def is_leaf(self, node: str) -> bool:
        return not self.children.get(node)

    @property
    def leaves(self) -> list[str]:
        return list(self._leaves)

    @property
    def horizon(self) -> int:
        return max(self.depth[n] for n in self._leaves)

    def subtree(self, node: str) -> list[str]:
        """Nodes of the subtree rooted at ``node``, breadth-first."""
        out = [node]
        queue = [node]
        while queue:
            cur = queue.pop(0)
            for child, _ in self.children.get(cur, ()):
                out.append(child)
                queue.append(child)
        return out

    def paths(self) -> Iterator[list[str]]:
        """Root-to-leaf node lists, in leaf order."""
        for leaf in self._leaves:
            path = [leaf]
            while self.parent[path[0]] is not None:
                path.insert(0, self.parent[path[0]])
            yield path

    def path_probability(self, leaf: str) -> float:
        prob = 1.0
        node = leaf
        while self.parent[node] is not None:
            up = self.parent[node]
            prob *= dict(self.children[up])[node]
            node = up
        return prob


@dataclass
class PayoffProcess:
    """Per-node payoffs (X, Y, Z per player) and per-leaf terminal payoffs."""

    x1: dict[str, float]
    y1: dict[str, float]
    z1: dict[str, float]
    x2: dict[str, float]
    y2: dict[str, float]
    z2: dict[str, float]
    xi1: dict[str, float]
    xi2: dict[str, float]

    @property
    def payoff_range(self) -> float:
        """Max absolute payoff; tolerances scale with it."""
        values = []
        for table in (self.x1, self.y1, self.z1, self.x2, self.y2, self.z2, self.xi1, self.xi2):
            values.extend(table.values())
        return max((abs(v) for v in values), default=0.0)

    def tolerance(self, rel: float = DEFAULT_REL_TOL) -> float:
        return rel * max(1.0, self.payoff_range)


@dataclass
class BehavioralProfile:
    """Per-node stop distributions over (atom, uniform, wait), one per player."""

    player1: dict[str, Mix]
    player2: dict[str, Mix]

    def side(self, player: int) -> dict[str, Mix]:
        if player == 1:
            return self.player1
        if player == 2:
            return self.player2
        raise ValueError(f"player must be 1 or 2, got {player}")

    @classmethod
    def waiting(cls, tree: EventTree) -> "BehavioralProfile":
        """Both players wait at every node."""
        return cls(
            player1={n: WAIT_MIX for n in tree.nodes},
            player2={n: WAIT_MIX for n in tree.nodes},
        )


def validate_instance(tree: EventTree, payoffs: PayoffProcess) -> list[str]:
    """Structural diagnostics; an empty list means the instance is valid."""
    issues: list[str] = []
    horizon = tree.horizon
    for node in tree.nodes:
        kids = tree.children.get(node, [])
        if kids:
            total = sum(p for _, p in kids)
            if abs(total - 1.0) > PROB_TOL:
                issues.append(f"node {node}: child probabilities sum to {total!r}, not 1")
            for child, p in kids:
                if not (0.0 < p <= 1.0):
                    issues.append(f"node {node}: probability {p!r} for child {child} not in (0, 1]")
                if tree.depth[child] != tree.depth[node] + 1:
                    issues.append(f"node {child}: depth {tree.depth[child]} inconsistent with parent")
        else:
            if tree.depth[node] != horizon:
                issues.append(f"node {node}: leaf at depth {tree.depth[node]}, horizon is {horizon} (non-uniform horizon)")
            for name, table in (("xi1", payoffs.xi1), ("xi2", payoffs.xi2)):
                if node not in table:
                    issues.append(f"node {node}: missing terminal payoff {name}")
                elif not math.isfinite(table[node]):
                    issues.append(f"node {node}: non-finite terminal payoff {name}")
        for name, table in (
            ("X1", payoffs.x1),
            ("Y1", payoffs.y1),
            ("Z1", payoffs.z1),
            ("X2", payoffs.x2),
            ("Y2", payoffs.y2),
            ("Z2", payoffs.z2),
        ):
            if node not in table:
                issues.append(f"node {node}: missing payoff {name}")
            elif not math.isfinite(table[node]):
                issues.append(f"node {node}: non-finite payoff {name}")
    return issues


def require_valid(tree: EventTree, payoffs: PayoffProcess) -> None:
    issues = validate_instance(tree, payoffs)
    if issues:
        raise InstanceError("; ".join(issues))


def validate_profile(tree: EventTree, profile: BehavioralProfile) -> list[str]:
    issues: list[str] = []
    for player, side in ((1, profile.player1), (2, profile.player2)):
        for node in tree.nodes:
            mix = side.get(node)
            if mix is None:
                issues.append(f"node {node}: player {player} has no stage distribution")
                continue
            if len(mix) != 3 or any(p < -PROB_TOL for p in mix):
                issues.append(f"node {node}: player {player} distribution {mix!r} malformed")
                continue
            if abs(sum(mix) - 1.0) > PROB_TOL:
                issues.append(f"node {node}: player {player} distribution sums to {sum(mix)!r}")
    return issues


def outcome_kernel(
    a1: StageAction,
    a2: StageAction,
    payoffs: PayoffProcess,
    node: str,
    continuation: Optional[PayoffPair] = None,
    is_leaf: bool = False,
) -> PayoffPair:
    """Resolve one frame: who stops first and what both players receive.

    ``continuation`` is the value pair of surviving the frame; at a leaf it
    may be omitted, in which case the terminal payoffs apply.
    """
    if a1 is StageAction.WAIT and a2 is StageAction.WAIT:
        if continuation is not None:
            return continuation
        if is_leaf:
            return PayoffPair(payoffs.xi1[node], payoffs.xi2[node])
        raise ValueError(f"node {node}: internal node needs a continuation for (wait, wait)")
    r1, r2 = _RANK[a1], _RANK[a2]
    if r1 == r2:
        if a1 is StageAction.ATOM:
            return PayoffPair(payoffs.z1[node], payoffs.z2[node])
        if a1 is StageAction.UNIFORM:
            return PayoffPair(
                0.5 * (payoffs.x1[node] + payoffs.y1[node]),
                0.5 * (payoffs.x2[node] + payoffs.y2[node]),
            )
        raise ValueError(f"node {node}: ({a1.value}, {a2.value}) has no defined stop order")
    if r1 < r2:
        return PayoffPair(payoffs.x1[node], payoffs.x2[node])
    return PayoffPair(payoffs.y1[node], payoffs.y2[node])


def evaluate_profile_table(
    tree: EventTree, payoffs: PayoffProcess, profile: BehavioralProfile
) -> dict[str, PayoffPair]:
    """Expected payoff pair at each node, conditional on reaching it unstopped."""
    issues = validate_profile(tree, profile)
    if issues:
        raise ProfileError(issues[0])
    table: dict[str, PayoffPair] = {}
    for node in reversed(tree.nodes):
        if tree.is_leaf(node):
            cont = PayoffPair(payoffs.xi1[node], payoffs.xi2[node])
        else:
            g1 = g2 = 0.0
            for child, p in tree.children[node]:
                g1 += p * table[child].g1
                g2 += p * table[child].g2
            cont = PayoffPair(g1, g2)
        mix1 = profile.player1[node]
        mix2 = profile.player2[node]
        g1 = g2 = 0.0
        for a1, w1 in zip(PLAYER_ACTIONS, mix1):
            if w1 == 0.0:
                continue
            for a2, w2 in zip(PLAYER_ACTIONS, mix2):
                if w2 == 0.0:
                    continue
                pair = outcome_kernel(a1, a2, payoffs, node, continuation=cont)
                g1 += w1 * w2 * pair.g1
                g2 += w1 * w2 * pair.g2
        table[node] = PayoffPair(g1, g2)
    return table


def evaluate_profile(
    tree: EventTree, payoffs: PayoffProcess, profile: BehavioralProfile
) -> PayoffPair:
    """Exact expected payoffs of a behavioral profile, by backward recursion."""
    return evaluate_profile_table(tree, payoffs, profile)[tree.root]


def mirror(tree: EventTree, payoffs: PayoffProcess) -> tuple[EventTree, PayoffProcess]:
    """Swap the players' indices and first-stopper roles.  An involution."""
    mirrored = PayoffProcess(
        x1=dict(payoffs.y2),
        y1=dict(payoffs.x2),
        z1=dict(payoffs.z2),
        x2=dict(payoffs.y1),
        y2=dict(payoffs.x1),
        z2=dict(payoffs.z1),
        xi1=dict(payoffs.xi2),
        xi2=dict(payoffs.xi1),
    )
    return tree, mirrored


@dataclass(frozen=True)
class FrameSplitMap:
    """Id bookkeeping for a frame split.

    Original ids survive unchanged (``node_map`` is the identity on them);
    ``inserted`` maps each node that received a payoff-identical copy below
    it to the new copy's id.
    """

    node_map: dict[str, str]
    inserted: dict[str, str]


def _fresh_id(base: str, taken: set[str]) -> str:
    candidate = base
    k = 0
    while candidate in taken:
        k += 1
        candidate = f"{base}{k}"
    taken.add(candidate)
    return candidate


def split_frame(
    tree: EventTree, payoffs: PayoffProcess, node: str
) -> tuple[EventTree, PayoffProcess, FrameSplitMap]:
    """Replace one node's frame by two consecutive frames with identical payoffs.

    A single-child copy is inserted between ``node`` and its children (for a
    leaf, the copy becomes the leaf and carries the terminal payoffs).  Every
    path not through ``node`` is padded with one identity frame at its leaf so
    the horizon stays uniform.
    """
    if node not in tree.depth:
        raise KeyError(f"unknown node {node!r}")
    taken = set(tree.nodes)
    children = {n: list(tree.children.get(n, [])) for n in tree.nodes}
    inserted: dict[str, str] = {}

    below = set(tree.subtree(node))
    targets = [node] + [leaf for leaf in tree.leaves if leaf not in below]
    for src in targets:
        copy_id = _fresh_id(f"{src}b", taken)
        inserted[src] = copy_id
        children[copy_id] = children[src]
        children[src] = [(copy_id, 1.0)]

    new_tree = EventTree.build(tree.root, children)

    def extend(table: dict[str, float]) -> dict[str, float]:
        out = dict(table)
        for src, copy_id in inserted.items():
            out[copy_id] = table[src]
        return out

    xi1 = dict(payoffs.xi1)
    xi2 = dict(payoffs.xi2)
    for src, copy_id in inserted.items():
        if src in xi1:  # the copy is the new leaf; terminal payoffs move down
            xi1[copy_id] = xi1.pop(src)
            xi2[copy_id] = xi2.pop(src)
    new_payoffs = PayoffProcess(
        x1=extend(payoffs.x1),
        y1=extend(payoffs.y1),
        z1=extend(payoffs.z1),
        x2=extend(payoffs.x2),
        y2=extend(payoffs.y2),
        z2=extend(payoffs.z2),
        xi1=xi1,
        xi2=xi2,
    )
    node_map = {n: n for n in tree.nodes}
    return new_tree, new_payoffs, FrameSplitMap(node_map=node_map, inserted=inserted)


def split_frames(
    tree: EventTree, payoffs: PayoffProcess, nodes: list[str]
) -> tuple[EventTree, PayoffProcess, FrameSplitMap]:
    """Split several frames in sequence, composing the id maps."""
    node_map = {n: n for n in tree.nodes}
    inserted: dict[str, str] = {}
    seen: set[str] = set()
    for node in nodes:
        if node in seen:
            continue
        seen.add(node)
        tree, payoffs, step = split_frame(tree, payoffs, node)
        inserted[node] = step.inserted[node]
    return tree, payoffs, FrameSplitMap(node_map=node_map, inserted=inserted)


def extend_profile(
    profile: BehavioralProfile, tree: EventTree, split: FrameSplitMap
) -> BehavioralProfile:
    """Extend a pre-split profile to a split tree with wait/wait on new nodes."""
    out = BehavioralProfile.waiting(tree)
    for node, mix in profile.player1.items():
        out.player1[split.node_map.get(node, node)] = mix
    for node, mix in profile.player2.items():
        out.player2[split.node_map.get(node, node)] = mix
    return out
