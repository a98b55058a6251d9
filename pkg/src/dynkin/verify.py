"""Exact certification: best responses, deviation gaps, invariants, oracles.

A lone deviator facing a mixture of (atom, uniform, wait) gets a payoff that
is affine in their stop position inside the frame, so only the endpoint
limits matter: the deviator's action set is (atom, early, late, wait) and the
best response is an exact backward dynamic program.  Brute-force enumerators
over explicit stopping rules provide independent cross-checks on small trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Optional

from .core import (
    BehavioralProfile,
    EventTree,
    Mix,
    ModelViolationError,
    PayoffPair,
    PayoffProcess,
    StageAction,
    evaluate_profile,
    split_frame,
)
from .zerosum import (
    HittingTime,
    ValueProcess,
    hitting_time,
    opponent_first_payoff,
    pre_hit_region,
    solve_value_process,
    stage_matrices,
    stop_first_payoff,
    solve_matrix_game,
)

BRUTE_FORCE_NODE_LIMIT = 10

_DEVIATOR_ORDER = (StageAction.ATOM, StageAction.EARLY, StageAction.LATE, StageAction.WAIT)


@dataclass
class GapCertificate:
    """One player's certified deviation gap, with the witnessing strategy."""

    player: int
    best_response_value: float
    path_value: float
    gap: float
    raw_gap: float
    strategy: dict[str, StageAction]


@dataclass
class InvariantCheck:
    name: str
    passed: bool
    worst: float
    witness: Optional[str]


@dataclass
class InvariantReport:
    checks: list[InvariantCheck]

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[InvariantCheck]:
        return [c for c in self.checks if not c.passed]


def _deviator_lines(
    payoffs: PayoffProcess, player: int, node: str, mix: Mix, continuation: float
) -> tuple[float, float, float, float]:
    a, u, w = mix
    own = stop_first_payoff(payoffs, player, node)
    opp = opponent_first_payoff(payoffs, player, node)
    sim = payoffs.z1[node] if player == 1 else payoffs.z2[node]
    atom = a * sim + (u + w) * own
    early = a * opp + (u + w) * own
    late = (a + u) * opp + w * own
    wait = (a + u) * opp + w * continuation
    return atom, early, late, wait


def best_response(
    tree: EventTree,
    payoffs: PayoffProcess,
    opponent: dict[str, Mix],
    deviator: int,
) -> tuple[dict[str, float], dict[str, StageAction]]:
    """Exact best-response values and a pure argmax strategy per node.

    ``opponent`` is the other player's per-node (atom, uniform, wait)
    distribution, defined on the whole tree.  Ties go to the earlier action
    in the order atom < early < late < wait.
    """
    xi = payoffs.xi1 if deviator == 1 else payoffs.xi2
    values: dict[str, float] = {}
    strategy: dict[str, StageAction] = {}
    for node in reversed(tree.nodes):
        if tree.is_leaf(node):
            cont = xi[node]
        else:
            cont = sum(p * values[child] for child, p in tree.children[node])
        lines = _deviator_lines(payoffs, deviator, node, opponent[node], cont)
        best = max(lines)
        values[node] = best
        strategy[node] = _DEVIATOR_ORDER[lines.index(best)]
    return values, strategy


def deviation_gap(
    tree: EventTree, payoffs: PayoffProcess, profile: BehavioralProfile
) -> tuple[GapCertificate, GapCertificate]:
    """Certified gaps for both players, recomputed from scratch.

    Raw gaps can dip slightly negative through best-response ties; the
    reported gap is clamped at zero with the raw value kept alongside.
    """
    pair = evaluate_profile(tree, payoffs, profile)
    certificates = []
    for player, opponent_side, path_value in (
        (1, profile.player2, pair.g1),
        (2, profile.player1, pair.g2),
    ):
        values, strategy = best_response(tree, payoffs, opponent_side, player)
        raw = values[tree.root] - path_value
        certificates.append(
            GapCertificate(
                player=player,
                best_response_value=values[tree.root],
                path_value=path_value,
                gap=max(0.0, raw),
                raw_gap=raw,
                strategy=strategy,
            )
        )
    return certificates[0], certificates[1]


# ---------------------------------------------------------------------------
# Brute-force oracles (small trees only)


def _check_size(tree: EventTree) -> None:
    if len(tree.nodes) > BRUTE_FORCE_NODE_LIMIT:
        raise ValueError(
            f"brute force refused: {len(tree.nodes)} nodes exceeds {BRUTE_FORCE_NODE_LIMIT}"
        )


def _stop_rules(
    tree: EventTree, node: str, actions: tuple[StageAction, ...]
) -> Iterator[dict[str, StageAction]]:
    """All reduced stopping rules on the subtree: a first-stop antichain with
    one action each; the empty rule never stops."""
    for act in actions:
        yield {node: act}
    kids = tree.children.get(node, ())
    if not kids:
        yield {}
        return
    child_rules = [list(_stop_rules(tree, child, actions)) for child, _ in kids]
    for combo in product(*child_rules):
        merged: dict[str, StageAction] = {}
        for part in combo:
            merged.update(part)
        yield merged


def _first_stop(path: list[str], rule: dict[str, StageAction]) -> tuple[int, Optional[StageAction]]:
    for k, node in enumerate(path):
        if node in rule:
            return k, rule[node]
    return len(path), None


_POSITION = {
    StageAction.ATOM: 0,
    StageAction.EARLY: 1,
    StageAction.UNIFORM: 2,
    StageAction.LATE: 3,
}


def _pure_path_payoff(
    payoffs: PayoffProcess,
    path: list[str],
    stop1: tuple[int, Optional[StageAction]],
    stop2: tuple[int, Optional[StageAction]],
    ambiguous: str,
) -> PayoffPair:
    """Payoff pair on one path for two explicit stopping rules.

    Stops at the same node with the same interior limit (two earlies or two
    lates) have no canonical order; ``ambiguous`` selects the resolution:
    the ordering parameter is chosen against player 1 ("min1"), against
    player 2 ("min2"), or the case is rejected ("forbid").
    """
    k1, a1 = stop1
    k2, a2 = stop2
    leaf = path[-1]
    if a1 is None and a2 is None:
        return PayoffPair(payoffs.xi1[leaf], payoffs.xi2[leaf])
    if k1 < k2 or (k1 == k2 and a2 is None):
        node = path[k1]
        return PayoffPair(payoffs.x1[node], payoffs.x2[node])
    if k2 < k1 or (k1 == k2 and a1 is None):
        node = path[k2]
        return PayoffPair(payoffs.y1[node], payoffs.y2[node])
    node = path[k1]
    first = PayoffPair(payoffs.x1[node], payoffs.x2[node])
    second = PayoffPair(payoffs.y1[node], payoffs.y2[node])
    if a1 is StageAction.ATOM and a2 is StageAction.ATOM:
        return PayoffPair(payoffs.z1[node], payoffs.z2[node])
    if a1 is StageAction.UNIFORM and a2 is StageAction.UNIFORM:
        return PayoffPair(0.5 * (first.g1 + second.g1), 0.5 * (first.g2 + second.g2))
    p1, p2 = _POSITION[a1], _POSITION[a2]
    if p1 < p2:
        return first
    if p2 < p1:
        return second
    if ambiguous == "min1":
        return first if first.g1 <= second.g1 else second
    if ambiguous == "min2":
        return first if first.g2 <= second.g2 else second
    raise ValueError(f"node {node}: unresolved stop order for ({a1.value}, {a2.value})")


def _rule_pair_payoff(
    tree: EventTree,
    payoffs: PayoffProcess,
    rule1: dict[str, StageAction],
    rule2: dict[str, StageAction],
    ambiguous: str = "forbid",
) -> PayoffPair:
    g1 = g2 = 0.0
    for path in tree.paths():
        prob = tree.path_probability(path[-1])
        pair = _pure_path_payoff(
            payoffs, path, _first_stop(path, rule1), _first_stop(path, rule2), ambiguous
        )
        g1 += prob * pair.g1
        g2 += prob * pair.g2
    return PayoffPair(g1, g2)


def _rule_probability(tree: EventTree, rule: dict[str, StageAction], side: dict[str, Mix]) -> float:
    """Probability the behavioral side realizes this first-stop rule."""
    prob = 1.0
    stack = [tree.root]
    while stack:
        node = stack.pop()
        a, u, w = side[node]
        if node in rule:
            prob *= a if rule[node] is StageAction.ATOM else u
        else:
            prob *= w
            stack.extend(child for child, _ in tree.children.get(node, ()))
    return prob


def brute_force_payoff(
    tree: EventTree, payoffs: PayoffProcess, profile: BehavioralProfile
) -> PayoffPair:
    """Expected payoffs by enumerating the profile's mixed representation."""
    _check_size(tree)
    stoppers = (StageAction.ATOM, StageAction.UNIFORM)
    g1 = g2 = 0.0
    for rule1 in _stop_rules(tree, tree.root, stoppers):
        p1 = _rule_probability(tree, rule1, profile.player1)
        if p1 == 0.0:
            continue
        for rule2 in _stop_rules(tree, tree.root, stoppers):
            p2 = _rule_probability(tree, rule2, profile.player2)
            if p2 == 0.0:
                continue
            pair = _rule_pair_payoff(tree, payoffs, rule1, rule2)
            g1 += p1 * p2 * pair.g1
            g2 += p1 * p2 * pair.g2
    return PayoffPair(g1, g2)


def _rule_vs_behavioral(
    tree: EventTree,
    payoffs: PayoffProcess,
    rule: dict[str, StageAction],
    opponent: dict[str, Mix],
    deviator: int,
) -> float:
    """Expected payoff of an explicit stopping rule against a behavioral side,
    by enumerating the opponent's stop node and kind along every path."""
    total = 0.0
    for path in tree.paths():
        path_prob = tree.path_probability(path[-1])
        stop_dev = _first_stop(path, rule)
        alive = 1.0
        for k, node in enumerate(path):
            a, u, w = opponent[node]
            for opp_act, opp_p in ((StageAction.ATOM, a), (StageAction.UNIFORM, u)):
                if opp_p == 0.0:
                    continue
                stop_opp = (k, opp_act)
                if deviator == 1:
                    pair = _pure_path_payoff(payoffs, path, stop_dev, stop_opp, "forbid")
                    total += path_prob * alive * opp_p * pair.g1
                else:
                    pair = _pure_path_payoff(payoffs, path, stop_opp, stop_dev, "forbid")
                    total += path_prob * alive * opp_p * pair.g2
            alive *= w
            if alive == 0.0:
                break
        else:
            stop_opp = (len(path), None)
            if deviator == 1:
                pair = _pure_path_payoff(payoffs, path, stop_dev, stop_opp, "forbid")
                total += path_prob * alive * pair.g1
            else:
                pair = _pure_path_payoff(payoffs, path, stop_opp, stop_dev, "forbid")
                total += path_prob * alive * pair.g2
    return total


def brute_force_best_response(
    tree: EventTree,
    payoffs: PayoffProcess,
    opponent: dict[str, Mix],
    deviator: int,
) -> float:
    """Best-response value by enumerating every explicit stopping rule."""
    _check_size(tree)
    stoppers = (StageAction.ATOM, StageAction.EARLY, StageAction.LATE)
    best = None
    for rule in _stop_rules(tree, tree.root, stoppers):
        value = _rule_vs_behavioral(tree, payoffs, rule, opponent, deviator)
        if best is None or value > best:
            best = value
    assert best is not None
    return best


def brute_force_value(tree: EventTree, payoffs: PayoffProcess, player: int) -> float:
    """Sup-inf over explicit stopping rules of the auxiliary zero-sum game.

    Stops with no canonical order are resolved against the maximizer, which
    is the conservative reading of a minimizing opponent.
    """
    _check_size(tree)
    stoppers = (StageAction.ATOM, StageAction.EARLY, StageAction.LATE)
    ambiguous = "min1" if player == 1 else "min2"
    rules = list(_stop_rules(tree, tree.root, stoppers))
    best = None
    for mine in rules:
        worst = None
        for theirs in rules:
            if player == 1:
                pay = _rule_pair_payoff(tree, payoffs, mine, theirs, ambiguous).g1
            else:
                pay = _rule_pair_payoff(tree, payoffs, theirs, mine, ambiguous).g2
            if worst is None or pay < worst:
                worst = pay
        if best is None or worst > best:
            best = worst
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Invariant runner


def _worst(
    items: Iterator[tuple[str, float]],
) -> tuple[float, Optional[str]]:
    worst, witness = 0.0, None
    for node, violation in items:
        if violation > worst:
            worst, witness = violation, node
    return worst, witness


def check_invariants(
    tree: EventTree, payoffs: PayoffProcess, eta: float, tol: Optional[float] = None
) -> InvariantReport:
    """Run the named solver invariants and report worst violations."""
    tol = payoffs.tolerance() if tol is None else tol
    checks: list[InvariantCheck] = []
    values = {i: solve_value_process(tree, payoffs, i) for i in (1, 2)}
    hits = {i: hitting_time(tree, payoffs, values[i], eta, tol) for i in (1, 2)}

    def add(name: str, items: list[tuple[str, float]]) -> None:
        worst, witness = _worst(iter(items))
        checks.append(InvariantCheck(name, worst <= tol, worst, witness))

    for i in (1, 2):
        v = values[i].value
        x = payoffs.x1 if i == 1 else payoffs.x2
        y = payoffs.y1 if i == 1 else payoffs.y2
        z = payoffs.z1 if i == 1 else payoffs.z2
        add(
            f"value_lower_bound_p{i}",
            [(n, min(x[n], y[n]) - v[n]) for n in tree.nodes],
        )
        add(
            f"value_upper_bound_p{i}",
            [(n, v[n] - max(x[n], y[n])) for n in tree.nodes],
        )
        # an immediate opponent stop caps the value at max(opp-first, simultaneous)
        opp_cap = [
            (n, v[n] - max(opponent_first_payoff(payoffs, i, n), z[n])) for n in tree.nodes
        ]
        add(f"value_opponent_cap_p{i}", opp_cap)

    minimax = []
    for i in (1, 2):
        xi = payoffs.xi1 if i == 1 else payoffs.xi2
        for node in reversed(tree.nodes):
            if tree.is_leaf(node):
                cont = xi[node]
            else:
                cont = sum(p * values[i].value[child] for child, p in tree.children[node])
            primal, dual = stage_matrices(payoffs, node, cont, i)
            pv, _, _ = solve_matrix_game(primal)
            dv, _, _ = solve_matrix_game(dual)
            minimax.append((node, abs(pv - dv)))
    add("minimax_agreement", minimax)

    for i in (1, 2):
        v = values[i].value
        region = pre_hit_region(tree, hits[i])
        sub = [
            (n, v[n] - sum(p * v[c] for c, p in tree.children[n]))
            for n in region
            if not tree.is_leaf(n)
        ]
        add(f"submartingale_p{i}", sub)
        add(
            f"hit_condition_p{i}",
            [
                (q, (v[q] - eta) - stop_first_payoff(payoffs, i, q))
                for q in hits[i].antichain
            ],
        )
        add(
            f"pre_hit_ordering_p{i}",
            [
                (n, stop_first_payoff(payoffs, i, n) - opponent_first_payoff(payoffs, i, n))
                for n in region
            ],
        )
        add(f"expected_value_bound_p{i}", _expected_value_items(tree, payoffs, values[i], hits[i]))

    split_items = []
    for node in _split_sample(tree):
        stree, spay, _ = split_frame(tree, payoffs, node)
        for i in (1, 2):
            after = solve_value_process(stree, spay, i)
            for n in tree.nodes:
                split_items.append((n, abs(after.value[n] - values[i].value[n])))
    add("split_invariance", split_items)

    from .equilibrium import classify  # local import to avoid a module cycle

    try:
        classify(tree, payoffs, values[1], values[2], eta, tol)
        checks.append(InvariantCheck("classification_total", True, 0.0, None))
    except ModelViolationError as exc:
        checks.append(InvariantCheck("classification_total", False, float("inf"), str(exc)))
    return InvariantReport(checks)


def _split_sample(tree: EventTree) -> list[str]:
    if len(tree.nodes) <= 12:
        return list(tree.nodes)
    step = max(1, len(tree.nodes) // 6)
    return tree.nodes[::step]


def _expected_value_items(
    tree: EventTree, payoffs: PayoffProcess, value: ValueProcess, hitting: HittingTime
) -> list[tuple[str, float]]:
    """value(n) must not exceed the expected value at the hit, xi beyond it."""
    xi = payoffs.xi1 if value.player == 1 else payoffs.xi2
    hits = hitting.hits()
    target: dict[str, float] = {}
    items: list[tuple[str, float]] = []
    region = set(pre_hit_region(tree, hitting)) | hits
    for node in reversed(tree.nodes):
        if node not in region:
            continue
        if node in hits:
            target[node] = value.value[node]
        elif tree.is_leaf(node):
            target[node] = xi[node]
        else:
            target[node] = sum(p * target[c] for c, p in tree.children[node])
        items.append((node, value.value[node] - target[node]))
    return items
