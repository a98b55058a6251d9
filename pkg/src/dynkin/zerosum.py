"""Auxiliary zero-sum games: value processes, hitting times, optimal stage play.

For each player i the auxiliary game uses only player i's payoffs: i maximizes
while the opponent minimizes.  Values are found by backward induction over
one-frame stage games; the protagonist mixes over (atom, uniform, wait) while
the antagonist's pure within-frame stops reduce to (atom, early, late, wait).
Both orientations of each stage game are solved and must agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .core import (
    DEVIATOR_ACTIONS,
    EventTree,
    Mix,
    ModelViolationError,
    ConvexityError,
    PayoffPair,
    PayoffProcess,
    PLAYER_ACTIONS,
    StageAction,
    ATOM_MIX,
    UNIFORM_MIX,
    WAIT_MIX,
    outcome_kernel,
    require_valid,
)

Matrix = tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class SolverParams:
    """User-facing knobs: hitting slack, numeric tolerance, audit seed."""

    eta: float = 0.05
    tol: float = 1e-9
    seed: int = 0


@dataclass
class ValueProcess:
    """Per-node zero-sum value with optimal stage mixes for both sides."""

    player: int
    value: dict[str, float]
    max_mix: dict[str, Mix]
    min_mix: dict[str, Mix]


@dataclass
class HittingTime:
    """First nodes, per path, where a player's stop-first payoff is within
    ``eta`` of the value; paths that never qualify are recorded by their leaf."""

    player: int
    eta: float
    antichain: tuple[str, ...]
    infinite_leaves: tuple[str, ...]

    def hits(self) -> set[str]:
        return set(self.antichain)


def stage_matrices(
    payoffs: PayoffProcess, node: str, continuation: float, player: int
) -> tuple[Matrix, Matrix]:
    """Both orientations of the one-frame game for the given protagonist.

    Primal: protagonist mixes rows (atom, uniform, wait) against the
    antagonist's pure columns (atom, early, late, wait).  Dual: the roles are
    transposed, the antagonist mixing (atom, uniform, wait) columns against
    protagonist pure rows.
    """
    cont = PayoffPair(continuation, continuation)

    def entry(a1: StageAction, a2: StageAction) -> float:
        pair = outcome_kernel(a1, a2, payoffs, node, continuation=cont)
        return pair.g1 if player == 1 else pair.g2

    if player == 1:
        primal = tuple(tuple(entry(r, c) for c in DEVIATOR_ACTIONS) for r in PLAYER_ACTIONS)
        dual = tuple(tuple(entry(r, c) for c in PLAYER_ACTIONS) for r in DEVIATOR_ACTIONS)
    elif player == 2:
        primal = tuple(tuple(entry(c, r) for c in DEVIATOR_ACTIONS) for r in PLAYER_ACTIONS)
        dual = tuple(tuple(entry(c, r) for c in PLAYER_ACTIONS) for r in DEVIATOR_ACTIONS)
    else:
        raise ValueError(f"player must be 1 or 2, got {player}")
    return primal, dual


def solve_matrix_game(matrix: Sequence[Sequence[float]]) -> tuple[float, tuple[float, ...], tuple[float, ...]]:
    """Exact value and one optimal mix per side of a zero-sum matrix game.

    The row player maximizes.  A pure saddle point, when present, is taken
    with ties broken toward the lowest index; otherwise small supports are
    enumerated in lexicographic order with exact rational arithmetic, so the
    result is deterministic.
    """
    rows = [tuple(r) for r in matrix]
    m = len(rows)
    n = len(rows[0])
    row_guarantee = [min(r) for r in rows]
    col_exposure = [max(rows[i][j] for i in range(m)) for j in range(n)]
    lower = max(row_guarantee)
    upper = min(col_exposure)
    if lower == upper:
        r = row_guarantee.index(lower)
        c = col_exposure.index(upper)
        row_mix = tuple(1.0 if i == r else 0.0 for i in range(m))
        col_mix = tuple(1.0 if j == c else 0.0 for j in range(n))
        return lower, row_mix, col_mix
    return _solve_matrix_game_exact(rows)


def _solve_linear(system: list[list[Fraction]]) -> Optional[list[Fraction]]:
    """Gaussian elimination on an augmented rational system; None if singular."""
    k = len(system)
    a = [row[:] for row in system]
    for col in range(k):
        pivot = next((r for r in range(col, k) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        a[col] = [x / inv for x in a[col]]
        for r in range(k):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[r][k] for r in range(k)]


def _equalizing_mix(
    mat: list[list[Fraction]], support: tuple[int, ...], targets: tuple[int, ...], by_rows: bool
) -> Optional[tuple[list[Fraction], Fraction]]:
    """Weights on ``support`` making every ``targets`` line payoff-equal."""
    k = len(support)
    system: list[list[Fraction]] = []
    for t in targets:
        row = [mat[i][t] if by_rows else mat[t][i] for i in support]
        system.append(row + [Fraction(-1), Fraction(0)])
    system.append([Fraction(1)] * k + [Fraction(0), Fraction(1)])
    sol = _solve_linear(system)
    if sol is None:
        return None
    return sol[:k], sol[k]


def _solve_matrix_game_exact(rows: list[tuple[float, ...]]) -> tuple[float, tuple[float, ...], tuple[float, ...]]:
    m = len(rows)
    n = len(rows[0])
    mat = [[Fraction(x) for x in row] for row in rows]
    for k in range(1, min(m, n) + 1):
        for support_r in combinations(range(m), k):
            for support_c in combinations(range(n), k):
                sigma = _equalizing_mix(mat, support_r, support_c, by_rows=True)
                tau = _equalizing_mix(mat, support_c, support_r, by_rows=False)
                if sigma is None or tau is None:
                    continue
                sw, sv = sigma
                tw, tv = tau
                if sv != tv:
                    continue
                if any(w < 0 for w in sw) or any(w < 0 for w in tw):
                    continue
                if any(
                    sum(w * mat[i][j] for w, i in zip(sw, support_r)) < sv
                    for j in range(n)
                ):
                    continue
                if any(
                    sum(w * mat[i][j] for w, j in zip(tw, support_c)) > sv
                    for i in range(m)
                ):
                    continue
                row_mix = [0.0] * m
                for w, i in zip(sw, support_r):
                    row_mix[i] = float(w)
                col_mix = [0.0] * n
                for w, j in zip(tw, support_c):
                    col_mix[j] = float(w)
                return float(sv), tuple(row_mix), tuple(col_mix)
    raise ModelViolationError("matrix game has no optimal pair on any square support")


def stage_value(primal: Matrix, dual: Matrix, tol: float) -> tuple[float, Mix, Mix]:
    """Common value of both stage-game orientations, with one mix per side.

    ``tol`` is the absolute disagreement allowed between the two orientations;
    anything larger is a model violation, not a user error.
    """
    primal_value, max_mix, _ = solve_matrix_game(primal)
    dual_value, _, min_mix = solve_matrix_game(dual)
    if abs(primal_value - dual_value) > tol:
        raise ModelViolationError(
            f"stage game orientations disagree: {primal_value!r} vs {dual_value!r}"
        )
    return primal_value, tuple(max_mix), tuple(min_mix)  # type: ignore[return-value]


def solve_value_process(
    tree: EventTree, payoffs: PayoffProcess, player: int, tol: Optional[float] = None
) -> ValueProcess:
    """Backward induction of the auxiliary zero-sum value for one player."""
    require_valid(tree, payoffs)
    abs_tol = payoffs.tolerance() if tol is None else tol * max(1.0, payoffs.payoff_range)
    xi = payoffs.xi1 if player == 1 else payoffs.xi2
    value: dict[str, float] = {}
    max_mix: dict[str, Mix] = {}
    min_mix: dict[str, Mix] = {}
    for node in reversed(tree.nodes):
        if tree.is_leaf(node):
            cont = xi[node]
        else:
            cont = sum(p * value[child] for child, p in tree.children[node])
        primal, dual = stage_matrices(payoffs, node, cont, player)
        v, mx, mn = stage_value(primal, dual, abs_tol)
        value[node] = v
        max_mix[node] = mx
        min_mix[node] = mn
    return ValueProcess(player=player, value=value, max_mix=max_mix, min_mix=min_mix)


def stop_first_payoff(payoffs: PayoffProcess, player: int, node: str) -> float:
    """Payoff to ``player`` when they alone stop first at ``node``."""
    return payoffs.x1[node] if player == 1 else payoffs.y2[node]


def opponent_first_payoff(payoffs: PayoffProcess, player: int, node: str) -> float:
    """Payoff to ``player`` when the opponent alone stops first at ``node``."""
    return payoffs.y1[node] if player == 1 else payoffs.x2[node]


def simultaneous_payoff(payoffs: PayoffProcess, player: int, node: str) -> float:
    return payoffs.z1[node] if player == 1 else payoffs.z2[node]


def hitting_time(
    tree: EventTree,
    payoffs: PayoffProcess,
    value: ValueProcess,
    eta: float,
    tol: Optional[float] = None,
) -> HittingTime:
    """First node per path where the stop-first payoff reaches value - eta."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    tol = payoffs.tolerance() if tol is None else tol
    player = value.player
    antichain: list[str] = []
    infinite: list[str] = []
    stack = [tree.root]
    while stack:
        node = stack.pop(0)
        own = stop_first_payoff(payoffs, player, node)
        if own - (value.value[node] - eta) >= -tol:
            antichain.append(node)
        elif tree.is_leaf(node):
            infinite.append(node)
        else:
            stack.extend(child for child, _ in tree.children[node])
    return HittingTime(player=player, eta=eta, antichain=tuple(antichain), infinite_leaves=tuple(infinite))


def pre_hit_region(tree: EventTree, hitting: HittingTime) -> list[str]:
    """Nodes visited before the antichain, including whole never-hit paths."""
    hits = hitting.hits()
    region: list[str] = []
    stack = [tree.root]
    while stack:
        node = stack.pop(0)
        if node in hits:
            continue
        region.append(node)
        stack.extend(child for child, _ in tree.children.get(node, ()))
    return region


def _stop_action(
    payoffs: PayoffProcess, value: ValueProcess, node: str, eta: float, tol: float
) -> Mix:
    # The delay masks the stop unless the opponent-first payoff is too small,
    # in which case the simultaneous payoff must carry the guarantee.
    opp = opponent_first_payoff(payoffs, value.player, node)
    if (value.value[node] - eta) - opp > tol:
        return ATOM_MIX
    return UNIFORM_MIX


def simple_optimal_strategy(
    tree: EventTree,
    payoffs: PayoffProcess,
    value: ValueProcess,
    hitting: HittingTime,
    eta: float,
    tol: Optional[float] = None,
) -> dict[str, Mix]:
    """One player's guarantee strategy: wait to the hitting antichain, then
    stop there with an atom or a one-frame uniform delay.

    Against any opponent play, the best the opponent can push this player
    below is value(root) - eta, up to tolerance; the fragment covers the whole
    tree (waiting on never-hit paths and below the antichain).
    """
    if hitting.player != value.player:
        raise ValueError("hitting time and value process belong to different players")
    tol = payoffs.tolerance() if tol is None else tol
    fragment = {n: WAIT_MIX for n in tree.nodes}
    for q in hitting.antichain:
        fragment[q] = _stop_action(payoffs, value, q, eta, tol)
    return fragment


def punishment_strategy(
    tree: EventTree,
    payoffs: PayoffProcess,
    punisher: int,
    node: str,
    value: Optional[ValueProcess] = None,
    tol: Optional[float] = None,
) -> dict[str, Mix]:
    """Minimizing stage play holding the opponent to their value on a subtree.

    ``value`` must be (or will be solved as) the opponent's value process; the
    punisher is the minimizer there.
    """
    target = 3 - punisher
    if value is None:
        value = solve_value_process(tree, payoffs, target, tol)
    if value.player != target:
        raise ValueError(f"value process is for player {value.player}, expected {target}")
    return {n: value.min_mix[n] for n in tree.subtree(node)}


def check_convexity(payoffs: PayoffProcess, tree: EventTree, player: int, tol: float) -> None:
    """Require Z to lie weakly between X and Y for the player at every node."""
    x, y, z = (
        (payoffs.x1, payoffs.y1, payoffs.z1)
        if player == 1
        else (payoffs.x2, payoffs.y2, payoffs.z2)
    )
    for node in tree.nodes:
        lo = min(x[node], y[node])
        hi = max(x[node], y[node])
        if z[node] < lo - tol or z[node] > hi + tol:
            raise ConvexityError(
                f"node {node}: Z{player}={z[node]!r} outside [{lo!r}, {hi!r}] for player {player}"
            )


def pure_optimal_strategy(
    tree: EventTree,
    payoffs: PayoffProcess,
    value: ValueProcess,
    hitting: HittingTime,
    eta: float,
    tol: Optional[float] = None,
) -> dict[str, Mix]:
    """Deterministic variant of the guarantee strategy: atoms at the antichain.

    Sound only when the simultaneous payoff lies between the two unilateral
    ones at every node, which is checked.
    """
    tol = payoffs.tolerance() if tol is None else tol
    check_convexity(payoffs, tree, value.player, tol)
    fragment = {n: WAIT_MIX for n in tree.nodes}
    for q in hitting.antichain:
        fragment[q] = ATOM_MIX
    return fragment
