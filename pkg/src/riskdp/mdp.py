"""Finite-horizon MDPs with stagewise risk objectives.

The solver runs one backward induction per instance: the terminal row is
zero, and each earlier cell applies that stage's risk functional to the
one-step distribution of cost plus discounted continuation value,
minimizing over actions.  A brute-force policy enumeration built on the
scenario-tree evaluator serves as an independent oracle.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Tuple

from .distributions import MixedDistribution, PointMass
from .errors import EnumerationLimitError, ValidationError
from .measures import evaluate
from .tree import Edge, IrmSpec, ScenarioTree, TreeNode, irm_root_value

PROB_TOL = 1e-12
DEFAULT_NODE_LIMIT = 10**6
DEFAULT_POLICY_LIMIT = 10**6

State = Any
Action = Any
ValueTable = Dict[Tuple[int, State], float]
Policy = Dict[Tuple[int, State], Action]


@dataclass(frozen=True)
class Transition:
    """One outcome of playing an action: target state, probability, and
    the cost incurred on the way (a function of source, action, target).
    """

    state: State
    probability: float
    cost: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "probability", float(self.probability))
        object.__setattr__(self, "cost", float(self.cost))
        if not math.isfinite(self.probability) or self.probability < 0.0:
            raise ValidationError(
                f"transition probability {self.probability!r} must be >= 0"
            )
        if not math.isfinite(self.cost):
            raise ValidationError(f"transition cost {self.cost!r} must be finite")


@dataclass(frozen=True)
class FiniteHorizonMdp:
    """Stage-indexed states, shared action set, sparse transition tables.

    transitions maps (stage, state, action) to the outcomes of that
    action; an absent key means the action is unavailable there.  Every
    nonterminal state must offer at least one action.
    """

    horizon: int
    states: Tuple[Tuple[State, ...], ...]
    actions: Tuple[Action, ...]
    initial: State
    discount: float
    transitions: Mapping[Tuple[int, State, Action], Tuple[Transition, ...]]

    def __post_init__(self) -> None:
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValidationError("horizon must be an integer >= 1")
        states = tuple(tuple(row) for row in self.states)
        object.__setattr__(self, "states", states)
        if len(states) != self.horizon + 1:
            raise ValidationError(
                f"need {self.horizon + 1} state rows for horizon {self.horizon}, "
                f"got {len(states)}"
            )
        for n, row in enumerate(states):
            if not row:
                raise ValidationError(f"stage {n} has no states")
            if len(set(row)) != len(row):
                raise ValidationError(f"stage {n} lists a state twice")
        actions = tuple(self.actions)
        object.__setattr__(self, "actions", actions)
        if not actions:
            raise ValidationError("action set is empty")
        if len(set(actions)) != len(actions):
            raise ValidationError("action set lists an action twice")
        if self.initial not in states[0]:
            raise ValidationError(f"initial state {self.initial!r} is not in stage 0")
        discount = float(self.discount)
        object.__setattr__(self, "discount", discount)
        if not math.isfinite(discount) or not 0.0 < discount <= 1.0:
            raise ValidationError(
                f"discount factor must lie in (0, 1], got {discount!r}"
            )
        table = {}
        for key, outs in dict(self.transitions).items():
            try:
                n, s, a = key
            except (TypeError, ValueError):
                raise ValidationError(
                    f"transition key {key!r} must be (stage, state, action)"
                ) from None
            if not isinstance(n, int) or not 0 <= n < self.horizon:
                raise ValidationError(f"transition stage {n!r} out of range")
            if s not in states[n]:
                raise ValidationError(f"state {s!r} is not in stage {n}")
            if a not in actions:
                raise ValidationError(f"action {a!r} is not in the action set")
            outs = tuple(outs)
            if not outs:
                raise ValidationError(f"({n}, {s!r}, {a!r}) has no outcomes")
            targets = set()
            for t in outs:
                if not isinstance(t, Transition):
                    raise ValidationError(f"{t!r} is not a Transition")
                if t.state not in states[n + 1]:
                    raise ValidationError(
                        f"target {t.state!r} of ({n}, {s!r}, {a!r}) is not in stage {n + 1}"
                    )
                if t.state in targets:
                    raise ValidationError(
                        f"({n}, {s!r}, {a!r}) lists target {t.state!r} twice; "
                        "the cost must be a function of (source, action, target)"
                    )
                targets.add(t.state)
            total = math.fsum(t.probability for t in outs)
            if abs(total - 1.0) > PROB_TOL:
                raise ValidationError(
                    f"probabilities of ({n}, {s!r}, {a!r}) sum to {total!r}; "
                    f"must be 1 within {PROB_TOL}"
                )
            table[(n, s, a)] = outs
        object.__setattr__(self, "transitions", table)
        for n in range(self.horizon):
            for s in states[n]:
                if not any((n, s, a) in table for a in actions):
                    raise ValidationError(
                        f"state {s!r} at stage {n} offers no action"
                    )

    def actions_at(self, n: int, s: State) -> Tuple[Action, ...]:
        """Available actions at (n, s), in action-set order."""
        return tuple(a for a in self.actions if (n, s, a) in self.transitions)

    def reachable(self) -> List[Tuple[int, State]]:
        """(stage, state) pairs reachable from the initial state under
        any action sequence, in backward-induction-friendly order.
        """
        frontier = {self.initial}
        out: List[Tuple[int, State]] = []
        for n in range(self.horizon + 1):
            order = [s for s in self.states[n] if s in frontier]
            out.extend((n, s) for s in order)
            if n == self.horizon:
                break
            nxt = set()
            for s in order:
                for a in self.actions_at(n, s):
                    for t in self.transitions[(n, s, a)]:
                        if t.probability > 0.0:
                            nxt.add(t.state)
            frontier = nxt
        return out


class SolveResult(NamedTuple):
    values: ValueTable
    policy: Policy


def _one_step_distribution(
    outs: Tuple[Transition, ...], lam: float, continuation: ValueTable, n: int
) -> MixedDistribution:
    parts = tuple(
        (t.probability, PointMass(t.cost + lam * continuation[(n + 1, t.state)]))
        for t in outs
        if t.probability > 0.0
    )
    return MixedDistribution._trusted(parts)


def _check_spec(mdp: FiniteHorizonMdp, spec: IrmSpec) -> None:
    if not isinstance(spec, IrmSpec):
        raise ValidationError("spec must be an IrmSpec")
    if len(spec.stages) != mdp.horizon:
        raise ValidationError(
            f"spec has {len(spec.stages)} stages but the horizon is {mdp.horizon}"
        )


def solve_dp(mdp: FiniteHorizonMdp, spec: IrmSpec) -> SolveResult:
    """Backward induction over all states; ties go to the lowest action
    index.  Values at states unreachable from the initial state are still
    the optimal tail values from there.
    """
    _check_spec(mdp, spec)
    lam = mdp.discount
    values: ValueTable = {(mdp.horizon, s): 0.0 for s in mdp.states[mdp.horizon]}
    policy: Policy = {}
    for n in range(mdp.horizon - 1, -1, -1):
        rf = spec.stages[n]
        for s in mdp.states[n]:
            best_v: Optional[float] = None
            best_a: Optional[Action] = None
            for a in mdp.actions:
                outs = mdp.transitions.get((n, s, a))
                if outs is None:
                    continue
                v = evaluate(rf, _one_step_distribution(outs, lam, values, n))
                if best_v is None or v < best_v:
                    best_v, best_a = v, a
            values[(n, s)] = best_v
            policy[(n, s)] = best_a
    return SolveResult(values=values, policy=policy)


def evaluate_policy(mdp: FiniteHorizonMdp, policy: Policy, spec: IrmSpec) -> ValueTable:
    """The solve_dp recursion with the action pinned by the policy.

    Covers exactly the states the policy covers; a covered state whose
    successors are uncovered is an error, so the policy must be closed
    under its own transitions.
    """
    _check_spec(mdp, spec)
    lam = mdp.discount
    values: ValueTable = {(mdp.horizon, s): 0.0 for s in mdp.states[mdp.horizon]}
    for n in range(mdp.horizon - 1, -1, -1):
        rf = spec.stages[n]
        for s in mdp.states[n]:
            if (n, s) not in policy:
                continue
            a = policy[(n, s)]
            outs = mdp.transitions.get((n, s, a))
            if outs is None:
                raise ValidationError(
                    f"policy plays unavailable action {a!r} at stage {n}, state {s!r}"
                )
            try:
                dist = _one_step_distribution(outs, lam, values, n)
            except KeyError as exc:
                raise ValidationError(
                    f"policy covers stage {n}, state {s!r} but not its successor {exc.args[0][1]!r}"
                ) from None
            values[(n, s)] = evaluate(rf, dist)
    if (0, mdp.initial) not in values:
        raise ValidationError("policy does not cover the initial state")
    return values


def unroll(
    mdp: FiniteHorizonMdp,
    policy: Policy,
    *,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> ScenarioTree:
    """Scenario tree of the chain induced by a policy from the initial
    state.  Zero-probability branches are dropped.
    """
    count = 0

    def build(n: int, s: State) -> TreeNode:
        nonlocal count
        count += 1
        if count > node_limit:
            raise EnumerationLimitError(
                f"unrolled tree exceeds {node_limit} nodes"
            )
        if n == mdp.horizon:
            return TreeNode(stage=n, edges=())
        if (n, s) not in policy:
            raise ValidationError(
                f"policy has no action at stage {n}, state {s!r}"
            )
        a = policy[(n, s)]
        outs = mdp.transitions.get((n, s, a))
        if outs is None:
            raise ValidationError(
                f"policy plays unavailable action {a!r} at stage {n}, state {s!r}"
            )
        edges = tuple(
            Edge(probability=t.probability, cost=t.cost, child=build(n + 1, t.state))
            for t in outs
            if t.probability > 0.0
        )
        return TreeNode(stage=n, edges=edges)

    return ScenarioTree._trusted(mdp.horizon, build(0, mdp.initial))


def brute_force_optimal(
    mdp: FiniteHorizonMdp,
    spec: IrmSpec,
    *,
    policy_limit: int = DEFAULT_POLICY_LIMIT,
) -> Tuple[float, Policy]:
    """Score every deterministic stagewise policy through the tree
    evaluator and keep the best; ties go to the policy assigning the
    lowest action indexes (in reachable-state order).

    Independent of solve_dp by construction: the tree route enumerates
    scenarios forward, the solver folds values backward.
    """
    _check_spec(mdp, spec)
    slots = [(n, s) for n, s in mdp.reachable() if n < mdp.horizon]
    choices = [mdp.actions_at(n, s) for n, s in slots]
    total = 1
    for c in choices:
        total *= len(c)
        if total > policy_limit:
            raise EnumerationLimitError(
                f"more than {policy_limit} deterministic policies to enumerate"
            )
    best_value: Optional[float] = None
    best_policy: Optional[Policy] = None
    for assignment in itertools.product(*choices):
        policy = dict(zip(slots, assignment))
        value = irm_root_value(unroll(mdp, policy), spec, mdp.discount)
        if best_value is None or value < best_value:
            best_value, best_policy = value, policy
    return best_value, best_policy


def tail_mdp(mdp: FiniteHorizonMdp, n: int, s: State) -> FiniteHorizonMdp:
    """Sub-problem rooted at (n, s), with stages shifted down by n and
    states pruned to those reachable from s.
    """
    if not isinstance(n, int) or not 0 <= n < mdp.horizon:
        raise ValidationError(f"stage {n!r} out of range for the tail problem")
    if s not in mdp.states[n]:
        raise ValidationError(f"state {s!r} is not in stage {n}")
    keep: List[Tuple[State, ...]] = []
    frontier = {s}
    for k in range(n, mdp.horizon + 1):
        row = tuple(x for x in mdp.states[k] if x in frontier)
        keep.append(row)
        if k == mdp.horizon:
            break
        nxt = set()
        for x in row:
            for a in mdp.actions_at(k, x):
                for t in mdp.transitions[(k, x, a)]:
                    if t.probability > 0.0:
                        nxt.add(t.state)
        frontier = nxt
    transitions = {}
    for k, row in enumerate(keep[:-1]):
        for x in row:
            for a in mdp.actions_at(n + k, x):
                outs = mdp.transitions[(n + k, x, a)]
                transitions[(k, x, a)] = tuple(
                    t for t in outs if t.probability > 0.0
                )
    return FiniteHorizonMdp(
        horizon=mdp.horizon - n,
        states=tuple(keep),
        actions=mdp.actions,
        initial=s,
        discount=mdp.discount,
        transitions=transitions,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def mdp_to_json_dict(mdp: FiniteHorizonMdp) -> dict:
    entries = []
    for n in range(mdp.horizon):
        for s in mdp.states[n]:
            for a in mdp.actions:
                outs = mdp.transitions.get((n, s, a))
                if outs is None:
                    continue
                entries.append(
                    {
                        "n": n,
                        "s": s,
                        "a": a,
                        "to": [
                            {"s'": t.state, "p": t.probability, "r": t.cost}
                            for t in outs
                        ],
                    }
                )
    return {
        "horizon": mdp.horizon,
        "states": [list(row) for row in mdp.states],
        "actions": list(mdp.actions),
        "initial": mdp.initial,
        "lambda": mdp.discount,
        "transitions": entries,
    }


def mdp_from_json_dict(data: dict) -> FiniteHorizonMdp:
    if not isinstance(data, dict):
        raise ValidationError("MDP JSON must be an object")
    required = {"horizon", "states", "actions", "initial", "lambda", "transitions"}
    missing = required - set(data)
    if missing:
        raise ValidationError(f"MDP JSON is missing {sorted(missing)}")
    states = data["states"]
    if not isinstance(states, list) or not all(isinstance(r, list) for r in states):
        raise ValidationError("'states' must be a list of per-stage lists")
    entries = data["transitions"]
    if not isinstance(entries, list):
        raise ValidationError("'transitions' must be a list")
    transitions: Dict[Tuple[int, State, Action], Tuple[Transition, ...]] = {}
    for entry in entries:
        if not isinstance(entry, dict) or not {"n", "s", "a", "to"} <= set(entry):
            raise ValidationError(
                "each transition entry must be {'n':, 's':, 'a':, 'to':}"
            )
        key = (entry["n"], entry["s"], entry["a"])
        if key in transitions:
            raise ValidationError(f"transition entry {key!r} appears twice")
        outs = entry["to"]
        if not isinstance(outs, list):
            raise ValidationError("'to' must be a list")
        parsed = []
        for o in outs:
            if not isinstance(o, dict) or not {"s'", "p", "r"} <= set(o):
                raise ValidationError("each outcome must be {\"s'\":, 'p':, 'r':}")
            parsed.append(Transition(state=o["s'"], probability=o["p"], cost=o["r"]))
        transitions[key] = tuple(parsed)
    return FiniteHorizonMdp(
        horizon=data["horizon"],
        states=tuple(tuple(r) for r in states),
        actions=tuple(data["actions"]),
        initial=data["initial"],
        discount=data["lambda"],
        transitions=transitions,
    )


def solution_to_json_dict(
    mdp: FiniteHorizonMdp, values: ValueTable, policy: Policy
) -> dict:
    """Wire format for solver output: the full value table, the policy,
    and one representative trajectory (always stepping to the most
    probable successor, earliest listed on ties).
    """
    value_rows = []
    for n in range(mdp.horizon + 1):
        for s in mdp.states[n]:
            if (n, s) in values:
                value_rows.append({"n": n, "s": s, "v": values[(n, s)]})
    policy_rows = []
    for n in range(mdp.horizon):
        for s in mdp.states[n]:
            if (n, s) in policy:
                policy_rows.append({"n": n, "s": s, "a": policy[(n, s)]})
    trace = []
    s = mdp.initial
    for n in range(mdp.horizon):
        if (n, s) not in policy:
            break
        a = policy[(n, s)]
        trace.append({"n": n, "s": s, "a": a})
        outs = mdp.transitions[(n, s, a)]
        s = max(outs, key=lambda t: t.probability).state
    return {"value_table": value_rows, "policy": policy_rows, "trace": trace}
