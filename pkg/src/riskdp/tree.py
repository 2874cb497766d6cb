"""Scenario trees, iterated risk evaluation, and path-sum distributions.

A scenario tree carries per-period costs on its edges.  Two ways of
scoring it live here: the stagewise recursion that applies a risk
functional at every node (folding discounted continuation values into
the current period's cost), and the flat route that builds the single
distribution of the discounted total cost and applies one measure or
disutility to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .distributions import (
    MixedDistribution,
    PointMass,
    UniformSegment,
    affine_transform,
    merge_atoms,
)
from .errors import EnumerationLimitError, ValidationError
from .measures import (
    DisutilityFunction,
    RF_CLASSES,
    RiskFunctional,
    evaluate,
    pushforward_mean,
)

PROB_TOL = 1e-12
DEFAULT_PATH_LIMIT = 10**7

EdgeCost = Union[float, MixedDistribution]


@dataclass(frozen=True)
class Edge:
    """One branch out of a node: probability, the period cost incurred on
    the way down, and the child node.

    A distribution-valued cost models a conditional continuous law on the
    branch; a plain float is a degenerate cost.
    """

    probability: float
    cost: EdgeCost
    child: "TreeNode"


@dataclass(frozen=True)
class TreeNode:
    stage: int
    edges: Tuple[Edge, ...]

    @property
    def is_leaf(self) -> bool:
        return not self.edges


@dataclass(frozen=True)
class ScenarioTree:
    """A strict finite tree with every root-to-leaf path the same length.

    Strict means no node object is reachable twice; sharing would make
    the per-node value table ambiguous.
    """

    horizon: int
    root: TreeNode

    def __post_init__(self) -> None:
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValidationError("horizon must be an integer >= 1")
        if self.root.stage != 0:
            raise ValidationError("root must sit at stage 0")
        seen: set = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                raise ValidationError("tree nodes must not be shared")
            seen.add(id(node))
            if node.is_leaf:
                if node.stage != self.horizon:
                    raise ValidationError(
                        f"leaf at stage {node.stage} but horizon is {self.horizon}"
                    )
                continue
            if node.stage >= self.horizon:
                raise ValidationError(
                    f"internal node at stage {node.stage} exceeds horizon"
                )
            total = math.fsum(e.probability for e in node.edges)
            for e in node.edges:
                if not math.isfinite(e.probability) or e.probability <= 0.0:
                    raise ValidationError(
                        f"edge probability {e.probability!r} must be positive"
                    )
                if isinstance(e.cost, MixedDistribution):
                    pass
                elif isinstance(e.cost, (int, float)) and not isinstance(e.cost, bool):
                    if not math.isfinite(e.cost):
                        raise ValidationError(f"edge cost {e.cost!r} must be finite")
                else:
                    raise ValidationError(
                        f"edge cost must be a number or a MixedDistribution, got {e.cost!r}"
                    )
                if e.child.stage != node.stage + 1:
                    raise ValidationError(
                        f"child at stage {e.child.stage} under a stage-{node.stage} node"
                    )
                stack.append(e.child)
            if abs(total - 1.0) > PROB_TOL:
                raise ValidationError(
                    f"edge probabilities sum to {total!r}; must be 1 within {PROB_TOL}"
                )

    @classmethod
    def _trusted(cls, horizon: int, root: TreeNode) -> "ScenarioTree":
        tree = object.__new__(cls)
        object.__setattr__(tree, "horizon", horizon)
        object.__setattr__(tree, "root", root)
        return tree

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(e.child for e in node.edges)
        return count

    def path_count(self) -> int:
        def leaves(node: TreeNode) -> int:
            if node.is_leaf:
                return 1
            return sum(leaves(e.child) for e in node.edges)

        return leaves(self.root)


def deterministic_tree(costs: Sequence[EdgeCost]) -> ScenarioTree:
    """A single-path tree: one edge per period, probability one each."""
    costs = list(costs)
    if not costs:
        raise ValidationError("deterministic_tree needs at least one period cost")
    node = TreeNode(stage=len(costs), edges=())
    for n in range(len(costs) - 1, -1, -1):
        node = TreeNode(stage=n, edges=(Edge(1.0, costs[n], node),))
    return ScenarioTree(horizon=len(costs), root=node)


# ---------------------------------------------------------------------------
# tree serialization
# ---------------------------------------------------------------------------


def _cost_to_json(cost: EdgeCost):
    if isinstance(cost, MixedDistribution):
        return cost.to_json_dict()
    return cost


def _cost_from_json(data) -> EdgeCost:
    if isinstance(data, dict):
        return MixedDistribution.from_json_dict(data)
    if isinstance(data, (int, float)) and not isinstance(data, bool):
        return float(data)
    raise ValidationError(f"edge cost JSON must be a number or a distribution, got {data!r}")


def _node_to_json(node: TreeNode) -> dict:
    return {
        "children": [
            {"p": e.probability, "cost": _cost_to_json(e.cost), "node": _node_to_json(e.child)}
            for e in node.edges
        ]
    }


def _node_from_json(data: dict, stage: int) -> TreeNode:
    if not isinstance(data, dict) or "children" not in data:
        raise ValidationError("tree node JSON must be an object with 'children'")
    edges = []
    for entry in data["children"]:
        if not isinstance(entry, dict) or not {"p", "cost", "node"} <= set(entry):
            raise ValidationError("tree edges must be {'p':, 'cost':, 'node':} objects")
        edges.append(
            Edge(
                probability=float(entry["p"]),
                cost=_cost_from_json(entry["cost"]),
                child=_node_from_json(entry["node"], stage + 1),
            )
        )
    return TreeNode(stage=stage, edges=tuple(edges))


def tree_to_json_dict(tree: ScenarioTree) -> dict:
    return {"horizon": tree.horizon, "root": _node_to_json(tree.root)}


def tree_from_json_dict(data: dict) -> ScenarioTree:
    if not isinstance(data, dict) or "horizon" not in data or "root" not in data:
        raise ValidationError("tree JSON must be an object with 'horizon' and 'root'")
    horizon = data["horizon"]
    if not isinstance(horizon, int):
        raise ValidationError("tree horizon must be an integer")
    return ScenarioTree(horizon=horizon, root=_node_from_json(data["root"], 0))


# ---------------------------------------------------------------------------
# stagewise (iterated) evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IrmSpec:
    """One risk functional per decision period, applied innermost-last."""

    stages: Tuple[RiskFunctional, ...]

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValidationError("IrmSpec needs at least one stage")
        for rf in self.stages:
            if not isinstance(rf, RF_CLASSES):
                raise ValidationError(f"IrmSpec stage {rf!r} is not a risk functional")

    @classmethod
    def repeat(cls, rf: RiskFunctional, horizon: int) -> "IrmSpec":
        if not isinstance(horizon, int) or horizon < 1:
            raise ValidationError("horizon must be an integer >= 1")
        return cls(stages=(rf,) * horizon)

    def __len__(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class IrmResult:
    root_value: float
    node_values: Dict[Tuple[int, ...], float]


def _check_discount(lam: float) -> float:
    lam = float(lam)
    if not math.isfinite(lam) or not 0.0 <= lam <= 1.0:
        raise ValidationError(f"discount factor must lie in [0, 1], got {lam!r}")
    return lam


def _edge_value_dist(edge: Edge, shift: float) -> MixedDistribution:
    """Distribution of cost + shift along one edge."""
    if isinstance(edge.cost, MixedDistribution):
        if shift == 0.0:
            return edge.cost
        return affine_transform(edge.cost, 1.0, shift)
    return MixedDistribution.point(edge.cost + shift)


def _node_value_dist(node: TreeNode, lam: float, child_values: Sequence[float]) -> MixedDistribution:
    """Mixture over edges of cost + lam * (child continuation value)."""
    parts = []
    for e, v in zip(node.edges, child_values):
        d = _edge_value_dist(e, lam * v)
        for w, o in d.components:
            parts.append((e.probability * w, o))
    return MixedDistribution._trusted(tuple(parts))


def irm_evaluate(tree: ScenarioTree, spec: IrmSpec, lam: float) -> IrmResult:
    """Backward recursion over the tree, recording every node value.

    Leaves are worth zero; an internal node at period n applies the
    period-n functional to the mixture of its branch costs plus the
    discounted child values.  Node keys are child-index paths from the
    root, the root being the empty tuple.
    """
    lam = _check_discount(lam)
    if len(spec.stages) != tree.horizon:
        raise ValidationError(
            f"spec has {len(spec.stages)} stages but the tree horizon is {tree.horizon}"
        )
    values: Dict[Tuple[int, ...], float] = {}

    def visit(node: TreeNode, key: Tuple[int, ...]) -> float:
        if node.is_leaf:
            values[key] = 0.0
            return 0.0
        child_values = [
            visit(e.child, key + (i,)) for i, e in enumerate(node.edges)
        ]
        dist = _node_value_dist(node, lam, child_values)
        v = evaluate(spec.stages[node.stage], dist)
        values[key] = v
        return v

    root_value = visit(tree.root, ())
    return IrmResult(root_value=root_value, node_values=values)


def irm_root_value(tree: ScenarioTree, spec: IrmSpec, lam: float) -> float:
    """Root value only; skips the table, same recursion."""
    lam = _check_discount(lam)
    if len(spec.stages) != tree.horizon:
        raise ValidationError(
            f"spec has {len(spec.stages)} stages but the tree horizon is {tree.horizon}"
        )

    def visit(node: TreeNode) -> float:
        if node.is_leaf:
            return 0.0
        child_values = [visit(e.child) for e in node.edges]
        return evaluate(spec.stages[node.stage], _node_value_dist(node, lam, child_values))

    return visit(tree.root)


# ---------------------------------------------------------------------------
# flat evaluation through the discounted total
# ---------------------------------------------------------------------------


def discounted_total_distribution(
    tree: ScenarioTree,
    lam: float,
    *,
    path_limit: int = DEFAULT_PATH_LIMIT,
    merge_tol: float = 1e-12,
) -> MixedDistribution:
    """Exact law of the discounted sum of per-period costs.

    Along each root-to-leaf path the per-period costs are independent
    given the path, so the path law is the convolution of the discounted
    edge laws; across paths the laws mix with the path probabilities.  At
    most one edge per path may carry a segment-valued cost, because the
    convolution of two segments leaves the closed mixture family.
    """
    lam = _check_discount(lam)
    if tree.path_count() > path_limit:
        raise EnumerationLimitError(
            f"tree has more than {path_limit} root-to-leaf paths"
        )
    parts: List[Tuple[float, object]] = []

    def visit(node: TreeNode, prob: float, shift: float, seg: Optional[Tuple[float, float]]) -> None:
        # seg carries the one segment accumulated so far as (lo, hi)
        if node.is_leaf:
            if seg is None:
                parts.append((prob, PointMass(shift)))
            else:
                parts.append((prob, UniformSegment(seg[0] + shift, seg[1] + shift)))
            return
        scale = lam**node.stage
        for e in node.edges:
            p = prob * e.probability
            if isinstance(e.cost, MixedDistribution):
                for w, o in e.cost.components:
                    if w <= 0.0:
                        continue
                    if isinstance(o, PointMass):
                        visit(e.child, p * w, shift + scale * o.value, seg)
                    else:
                        if seg is not None:
                            raise ValidationError(
                                "a path carries two segment-valued costs; "
                                "their sum leaves the mixed point/uniform family"
                            )
                        visit(
                            e.child,
                            p * w,
                            shift,
                            (scale * o.lo, scale * o.hi),
                        )
            else:
                visit(e.child, p, shift + scale * e.cost, seg)

    visit(tree.root, 1.0, 0.0, None)
    dist = MixedDistribution._trusted(tuple(parts))
    return merge_atoms(dist, tol=merge_tol)


def rmd(tree: ScenarioTree, rf: RiskFunctional, lam: float) -> float:
    """One risk functional applied to the discounted total cost."""
    if not isinstance(rf, RF_CLASSES):
        raise ValidationError(f"unknown risk functional {rf!r}")
    return evaluate(rf, discounted_total_distribution(tree, lam))


def eud(tree: ScenarioTree, u: DisutilityFunction, lam: float) -> float:
    """Expected disutility of the discounted total cost."""
    return pushforward_mean(u, discounted_total_distribution(tree, lam))
