import logging
from typing import List, Mapping, Sequence, Union

import numpy as np

from .exceptions import LabelStarvation, SamplingError
from .hetero_graph import EdgeSet, HeteroGraph, TaskTargets
from .schema import NodeType
from .split import Split, SplitAssignment

logger = logging.getLogger(__name__)

HopBudgets = Union[
    Mapping[Union[str, int], Sequence[int]], Sequence[Sequence[int]], Sequence[int]
]


def resolve_budgets(graph: HeteroGraph, hop_budgets: HopBudgets) -> np.ndarray:
    """Normalizes hop budgets into a `node types x hops` integer matrix.

    Accepted forms: a mapping from node type name (or id) to a per-hop list,
    a list of per-hop lists indexed by node type id, or a single per-hop list
    applied to every node type. Types missing from a mapping get budget 0.
    """
    num_types = len(graph.node_types)
    if isinstance(hop_budgets, Mapping):
        lengths = {len(v) for v in hop_budgets.values()}
        if len(lengths) > 1:
            raise SamplingError("every node type needs the same number of hop budgets")
        hops = lengths.pop() if lengths else 0
        budgets = np.zeros((num_types, hops), dtype=np.int64)
        for key, values in hop_budgets.items():
            type_id = graph.node_type(key).type_id if isinstance(key, str) else int(key)
            if not 0 <= type_id < num_types:
                raise SamplingError(f"hop budget given for unknown node type {key!r}")
            budgets[type_id] = values
    else:
        hop_budgets = list(hop_budgets)
        if hop_budgets and np.ndim(hop_budgets[0]) == 0:
            budgets = np.tile(np.asarray(hop_budgets, dtype=np.int64), (num_types, 1))
        else:
            budgets = np.asarray(hop_budgets, dtype=np.int64).reshape(num_types, -1)
    if (budgets < 0).any():
        raise SamplingError("hop budgets must be non-negative")
    return budgets


def _edge_ranks(edges: EdgeSet, num_dst: int, seed: int, relation_id: int) -> np.ndarray:
    """Position of every edge in its destination's seeded neighbor permutation."""
    keys = np.random.default_rng([seed, relation_id]).random(len(edges))
    order = np.lexsort((keys, edges.dst))
    ranks = np.empty(len(edges), dtype=np.int64)
    starts = edges.offsets(num_dst)
    ranks[order] = np.arange(len(edges)) - starts[edges.dst[order]]
    return ranks


def neighborhood_subgraph(
    graph: HeteroGraph,
    targets: Sequence[TaskTargets],
    hop_budgets: HopBudgets,
    seed: int = 0,
) -> HeteroGraph:
    """Expands target nodes hop by hop into a budgeted neighborhood subgraph.

    At every hop, each node first reached in the previous hop (the targets at
    hop 0) draws up to `budget[source type][hop]` in-neighbors per relation
    from a seeded permutation of its neighbors. A larger budget only extends
    the prefix taken from each permutation, so with per-hop budgets that do
    not grow across hops the sampled node set grows monotonically with the
    budgets. With budgets at least the maximum in-degree, the node set is the
    breadth-first closure of the targets within `hops` steps.

    The result is the subgraph induced on the sampled nodes: it keeps every
    edge whose endpoints were both sampled. Node indices are re-mapped densely
    per type in ascending order of their original index.

    Args:
        graph (HeteroGraph):
            The source graph.
        targets (Sequence[TaskTargets]):
            The targets of every task, indices into `graph`.
        hop_budgets (HopBudgets):
            Per node type, one budget per hop (see `resolve_budgets`).
        seed (int):
            Optional; The seed of the neighbor permutations.

    Returns:
        The subgraph holding the re-mapped targets.
    """
    budgets = resolve_budgets(graph, hop_budgets)
    num_hops = budgets.shape[1]
    selected = [np.zeros(t.node_count, dtype=bool) for t in graph.node_types]
    for task_targets in targets:
        for type_id in np.unique(task_targets.node_types):
            selected[type_id][task_targets.nodes[task_targets.node_types == type_id]] = True

    ranks = [
        _edge_ranks(e, graph.node_count(r.dst_type), seed, r.edge_type_id)
        for r, e in zip(graph.relations, graph.edges)
    ]

    newest = [mask.copy() for mask in selected]
    for hop in range(num_hops):
        reached = [mask.copy() for mask in selected]
        for relation, edges in zip(graph.relations, graph.edges):
            budget = budgets[relation.src_type, hop]
            if budget == 0:
                continue
            chosen = newest[relation.dst_type][edges.dst]
            chosen &= ranks[relation.edge_type_id] < budget
            reached[relation.src_type][edges.src[chosen]] = True
        newest = [now & ~before for now, before in zip(reached, selected)]
        selected = reached
        if not any(mask.any() for mask in newest):
            break

    kept = [np.flatnonzero(mask) for mask in selected]
    node_types = [
        NodeType(t.type_id, t.name, t.feature_dim, len(k)) for t, k in zip(graph.node_types, kept)
    ]
    node_features = [x[k] for x, k in zip(graph.node_features, kept)]
    origin = [o[k] for o, k in zip(graph.origin, kept)]

    edges: List[EdgeSet] = []
    for relation, edge_set in zip(graph.relations, graph.edges):
        src_mask, dst_mask = selected[relation.src_type], selected[relation.dst_type]
        inside = src_mask[edge_set.src] & dst_mask[edge_set.dst]
        sub = edge_set.subset(np.flatnonzero(inside))
        sub.src = np.searchsorted(kept[relation.src_type], sub.src)
        sub.dst = np.searchsorted(kept[relation.dst_type], sub.dst)
        edges.append(sub)

    new_targets = []
    for task_targets in targets:
        nodes = np.empty(len(task_targets), dtype=np.int64)
        for i, (node, type_id) in enumerate(zip(task_targets.nodes, task_targets.node_types)):
            nodes[i] = np.searchsorted(kept[type_id], node)
        new_targets.append(TaskTargets(nodes, task_targets.labels, task_targets.node_types))

    sub = HeteroGraph(
        node_types, node_features, graph.relations, edges, graph.tasks, new_targets, origin
    )
    logger.debug("Sampled %r", sub)
    return sub


def _draw(rng: np.random.Generator, pool: np.ndarray, count: int) -> np.ndarray:
    if count == 0:
        return pool[:0]
    return rng.choice(pool, size=count, replace=len(pool) < count)


def sample_subgraph(
    graph: HeteroGraph,
    task_id: int,
    split: SplitAssignment,
    batch_targets: int,
    pos_ratio: float,
    hop_budgets: HopBudgets,
    seed: int = 0,
) -> HeteroGraph:
    """Samples a training subgraph for one task with a controlled positive ratio.

    `floor(batch_targets * pos_ratio + 0.5)` positive and the remaining
    negative train targets are drawn without replacement (with replacement
    when a class has too few targets), then expanded with
    `neighborhood_subgraph`. The other tasks hold no targets in the result.

    Raises:
        LabelStarvation: The task has no positive (or no negative) train target.
        SamplingError: Invalid ratio or batch size.
    """
    if not 0 < pos_ratio < 1:
        raise SamplingError(f"pos_ratio must lie in (0, 1), got {pos_ratio}")
    if batch_targets < 1:
        raise SamplingError(f"batch_targets must be positive, got {batch_targets}")
    task = graph.tasks[task_id]
    train = split.targets(graph, task_id, Split.TRAIN)
    positive = train.positives(task)
    positives, negatives = np.flatnonzero(positive), np.flatnonzero(~positive)
    n_pos = int(np.floor(batch_targets * pos_ratio + 0.5))
    n_neg = batch_targets - n_pos
    if not len(positives):
        raise LabelStarvation(task.name, "positive")
    if not len(negatives):
        raise LabelStarvation(task.name, "negative")

    rng = np.random.default_rng([seed, task_id])
    picked = np.concatenate([_draw(rng, positives, n_pos), _draw(rng, negatives, n_neg)])
    batch = [
        train.subset(picked) if t.task_id == task_id else TaskTargets.empty(t)
        for t in graph.tasks
    ]
    return neighborhood_subgraph(graph, batch, hop_budgets, seed)
