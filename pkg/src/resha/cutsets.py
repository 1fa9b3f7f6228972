"""Minimal cut sets over monotone fault-tree DAGs.

The engine combines cut-set families bottom-up with memoization, so shared
subtrees are computed once: OR nodes union their children's families, AND
nodes cross-combine them, and every intermediate family is minimized by
subset absorption.  An optional order bound prunes supersets during
combination, which is sound for monotone trees (dropping a set can never
create a new minimal set at or below the bound); without a bound the result
is exact.

``brute_force_oracle`` recomputes the same answer from the definition by
evaluating the tree on every event assignment, packed as truth-table
bit-integers so the cost is one big-int operation per node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ftree import BasicEvent, EventCategory, FaultTree, Gate, GateOp
from .model import ModelError

ORACLE_EVENT_BOUND = 24

_CATEGORY_RANK = {
    EventCategory.HW_STOCHASTIC: 0,
    EventCategory.HW_DESIGN: 1,
    EventCategory.DEPENDENCY_LEAF: 2,
    EventCategory.SW_UCA: 3,
    EventCategory.SW_UIF: 4,
    EventCategory.CCF: 5,
}


def event_sort_key(tree: FaultTree):
    """Canonical (category, id) ordering for basic events."""

    def key(event_id: str) -> tuple[int, str]:
        node = tree.nodes.get(event_id)
        rank = _CATEGORY_RANK.get(node.category, 9) if isinstance(node, BasicEvent) else 9
        return (rank, event_id)

    return key


@dataclass
class CutSetCollection:
    """Canonically ordered minimal cut sets.

    Members inside a set are sorted by (category, id); sets are sorted by
    (order, members).  ``truncation_order`` records the bound the sets were
    computed under, None when exact.
    """

    sets: list[tuple[str, ...]] = field(default_factory=list)
    truncation_order: int | None = None

    def __len__(self) -> int:
        return len(self.sets)

    def as_frozensets(self) -> set[frozenset[str]]:
        return {frozenset(s) for s in self.sets}

    def order_index(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for cut in self.sets:
            counts[len(cut)] = counts.get(len(cut), 0) + 1
        return dict(sorted(counts.items()))

    def singletons(self) -> list[str]:
        return [cut[0] for cut in self.sets if len(cut) == 1]


def _minimize(families: set[frozenset[str]], max_order: int | None) -> set[frozenset[str]]:
    if max_order is not None:
        families = {s for s in families if len(s) <= max_order}
    kept: list[frozenset[str]] = []
    single_members: set[str] = set()
    for candidate in sorted(families, key=len):
        if len(candidate) == 1:
            kept.append(candidate)
            single_members.update(candidate)
            continue
        if not single_members.isdisjoint(candidate):
            continue
        if any(t <= candidate for t in kept if 1 < len(t) < len(candidate)):
            continue
        kept.append(candidate)
    return set(kept)


def _and_combine(
    left: set[frozenset[str]], right: set[frozenset[str]], max_order: int | None
) -> set[frozenset[str]]:
    out: set[frozenset[str]] = set()
    for a in left:
        for b in right:
            union = a | b
            if max_order is None or len(union) <= max_order:
                out.add(union)
    return _minimize(out, max_order)


def _collection_from(
    tree: FaultTree, families: set[frozenset[str]], max_order: int | None
) -> CutSetCollection:
    key = event_sort_key(tree)
    ordered = [tuple(sorted(s, key=key)) for s in families]
    ordered.sort(key=lambda cut: (len(cut), [key(m) for m in cut]))
    return CutSetCollection(sets=ordered, truncation_order=max_order)


def minimal_cut_sets(tree: FaultTree, max_order: int | None = None) -> CutSetCollection:
    """Minimal cut sets of the root, optionally truncated to an order bound."""
    if max_order is not None and max_order < 1:
        raise ModelError(f"max_order must be at least 1, got {max_order}")
    tree.check_structure()
    memo: dict[str, set[frozenset[str]]] = {}
    for node_id in tree.topological_nodes():
        node = tree.nodes[node_id]
        if isinstance(node, BasicEvent):
            memo[node_id] = {frozenset({node_id})}
            continue
        child_families = [memo[c] for c in node.children if c in memo]
        if node.op is GateOp.OR:
            union: set[frozenset[str]] = set()
            for family in child_families:
                union |= family
            memo[node_id] = _minimize(union, max_order)
        else:
            acc: set[frozenset[str]] = {frozenset()}
            for family in child_families:
                acc = _and_combine(acc, family, max_order)
                if not acc:
                    break
            memo[node_id] = acc
    return _collection_from(tree, memo[tree.root], max_order)


@dataclass
class FirstOrderReport:
    """Singleton cut sets split into hardware and software events."""

    software: list[str] = field(default_factory=list)
    hardware: list[str] = field(default_factory=list)


def first_order_cut_sets(collection: CutSetCollection, tree: FaultTree) -> FirstOrderReport:
    report = FirstOrderReport()
    for event_id in collection.singletons():
        node = tree.nodes.get(event_id)
        is_software = isinstance(node, BasicEvent) and node.software
        (report.software if is_software else report.hardware).append(event_id)
    key = event_sort_key(tree)
    report.software.sort(key=key)
    report.hardware.sort(key=key)
    return report


def brute_force_oracle(tree: FaultTree, max_events: int = ORACLE_EVENT_BOUND) -> CutSetCollection:
    """Exact minimal cut sets by exhaustive evaluation.

    Each node's truth table over all 2**n event assignments is packed into
    one integer; a failing assignment is minimal when removing any single
    member stops the failure, which is sufficient by monotonicity.  Refuses
    trees with more than ``max_events`` distinct reachable basic events.
    """
    tree.check_structure()
    events = sorted((e.id for e in tree.reachable_events()), key=event_sort_key(tree))
    n = len(events)
    if n > max_events:
        raise ModelError(
            f"oracle refuses {n} basic events (bound is {max_events}); "
            "use minimal_cut_sets for larger trees"
        )
    total = 1 << n
    bit_of = {event_id: i for i, event_id in enumerate(events)}

    # tables[i] has bit b set iff event i is failed in assignment b.
    tables: dict[str, int] = {}
    for event_id, i in bit_of.items():
        block = ((1 << (1 << i)) - 1) << (1 << i)
        span = 1 << (i + 1)
        pattern = block
        while span < total:
            pattern |= pattern << span
            span <<= 1
        tables[event_id] = pattern

    full = (1 << total) - 1
    node_table: dict[str, int] = {}
    for node_id in tree.topological_nodes():
        node = tree.nodes[node_id]
        if isinstance(node, BasicEvent):
            node_table[node_id] = tables[node_id]
        elif node.op is GateOp.OR:
            acc = 0
            for child in node.children:
                acc |= node_table[child]
            node_table[node_id] = acc
        else:
            acc = full
            for child in node.children:
                acc &= node_table[child]
            node_table[node_id] = acc

    root_table = node_table[tree.root]
    found: set[frozenset[str]] = set()
    for mask in range(total):
        if not (root_table >> mask) & 1:
            continue
        minimal = True
        probe = mask
        while probe:
            low = probe & -probe
            if (root_table >> (mask ^ low)) & 1:
                minimal = False
                break
            probe ^= low
        if minimal:
            found.add(frozenset(events[i] for i in range(n) if (mask >> i) & 1))
    return _collection_from(tree, found, None)
