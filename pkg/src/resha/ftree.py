"""Fault-tree synthesis over the component dependency graph.

Trees are monotone AND/OR DAGs stored in an insertion-ordered node arena.
Shared subtrees are shared nodes: a component feeding several consumers has
one failure gate with several parents.  Node ids and child order are a pure
function of the input model, so repeated synthesis is byte-identical.

Per component C the failure gate is::

    fail:C = OR(hardware stochastic event,
                [hardware design event, when enabled],
                dependency gate over C's non-feedback sources,
                software design gate, when C is digital)

The dependency gate partitions sources by redundancy groups: all_must_fail
groups combine under AND, any_misleads under OR, leftovers attach directly.
The root applies the same rule to the operator's sources.

Software design gates start empty (flagged unresolved placeholders) and are
filled by :func:`integrate_software`.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterator, Union

from .model import (
    Component,
    GroupLogic,
    ModelError,
    ModelIndex,
    ResourceScope,
    SystemModel,
    Technology,
)

if TYPE_CHECKING:
    from .stpa import UcaUifInstance


class GateOp(str, Enum):
    AND = "and"
    OR = "or"


class EventCategory(str, Enum):
    HW_STOCHASTIC = "hw_stochastic"
    HW_DESIGN = "hw_design"
    DEPENDENCY_LEAF = "dependency_leaf"
    SW_UCA = "sw_uca"
    SW_UIF = "sw_uif"
    CCF = "ccf"


@dataclass
class Gate:
    id: str
    op: GateOp
    children: list[str] = field(default_factory=list)
    label: str = ""
    # Markers tying structural gates back to the component they model.
    failure_for: str | None = None
    dependency_for: str | None = None
    placeholder_for: str | None = None

    @property
    def unresolved(self) -> bool:
        return self.placeholder_for is not None and not self.children


@dataclass
class BasicEvent:
    id: str
    category: EventCategory
    label: str = ""
    software: bool = False


Node = Union[Gate, BasicEvent]


@dataclass
class FaultTree:
    model_name: str
    root: str
    nodes: dict[str, Node] = field(default_factory=dict)
    include_hw_design: bool = False

    def gate(self, node_id: str) -> Gate:
        node = self.nodes[node_id]
        if not isinstance(node, Gate):
            raise ModelError(f"node '{node_id}' is not a gate")
        return node

    def gates(self) -> Iterator[Gate]:
        for node in self.nodes.values():
            if isinstance(node, Gate):
                yield node

    def events(self) -> Iterator[BasicEvent]:
        for node in self.nodes.values():
            if isinstance(node, BasicEvent):
                yield node

    def add(self, node: Node) -> Node:
        if node.id in self.nodes:
            raise ModelError(f"duplicate node id '{node.id}'")
        self.nodes[node.id] = node
        return node

    def parents_of(self) -> dict[str, list[str]]:
        parents: dict[str, list[str]] = {node_id: [] for node_id in self.nodes}
        for gate in self.gates():
            for child in gate.children:
                if child in parents:
                    parents[child].append(gate.id)
        return parents

    def reachable(self) -> list[str]:
        """Node ids reachable from the root, in deterministic DFS order."""
        seen: set[str] = set()
        order: list[str] = []
        stack = [self.root]
        while stack:
            node_id = stack.pop()
            if node_id in seen or node_id not in self.nodes:
                continue
            seen.add(node_id)
            order.append(node_id)
            node = self.nodes[node_id]
            if isinstance(node, Gate):
                stack.extend(reversed(node.children))
        return order

    def reachable_events(self) -> list[BasicEvent]:
        return [n for n in map(self.nodes.get, self.reachable()) if isinstance(n, BasicEvent)]

    def check_structure(self) -> None:
        """Raise ModelError on dangling children, a non-gate root, cycles,
        or empty gates that are not software placeholders."""
        if self.root not in self.nodes:
            raise ModelError(f"root '{self.root}' is not in the tree")
        if not isinstance(self.nodes[self.root], Gate):
            raise ModelError("root must be a gate")
        for gate in self.gates():
            if not gate.children and gate.placeholder_for is None:
                raise ModelError(f"gate '{gate.id}' is empty and not a software placeholder")
            for child in gate.children:
                if child not in self.nodes:
                    raise ModelError(f"gate '{gate.id}' references unknown node '{child}'")
        self.topological_nodes()

    def topological_nodes(self) -> list[str]:
        """Children-first order over reachable nodes; raises on cycles."""
        WHITE, GREY, BLACK = 0, 1, 2
        color: dict[str, int] = {}
        order: list[str] = []

        def visit(node_id: str) -> None:
            state = color.get(node_id, WHITE)
            if state == BLACK:
                return
            if state == GREY:
                raise ModelError(f"fault tree contains a cycle through '{node_id}'")
            color[node_id] = GREY
            node = self.nodes[node_id]
            if isinstance(node, Gate):
                for child in node.children:
                    if child in self.nodes:
                        visit(child)
            color[node_id] = BLACK
            order.append(node_id)

        visit(self.root)
        return order

    def evaluate(self, failed: set[str]) -> bool:
        """Monotone evaluation: does the root fail when these events have?

        Empty OR gates (unresolved placeholders) evaluate False; empty AND
        gates evaluate True, though synthesis never produces one.
        """
        memo: dict[str, bool] = {}
        for node_id in self.topological_nodes():
            node = self.nodes[node_id]
            if isinstance(node, BasicEvent):
                memo[node_id] = node_id in failed
            elif node.op is GateOp.OR:
                memo[node_id] = any(memo[c] for c in node.children if c in memo)
            else:
                memo[node_id] = all(memo[c] for c in node.children if c in memo)
        return memo[self.root]


@dataclass
class BranchCensus:
    hw_stochastic: int = 0
    hw_design: int = 0
    dependency: int = 0
    sw_design: int = 0

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.hw_stochastic, self.dependency, self.sw_design, self.hw_design)


def branch_census(tree: FaultTree) -> BranchCensus:
    """Count structural branches reachable from the root.

    Shared nodes count once (the arena holds one node per id, however many
    parents reference it).  Dependency branches are the per-component
    dependency gates; group sub-gates inside them are not counted.
    """
    census = BranchCensus()
    for node_id in tree.reachable():
        node = tree.nodes[node_id]
        if isinstance(node, BasicEvent):
            if node.category is EventCategory.HW_STOCHASTIC:
                census.hw_stochastic += 1
            elif node.category is EventCategory.HW_DESIGN:
                census.hw_design += 1
        elif node.dependency_for is not None:
            census.dependency += 1
        elif node.placeholder_for is not None:
            census.sw_design += 1
    return census


def _partition_by_groups(
    idx: ModelIndex,
    tree: FaultTree,
    source_ids: list[str],
    gate_prefix: str,
    fail_for,
) -> list[str]:
    """Child node ids for a dependency-style gate, honoring redundancy groups."""
    remaining = list(source_ids)
    children: list[str] = []
    for group in idx.model.redundancy_groups:
        matched = idx.group_matched_sources(group, remaining)
        if not matched:
            continue
        op = GateOp.AND if group.logic is GroupLogic.ALL_MUST_FAIL else GateOp.OR
        sub = Gate(
            id=f"{gate_prefix}:{group.id}",
            op=op,
            children=[fail_for(s) for s in matched],
            label=f"{group.id} redundancy defeated ({group.logic.value})",
        )
        tree.add(sub)
        children.append(sub.id)
        remaining = [s for s in remaining if s not in matched]
    children.extend(fail_for(s) for s in remaining)
    return children


def synthesize_hardware_ft(model: SystemModel, include_hw_design: bool = False) -> FaultTree:
    """Build the hardware-and-structure fault tree for an expanded model.

    Only components upstream of the operator (along non-feedback dependency
    edges) get failure subtrees; the operator itself does not.  Digital
    components receive an empty software-design placeholder gate.  Declared
    shared resources appear as one leaf each, referenced from every
    dependent's dependency gate.
    """
    idx = ModelIndex(model)
    operator = idx.operator()
    if operator is None:
        raise ModelError("model has no operator component")
    if not model.top_event:
        raise ModelError("model has no top event")
    operator_sources = idx.dependency_sources(operator)
    if not operator_sources:
        raise ModelError(f"operator '{operator.id}' has no information sources")

    tree = FaultTree(model_name=model.name, root="top", include_hw_design=include_hw_design)
    resources_of: dict[str, list[str]] = {}
    for resource in model.shared_resources:
        for dependent in resource.dependents:
            resources_of.setdefault(dependent, []).append(resource.id)
    building: set[str] = set()

    def fail_for(component_id: str) -> str:
        gate_id = f"fail:{component_id}"
        if gate_id in tree.nodes:
            return gate_id
        if component_id in building:
            raise ModelError(f"dependency cycle through '{component_id}'")
        component = idx.components.get(component_id)
        if component is None:
            raise ModelError(f"unknown component '{component_id}' in dependency graph")
        building.add(component_id)
        gate = Gate(
            id=gate_id,
            op=GateOp.OR,
            label=f"{component_id} fails",
            failure_for=component_id,
        )
        tree.add(gate)
        hw = tree.add(
            BasicEvent(
                id=f"hw:{component_id}",
                category=EventCategory.HW_STOCHASTIC,
                label=f"{component_id} hardware stochastic failure",
            )
        )
        gate.children.append(hw.id)
        if include_hw_design:
            hwd = tree.add(
                BasicEvent(
                    id=f"hwdesign:{component_id}",
                    category=EventCategory.HW_DESIGN,
                    label=f"{component_id} hardware design failure",
                )
            )
            gate.children.append(hwd.id)
        sources = idx.dependency_sources(component)
        resource_ids = resources_of.get(component_id, [])
        if sources or resource_ids:
            dep = Gate(
                id=f"dep:{component_id}",
                op=GateOp.OR,
                label=f"{component_id} dependency failure",
                dependency_for=component_id,
            )
            tree.add(dep)
            dep.children.extend(_partition_by_groups(idx, tree, sources, dep.id, fail_for))
            for resource_id in resource_ids:
                leaf_id = f"resource:{resource_id}"
                if leaf_id not in tree.nodes:
                    resource = idx.resources[resource_id]
                    scope_note = (
                        "external" if resource.scope is ResourceScope.EXTERNAL else "internal"
                    )
                    tree.add(
                        BasicEvent(
                            id=leaf_id,
                            category=EventCategory.DEPENDENCY_LEAF,
                            label=f"shared {scope_note} resource {resource_id} fails",
                        )
                    )
                dep.children.append(leaf_id)
            gate.children.append(dep.id)
        if component.tech is Technology.DIGITAL:
            sw = Gate(
                id=f"sw:{component_id}",
                op=GateOp.OR,
                label=f"{component_id} software design failure",
                placeholder_for=component_id,
            )
            tree.add(sw)
            gate.children.append(sw.id)
        building.discard(component_id)
        return gate_id

    root = Gate(id="top", op=GateOp.OR, label=model.top_event)
    tree.add(root)
    root.children.extend(_partition_by_groups(idx, tree, operator_sources, "top", fail_for))
    tree.check_structure()
    return tree


def unresolved_placeholders(tree: FaultTree) -> list[str]:
    """Component ids whose software-design gates are still empty."""
    return sorted(
        gate.placeholder_for for gate in tree.gates() if gate.unresolved and gate.placeholder_for
    )


def integrate_software(tree: FaultTree, instances: list["UcaUifInstance"]) -> FaultTree:
    """Return a new tree with applicable instances attached as basic events.

    Each instance becomes a software basic event under its owner's
    software-design placeholder gate.  The input tree is not modified.
    """
    out = copy.deepcopy(tree)
    placeholders = {
        gate.placeholder_for: gate for gate in out.gates() if gate.placeholder_for is not None
    }
    for instance in sorted(instances, key=lambda i: i.id):
        gate = placeholders.get(instance.owner)
        if gate is None:
            raise ModelError(
                f"instance '{instance.id}' belongs to '{instance.owner}', "
                "which has no software gate in the tree"
            )
        category = EventCategory.SW_UCA if instance.flavor.value == "uca" else EventCategory.SW_UIF
        event = BasicEvent(
            id=instance.id,
            category=category,
            label=instance.describe(),
            software=True,
        )
        out.add(event)
        gate.children.append(event.id)
    out.check_structure()
    return out
