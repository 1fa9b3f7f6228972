"""Domain model for redundant control architectures.

A :class:`SystemModel` describes divisions of components wired by plain
dependency inputs and by explicit control-action / information-flow links,
plus the loss and hazard taxonomy the analysis traces back to.  The module
also provides structural validation, replication expansion, and the
dependency-graph helpers the synthesis stages build on.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

ID_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")

# Separator used when replication materializes copies of a division's
# components: a component `x` replicated into division `B` becomes `x__B`.
REPLICA_SEP = "__"


class ModelError(Exception):
    """Raised when an operation cannot proceed on a malformed model."""


@dataclass
class SourceSpan:
    """1-based location of a token in a model document."""

    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ComponentKind(str, Enum):
    CONTROLLER = "controller"
    SENSOR = "sensor"
    CALCULATOR = "calculator"
    ALARM = "alarm"
    CONVERTER = "converter"
    CONDITIONER = "conditioner"
    POWER_SUPPLY = "power_supply"
    COMMS = "comms"
    DISPLAY = "display"
    TEST_PANEL = "test_panel"
    OPERATOR = "operator"


class Technology(str, Enum):
    DIGITAL = "digital"
    ANALOG = "analog"
    HUMAN = "human"


class LinkKind(str, Enum):
    CONTROL_ACTION = "control_action"
    INFORMATION_FLOW = "information_flow"


class StpaCategory(str, Enum):
    """The four classic control-action failure categories."""

    MISSING = "missing_when_needed"
    NOT_NEEDED = "provided_when_not_needed"
    TIMING_ORDER = "wrong_timing_or_order"
    DURATION_MAGNITUDE = "wrong_duration_or_magnitude"


class FailureModeType(str, Enum):
    """Seven lettered failure modes for control actions and information flows.

    A  missing when needed
    B  provided when not needed
    C  too early
    D  too late
    E  wrong order
    F  applied too long or too much
    G  stopped too early or applied too little
    """

    MISSING = "A"
    UNNEEDED = "B"
    TOO_EARLY = "C"
    TOO_LATE = "D"
    WRONG_ORDER = "E"
    EXCESSIVE = "F"
    INSUFFICIENT = "G"

    @property
    def letter(self) -> str:
        return self.value

    @property
    def stpa_category(self) -> StpaCategory:
        return _STPA_BY_TYPE[self]


_STPA_BY_TYPE = {
    FailureModeType.MISSING: StpaCategory.MISSING,
    FailureModeType.UNNEEDED: StpaCategory.NOT_NEEDED,
    FailureModeType.TOO_EARLY: StpaCategory.TIMING_ORDER,
    FailureModeType.TOO_LATE: StpaCategory.TIMING_ORDER,
    FailureModeType.WRONG_ORDER: StpaCategory.TIMING_ORDER,
    FailureModeType.EXCESSIVE: StpaCategory.DURATION_MAGNITUDE,
    FailureModeType.INSUFFICIENT: StpaCategory.DURATION_MAGNITUDE,
}


class RedundancyLevel(str, Enum):
    SYSTEM = "system"
    DIVISION = "division"
    MODULE = "module"


class GroupLogic(str, Enum):
    ALL_MUST_FAIL = "all_must_fail"
    ANY_MISLEADS = "any_misleads"


class ResourceScope(str, Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"


@dataclass
class Ref:
    """Reference to a component, optionally narrowed to one of its link ports."""

    component: str
    port: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        if self.port is None:
            return self.component
        return f"{self.component}.{self.port}"


@dataclass
class Loss:
    id: str
    description: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Hazard:
    id: str
    description: str
    losses: list[str] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class DesignClass:
    """A design lineage; classes sharing a diversity tag are non-diverse."""

    id: str
    description: str = ""
    diversity_tag: str = ""
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.diversity_tag:
            self.diversity_tag = self.id


@dataclass
class Applicability:
    """Marks one failure-mode type of a link as hazardous."""

    type: FailureModeType
    hazards: list[str] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Link:
    """A named control action or information flow from one component to others."""

    id: str
    kind: LinkKind
    source: str
    targets: list[str] = field(default_factory=list)
    applicability: list[Applicability] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def applicability_for(self, type_: FailureModeType) -> Applicability | None:
        for app in self.applicability:
            if app.type is type_:
                return app
        return None


@dataclass
class Component:
    id: str
    kind: ComponentKind
    tech: Technology
    design_class: str
    inputs: list[Ref] = field(default_factory=list)
    feedback_inputs: list[Ref] = field(default_factory=list)
    links: list[Link] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Division:
    id: str
    components: list[Component] = field(default_factory=list)
    replicates: str | None = None
    # Set by expand_replication on materialized copies; not part of the
    # document syntax and excluded from equality.
    replicated_from: str | None = field(default=None, compare=False)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class RedundancyGroup:
    id: str
    level: RedundancyLevel
    logic: GroupLogic
    members: list[str] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class SharedResource:
    id: str
    scope: ResourceScope
    dependents: list[str] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class SystemModel:
    name: str
    top_event: str
    losses: list[Loss] = field(default_factory=list)
    hazards: list[Hazard] = field(default_factory=list)
    design_classes: list[DesignClass] = field(default_factory=list)
    divisions: list[Division] = field(default_factory=list)
    redundancy_groups: list[RedundancyGroup] = field(default_factory=list)
    shared_resources: list[SharedResource] = field(default_factory=list)

    def components(self) -> Iterator[Component]:
        for division in self.divisions:
            yield from division.components

    def links(self) -> Iterator[Link]:
        for component in self.components():
            yield from component.links


def base_id(component_id: str) -> str:
    """Strip a replica suffix, if any: ``x__B`` -> ``x``."""
    head, sep, _ = component_id.rpartition(REPLICA_SEP)
    return head if sep else component_id


class ModelIndex:
    """Lookup tables over a model; duplicate ids keep the first occurrence."""

    def __init__(self, model: SystemModel):
        self.model = model
        self.losses: dict[str, Loss] = {}
        self.hazards: dict[str, Hazard] = {}
        self.design_classes: dict[str, DesignClass] = {}
        self.divisions: dict[str, Division] = {}
        self.components: dict[str, Component] = {}
        self.links: dict[str, Link] = {}
        self.resources: dict[str, SharedResource] = {}
        self.groups: dict[str, RedundancyGroup] = {}
        self.division_of: dict[str, str] = {}
        for loss in model.losses:
            self.losses.setdefault(loss.id, loss)
        for hazard in model.hazards:
            self.hazards.setdefault(hazard.id, hazard)
        for dc in model.design_classes:
            self.design_classes.setdefault(dc.id, dc)
        for division in model.divisions:
            self.divisions.setdefault(division.id, division)
            for component in division.components:
                self.components.setdefault(component.id, component)
                self.division_of.setdefault(component.id, division.id)
                for link in component.links:
                    self.links.setdefault(link.id, link)
        for resource in model.shared_resources:
            self.resources.setdefault(resource.id, resource)
        for group in model.redundancy_groups:
            self.groups.setdefault(group.id, group)

    def operator(self) -> Component | None:
        found = [c for c in self.model.components() if c.kind is ComponentKind.OPERATOR]
        return found[0] if found else None

    def links_targeting(self, component_id: str) -> list[Link]:
        return [link for link in self.model.links() if component_id in link.targets]

    def is_feedback_edge(self, consumer: Component, source_id: str, port: str | None) -> bool:
        for ref in consumer.feedback_inputs:
            if ref.component != source_id:
                continue
            if ref.port is None or port is None or ref.port == port:
                return True
        return False

    def dependency_sources(self, consumer: Component) -> list[str]:
        """Ordered, deduplicated non-feedback upstream component ids."""
        out: list[str] = []
        for ref in consumer.inputs:
            if ref.component not in out:
                out.append(ref.component)
        for link in self.links_targeting(consumer.id):
            if self.is_feedback_edge(consumer, link.source, link.id):
                continue
            if link.source not in out:
                out.append(link.source)
        return out

    def dependency_adjacency(self) -> dict[str, list[str]]:
        """consumer id -> ordered non-feedback source ids, for every component."""
        return {c.id: self.dependency_sources(c) for c in self.model.components()}

    def downstream_adjacency(self) -> dict[str, list[str]]:
        """source id -> ordered consumer ids (inverse of dependency edges)."""
        down: dict[str, list[str]] = {c.id: [] for c in self.model.components()}
        for consumer in self.model.components():
            for source in self.dependency_sources(consumer):
                if source in down and consumer.id not in down[source]:
                    down[source].append(consumer.id)
        return down

    def transitive_digital_dependents(self, component_id: str) -> list[str]:
        """Digital components in the same division reachable downstream.

        The walk itself crosses any component; only digital same-division
        components are collected.  The start component is excluded.
        """
        division = self.division_of.get(component_id)
        down = self.downstream_adjacency()
        seen: set[str] = {component_id}
        frontier = [component_id]
        collected: list[str] = []
        while frontier:
            current = frontier.pop(0)
            for nxt in down.get(current, []):
                if nxt in seen:
                    continue
                seen.add(nxt)
                frontier.append(nxt)
                comp = self.components.get(nxt)
                if (
                    comp is not None
                    and comp.tech is Technology.DIGITAL
                    and self.division_of.get(nxt) == division
                ):
                    collected.append(nxt)
        return sorted(collected)

    def group_matched_sources(self, group: RedundancyGroup, source_ids: list[str]) -> list[str]:
        """The subset of source_ids a redundancy group binds together.

        Division-level groups match sources living in member divisions, and
        only bind when the matches span at least two distinct member
        divisions.  Other levels match component ids directly and bind when
        at least two match.
        """
        if group.level is RedundancyLevel.DIVISION:
            matched = [s for s in source_ids if self.division_of.get(s) in group.members]
            spanned = {self.division_of.get(s) for s in matched}
            return matched if len(spanned) >= 2 else []
        matched = [s for s in source_ids if s in group.members]
        return matched if len(matched) >= 2 else []


def expand_replication(model: SystemModel) -> SystemModel:
    """Materialize ``replicates`` divisions as deep copies with suffixed ids.

    Component and link ids gain ``__<division>``; references between the
    source division's components are rewritten to the copies, while
    references leaving the division (design classes, other divisions'
    components) are kept verbatim.  Expanding an already-expanded model is a
    no-op, so the operation is idempotent.
    """
    expanded = copy.deepcopy(model)
    authored_replicates = {d.id: d.replicates for d in expanded.divisions}
    by_id = {d.id: d for d in expanded.divisions}
    all_component_ids = {c.id for c in expanded.components()}

    for division in expanded.divisions:
        source_id = division.replicates
        if source_id is None:
            continue
        if division.components:
            raise ModelError(
                f"division '{division.id}' replicates '{source_id}' but declares its own components"
            )
        source = by_id.get(source_id)
        if source is None:
            raise ModelError(f"division '{division.id}' replicates unknown division '{source_id}'")
        if authored_replicates.get(source_id) is not None:
            raise ModelError(
                f"division '{division.id}' replicates '{source_id}', which itself replicates "
                f"'{authored_replicates[source_id]}'; chained replication is not supported"
            )
        local_ids = {c.id for c in source.components}
        suffix = REPLICA_SEP + division.id

        def rename(identifier: str) -> str:
            return identifier + suffix if identifier in local_ids else identifier

        for component in source.components:
            clone = copy.deepcopy(component)
            clone.id = component.id + suffix
            if clone.id in all_component_ids:
                raise ModelError(
                    f"replicating '{source_id}' into '{division.id}' would duplicate id '{clone.id}'"
                )
            all_component_ids.add(clone.id)
            for ref in clone.inputs:
                ref.component = rename(ref.component)
            for ref in clone.feedback_inputs:
                ref.component = rename(ref.component)
            for link in clone.links:
                link.id = link.id + suffix
                link.source = clone.id
                link.targets = [rename(t) for t in link.targets]
            division.components.append(clone)
        division.replicates = None
        division.replicated_from = source_id
    return expanded


@dataclass
class Violation:
    code: str
    message: str
    span: SourceSpan | None = field(default=None, compare=False)

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.code}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "model OK"
        return "\n".join(str(v) for v in self.violations)


def _check_id(report: ValidationReport, identifier: str, what: str, span: SourceSpan | None) -> None:
    if not ID_RE.match(identifier):
        report.violations.append(
            Violation("bad-id", f"{what} id '{identifier}' does not match [A-Za-z][A-Za-z0-9_-]*", span)
        )


def _find_cycle(adjacency: dict[str, list[str]]) -> list[str] | None:
    """Return one cycle as a node list, or None.  Deterministic order."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node: WHITE for node in adjacency}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GREY
        stack.append(node)
        for nxt in adjacency.get(node, []):
            if nxt not in color:
                continue
            if color[nxt] == GREY:
                return stack[stack.index(nxt):] + [nxt]
            if color[nxt] == WHITE:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for node in adjacency:
        if color[node] == WHITE:
            found = visit(node)
            if found:
                return found
    return None


def topological_order(model: SystemModel) -> list[str]:
    """Component ids ordered sources-first along non-feedback dependency edges.

    Deterministic for a fixed model: ties are broken lexicographically.
    Raises ModelError when the graph has a cycle.
    """
    idx = ModelIndex(model)
    adjacency = idx.dependency_adjacency()
    known = set(adjacency)
    indegree = {node: 0 for node in adjacency}
    down: dict[str, list[str]] = {node: [] for node in adjacency}
    for consumer, sources in adjacency.items():
        for source in sources:
            if source in known:
                indegree[consumer] += 1
                down[source].append(consumer)
    ready = sorted(node for node, deg in indegree.items() if deg == 0)
    order: list[str] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        changed = False
        for consumer in down[node]:
            indegree[consumer] -= 1
            if indegree[consumer] == 0:
                ready.append(consumer)
                changed = True
        if changed:
            ready.sort()
    if len(order) != len(adjacency):
        cycle = _find_cycle(adjacency)
        raise ModelError(f"dependency cycle: {' -> '.join(cycle or [])}")
    return order


def validate_model(model: SystemModel) -> ValidationReport:
    """Structural validation.  Total: collects violations, never raises.

    Reference and cycle checks run against a throwaway replication-expanded
    copy so that documents may reference replica components (``x__B``)
    before expansion.
    """
    report = ValidationReport()
    _validate_declarations(model, report)
    try:
        expanded = expand_replication(model)
    except ModelError as exc:
        report.violations.append(Violation("replication", str(exc)))
        expanded = model
    except RecursionError:
        report.violations.append(Violation("replication", "replication expansion recursed"))
        expanded = model
    _validate_references(expanded, report)
    return report


def _validate_declarations(model: SystemModel, report: ValidationReport) -> None:
    if not model.name:
        report.violations.append(Violation("missing-name", "model has no system name"))
    seen: dict[str, SourceSpan | None] = {}

    def declare(identifier: str, what: str, span: SourceSpan | None) -> None:
        _check_id(report, identifier, what, span)
        if identifier in seen:
            report.violations.append(
                Violation("duplicate-id", f"{what} id '{identifier}' already declared", span)
            )
        else:
            seen[identifier] = span

    for loss in model.losses:
        declare(loss.id, "loss", loss.span)
    for hazard in model.hazards:
        declare(hazard.id, "hazard", hazard.span)
        if not hazard.losses:
            report.violations.append(
                Violation("hazard-no-loss", f"hazard '{hazard.id}' links no losses", hazard.span)
            )
    for dc in model.design_classes:
        declare(dc.id, "design_class", dc.span)
    for division in model.divisions:
        declare(division.id, "division", division.span)
        if division.replicates is not None and division.components:
            report.violations.append(
                Violation(
                    "replica-components",
                    f"division '{division.id}' replicates '{division.replicates}' "
                    "but declares its own components",
                    division.span,
                )
            )
    for component in model.components():
        declare(component.id, "component", component.span)
    for link in model.links():
        declare(link.id, "link", link.span)
        letters = [app.type for app in link.applicability]
        for letter in set(letters):
            if letters.count(letter) > 1:
                report.violations.append(
                    Violation(
                        "duplicate-applicability",
                        f"link '{link.id}' declares type {letter.letter} more than once",
                        link.span,
                    )
                )
    for group in model.redundancy_groups:
        declare(group.id, "redundancy_group", group.span)
    for resource in model.shared_resources:
        declare(resource.id, "shared_resource", resource.span)


def _validate_references(model: SystemModel, report: ValidationReport) -> None:
    idx = ModelIndex(model)

    def bad(code: str, message: str, span: SourceSpan | None) -> None:
        report.violations.append(Violation(code, message, span))

    for hazard in model.hazards:
        for loss_id in hazard.losses:
            if loss_id not in idx.losses:
                bad("unknown-loss", f"hazard '{hazard.id}' links unknown loss '{loss_id}'", hazard.span)

    operators = [c for c in model.components() if c.kind is ComponentKind.OPERATOR]
    if len(operators) != 1:
        report.violations.append(
            Violation("operator-count", f"model declares {len(operators)} operator components, expected 1")
        )
    for op in operators:
        if op.tech is not Technology.HUMAN:
            bad("operator-tech", f"operator '{op.id}' must have tech human", op.span)

    for component in model.components():
        if component.design_class not in idx.design_classes:
            bad(
                "unknown-class",
                f"component '{component.id}' references unknown design_class '{component.design_class}'",
                component.span,
            )
        for ref in list(component.inputs) + list(component.feedback_inputs):
            target = idx.components.get(ref.component)
            if target is None:
                bad(
                    "unknown-component",
                    f"component '{component.id}' references unknown component '{ref.component}'",
                    ref.span or component.span,
                )
            elif ref.port is not None and all(link.id != ref.port for link in target.links):
                bad(
                    "unknown-port",
                    f"component '{component.id}' references unknown port '{ref.port}' "
                    f"of '{ref.component}'",
                    ref.span or component.span,
                )
        for link in component.links:
            if not link.targets:
                bad("link-no-target", f"link '{link.id}' has no targets", link.span)
            for target_id in link.targets:
                if target_id not in idx.components:
                    bad(
                        "unknown-component",
                        f"link '{link.id}' targets unknown component '{target_id}'",
                        link.span,
                    )
            if link.kind is LinkKind.CONTROL_ACTION and component.kind is not ComponentKind.CONTROLLER:
                bad(
                    "control-action-source",
                    f"control action '{link.id}' is sourced by non-controller '{component.id}'",
                    link.span,
                )
            if link.applicability and component.tech is not Technology.DIGITAL:
                bad(
                    "applicability-tech",
                    f"link '{link.id}' declares applicable failure types but its source "
                    f"'{component.id}' is not digital",
                    link.span,
                )
            for app in link.applicability:
                if not app.hazards:
                    bad(
                        "applicable-no-hazard",
                        f"link '{link.id}' type {app.type.letter} is applicable but links no hazards",
                        app.span or link.span,
                    )
                for hazard_id in app.hazards:
                    if hazard_id not in idx.hazards:
                        bad(
                            "unknown-hazard",
                            f"link '{link.id}' type {app.type.letter} references unknown hazard "
                            f"'{hazard_id}'",
                            app.span or link.span,
                        )

    for group in model.redundancy_groups:
        if len(group.members) < 2:
            bad("group-size", f"redundancy_group '{group.id}' needs at least 2 members", group.span)
        for member in group.members:
            if group.level is RedundancyLevel.DIVISION:
                if member not in idx.divisions:
                    bad(
                        "unknown-division",
                        f"redundancy_group '{group.id}' references unknown division '{member}'",
                        group.span,
                    )
            elif member not in idx.components:
                bad(
                    "unknown-component",
                    f"redundancy_group '{group.id}' references unknown component '{member}'",
                    group.span,
                )
        if group.logic is GroupLogic.ANY_MISLEADS:
            for consumer in model.components():
                matched = idx.group_matched_sources(group, idx.dependency_sources(consumer))
                if matched and consumer.tech is not Technology.HUMAN:
                    bad(
                        "any-misleads-consumer",
                        f"any_misleads group '{group.id}' converges at '{consumer.id}', "
                        "which is not human-tech",
                        group.span,
                    )

    for resource in model.shared_resources:
        if len(resource.dependents) < 2:
            bad("resource-size", f"shared_resource '{resource.id}' needs at least 2 dependents", resource.span)
        for dependent in resource.dependents:
            if dependent not in idx.components:
                bad(
                    "unknown-component",
                    f"shared_resource '{resource.id}' lists unknown component '{dependent}'",
                    resource.span,
                )

    adjacency = idx.dependency_adjacency()
    filtered = {
        node: [s for s in sources if s in adjacency] for node, sources in adjacency.items()
    }
    cycle = _find_cycle(filtered)
    if cycle:
        report.violations.append(
            Violation("dependency-cycle", f"dependency cycle: {' -> '.join(cycle)}")
        )
