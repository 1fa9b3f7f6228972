"""Control-structure extraction and unsafe-interaction enumeration.

Candidates are generated exhaustively, seven failure-mode types per link
(control actions yield unsafe control actions, information flows yield
unsafe information flows), then filtered down to the types the model marks
applicable.  Every kept instance traces to at least one hazard and,
transitively, its losses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .model import (
    Component,
    ComponentKind,
    FailureModeType,
    Link,
    LinkKind,
    ModelError,
    ModelIndex,
    RedundancyLevel,
    StpaCategory,
    SystemModel,
)

_TYPE_PHRASE = {
    FailureModeType.MISSING: "missing when needed",
    FailureModeType.UNNEEDED: "provided when not needed",
    FailureModeType.TOO_EARLY: "provided too early",
    FailureModeType.TOO_LATE: "provided too late",
    FailureModeType.WRONG_ORDER: "provided out of order",
    FailureModeType.EXCESSIVE: "applied too long or too much",
    FailureModeType.INSUFFICIENT: "stopped too early or applied too little",
}


class Flavor(str, Enum):
    UCA = "uca"
    UIF = "uif"


@dataclass
class ControlStructure:
    """Link endpoints plus the operator; wiring that carries no link stays out."""

    nodes: list[str]
    control_edges: list[Link]
    info_edges: list[Link]
    division_of: dict[str, str]
    redundancy_levels: dict[str, list[RedundancyLevel]]

    @property
    def links(self) -> list[Link]:
        return self.control_edges + self.info_edges


def extract_control_structure(model: SystemModel) -> ControlStructure:
    idx = ModelIndex(model)
    nodes: list[str] = []

    def include(component_id: str) -> None:
        if component_id not in nodes:
            nodes.append(component_id)

    control_edges: list[Link] = []
    info_edges: list[Link] = []
    for component in model.components():
        for link in component.links:
            include(component.id)
            for target in link.targets:
                include(target)
            if link.kind is LinkKind.CONTROL_ACTION:
                control_edges.append(link)
            else:
                info_edges.append(link)
    operator = idx.operator()
    if operator is not None:
        include(operator.id)

    levels: dict[str, list[RedundancyLevel]] = {}
    for node in nodes:
        found: list[RedundancyLevel] = []
        for group in model.redundancy_groups:
            if group.level is RedundancyLevel.DIVISION:
                member = idx.division_of.get(node) in group.members
            else:
                member = node in group.members
            if member and group.level not in found:
                found.append(group.level)
        levels[node] = found
    return ControlStructure(
        nodes=nodes,
        control_edges=control_edges,
        info_edges=info_edges,
        division_of={n: idx.division_of.get(n, "") for n in nodes},
        redundancy_levels=levels,
    )


@dataclass
class UcaUifInstance:
    """One (link, failure-mode type) pair; an unsafe control action or flow."""

    id: str
    flavor: Flavor
    type: FailureModeType
    owner: str
    link: str
    division: str
    hazards: list[str] = field(default_factory=list)

    @property
    def stpa_category(self) -> StpaCategory:
        return self.type.stpa_category

    def describe(self) -> str:
        noun = "control action" if self.flavor is Flavor.UCA else "information flow"
        return f"{noun} {self.link} {_TYPE_PHRASE[self.type]}"


def enumerate_candidates(structure: ControlStructure) -> list[UcaUifInstance]:
    """All seven types for every link, unfiltered (hazards left empty)."""
    candidates: list[UcaUifInstance] = []
    for link in structure.links:
        flavor = Flavor.UCA if link.kind is LinkKind.CONTROL_ACTION else Flavor.UIF
        division = structure.division_of.get(link.source, "")
        for type_ in FailureModeType:
            candidates.append(
                UcaUifInstance(
                    id=f"{link.id}:{type_.letter}:{division}",
                    flavor=flavor,
                    type=type_,
                    owner=link.source,
                    link=link.id,
                    division=division,
                )
            )
    return candidates


def apply_applicability(
    candidates: list[UcaUifInstance], model: SystemModel
) -> list[UcaUifInstance]:
    """Keep candidates whose type the owning link marks applicable.

    Kept instances carry their hazard ids; an applicable type with no
    hazards is a modeling error.  Output is sorted by (division, owner,
    type letter) and is deterministic.
    """
    declared: dict[tuple[str, str], list[str]] = {}
    for link in model.links():
        for app in link.applicability:
            declared[(link.id, app.type.letter)] = list(app.hazards)
    kept: list[UcaUifInstance] = []
    for candidate in candidates:
        hazards = declared.get((candidate.link, candidate.type.letter))
        if hazards is None:
            continue
        if not hazards:
            raise ModelError(
                f"instance '{candidate.id}' is applicable but links no hazards"
            )
        kept.append(
            UcaUifInstance(
                id=candidate.id,
                flavor=candidate.flavor,
                type=candidate.type,
                owner=candidate.owner,
                link=candidate.link,
                division=candidate.division,
                hazards=hazards,
            )
        )
    kept.sort(key=lambda i: (i.division, i.owner, i.type.letter, i.id))
    return kept


def losses_for(instance: UcaUifInstance, model: SystemModel) -> list[str]:
    """Loss ids the instance traces to through its hazards, sorted."""
    idx = ModelIndex(model)
    losses: set[str] = set()
    for hazard_id in instance.hazards:
        hazard = idx.hazards.get(hazard_id)
        if hazard is None:
            raise ModelError(f"instance '{instance.id}' references unknown hazard '{hazard_id}'")
        losses.update(hazard.losses)
    return sorted(losses)


def traceability_rows(
    instances: list[UcaUifInstance], model: SystemModel
) -> list[dict[str, str]]:
    """Flat rows (one per instance) for table export."""
    idx = ModelIndex(model)
    rows: list[dict[str, str]] = []
    for instance in instances:
        losses: set[str] = set()
        for hazard_id in instance.hazards:
            hazard = idx.hazards.get(hazard_id)
            if hazard is not None:
                losses.update(hazard.losses)
        rows.append(
            {
                "instance": instance.id,
                "flavor": instance.flavor.value,
                "type": instance.type.letter,
                "stpa_category": instance.stpa_category.value,
                "owner": instance.owner,
                "link": instance.link,
                "division": instance.division,
                "hazards": ";".join(instance.hazards),
                "losses": ";".join(sorted(losses)),
            }
        )
    return rows


def instances_by_division(instances: list[UcaUifInstance]) -> dict[str, list[UcaUifInstance]]:
    out: dict[str, list[UcaUifInstance]] = {}
    for instance in instances:
        out.setdefault(instance.division, []).append(instance)
    return out


def count_by_owner_kind(
    instances: list[UcaUifInstance], model: SystemModel
) -> dict[ComponentKind, int]:
    idx = ModelIndex(model)
    counts: dict[ComponentKind, int] = {}
    for instance in instances:
        component: Component | None = idx.components.get(instance.owner)
        if component is None:
            continue
        counts[component.kind] = counts.get(component.kind, 0) + 1
    return counts
