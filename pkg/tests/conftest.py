"""Shared fixtures and random generators for the test suite."""

from __future__ import annotations

import random
import string

import pytest

from resha.ftree import BasicEvent, EventCategory, FaultTree, Gate, GateOp
from resha.model import (
    Applicability,
    Component,
    ComponentKind,
    DesignClass,
    Division,
    FailureModeType,
    GroupLogic,
    Hazard,
    Link,
    LinkKind,
    Loss,
    RedundancyGroup,
    RedundancyLevel,
    Ref,
    ResourceScope,
    SharedResource,
    SystemModel,
    Technology,
    validate_model,
)
from resha.pipeline import analyze_text, bundled_golden_path, bundled_model_path

MINI_MODEL = """\
system "mini"
top_event "operator misled"

loss L-1 "equipment damage"
hazard H-1 "false reading" losses: L-1

design_class DC-C "control logic" diversity: plat
design_class DC-S "probe assembly"
design_class DC-D "panel"
design_class DC-O "crew"

division MAIN {
  component ctrl kind: controller tech: digital class: DC-C {
    control_action drive -> probe {
      applicable: A hazards: H-1
      applicable: F hazards: H-1
    }
  }
  component probe kind: sensor tech: analog class: DC-S
  component panel kind: display tech: analog class: DC-D {
    inputs: probe
  }
  component op kind: operator tech: human class: DC-O {
    inputs: panel
  }
}
"""


@pytest.fixture(scope="session")
def qiasp_text() -> str:
    return bundled_model_path().read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def qiasp_result(qiasp_text):
    return analyze_text(qiasp_text, "qiasp.resha")


@pytest.fixture(scope="session")
def golden_path():
    return bundled_golden_path()


@pytest.fixture()
def mini_text() -> str:
    return MINI_MODEL


def mk_tree(spec, categories: dict[str, EventCategory] | None = None) -> FaultTree:
    """Build a tree from nested tuples: ("or", "a", ("and", "b", "c")).

    Bare strings become hardware stochastic events unless remapped via
    ``categories``; software flag follows the category.
    """
    categories = categories or {}
    tree = FaultTree(model_name="inline", root="")
    counter = [0]

    def build(node) -> str:
        if isinstance(node, str):
            if node not in tree.nodes:
                category = categories.get(node, EventCategory.HW_STOCHASTIC)
                software = category in (
                    EventCategory.SW_UCA,
                    EventCategory.SW_UIF,
                    EventCategory.CCF,
                )
                tree.add(BasicEvent(node, category, software=software))
            return node
        op = GateOp.AND if node[0] == "and" else GateOp.OR
        children = [build(child) for child in node[1:]]
        gate_id = f"n{counter[0]}"
        counter[0] += 1
        tree.add(Gate(gate_id, op, children))
        return gate_id

    tree.root = build(spec)
    return tree


_EVENT_CATEGORIES = list(EventCategory)
_SOFTWARE_CATEGORIES = (EventCategory.SW_UCA, EventCategory.SW_UIF, EventCategory.CCF)


def random_tree(rng: random.Random, max_events: int = 16, max_gates: int = 7) -> FaultTree:
    """A random monotone AND/OR DAG whose gates only reference earlier nodes."""
    tree = FaultTree(model_name="random", root="")
    n_events = rng.randint(1, max_events)
    pool: list[str] = []
    for i in range(n_events):
        category = rng.choice(_EVENT_CATEGORIES)
        event_id = f"e{i}"
        tree.add(BasicEvent(event_id, category, software=category in _SOFTWARE_CATEGORIES))
        pool.append(event_id)
    n_gates = rng.randint(1, max_gates)
    for j in range(n_gates):
        width = rng.randint(1, min(4, len(pool)))
        children = rng.sample(pool, width)
        op = rng.choice((GateOp.AND, GateOp.OR))
        gate_id = f"g{j}"
        tree.add(Gate(gate_id, op, children))
        pool.append(gate_id)
    tree.root = f"g{n_gates - 1}"
    tree.check_structure()
    return tree


def _random_text(rng: random.Random, max_len: int = 24) -> str:
    alphabet = string.ascii_letters + string.digits + ' .,()&-/"\\'
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))


def _random_id(rng: random.Random, prefix: str) -> str:
    tail = "".join(rng.choice(string.ascii_lowercase + string.digits) for _ in range(4))
    return f"{prefix}{tail}"


def random_model(rng: random.Random) -> SystemModel:
    """A parseable model exercising every syntax construct; not validated.

    Used for serializer round-trips, so references may dangle.
    """
    model = SystemModel(name=_random_text(rng, 12) or "m", top_event=_random_text(rng, 20))
    for i in range(rng.randint(1, 3)):
        model.losses.append(Loss(f"L-{i}", _random_text(rng)))
    for i in range(rng.randint(1, 3)):
        losses = [f"L-{rng.randint(0, 2)}"] or ["L-0"]
        model.hazards.append(Hazard(f"H-{i}", _random_text(rng), losses))
    tags = ["shared-plat", ""]
    for i in range(rng.randint(1, 4)):
        dc_id = f"DC-{i}"
        tag = rng.choice(tags) or dc_id
        model.design_classes.append(DesignClass(dc_id, _random_text(rng), tag))
    component_counter = [0]

    def new_component(rng: random.Random) -> Component:
        component_counter[0] += 1
        cid = f"c{component_counter[0]}"
        component = Component(
            id=cid,
            kind=rng.choice(list(ComponentKind)),
            tech=rng.choice(list(Technology)),
            design_class=f"DC-{rng.randint(0, 3)}",
        )
        for _ in range(rng.randint(0, 2)):
            port = f"p{component_counter[0]}" if rng.random() < 0.3 else None
            component.inputs.append(Ref(_random_id(rng, "x"), port))
        if rng.random() < 0.3:
            component.feedback_inputs.append(Ref(_random_id(rng, "x")))
        for k in range(rng.randint(0, 2)):
            link = Link(
                id=f"{cid}_l{k}",
                kind=rng.choice((LinkKind.CONTROL_ACTION, LinkKind.INFORMATION_FLOW)),
                source=cid,
                targets=[_random_id(rng, "x") for _ in range(rng.randint(1, 3))],
            )
            letters = rng.sample(list(FailureModeType), rng.randint(0, 3))
            for letter in sorted(letters, key=lambda t: t.letter):
                link.applicability.append(
                    Applicability(letter, [f"H-{rng.randint(0, 2)}"])
                )
            component.links.append(link)
        return component

    n_divisions = rng.randint(1, 3)
    for d in range(n_divisions):
        division = Division(id=f"D{d}")
        if d > 0 and rng.random() < 0.3:
            division.replicates = "D0"
        else:
            for _ in range(rng.randint(0, 4)):
                division.components.append(new_component(rng))
        model.divisions.append(division)
    if rng.random() < 0.5:
        model.redundancy_groups.append(
            RedundancyGroup(
                id="rg0",
                level=rng.choice(list(RedundancyLevel)),
                logic=rng.choice(list(GroupLogic)),
                members=[f"D{rng.randint(0, 2)}", _random_id(rng, "x")],
            )
        )
    if rng.random() < 0.5:
        model.shared_resources.append(
            SharedResource(
                id="sr0",
                scope=rng.choice(list(ResourceScope)),
                dependents=[_random_id(rng, "x"), _random_id(rng, "x")],
            )
        )
    return model


def random_analyzable_model(rng: random.Random) -> SystemModel:
    """A random valid model: layered divisions, links, operator at the end."""
    model = SystemModel(name="randomized", top_event="operator misinformed")
    model.losses = [Loss("L-1", "equipment loss"), Loss("L-2", "availability loss")]
    model.hazards = [
        Hazard("H-1", "false positive output", ["L-2"]),
        Hazard("H-2", "false negative output", ["L-1", "L-2"]),
    ]

    chain_len = rng.randint(3, 6)
    replicate = rng.random() < 0.6
    any_misleads = replicate and rng.random() < 0.3

    shared_tag = "plat" if rng.random() < 0.5 else ""
    division = Division(id="A")
    class_ids: list[str] = []
    for i in range(chain_len):
        dc_id = f"DC-{i}"
        tag = shared_tag or dc_id
        model.design_classes.append(DesignClass(dc_id, f"role {i}", tag))
        class_ids.append(dc_id)

    middle_kinds = (
        ComponentKind.CALCULATOR,
        ComponentKind.ALARM,
        ComponentKind.COMMS,
        ComponentKind.CONVERTER,
    )
    ids = [f"comp{i}" for i in range(chain_len)]
    for i, cid in enumerate(ids):
        if i == 0:
            kind, tech = ComponentKind.CONTROLLER, Technology.DIGITAL
        elif i == chain_len - 1:
            kind, tech = ComponentKind.DISPLAY, Technology.ANALOG
        else:
            kind = rng.choice(middle_kinds)
            tech = Technology.DIGITAL if rng.random() < 0.7 else Technology.ANALOG
        component = Component(id=cid, kind=kind, tech=tech, design_class=class_ids[i])
        division.components.append(component)

    # Wire a chain: the controller commands the second component, everything
    # else consumes its predecessor; digital middles may add info flows.
    controller = division.components[0]
    ca = Link("cmd", LinkKind.CONTROL_ACTION, controller.id, [ids[1]])
    for letter in sorted(rng.sample("AFG", rng.randint(1, 3))):
        ca.applicability.append(
            Applicability(FailureModeType(letter), [rng.choice(("H-1", "H-2"))])
        )
    controller.links.append(ca)
    for i in range(2, chain_len):
        division.components[i].inputs.append(Ref(ids[i - 1]))
    for i in range(1, chain_len - 1):
        component = division.components[i]
        if component.tech is Technology.DIGITAL and rng.random() < 0.6:
            target = ids[rng.randint(i + 1, chain_len - 1)]
            link = Link(f"flow{i}", LinkKind.INFORMATION_FLOW, component.id, [target])
            for letter in sorted(rng.sample("ABFG", rng.randint(1, 2))):
                link.applicability.append(
                    Applicability(FailureModeType(letter), [rng.choice(("H-1", "H-2"))])
                )
            component.links.append(link)
    model.divisions.append(division)

    hub = ids[-1]
    hubs = [hub]
    if replicate:
        model.divisions.append(Division(id="B", replicates="A"))
        hubs.append(f"{hub}__B")

    terminal_division = Division(id="CTRL")
    model.design_classes.append(DesignClass("DC-TERM", "terminal"))
    model.design_classes.append(DesignClass("DC-OP", "crew"))
    operator = Component(
        id="op", kind=ComponentKind.OPERATOR, tech=Technology.HUMAN, design_class="DC-OP"
    )
    if any_misleads:
        operator.inputs = [Ref(h) for h in hubs]
        model.redundancy_groups.append(
            RedundancyGroup("rg", RedundancyLevel.DIVISION, GroupLogic.ANY_MISLEADS, ["A", "B"])
        )
    else:
        terminal = Component(
            id="term",
            kind=ComponentKind.DISPLAY,
            tech=Technology.ANALOG,
            design_class="DC-TERM",
            inputs=[Ref(h) for h in hubs],
        )
        terminal_division.components.append(terminal)
        operator.inputs = [Ref("term")]
        if replicate:
            model.redundancy_groups.append(
                RedundancyGroup("rg", RedundancyLevel.DIVISION, GroupLogic.ALL_MUST_FAIL, ["A", "B"])
            )
    terminal_division.components.append(operator)
    model.divisions.append(terminal_division)

    if rng.random() < 0.4 and chain_len >= 4:
        model.shared_resources.append(
            SharedResource("bus", rng.choice(list(ResourceScope)), [ids[1], ids[2]])
        )

    report = validate_model(model)
    assert report.ok, f"generator produced an invalid model: {report}"
    return model
