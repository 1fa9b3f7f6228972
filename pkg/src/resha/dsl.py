"""Line-oriented model description language.

One statement per line; ``{`` opens a nested block and must end its line,
``}`` closes it on a line of its own.  ``#`` starts a comment.  Strings are
double-quoted with ``\\"`` and ``\\\\`` escapes.  Ids match
``[A-Za-z][A-Za-z0-9_-]*`` and live in a single global namespace.

Replica components produced by division replication carry a ``__<division>``
suffix; documents may reference them (for example ``display_interface__B``)
ahead of expansion.

``parse_model`` and ``serialize_model`` are inverse enough that
``parse_model(serialize_model(m)) == m`` for any parsed model, and
serialization is byte-identical across runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
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
    SourceSpan,
    SystemModel,
    Technology,
)

# A '-' stays inside a word only when not opening an '->' arrow.
_WORD_RE = re.compile(r"[A-Za-z](?:[A-Za-z0-9_]|-(?!>))*")


class ParseError(Exception):
    """Syntax or well-formedness error, located by a source span."""

    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


@dataclass
class Token:
    kind: str  # word | string | arrow | punct
    text: str  # decoded value for strings
    span: SourceSpan
    raw: str


def _scan_string(text: str, start: int, span: SourceSpan) -> tuple[str, int]:
    parts: list[str] = []
    i = start + 1
    while i < len(text):
        ch = text[i]
        if ch == '"':
            return "".join(parts), i - start + 1
        if ch == "\\":
            if i + 1 >= len(text):
                break
            esc = text[i + 1]
            if esc not in ('"', "\\"):
                where = SourceSpan(span.file, span.line, i + 1)
                raise ParseError(f"unsupported escape '\\{esc}'", where)
            parts.append(esc)
            i += 2
            continue
        parts.append(ch)
        i += 1
    raise ParseError("unterminated string", span)


def _tokenize_line(text: str, lineno: int, file_name: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            break
        span = SourceSpan(file_name, lineno, i + 1)
        if ch == '"':
            value, consumed = _scan_string(text, i, span)
            tokens.append(Token("string", value, span, text[i : i + consumed]))
            i += consumed
            continue
        if text.startswith("->", i):
            tokens.append(Token("arrow", "->", span, "->"))
            i += 2
            continue
        if ch in "{}:,.":
            tokens.append(Token("punct", ch, span, ch))
            i += 1
            continue
        match = _WORD_RE.match(text, i)
        if match:
            tokens.append(Token("word", match.group(), span, match.group()))
            i = match.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", span)
    return tokens


class _Line:
    """Cursor over one line's tokens."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def end_span(self) -> SourceSpan:
        last = self.tokens[-1]
        return SourceSpan(last.span.file, last.span.line, last.span.column + len(last.raw))

    def fail(self, message: str) -> ParseError:
        token = self.peek()
        span = token.span if token else self.end_span()
        return ParseError(message, span)

    def expect(self, kind: str, what: str) -> Token:
        token = self.peek()
        if token is None or token.kind != kind:
            raise self.fail(f"expected {what}")
        return self.advance()

    def expect_word(self, what: str) -> Token:
        return self.expect("word", what)

    def expect_keyword(self, keyword: str) -> Token:
        token = self.peek()
        if token is None or token.kind != "word" or token.text != keyword:
            raise self.fail(f"expected '{keyword}'")
        return self.advance()

    def expect_punct(self, ch: str) -> Token:
        token = self.peek()
        if token is None or token.kind != "punct" or token.text != ch:
            raise self.fail(f"expected '{ch}'")
        return self.advance()

    def opt_punct(self, ch: str) -> bool:
        token = self.peek()
        if token is not None and token.kind == "punct" and token.text == ch:
            self.advance()
            return True
        return False

    def expect_string(self, what: str) -> Token:
        return self.expect("string", what)

    def expect_end(self) -> None:
        if not self.at_end():
            raise self.fail("unexpected trailing tokens")

    def id_list(self, what: str) -> list[Token]:
        items = [self.expect_word(what)]
        while self.opt_punct(","):
            items.append(self.expect_word(what))
        return items

    def ref_list(self) -> list[Ref]:
        refs: list[Ref] = []
        while True:
            comp = self.expect_word("component reference")
            port: str | None = None
            if self.opt_punct("."):
                port = self.expect_word("port name").text
            refs.append(Ref(comp.text, port, span=comp.span))
            if not self.opt_punct(","):
                return refs


def _enum_value(enum_cls, token: Token, what: str):
    try:
        return enum_cls(token.text)
    except ValueError:
        choices = ", ".join(member.value for member in enum_cls)
        raise ParseError(f"unknown {what} '{token.text}' (one of: {choices})", token.span) from None


class _Parser:
    def __init__(self, lines: list[list[Token]], file_name: str):
        self.lines = lines
        self.pos = 0
        self.file_name = file_name
        self.declared: dict[str, SourceSpan] = {}
        self.model = SystemModel(name="", top_event="")
        self.saw_system = False
        self.saw_top_event = False

    def parse(self) -> SystemModel:
        while self.pos < len(self.lines):
            line = _Line(self.lines[self.pos])
            self.pos += 1
            head = line.expect_word("statement")
            handler = {
                "system": self._system,
                "top_event": self._top_event,
                "loss": self._loss,
                "hazard": self._hazard,
                "design_class": self._design_class,
                "division": self._division,
                "redundancy_group": self._redundancy_group,
                "shared_resource": self._shared_resource,
            }.get(head.text)
            if handler is None:
                raise ParseError(f"unknown statement '{head.text}'", head.span)
            handler(line)
        if not self.saw_system:
            raise ParseError("missing 'system' statement", SourceSpan(self.file_name, 1, 1))
        return self.model

    def _eof_error(self) -> ParseError:
        if self.lines:
            last = _Line(self.lines[-1])
            span = last.end_span()
        else:
            span = SourceSpan(self.file_name, 1, 1)
        return ParseError("unexpected end of document inside block", span)

    def _next_line(self) -> _Line:
        if self.pos >= len(self.lines):
            raise self._eof_error()
        line = _Line(self.lines[self.pos])
        self.pos += 1
        return line

    def _declare(self, token: Token, what: str) -> str:
        if token.text in self.declared:
            raise ParseError(f"duplicate id '{token.text}'", token.span)
        self.declared[token.text] = token.span
        return token.text

    def _system(self, line: _Line) -> None:
        if self.saw_system:
            raise line.fail("'system' declared twice")
        self.saw_system = True
        self.model.name = line.expect_string("system name").text
        line.expect_end()

    def _top_event(self, line: _Line) -> None:
        if self.saw_top_event:
            raise line.fail("'top_event' declared twice")
        self.saw_top_event = True
        self.model.top_event = line.expect_string("top event description").text
        line.expect_end()

    def _loss(self, line: _Line) -> None:
        ident = line.expect_word("loss id")
        desc = line.expect_string("loss description")
        line.expect_end()
        self.model.losses.append(Loss(self._declare(ident, "loss"), desc.text, span=ident.span))

    def _hazard(self, line: _Line) -> None:
        ident = line.expect_word("hazard id")
        desc = line.expect_string("hazard description")
        line.expect_keyword("losses")
        line.expect_punct(":")
        losses = [t.text for t in line.id_list("loss id")]
        line.expect_end()
        self.model.hazards.append(
            Hazard(self._declare(ident, "hazard"), desc.text, losses, span=ident.span)
        )

    def _design_class(self, line: _Line) -> None:
        ident = line.expect_word("design_class id")
        desc = line.expect_string("design_class description")
        tag = ""
        if not line.at_end():
            line.expect_keyword("diversity")
            line.expect_punct(":")
            tag = line.expect_word("diversity tag").text
        line.expect_end()
        self.model.design_classes.append(
            DesignClass(self._declare(ident, "design_class"), desc.text, tag, span=ident.span)
        )

    def _division(self, line: _Line) -> None:
        ident = line.expect_word("division id")
        division = Division(self._declare(ident, "division"), span=ident.span)
        token = line.peek()
        if token is not None and token.kind == "word" and token.text == "replicates":
            line.advance()
            division.replicates = line.expect_word("division id").text
            line.expect_end()
        elif line.opt_punct("{"):
            line.expect_end()
            self._division_block(division)
        else:
            line.expect_end()
        self.model.divisions.append(division)

    def _division_block(self, division: Division) -> None:
        while True:
            line = self._next_line()
            head = line.peek()
            if head is not None and head.kind == "punct" and head.text == "}":
                line.advance()
                line.expect_end()
                return
            line.expect_keyword("component")
            division.components.append(self._component(line))

    def _component(self, line: _Line) -> Component:
        ident = line.expect_word("component id")
        fields: dict[str, Token] = {}
        while len(fields) < 3:
            key = line.expect_word("'kind', 'tech' or 'class'")
            if key.text not in ("kind", "tech", "class"):
                raise ParseError(f"unknown component key '{key.text}'", key.span)
            if key.text in fields:
                raise ParseError(f"duplicate component key '{key.text}'", key.span)
            line.expect_punct(":")
            fields[key.text] = line.expect_word(f"{key.text} value")
        component = Component(
            id=self._declare(ident, "component"),
            kind=_enum_value(ComponentKind, fields["kind"], "component kind"),
            tech=_enum_value(Technology, fields["tech"], "technology"),
            design_class=fields["class"].text,
            span=ident.span,
        )
        if line.opt_punct("{"):
            line.expect_end()
            self._component_block(component)
        else:
            line.expect_end()
        return component

    def _component_block(self, component: Component) -> None:
        while True:
            line = self._next_line()
            head = line.peek()
            if head is not None and head.kind == "punct" and head.text == "}":
                line.advance()
                line.expect_end()
                return
            key = line.expect_word("'control_action', 'info_flow', 'inputs' or 'feedback'")
            if key.text in ("control_action", "info_flow"):
                kind = (
                    LinkKind.CONTROL_ACTION
                    if key.text == "control_action"
                    else LinkKind.INFORMATION_FLOW
                )
                component.links.append(self._link(line, kind, component.id))
            elif key.text == "inputs":
                line.expect_punct(":")
                component.inputs.extend(line.ref_list())
                line.expect_end()
            elif key.text == "feedback":
                line.expect_punct(":")
                component.feedback_inputs.extend(line.ref_list())
                line.expect_end()
            else:
                raise ParseError(f"unknown component block statement '{key.text}'", key.span)

    def _link(self, line: _Line, kind: LinkKind, source: str) -> Link:
        ident = line.expect_word("link id")
        line.expect("arrow", "'->'")
        targets = [t.text for t in line.id_list("target component id")]
        link = Link(self._declare(ident, "link"), kind, source, targets, span=ident.span)
        if line.opt_punct("{"):
            line.expect_end()
            self._link_block(link)
        else:
            line.expect_end()
        return link

    def _link_block(self, link: Link) -> None:
        while True:
            line = self._next_line()
            head = line.peek()
            if head is not None and head.kind == "punct" and head.text == "}":
                line.advance()
                line.expect_end()
                return
            line.expect_keyword("applicable")
            line.expect_punct(":")
            letter = line.expect_word("failure type letter")
            type_ = _enum_value(FailureModeType, letter, "failure type")
            if link.applicability_for(type_) is not None:
                raise ParseError(
                    f"link '{link.id}' already declares type {type_.letter}", letter.span
                )
            line.expect_keyword("hazards")
            line.expect_punct(":")
            hazards = [t.text for t in line.id_list("hazard id")]
            line.expect_end()
            link.applicability.append(Applicability(type_, hazards, span=letter.span))

    def _redundancy_group(self, line: _Line) -> None:
        ident = line.expect_word("redundancy_group id")
        level: RedundancyLevel | None = None
        logic: GroupLogic | None = None
        members: list[str] | None = None
        while not line.at_end():
            key = line.expect_word("'level', 'logic' or 'members'")
            line.expect_punct(":")
            if key.text == "level":
                if level is not None:
                    raise ParseError("duplicate key 'level'", key.span)
                level = _enum_value(RedundancyLevel, line.expect_word("level"), "redundancy level")
            elif key.text == "logic":
                if logic is not None:
                    raise ParseError("duplicate key 'logic'", key.span)
                logic = _enum_value(GroupLogic, line.expect_word("logic"), "group logic")
            elif key.text == "members":
                if members is not None:
                    raise ParseError("duplicate key 'members'", key.span)
                members = [t.text for t in line.id_list("member id")]
            else:
                raise ParseError(f"unknown redundancy_group key '{key.text}'", key.span)
        for name, value in (("level", level), ("logic", logic), ("members", members)):
            if value is None:
                raise ParseError(f"redundancy_group '{ident.text}' is missing '{name}'", ident.span)
        self.model.redundancy_groups.append(
            RedundancyGroup(self._declare(ident, "redundancy_group"), level, logic, members, span=ident.span)
        )

    def _shared_resource(self, line: _Line) -> None:
        ident = line.expect_word("shared_resource id")
        scope: ResourceScope | None = None
        dependents: list[str] | None = None
        while not line.at_end():
            key = line.expect_word("'scope' or 'dependents'")
            line.expect_punct(":")
            if key.text == "scope":
                if scope is not None:
                    raise ParseError("duplicate key 'scope'", key.span)
                scope = _enum_value(ResourceScope, line.expect_word("scope"), "resource scope")
            elif key.text == "dependents":
                if dependents is not None:
                    raise ParseError("duplicate key 'dependents'", key.span)
                dependents = [t.text for t in line.id_list("component id")]
            else:
                raise ParseError(f"unknown shared_resource key '{key.text}'", key.span)
        for name, value in (("scope", scope), ("dependents", dependents)):
            if value is None:
                raise ParseError(f"shared_resource '{ident.text}' is missing '{name}'", ident.span)
        self.model.shared_resources.append(
            SharedResource(self._declare(ident, "shared_resource"), scope, dependents, span=ident.span)
        )


def parse_model(text: str, file_name: str = "<model>") -> SystemModel:
    """Parse a document into a SystemModel; raise ParseError with a span."""
    lines: list[list[Token]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(raw, lineno, file_name)
        if tokens:
            lines.append(tokens)
    return _Parser(lines, file_name).parse()


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _serialize_link(link: Link, indent: str) -> list[str]:
    keyword = "control_action" if link.kind is LinkKind.CONTROL_ACTION else "info_flow"
    head = f"{indent}{keyword} {link.id} -> {', '.join(link.targets)}"
    if not link.applicability:
        return [head]
    lines = [head + " {"]
    for app in link.applicability:
        lines.append(f"{indent}  applicable: {app.type.letter} hazards: {', '.join(app.hazards)}")
    lines.append(indent + "}")
    return lines


def _serialize_component(component: Component, indent: str) -> list[str]:
    head = (
        f"{indent}component {component.id} kind: {component.kind.value} "
        f"tech: {component.tech.value} class: {component.design_class}"
    )
    body: list[str] = []
    for link in component.links:
        body.extend(_serialize_link(link, indent + "  "))
    if component.inputs:
        body.append(f"{indent}  inputs: {', '.join(str(r) for r in component.inputs)}")
    if component.feedback_inputs:
        body.append(f"{indent}  feedback: {', '.join(str(r) for r in component.feedback_inputs)}")
    if not body:
        return [head]
    return [head + " {"] + body + [indent + "}"]


def serialize_model(model: SystemModel) -> str:
    """Render a model in canonical form.  Pure function of the model."""
    out: list[str] = [f'system "{_escape(model.name)}"', f'top_event "{_escape(model.top_event)}"']

    def section(lines: list[str]) -> None:
        if lines:
            out.append("")
            out.extend(lines)

    section([f'loss {loss.id} "{_escape(loss.description)}"' for loss in model.losses])
    section(
        [
            f'hazard {h.id} "{_escape(h.description)}" losses: {", ".join(h.losses)}'
            for h in model.hazards
        ]
    )
    class_lines = []
    for dc in model.design_classes:
        line = f'design_class {dc.id} "{_escape(dc.description)}"'
        if dc.diversity_tag != dc.id:
            line += f" diversity: {dc.diversity_tag}"
        class_lines.append(line)
    section(class_lines)
    for division in model.divisions:
        lines: list[str] = []
        if division.replicates is not None:
            lines.append(f"division {division.id} replicates {division.replicates}")
        elif not division.components:
            lines.append(f"division {division.id}")
        else:
            lines.append(f"division {division.id} {{")
            for component in division.components:
                lines.extend(_serialize_component(component, "  "))
            lines.append("}")
        section(lines)
    section(
        [
            f"redundancy_group {g.id} level: {g.level.value} logic: {g.logic.value} "
            f"members: {', '.join(g.members)}"
            for g in model.redundancy_groups
        ]
    )
    section(
        [
            f"shared_resource {r.id} scope: {r.scope.value} dependents: {', '.join(r.dependents)}"
            for r in model.shared_resources
        ]
    )
    return "\n".join(out) + "\n"
