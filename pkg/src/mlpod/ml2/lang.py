"""ML2: the XML pipeline-definition language.

Closed schema: any element or attribute outside the grammar is rejected with
its line/column, so a bad pipeline fails at registration rather than mid-run.
"""

from __future__ import annotations

import xml.parsers.expat as expat
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

ENVS = ("cloud", "edge")
INPUT_KINDS = ("dicom-series", "object")
SECTION_KINDS = ("probability", "label", "confidence", "anchor-images", "similar-slices", "text")


class Ml2Error(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class Ml2ParseError(Ml2Error):
    pass


class Ml2SchemaError(Ml2Error):
    pass


class Ml2CompileError(Exception):
    def __init__(self, message: str, step_ids: list[str]):
        super().__init__(message)
        self.step_ids = step_ids


@dataclass
class Ml2Input:
    id: str
    kind: str
    required: bool = False


@dataclass
class Ml2Model:
    id: str
    service: str
    name: str
    version: str = "latest"


@dataclass
class Ml2Step:
    id: str
    model: str
    env: str
    inputs: list[str] = field(default_factory=list)  # binding ids consumed
    outputs: list[str] = field(default_factory=list)  # binding ids produced
    depends_on: list[str] = field(default_factory=list)
    timeout_seconds: int | None = None


@dataclass
class RenderSection:
    kind: str
    source: str


@dataclass
class RenderSpec:
    title: str = ""
    sections: list[RenderSection] = field(default_factory=list)


@dataclass
class Ml2Document:
    name: str
    inputs: list[Ml2Input] = field(default_factory=list)
    models: list[Ml2Model] = field(default_factory=list)
    steps: list[Ml2Step] = field(default_factory=list)
    render: RenderSpec = field(default_factory=RenderSpec)


@dataclass
class ExecutionPlan:
    pipeline_name: str
    stages: list[list[str]]  # topological levels of step ids
    bindings: dict[str, str]  # binding id -> producing step id
    render: RenderSpec
    document: Ml2Document


# -- low-level XML tree with locations --------------------------------------


@dataclass
class _Node:
    tag: str
    attrs: dict[str, str]
    children: list["_Node"]
    line: int
    column: int


def _parse_tree(data: bytes) -> _Node:
    parser = expat.ParserCreate()
    root: list[_Node] = []
    stack: list[_Node] = []

    def start(tag, attrs):
        node = _Node(tag, dict(attrs), [], parser.CurrentLineNumber, parser.CurrentColumnNumber)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(tag):
        stack.pop()

    def chars(text):
        if text.strip():
            raise Ml2SchemaError(
                "text content is not allowed",
                parser.CurrentLineNumber,
                parser.CurrentColumnNumber,
            )

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise Ml2ParseError(expat.errors.messages[exc.code], exc.lineno, exc.offset) from None
    if not root:
        raise Ml2ParseError("empty document", 1, 0)
    return root[0]


def _check_attrs(node: _Node, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    for key in node.attrs:
        if key not in required and key not in optional:
            raise Ml2SchemaError(f"unknown attribute {key!r} on <{node.tag}>", node.line, node.column)
    for key in required:
        if key not in node.attrs:
            raise Ml2SchemaError(f"<{node.tag}> requires attribute {key!r}", node.line, node.column)


def _no_children(node: _Node):
    if node.children:
        child = node.children[0]
        raise Ml2SchemaError(f"unknown element <{child.tag}>", child.line, child.column)


def _parse_bool(node: _Node, key: str, default: bool = False) -> bool:
    raw = node.attrs.get(key)
    if raw is None:
        return default
    if raw not in ("true", "false"):
        raise Ml2SchemaError(f"{key} must be true|false", node.line, node.column)
    return raw == "true"


# -- schema-directed document construction ----------------------------------


def parse_ml2(data: bytes) -> Ml2Document:
    root = _parse_tree(data)
    if root.tag != "ml2":
        raise Ml2SchemaError(f"root element must be <ml2>, not <{root.tag}>", root.line, root.column)
    _check_attrs(root, ("name",))
    doc = Ml2Document(name=root.attrs["name"])
    seen_sections = set()
    for child in root.children:
        if child.tag in seen_sections:
            raise Ml2SchemaError(f"duplicate <{child.tag}> section", child.line, child.column)
        seen_sections.add(child.tag)
        if child.tag == "inputs":
            _check_attrs(child, ())
            for node in child.children:
                if node.tag != "input":
                    raise Ml2SchemaError(f"unknown element <{node.tag}>", node.line, node.column)
                _check_attrs(node, ("id", "kind"), ("required",))
                if node.attrs["kind"] not in INPUT_KINDS:
                    raise Ml2SchemaError(
                        f"kind must be {'|'.join(INPUT_KINDS)}", node.line, node.column
                    )
                _no_children(node)
                doc.inputs.append(
                    Ml2Input(
                        id=node.attrs["id"],
                        kind=node.attrs["kind"],
                        required=_parse_bool(node, "required"),
                    )
                )
        elif child.tag == "models":
            _check_attrs(child, ())
            for node in child.children:
                if node.tag != "model":
                    raise Ml2SchemaError(f"unknown element <{node.tag}>", node.line, node.column)
                _check_attrs(node, ("id", "service", "name"), ("version",))
                _no_children(node)
                doc.models.append(
                    Ml2Model(
                        id=node.attrs["id"],
                        service=node.attrs["service"],
                        name=node.attrs["name"],
                        version=node.attrs.get("version", "latest"),
                    )
                )
        elif child.tag == "pipeline":
            _check_attrs(child, ())
            for node in child.children:
                if node.tag != "step":
                    raise Ml2SchemaError(f"unknown element <{node.tag}>", node.line, node.column)
                doc.steps.append(_parse_step(node))
        elif child.tag == "render":
            _check_attrs(child, (), ("title",))
            doc.render.title = child.attrs.get("title", "")
            for node in child.children:
                if node.tag != "section":
                    raise Ml2SchemaError(f"unknown element <{node.tag}>", node.line, node.column)
                _check_attrs(node, ("kind", "source"))
                if node.attrs["kind"] not in SECTION_KINDS:
                    raise Ml2SchemaError(
                        f"kind must be {'|'.join(SECTION_KINDS)}", node.line, node.column
                    )
                _no_children(node)
                doc.render.sections.append(
                    RenderSection(kind=node.attrs["kind"], source=node.attrs["source"])
                )
        else:
            raise Ml2SchemaError(f"unknown element <{child.tag}>", child.line, child.column)
    return doc


def _parse_step(node: _Node) -> Ml2Step:
    _check_attrs(node, ("id", "model", "env"), ("depends-on", "timeout-seconds"))
    if node.attrs["env"] not in ENVS:
        raise Ml2SchemaError("env must be cloud|edge", node.line, node.column)
    timeout = None
    if "timeout-seconds" in node.attrs:
        try:
            timeout = int(node.attrs["timeout-seconds"])
        except ValueError:
            raise Ml2SchemaError("timeout-seconds must be an integer", node.line, node.column)
        if timeout <= 0:
            raise Ml2SchemaError("timeout-seconds must be positive", node.line, node.column)
    step = Ml2Step(
        id=node.attrs["id"],
        model=node.attrs["model"],
        env=node.attrs["env"],
        depends_on=node.attrs.get("depends-on", "").split() or [],
        timeout_seconds=timeout,
    )
    for sub in node.children:
        if sub.tag == "in":
            _check_attrs(sub, ("bind",))
            _no_children(sub)
            step.inputs.append(sub.attrs["bind"])
        elif sub.tag == "out":
            _check_attrs(sub, ("id",))
            _no_children(sub)
            step.outputs.append(sub.attrs["id"])
        else:
            raise Ml2SchemaError(f"unknown element <{sub.tag}>", sub.line, sub.column)
    return step


# -- semantic validation -----------------------------------------------------


def validate(doc: Ml2Document, registry: dict[str, str]) -> list[str]:
    """Reference and registry checks; empty list means the document is runnable."""
    diags: list[str] = []
    input_ids = {i.id for i in doc.inputs}
    model_ids = {m.id for m in doc.models}
    step_ids = {s.id for s in doc.steps}
    out_ids: set[str] = set()
    for coll, label in ((doc.inputs, "input"), (doc.models, "model"), (doc.steps, "step")):
        seen = set()
        for item in coll:
            if item.id in seen:
                diags.append(f"duplicate {label} id {item.id!r}")
            seen.add(item.id)
    for model in doc.models:
        if model.service not in registry:
            diags.append(f"model {model.id!r}: unknown service {model.service!r}")
    for step in doc.steps:
        if step.model not in model_ids:
            diags.append(f"step {step.id!r}: unknown model {step.model!r}")
        for dep in step.depends_on:
            if dep not in step_ids:
                diags.append(f"step {step.id!r}: unknown dependency {dep!r}")
        for out in step.outputs:
            if out in out_ids or out in input_ids:
                diags.append(f"step {step.id!r}: output id {out!r} already bound")
            out_ids.add(out)
    bindable = input_ids | out_ids
    consumed: set[str] = set()
    for step in doc.steps:
        for bind in step.inputs:
            if bind not in bindable:
                diags.append(f"step {step.id!r}: input binding {bind!r} is not produced anywhere")
            consumed.add(bind)
    for inp in doc.inputs:
        if inp.required and inp.id not in consumed:
            diags.append(f"required input {inp.id!r} is not consumed by any step")
    for section in doc.render.sections:
        if section.source not in out_ids:
            diags.append(f"render section {section.kind!r}: source {section.source!r} is not produced by any step")
    return diags


# -- compilation -------------------------------------------------------------


def compile_plan(doc: Ml2Document) -> ExecutionPlan:
    """Kahn topological layering; document order within a layer."""
    order = {s.id: i for i, s in enumerate(doc.steps)}
    indegree = {s.id: 0 for s in doc.steps}
    dependents: dict[str, list[str]] = {s.id: [] for s in doc.steps}
    for step in doc.steps:
        for dep in step.depends_on:
            indegree[step.id] += 1
            dependents[dep].append(step.id)
    frontier = sorted((s.id for s in doc.steps if indegree[s.id] == 0), key=order.__getitem__)
    stages: list[list[str]] = []
    placed = 0
    while frontier:
        stages.append(frontier)
        nxt: list[str] = []
        for sid in frontier:
            placed += 1
            for child in dependents[sid]:
                indegree[child] -= 1
                if indegree[child] == 0:
                    nxt.append(child)
        frontier = sorted(nxt, key=order.__getitem__)
    if placed != len(doc.steps):
        cycle = sorted((sid for sid, deg in indegree.items() if deg > 0), key=order.__getitem__)
        raise Ml2CompileError(f"cycle detected among steps: {', '.join(cycle)}", cycle)
    bindings = {out: step.id for step in doc.steps for out in step.outputs}
    return ExecutionPlan(
        pipeline_name=doc.name,
        stages=stages,
        bindings=bindings,
        render=doc.render,
        document=doc,
    )


# -- canonical serialization -------------------------------------------------


def serialize_ml2(doc: Ml2Document) -> bytes:
    parts = [f"<ml2 name={quoteattr(doc.name)}>"]
    if doc.inputs:
        parts.append("<inputs>")
        for i in doc.inputs:
            parts.append(
                f'<input id={quoteattr(i.id)} kind={quoteattr(i.kind)} '
                f'required="{"true" if i.required else "false"}"/>'
            )
        parts.append("</inputs>")
    if doc.models:
        parts.append("<models>")
        for m in doc.models:
            parts.append(
                f"<model id={quoteattr(m.id)} service={quoteattr(m.service)} "
                f"name={quoteattr(m.name)} version={quoteattr(m.version)}/>"
            )
        parts.append("</models>")
    if doc.steps:
        parts.append("<pipeline>")
        for s in doc.steps:
            attrs = f"id={quoteattr(s.id)} model={quoteattr(s.model)} env={quoteattr(s.env)}"
            if s.depends_on:
                attrs += f' depends-on={quoteattr(" ".join(s.depends_on))}'
            if s.timeout_seconds is not None:
                attrs += f' timeout-seconds="{s.timeout_seconds}"'
            parts.append(f"<step {attrs}>")
            for bind in s.inputs:
                parts.append(f"<in bind={quoteattr(bind)}/>")
            for out in s.outputs:
                parts.append(f"<out id={quoteattr(out)}/>")
            parts.append("</step>")
        parts.append("</pipeline>")
    if doc.render.sections or doc.render.title:
        parts.append(f"<render title={quoteattr(doc.render.title)}>")
        for sec in doc.render.sections:
            parts.append(f"<section kind={quoteattr(sec.kind)} source={quoteattr(sec.source)}/>")
        parts.append("</render>")
    parts.append("</ml2>")
    return "".join(parts).encode("utf-8")
