import random

import pytest
from hypothesis import given, settings, strategies as st

from mlpod.ml2 import (
    Ml2CompileError,
    Ml2Document,
    Ml2Error,
    Ml2Input,
    Ml2Model,
    Ml2SchemaError,
    Ml2Step,
    RenderSection,
    compile_plan,
    parse_ml2,
    serialize_ml2,
    validate,
)

CANONICAL = (
    b'<ml2 name="covid-detect">'
    b'<inputs><input id="scan" kind="dicom-series" required="true"/></inputs>'
    b'<models>'
    b'<model id="anon" service="modelpod" name="anonymizer" version="latest"/>'
    b'<model id="racnet" service="modelpod" name="stub-racnet" version="latest"/>'
    b'</models>'
    b'<pipeline>'
    b'<step id="s1" model="anon" env="edge"><in bind="scan"/><out id="clean"/></step>'
    b'<step id="s2" model="racnet" env="cloud" depends-on="s1"><in bind="clean"/><out id="result"/></step>'
    b'</pipeline>'
    b'<render title="Covid19 Report">'
    b'<section kind="probability" source="result"/>'
    b'<section kind="similar-slices" source="result"/>'
    b'</render>'
    b'</ml2>'
)

REGISTRY = {"modelpod": "http://modelpod"}


# -- parsing ------------------------------------------------------------------


def test_parse_canonical_document():
    doc = parse_ml2(CANONICAL)
    assert doc.name == "covid-detect"
    assert [i.id for i in doc.inputs] == ["scan"]
    assert doc.inputs[0].required
    assert [m.name for m in doc.models] == ["anonymizer", "stub-racnet"]
    assert [s.id for s in doc.steps] == ["s1", "s2"]
    assert doc.steps[0].env == "edge"
    assert doc.steps[1].depends_on == ["s1"]
    assert doc.steps[1].inputs == ["clean"]
    assert doc.render.title == "Covid19 Report"
    assert [s.kind for s in doc.render.sections] == ["probability", "similar-slices"]


def test_parse_empty_document():
    doc = parse_ml2(b'<ml2 name="x"/>')
    assert doc.name == "x"
    assert doc.inputs == [] and doc.models == [] and doc.steps == []


def test_malformed_xml_reports_location():
    with pytest.raises(Ml2Error) as exc:
        parse_ml2(b'<ml2 name="x"><pipeline></ml2>')
    assert exc.value.line == 1


def test_unknown_env_rejected():
    xml = b'<ml2 name="x"><pipeline><step id="a" model="m" env="fog"/></pipeline></ml2>'
    with pytest.raises(Ml2SchemaError) as exc:
        parse_ml2(xml)
    assert "env" in exc.value.message
    assert exc.value.line == 1 and exc.value.column > 0


def test_unknown_element_rejected():
    with pytest.raises(Ml2SchemaError) as exc:
        parse_ml2(b'<ml2 name="x"><surprise/></ml2>')
    assert "surprise" in exc.value.message


def test_unknown_attribute_rejected():
    with pytest.raises(Ml2SchemaError):
        parse_ml2(b'<ml2 name="x" color="red"/>')


def test_wrong_root_rejected():
    with pytest.raises(Ml2SchemaError):
        parse_ml2(b'<pipeline name="x"/>')


def test_text_content_rejected():
    with pytest.raises(Ml2SchemaError):
        parse_ml2(b'<ml2 name="x">hello</ml2>')


def test_bad_timeout_rejected():
    base = b'<ml2 name="x"><pipeline><step id="a" model="m" env="cloud" timeout-seconds="%s"/></pipeline></ml2>'
    with pytest.raises(Ml2SchemaError):
        parse_ml2(base % b"soon")
    with pytest.raises(Ml2SchemaError):
        parse_ml2(base % b"0")
    doc = parse_ml2(base % b"30")
    assert doc.steps[0].timeout_seconds == 30


# -- validation ---------------------------------------------------------------


def test_validate_canonical_clean():
    assert validate(parse_ml2(CANONICAL), REGISTRY) == []


def test_validate_unknown_service():
    doc = parse_ml2(CANONICAL)
    diags = validate(doc, {})
    assert any("unknown service" in d for d in diags)


def test_validate_unbound_render_source():
    doc = parse_ml2(CANONICAL)
    doc.render.sections.append(RenderSection(kind="label", source="ghost"))
    diags = validate(doc, REGISTRY)
    assert any("ghost" in d and "render" in d for d in diags)


def test_validate_unknown_model_and_dependency():
    doc = Ml2Document(
        name="x",
        steps=[Ml2Step(id="a", model="nope", env="cloud", depends_on=["ghost"])],
    )
    diags = validate(doc, REGISTRY)
    assert any("unknown model" in d for d in diags)
    assert any("unknown dependency" in d for d in diags)


def test_validate_duplicate_ids():
    doc = Ml2Document(
        name="x",
        models=[Ml2Model("m", "modelpod", "a"), Ml2Model("m", "modelpod", "b")],
    )
    assert any("duplicate model id" in d for d in validate(doc, REGISTRY))


def test_validate_required_input_unconsumed():
    doc = Ml2Document(name="x", inputs=[Ml2Input("scan", "dicom-series", required=True)])
    assert any("not consumed" in d for d in validate(doc, REGISTRY))


def test_validate_rebound_output():
    doc = Ml2Document(
        name="x",
        models=[Ml2Model("m", "modelpod", "a")],
        steps=[
            Ml2Step(id="a", model="m", env="cloud", outputs=["o"]),
            Ml2Step(id="b", model="m", env="cloud", outputs=["o"]),
        ],
    )
    assert any("already bound" in d for d in validate(doc, REGISTRY))


# -- compilation --------------------------------------------------------------


def make_doc(edges, n):
    """Document of n steps s0..s{n-1} with the given dependency edges."""
    deps = {i: [] for i in range(n)}
    for a, b in edges:  # b depends on a
        deps[b].append(a)
    return Ml2Document(
        name="g",
        models=[Ml2Model("m", "modelpod", "stub")],
        steps=[
            Ml2Step(id=f"s{i}", model="m", env="cloud", depends_on=[f"s{d}" for d in deps[i]])
            for i in range(n)
        ],
    )


def longest_path_stage(edges, n):
    """Oracle: layer index = length of the longest dependency chain."""
    deps = {i: [] for i in range(n)}
    for a, b in edges:
        deps[b].append(a)
    memo = {}

    def depth(i):
        if i not in memo:
            memo[i] = 1 + max((depth(d) for d in deps[i]), default=-1)
        return memo[i]

    return {f"s{i}": depth(i) for i in range(n)}


def test_compile_canonical_two_stages():
    plan = compile_plan(parse_ml2(CANONICAL))
    assert plan.stages == [["s1"], ["s2"]]
    assert plan.bindings == {"clean": "s1", "result": "s2"}


def test_compile_chain():
    plan = compile_plan(make_doc([(0, 1), (1, 2)], 3))
    assert plan.stages == [["s0"], ["s1"], ["s2"]]


def test_compile_diamond_preserves_document_order():
    plan = compile_plan(make_doc([(0, 1), (0, 2), (1, 3), (2, 3)], 4))
    assert plan.stages == [["s0"], ["s1", "s2"], ["s3"]]


def test_compile_independent_steps_one_stage():
    plan = compile_plan(make_doc([], 3))
    assert plan.stages == [["s0", "s1", "s2"]]


def test_compile_cycle_names_both_steps():
    doc = make_doc([(0, 1), (1, 0)], 2)
    with pytest.raises(Ml2CompileError) as exc:
        compile_plan(doc)
    assert set(exc.value.step_ids) == {"s0", "s1"}
    assert "s0" in str(exc.value) and "s1" in str(exc.value)


def test_compile_self_loop():
    doc = Ml2Document(
        name="x",
        steps=[Ml2Step(id="a", model="m", env="cloud", depends_on=["a"])],
    )
    with pytest.raises(Ml2CompileError) as exc:
        compile_plan(doc)
    assert exc.value.step_ids == ["a"]


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_compile_matches_longest_path_oracle(data):
    n = data.draw(st.integers(min_value=1, max_value=50))
    # edges only from lower to higher index, guaranteeing acyclicity
    edges = []
    for b in range(1, n):
        for a in data.draw(
            st.sets(st.integers(min_value=0, max_value=b - 1), max_size=min(b, 3))
        ):
            edges.append((a, b))
    plan = compile_plan(make_doc(edges, n))
    stage_of = {sid: i for i, stage in enumerate(plan.stages) for sid in stage}
    assert stage_of == longest_path_stage(edges, n)
    assert sorted(sid for stage in plan.stages for sid in stage) == sorted(f"s{i}" for i in range(n))


# -- canonical serialization --------------------------------------------------


def test_serialize_parse_fixpoint_canonical():
    doc = parse_ml2(CANONICAL)
    once = serialize_ml2(doc)
    assert serialize_ml2(parse_ml2(once)) == once


def test_serialize_round_trips_structure():
    doc = parse_ml2(CANONICAL)
    again = parse_ml2(serialize_ml2(doc))
    assert again == doc


_ident = st.text(alphabet="abcdefgh0123", min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_serialize_parse_fixpoint_random_docs(data):
    n_inputs = data.draw(st.integers(0, 3))
    inputs = [
        Ml2Input(f"in{i}", data.draw(st.sampled_from(("dicom-series", "object"))), data.draw(st.booleans()))
        for i in range(n_inputs)
    ]
    models = [Ml2Model(f"m{i}", "modelpod", data.draw(_ident)) for i in range(data.draw(st.integers(0, 2)))]
    steps = [
        Ml2Step(
            id=f"s{i}",
            model=data.draw(_ident),
            env=data.draw(st.sampled_from(("cloud", "edge"))),
            inputs=[data.draw(_ident)],
            outputs=[f"o{i}"],
            depends_on=[f"s{j}" for j in range(i) if data.draw(st.booleans())],
        )
        for i in range(data.draw(st.integers(0, 3)))
    ]
    doc = Ml2Document(name=data.draw(_ident), inputs=inputs, models=models, steps=steps)
    blob = serialize_ml2(doc)
    assert parse_ml2(blob) == doc
    assert serialize_ml2(parse_ml2(blob)) == blob


# -- fuzzing ------------------------------------------------------------------


def test_fuzz_never_crashes_outside_error_type():
    rng = random.Random(7)
    fragments = [
        b"<ml2 ", b'name="x"', b">", b"/>", b"</ml2>", b"<pipeline>", b"</pipeline>",
        b'<step id="a" model="m" env="cloud"', b"<inputs>", b"</inputs>",
        b'<input id="i" kind="object"/>', b"<render>", b"</render>", b"\xff\xfe",
        b"<", b">", b'"', b"depends-on='a b'", b"&amp;", b"&bad;", b"<!--x-->",
    ]
    for _ in range(2000):
        blob = b"".join(rng.choice(fragments) for _ in range(rng.randint(0, 12)))
        try:
            parse_ml2(blob)
        except Ml2Error:
            pass


@settings(max_examples=300, deadline=None)
@given(blob=st.binary(max_size=200))
def test_fuzz_random_bytes(blob):
    try:
        parse_ml2(blob)
    except Ml2Error:
        pass
