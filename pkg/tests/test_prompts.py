import shutil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capgen.config import DEFAULT_TEMPLATE_DIR
from capgen.errors import ConfigError, InputError
from capgen.prompts import (
    ExamplePair,
    PromptTemplate,
    build_backprompt,
    build_prompt,
    estimate_tokens,
    load_template,
)

CONTEXT = "@prefix ex: <http://example.org/> . ex:C a ex:Class ."


def example(tag: str) -> ExamplePair:
    return ExamplePair(f"description {tag}", f"<http://example.org/{tag}> a <http://example.org/C> .", tag)


@pytest.fixture
def template_copy(tmp_path):
    dest = tmp_path / "template"
    shutil.copytree(DEFAULT_TEMPLATE_DIR, dest)
    return dest


def test_packaged_template_has_three_examples_in_order():
    t = load_template(DEFAULT_TEMPLATE_DIR)
    assert [e.name for e in t.examples] == ["01-coffee-making", "02-multiplication", "03-distillation"]
    assert "Turtle" in t.instruction


def test_examples_follow_directory_name_order(template_copy):
    ex = template_copy / "examples"
    (ex / "01-coffee-making").rename(ex / "99-coffee-making")
    t = load_template(template_copy)
    assert [e.name for e in t.examples] == ["02-multiplication", "03-distillation", "99-coffee-making"]


def test_missing_instruction_is_config_error(template_copy):
    (template_copy / "instruction.txt").unlink()
    with pytest.raises(ConfigError, match="instruction.txt"):
        load_template(template_copy)


def test_malformed_example_names_the_example(template_copy):
    bad = template_copy / "examples" / "02-multiplication" / "ontology.ttl"
    bad.write_text("@prefix : <http://x/> .\n:a :b", encoding="utf-8")
    with pytest.raises(ConfigError, match="02-multiplication"):
        load_template(template_copy)


def test_zero_examples_is_config_error(template_copy):
    shutil.rmtree(template_copy / "examples")
    with pytest.raises(ConfigError, match="no examples"):
        load_template(template_copy)


def test_bad_context_is_config_error(template_copy):
    (template_copy / "context.ttl").write_text("this is not turtle", encoding="utf-8")
    with pytest.raises(ConfigError, match="context.ttl"):
        load_template(template_copy)


def test_prompt_sections_in_order():
    t = PromptTemplate("Do it.", CONTEXT, (example("A"), example("B"), example("C")))
    text = build_prompt(t, "Mix two liquids.").rendered_text
    positions = [text.index(s) for s in ("Do it.", "ex:C a ex:Class", "description A",
                                         "description B", "description C", "Mix two liquids.")]
    assert positions == sorted(positions)
    assert text.count("Mix two liquids.") == 1
    assert "{{TASK}}" not in text


def test_digest_and_estimate():
    t = PromptTemplate("Do it.", CONTEXT, (example("A"),))
    a, b = build_prompt(t, "task"), build_prompt(t, "task")
    assert a.sections_digest == b.sections_digest and a.digest == b.digest
    assert len(a.digest) == 64 and a.digest == a.digest.lower()
    assert a.token_estimate == estimate_tokens(a.rendered_text) == -(-len(a.rendered_text) // 4)
    assert build_prompt(t, "other").sections_digest["task"] != a.sections_digest["task"]


def test_empty_task_is_input_error():
    t = PromptTemplate("Do it.", CONTEXT, ())
    with pytest.raises(InputError):
        build_prompt(t, "  \n ")
    with pytest.raises(InputError):
        build_prompt(t, "sneaky {{TASK}}")


def test_template_invariants():
    with pytest.raises(ConfigError):
        PromptTemplate("   ", CONTEXT, ())
    with pytest.raises(ConfigError):
        PromptTemplate("Do it.", "not turtle", ())
    with pytest.raises(ConfigError):
        PromptTemplate("Put {{TASK}} here.", CONTEXT, ())
    with pytest.raises(ConfigError):
        ExamplePair("", "<http://x/a> <http://x/b> <http://x/c> .")


def test_backprompt_contains_diagnostics_and_ontology():
    t = PromptTemplate("Do it.", CONTEXT, ())
    first = build_prompt(t, "task")
    diags = "line 3, column 1: UndefinedPrefix: x\nline 9, column 4: BadLiteral: y"
    b = build_backprompt(first, "ex:a ex:b ex:c .", "Syntax", diags)
    assert all(line in b.rendered_text for line in diags.splitlines())
    assert "ex:a ex:b ex:c ." in b.rendered_text
    assert "Turtle syntax" in b.rendered_text
    assert b.sections_digest["previous"] == first.digest
    with pytest.raises(InputError):
        build_backprompt(first, "x", "Shacl", " ")


task_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=60
).filter(lambda s: s.strip() and "{{TASK}}" not in s)


@settings(max_examples=100)
@given(task_text, st.permutations(["A", "B", "C", "D"]))
def test_substitution_and_order_properties(task, order):
    t = PromptTemplate("Do it.", CONTEXT, tuple(example(x) for x in order))
    bundle = build_prompt(t, task)
    text = bundle.rendered_text
    assert text == t.skeleton().replace("{{TASK}}", task.strip())
    assert "{{TASK}}" not in text
    # the task sits in the task section, after every example
    assert text.rindex(task.strip()) > text.index("## Task")
    positions = [text.index(f"description {x}") for x in order]
    assert positions == sorted(positions)
    assert build_prompt(t, task) == bundle
