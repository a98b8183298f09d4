import random

import pytest

from citeforge.refsection import NoReferenceSection, extract_references

FILLER_SENTENCE = "This paragraph pads the body of the document with prose. "


def make_document(n_refs, marker="bracket", label="References", body_factor=3):
    """Filler body, then the section label on its own line, then n_refs
    references in the chosen marker convention."""
    body = FILLER_SENTENCE * (body_factor * max(n_refs, 1) + 5)
    refs = []
    for i in range(1, n_refs + 1):
        text = f"Author {i}. Title number {i}. Journal {i}: {i}0-{i}9."
        if marker == "bracket":
            refs.append(f"[{i}] {text}")
        elif marker == "numbered":
            refs.append(f"{i}. {text}")
        else:
            refs.append(text + "\n")
    return body + "\n" + label + "\n" + "\n".join(refs)


def test_bracket_markers_split():
    doc = make_document(2)
    block = extract_references(doc)
    assert len(block.reference_strings) == 2
    assert block.reference_strings[0].startswith("Author 1.")


def test_label_below_bound_rejected():
    doc = "References\n[1] A.\n[2] B.\n" + FILLER_SENTENCE * 40
    with pytest.raises(NoReferenceSection):
        extract_references(doc)


def test_label_must_be_on_its_own_line():
    doc = FILLER_SENTENCE * 30 + "\nSee the references for details.\n[1] A."
    with pytest.raises(NoReferenceSection):
        extract_references(doc)


def test_last_label_wins():
    tail = "\nReferences\n[1] A.\n[2] B.\nReferences\n[1] C."
    doc = FILLER_SENTENCE * 50 + tail
    block = extract_references(doc)
    assert block.reference_strings == ("C.",)


def test_section_start_invariant():
    doc = make_document(3)
    block = extract_references(doc)
    assert block.section_start / len(doc) >= 0.4


@pytest.mark.parametrize("label", ["References", "Bibliography", "References and Notes"])
def test_all_labels_accepted(label):
    block = extract_references(make_document(2, label=label))
    assert len(block.reference_strings) == 2


def test_label_case_insensitive():
    block = extract_references(make_document(2, label="REFERENCES"))
    assert len(block.reference_strings) == 2


def test_numbered_markers_split():
    block = extract_references(make_document(4, marker="numbered"))
    assert len(block.reference_strings) == 4


def test_blank_line_split():
    body = FILLER_SENTENCE * 40
    doc = body + "\nBibliography\nRef one line A\nstill ref one\n\nRef two\n\nRef three"
    block = extract_references(doc)
    assert block.reference_strings == (
        "Ref one line A still ref one",
        "Ref two",
        "Ref three",
    )


def test_generated_documents_exact_counts():
    rng = random.Random(4040)
    for _ in range(50):
        n = rng.randint(1, 12)
        marker = rng.choice(["bracket", "numbered", "blank"])
        label = rng.choice(["References", "Bibliography", "References and Notes"])
        doc = make_document(n, marker=marker, label=label)
        block = extract_references(doc)
        assert len(block.reference_strings) == n, (n, marker, label)
