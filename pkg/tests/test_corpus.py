import pytest
from hypothesis import given
from hypothesis import strategies as st

from colltoc.corpus import Corpus, Document, line_spans, load_corpus, normalize_text
from colltoc.errors import DocumentReadError, NoDocuments


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("a\r\nb", "a\nb"),
        ("a  \nb", "a\nb"),
        ("a\n\n\n\nb", "a\n\nb"),
        ("a\rb", "a\nb"),
        ("a \t\n \n\nb  ", "a\n\nb"),
    ],
)
def test_normalize_examples(raw, expected):
    assert normalize_text(raw) == expected


@given(st.text(alphabet=st.sampled_from("ab \t\r\n"), max_size=60))
def test_normalize_is_idempotent(raw):
    once = normalize_text(raw)
    assert normalize_text(once) == once
    assert "\r" not in once
    assert "\n\n\n" not in once


@given(st.text(max_size=80))
def test_line_spans_tile_the_text(text):
    spans = line_spans(text)
    assert "".join(text[s:e] for s, e in spans) == text
    assert all(s < e for s, e in spans)


def test_load_corpus_sorted_by_filename(tmp_path):
    (tmp_path / "b.txt").write_text("second")
    (tmp_path / "a.txt").write_text("first")
    (tmp_path / ".hidden").write_text("skip me")
    corpus = load_corpus(tmp_path)
    assert corpus.n == 2
    assert [d.doc_id for d in corpus] == ["a", "b"]
    assert [d.doc_ind for d in corpus] == [0, 1]


def test_load_corpus_single_file_two_lines(tmp_path):
    (tmp_path / "x.txt").write_text("X\nY")
    doc = load_corpus(tmp_path)[0]
    assert doc.n_lines == 2
    assert [doc.line_text(i) for i in range(2)] == ["X", "Y"]


def test_load_corpus_empty_dir(tmp_path):
    with pytest.raises(NoDocuments):
        load_corpus(tmp_path)


def test_load_corpus_missing_dir(tmp_path):
    with pytest.raises(NoDocuments):
        load_corpus(tmp_path / "nope")


def test_undecodable_file_names_the_file(tmp_path):
    (tmp_path / "good.txt").write_text("fine")
    (tmp_path / "bad.txt").write_bytes(b"\xff\xfe\xfa broken")
    with pytest.raises(DocumentReadError, match="bad.txt"):
        load_corpus(tmp_path)


def test_loaded_text_is_normalized(tmp_path):
    (tmp_path / "d.txt").write_bytes(b"Title  \r\n\r\n\r\n\r\nBody\r\n")
    assert load_corpus(tmp_path)[0].text == "Title\n\nBody\n"


def test_from_texts_dict_and_list():
    c = Corpus.from_texts({"z": "b", "a": "a"})
    assert [d.doc_id for d in c] == ["a", "z"]
    c2 = Corpus.from_texts(["x", "y"])
    assert c2.n == 2 and c2[1].text == "y"


def test_empty_corpus_rejected():
    with pytest.raises(NoDocuments):
        Corpus(())


def test_document_from_text_normalizes():
    doc = Document.from_text(0, "d", "A \r\nB")
    assert doc.text == "A\nB"
    assert doc.lines == ((0, 2), (2, 3))
