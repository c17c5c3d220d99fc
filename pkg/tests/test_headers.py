import pytest

from colltoc.corpus import Corpus, Document
from colltoc.errors import ConfigError
from colltoc.headers import (
    HeaderRuleConfig,
    detect_header_candidates,
    filter_collection_noise,
    is_header_line,
    segment_corpus,
    segment_document,
    titlecase_ratio,
)

EN = HeaderRuleConfig.english()


@pytest.mark.parametrize(
    "line",
    ["Item 1. Business", "3. EVIDENCE PRESENTED", "Risk Factors", "Article IV", "(a) definitions"],
)
def test_header_lines(line):
    assert is_header_line(line, EN)


@pytest.mark.parametrize(
    "line",
    [
        "The court finds that the defendant, having considered the evidence at length, is liable.",
        "Short sentence ends here.",
        "",
        "   ",
        "-----",
        "lowercase words only here",
    ],
)
def test_non_header_lines(line):
    assert not is_header_line(line, EN)


def test_item_business_predicate_by_hand():
    line = "Item 1. Business"
    assert len(line) <= EN.max_header_chars
    assert len(line.split()) <= EN.max_header_tokens
    assert not line.endswith((".", "!", "?"))
    assert titlecase_ratio(line) >= EN.titlecase_min_ratio


def test_numbering_rescues_low_titlecase():
    line = "3. evidence presented"
    assert titlecase_ratio(line) < EN.titlecase_min_ratio
    assert EN.matches_numbering(line)
    assert is_header_line(line, EN)


def test_hebrew_profile_accepts_any_short_line():
    he = HeaderRuleConfig.hebrew()
    assert he.titlecase_min_ratio == 0
    assert is_header_line("הכרעת דין", he)
    assert not is_header_line("משפט ארוך שמסתיים בנקודה.", he)


def test_bad_rule_config():
    with pytest.raises(ConfigError):
        HeaderRuleConfig(max_header_chars=0)
    with pytest.raises(ConfigError):
        HeaderRuleConfig(titlecase_min_ratio=1.5)


def _doc(i, lines):
    return Document.from_text(i, f"d{i}", "\n".join(lines))


def test_page_furniture_removed_stable_header_kept():
    # 10 docs of 21 lines; "Page 3" in 9 docs at scattered lines, "Verdict" in 8 near 0.9
    docs = []
    for i in range(10):
        lines = [f"body line {j} text." for j in range(21)]
        if i < 9:
            lines[2 * i] = "Page 3"
        if i < 8:
            lines[18 + (i % 2)] = "Verdict"
        lines[20] = "7"
        docs.append(_doc(i, lines))
    corpus = Corpus(tuple(docs))
    cands = {d.doc_ind: detect_header_candidates(d, EN) for d in corpus}
    kept = filter_collection_noise(cands, corpus, EN)
    texts = {corpus[d].line_text(i) for d, lines in kept.items() for i in lines}
    assert texts == {"Verdict"}


def test_rare_text_never_noise():
    # a header in a single document cannot be collection noise
    docs = (_doc(0, ["Unique Header", "x.", "Other", "y."]), _doc(1, ["Something", "z."]))
    corpus = Corpus(docs)
    cands = {d.doc_ind: detect_header_candidates(d, EN) for d in corpus}
    assert filter_collection_noise(cands, corpus, EN) == cands


def test_segment_positions():
    lines = [f"line {j}." for j in range(25)]
    for j in (2, 10, 20):
        lines[j] = f"Header {j}"
    doc = _doc(0, lines)
    segs = segment_document(doc, [2, 10, 20])
    assert [s.seg_ind for s in segs] == [0.0, 0.5, 1.0]
    assert [s.head_text for s in segs] == ["Header 2", "Header 10", "Header 20"]
    assert segs[-1].body_span[1] == len(doc.text)


def test_single_header_segment():
    doc = _doc(0, ["preamble.", "Only Header", "a.", "b."])
    (seg,) = segment_document(doc, [1])
    assert seg.seg_ind == 0.0
    assert seg.body_text == "a.\nb."
    assert seg.body_span[1] == len(doc.text)


def test_body_boundary_lines():
    lines = [f"line {j}." for j in range(16)]
    doc = _doc(0, lines)
    segs = segment_document(doc, [2, 10])
    body = doc.text[segs[1].body_span[0] : segs[1].body_span[1]].strip()
    assert body == "\n".join(lines[11:16])
    # first segment stops where the next header line starts
    assert segs[0].body_span[1] == doc.lines[10][0]


def test_preamble_not_in_any_segment():
    doc = _doc(0, ["intro text.", "Header", "body."])
    (seg,) = segment_document(doc, [1])
    assert seg.span[0] == doc.lines[1][0]


def test_empty_headers_empty_segments():
    assert segment_document(_doc(0, ["a.", "b."]), []) == []


def test_head_span_points_at_header_text():
    doc = _doc(0, ["  Indented Header", "body."])
    (seg,) = segment_document(doc, [0])
    assert doc.text[seg.head_span[0] : seg.head_span[1]] == "Indented Header"


def test_segment_corpus_order():
    corpus = Corpus.from_texts(["Alpha\nx.\nBeta\ny.", "Gamma\nz."])
    segs = segment_corpus(corpus, EN)
    assert [(s.doc_ind, s.order, s.head_text) for s in segs] == [(0, 0, "Alpha"), (0, 1, "Beta"), (1, 0, "Gamma")]
