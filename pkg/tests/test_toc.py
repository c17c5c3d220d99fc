import itertools
import json
import math

import numpy as np
import pytest

from colltoc.corpus import Corpus
from colltoc.errors import NotEnoughCommunities
from colltoc.toc import (
    Toc,
    TocEntry,
    build_toc,
    community_medoid,
    coverage,
    emit_toc,
    exhaustive_best_coverage,
    ground,
    merge_spans,
    select_topics,
)

from conftest import make_segment


def test_coverage_examples():
    node_docs = [0] * 4 + [1] * 4
    assert coverage([[0, 1], [4, 5, 6, 7]], node_docs, 2) == pytest.approx(1.5)
    assert coverage([], node_docs, 2) == 0.0
    assert coverage([range(8)], node_docs, 2) == pytest.approx(2.0)


def test_coverage_empty_document_contributes_zero():
    assert coverage([[0]], [0], 3) == pytest.approx(1.0)


def test_select_all_when_k_equals_count():
    comms = [[0], [1, 2], [3]]
    picked = select_topics(comms, 3, [0, 0, 1, 1], 2)
    assert sorted(c for c, _ in picked) == [0, 1, 2]


def test_select_tie_prefers_lower_id():
    # two segments per doc, so each node is worth 0.5; gains 1.5, 1.5, 0.5
    node_docs = [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]
    comms = [[0, 2, 4], [1, 3, 5], [7]]
    picked = select_topics(comms, 1, node_docs, 5)
    assert picked[0][0] == 0 and picked[0][1] == pytest.approx(1.5)


def test_select_prefers_largest_gain():
    # per-segment value 0.1 (docs of 10 segments); gains 0.9, 1.5, 0.3
    node_docs = [d for d in range(3) for _ in range(10)]
    comms = [list(range(0, 9)), list(range(10, 25)), list(range(25, 28))]
    assert [coverage([c], node_docs, 3) for c in comms] == pytest.approx([0.9, 1.5, 0.3])
    assert select_topics(comms, 1, node_docs, 3)[0][0] == 1


def test_select_tie_prefers_larger_community():
    node_docs = [0, 1, 1]
    comms = [[0], [1, 2]]
    assert select_topics(comms, 1, node_docs, 2)[0][0] == 1


def test_select_too_many():
    with pytest.raises(NotEnoughCommunities, match="k=4.*3 communities"):
        select_topics([[0], [1], [2]], 4, [0, 0, 0], 1)


def test_greedy_bound_eight_communities():
    rng = np.random.default_rng(0)
    node_docs = rng.integers(0, 5, size=40)
    comms = [list(rng.choice(40, size=int(rng.integers(2, 12)), replace=False)) for _ in range(8)]
    greedy = coverage([comms[c] for c, _ in select_topics(comms, 3, node_docs, 5)], node_docs, 5)
    _, best = exhaustive_best_coverage(comms, 3, node_docs, 5)
    assert math.comb(8, 3) == 56
    assert greedy >= (1 - 1 / math.e) * best


def test_medoid():
    w = np.zeros((3, 3))
    w[0, 1] = w[1, 0] = 0.9
    w[0, 2] = w[2, 0] = 0.8
    w[1, 2] = w[2, 1] = 0.1
    assert community_medoid([0, 1, 2], w) == 0
    assert community_medoid([2], w) == 2
    assert community_medoid([1, 2, 3], np.ones((4, 4))) == 1


def _doc_segments():
    # a doc with five segments laid end to end
    segs, start = [], 0
    for order in range(5):
        s = make_segment(doc_ind=0, seg_ind=order / 4, head=f"H{order}", body="b" * 5, start=start, order=order)
        segs.append(s)
        start = s.body_span[1]
    return segs


def _toc(groups):
    entries = [TocEntry(t, f"T{t}", min(g), frozenset(g), 0.1, t) for t, g in enumerate(groups)]
    return Toc(tuple(entries))


def test_ground_merges_consecutive():
    segs = _doc_segments()
    g = ground(_toc([[0, 1], [2]]), segs)
    assert g.spans[(0, 0)] == [(segs[0].span[0], segs[1].span[1])]
    assert g.spans[(1, 0)] == [segs[2].span]


def test_ground_non_adjacent_stay_separate():
    segs = _doc_segments()
    g = ground(_toc([[0, 2], [1]]), segs)
    assert g.spans[(0, 0)] == [segs[0].span, segs[2].span]


def test_ground_unselected_gets_nothing():
    segs = _doc_segments() + [make_segment(doc_ind=1, head="Other")]
    g = ground(_toc([[0]]), segs)
    assert set(g.spans) == {(0, 0)}


def test_merge_spans():
    assert merge_spans([(5, 9), (0, 3), (3, 4), (8, 12), (20, 20)]) == [(0, 4), (5, 12)]


def test_build_toc_orders_by_share():
    segs = _doc_segments()
    w = np.ones((5, 5))
    toc = build_toc([[0, 1], [2, 3, 4]], [(0, 0.4), (1, 0.6)], w, segs, 1)
    assert [e.community_id for e in toc.entries] == [1, 0]
    assert toc.labels() == ["H2", "H0"]


def test_emit_deterministic(tmp_path):
    segs = _doc_segments()
    corpus = Corpus.from_texts({"doc": "x" * 200})
    toc = _toc([[0, 1], [3]])
    g = ground(toc, segs)
    a = [p.read_bytes() for p in emit_toc(toc, g, corpus, tmp_path / "a")]
    b = [p.read_bytes() for p in emit_toc(toc, g, corpus, tmp_path / "b")]
    assert a == b
    entries = json.loads(a[0])
    assert len(entries) == 2
    lines = [json.loads(l) for l in a[1].decode().splitlines()]
    assert {l["doc_id"] for l in lines} == {"doc"}


def test_emit_omits_ungrounded_doc(tmp_path):
    corpus = Corpus.from_texts({"a": "x" * 200, "b": "y"})
    toc = _toc([[0]])
    _, grounding_path = emit_toc(toc, ground(toc, _doc_segments()), corpus, tmp_path)
    assert "\"b\"" not in grounding_path.read_text()
