import json

import pytest

from colltoc.corpus import Corpus
from colltoc.errors import SpecError
from colltoc.evaluation import read_grounding
from colltoc.headers import HeaderRuleConfig, segment_corpus
from colltoc.synthgen import DEFAULT_PARAPHRASES, SynthSpec, generate_collection, label_mapping, read_gold_toc


def trigrams(text):
    t = f" {text.casefold()} "
    return {t[i : i + 3] for i in range(len(t) - 2)}


def overlap(a, b):
    ga, gb = trigrams(a), trigrams(b)
    return len(ga & gb) / min(len(ga), len(gb))


def test_paraphrase_ngram_sharing():
    topics = list(DEFAULT_PARAPHRASES.items())
    for _, paras in topics:
        for i, a in enumerate(paras):
            for b in paras[i + 1 :]:
                assert overlap(a, b) >= 0.5, (a, b)
    for i, (_, pa) in enumerate(topics):
        for _, pb in topics[i + 1 :]:
            for a in pa:
                for b in pb:
                    assert overlap(a, b) < 0.1, (a, b)


def test_noise_free_structure():
    spec = SynthSpec(n_docs=8, n_topics=5, omit_rate=0, distractor_rate=0, order_jitter=0, seed=4)
    coll = generate_collection(spec)
    topics = spec.topics()
    segs = segment_corpus(Corpus.from_texts(coll.texts), HeaderRuleConfig.english())
    by_doc = {}
    for s in segs:
        by_doc.setdefault(s.doc_ind, []).append(s.head_text)
    assert len(by_doc) == 8
    for heads in by_doc.values():
        assert len(heads) == 5
        assert [next(l for l, ps in topics if h in ps) for h in heads] == [l for l, _ in topics]


def test_same_seed_identical(tmp_path):
    spec = SynthSpec(n_docs=6, seed=9)
    a = generate_collection(spec).write(tmp_path / "a").parent
    b = generate_collection(spec).write(tmp_path / "b").parent
    for name in ["gold_toc.json", "gold_grounding.jsonl"] + [f"corpus/doc_{i:04d}.txt" for i in range(6)]:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_different_seed_differs():
    assert generate_collection(SynthSpec(seed=1)).texts != generate_collection(SynthSpec(seed=2)).texts


def test_distractor_count_binomial():
    coll = generate_collection(SynthSpec(n_docs=100, n_topics=6, distractor_rate=0.2, seed=0))
    # 600 slots at p=0.2: mean 120, sd about 9.8
    assert abs(len(coll.distractors) - 120) <= 30
    assert len(set(coll.distractors)) == len(coll.distractors)


def test_gold_spans_start_at_header():
    coll = generate_collection(SynthSpec(n_docs=10, seed=2))
    paraphrases = {l: set(ps) for l, ps in DEFAULT_PARAPHRASES.items()}
    for (label, doc_id), spans in coll.gold_grounding.items():
        (start, end) = spans[0]
        header = coll.texts[doc_id][start:end].split("\n", 1)[0]
        assert header in paraphrases[label]


def test_gold_files_readable(tmp_path):
    coll = generate_collection(SynthSpec(n_docs=5, seed=1))
    coll.write(tmp_path)
    gold = read_grounding(tmp_path / "gold_grounding.jsonl")
    assert gold == {k: [tuple(s) for s in v] for k, v in coll.gold_grounding.items()}
    assert len(read_gold_toc(tmp_path / "gold_toc.json")) == 6
    assert "distractors" in json.loads((tmp_path / "gold_toc.json").read_text())


def test_label_mapping():
    gold_toc = [{"label": "Verdict", "paraphrases": ["Verdict", "The Verdict"]}]
    assert label_mapping({0: "The Verdict", 1: "Random Header"}, gold_toc) == {"0": "Verdict"}


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_docs": 0},
        {"n_topics": 99},
        {"distractor_rate": 1.0},
        {"omit_rate": -0.1},
        {"order_jitter": -1},
        {"body_sentences": (3, 2)},
        {"paraphrases_per_topic": 0},
    ],
)
def test_invalid_synth_spec(kwargs):
    with pytest.raises(SpecError):
        generate_collection(SynthSpec(**kwargs))
