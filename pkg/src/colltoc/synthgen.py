"""Synthetic collections with a known table of contents, for end-to-end checks.

Documents list a fixed set of topics in canonical order, then get noisy:
neighbouring topics swap, topics go missing, one-off distractor sections
appear, and each header is drawn from a list of paraphrases. Bodies are
filler sentences built from a per-topic pseudo-word vocabulary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import normalize_text
from .errors import SpecError
from .evaluation import write_grounding_lines

# Paraphrases inside a topic share at least half of the smaller header's
# character 3-grams; across topics they share less than a tenth.
DEFAULT_PARAPHRASES: dict[str, list[str]] = {
    "Risk Factors": ["Risk Factors", "Key Risk Factors", "Risk Factor", "Major Risk Factors"],
    "Legal Proceedings": ["Legal Proceedings", "Legal Proceeding", "Legal Proceedings Held", "Court Legal Proceedings"],
    "Executive Compensation": [
        "Executive Compensation",
        "Executive Compensation Plan",
        "Compensation Executive",
        "Executives Compensation",
    ],
    "Verdict": ["Verdict", "Final Verdict", "Verdict Given", "The Verdict"],
    "Mine Safety": ["Mine Safety", "Mine Safety Update", "Mine Safety Report", "Mine Safety Data"],
    "Witness Testimony": ["Witness Testimony", "Witnesses Testimony", "Testimony Witness", "Witness Testimony Heard"],
    "Cybersecurity": ["Cybersecurity", "Cybersecurity Policy", "Cyber Security", "Cybersecurity Controls"],
    "Dividends": ["Dividends", "Dividend History", "Dividends Paid", "Dividend Payouts"],
    "Bank Loans": ["Bank Loans", "Bank Loan Terms", "Bank Loans Taken", "Bank Loan Book"],
    "Case Summary": ["Case Summary", "Summary of Case", "Case Summaries", "Brief Case Summary"],
}

_ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "kl", "st", "tr"]
_VOWELS = ["a", "e", "i", "o", "u"]
_GLUE = ["the", "and", "with", "for", "under", "over", "into"]
# one-off section headers; drawn in pairs so no header repeats across documents
_DISTRACTOR_WORDS = (
    "anchor apple arch autumn badge barn beacon berry blossom bridge brook cabin candle canyon cedar "
    "chalk cherry cliff clover comet coral cotton crane crystal daisy desert dove dune eagle echo "
    "elm ember falcon feather fern field flame flint forest fox garden glacier granite grove harbor "
    "hawk hazel heron hill honey horizon ivory ivy jade jungle kettle lagoon lake lantern lark "
    "lemon lily lotus maple marble meadow mint moon moss mountain nectar oak ocean olive orchard "
    "otter owl palm pearl pebble pepper pine plum pond poppy quartz rain raven reef ridge river "
    "robin rose sage sand shell silver sky snow sparrow spruce star stone storm sun swan thistle "
    "thunder tide timber tulip valley velvet violet walnut wave willow wind wolf wren yarrow"
).split()


@dataclass(frozen=True)
class SynthSpec:
    n_docs: int = 30
    n_topics: int = 6
    paraphrases_per_topic: int = 3
    paraphrase_dictionary: dict | None = None
    distractor_rate: float = 0.2
    order_jitter: int = 2
    omit_rate: float = 0.1
    body_sentences: tuple[int, int] = (2, 4)
    seed: int = 0

    def topics(self) -> list[tuple[str, list[str]]]:
        source = self.paraphrase_dictionary or DEFAULT_PARAPHRASES
        return [(label, list(p)[: self.paraphrases_per_topic]) for label, p in list(source.items())[: self.n_topics]]

    def validate(self) -> None:
        source = self.paraphrase_dictionary or DEFAULT_PARAPHRASES
        if self.n_docs < 1:
            raise SpecError("n_docs must be positive")
        if self.n_topics < 2:
            raise SpecError("n_topics must be at least 2")
        if self.n_topics > len(source):
            raise SpecError(f"n_topics={self.n_topics} exceeds the {len(source)} topics in the paraphrase dictionary")
        if self.paraphrases_per_topic < 1:
            raise SpecError("paraphrases_per_topic must be positive")
        if any(not list(p)[: self.paraphrases_per_topic] for p in list(source.values())[: self.n_topics]):
            raise SpecError("every topic needs a non-empty paraphrase list")
        if not 0 <= self.distractor_rate < 1 or not 0 <= self.omit_rate < 1:
            raise SpecError("distractor_rate and omit_rate must lie in [0, 1)")
        if self.order_jitter < 0:
            raise SpecError("order_jitter must be non-negative")
        lo, hi = self.body_sentences
        if lo < 1 or hi < lo:
            raise SpecError("body_sentences must be a range with 1 <= min <= max")


@dataclass
class SynthCollection:
    texts: dict[str, str]
    gold_toc: list[dict]
    gold_grounding: dict  # (label, doc_id) -> spans
    distractors: list[str] = field(default_factory=list)

    def write(self, out_dir: str | Path) -> Path:
        """Write ``corpus/``, ``gold_toc.json`` and ``gold_grounding.jsonl``."""
        out = Path(out_dir)
        corpus = out / "corpus"
        corpus.mkdir(parents=True, exist_ok=True)
        for doc_id, text in self.texts.items():
            (corpus / f"{doc_id}.txt").write_text(text, encoding="utf-8")
        payload = {"topics": self.gold_toc, "distractors": self.distractors}
        (out / "gold_toc.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        write_grounding_lines(self.gold_grounding, out / "gold_grounding.jsonl")
        return corpus


def _pseudo_word(rng: np.random.Generator, syllables: int) -> str:
    return "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] for _ in range(syllables))


def _vocabulary(seed: int, salt: int, size: int = 14) -> list[str]:
    rng = np.random.default_rng([seed, salt, 0x70])
    return [_pseudo_word(rng, int(rng.integers(2, 4))) for _ in range(size)]


def _sentence(rng: np.random.Generator, vocab: list[str]) -> str:
    words = []
    for _ in range(int(rng.integers(7, 12))):
        pool = _GLUE if rng.random() < 0.25 else vocab
        words.append(pool[rng.integers(len(pool))])
    return " ".join(words).capitalize() + "."


def _body(rng: np.random.Generator, vocab: list[str], spec: SynthSpec) -> str:
    lo, hi = spec.body_sentences
    return " ".join(_sentence(rng, vocab) for _ in range(int(rng.integers(lo, hi + 1))))


def _distractor_header(rng: np.random.Generator, used: set[str]) -> str:
    while True:
        a, b = rng.choice(len(_DISTRACTOR_WORDS), size=2, replace=False)
        header = f"{_DISTRACTOR_WORDS[a].capitalize()} {_DISTRACTOR_WORDS[b].capitalize()}"
        if header not in used:
            used.add(header)
            return header


def generate_collection(spec: SynthSpec) -> SynthCollection:
    spec.validate()
    topics = spec.topics()
    rng = np.random.default_rng(spec.seed)
    vocabs = [_vocabulary(spec.seed, t) for t in range(len(topics))]
    used_distractors: set[str] = set()
    distractors: list[str] = []
    texts, gold = {}, {}

    for d in range(spec.n_docs):
        doc_id = f"doc_{d:04d}"
        order = list(range(len(topics)))
        for _ in range(int(rng.integers(0, spec.order_jitter + 1))):
            i = int(rng.integers(len(order) - 1))
            order[i], order[i + 1] = order[i + 1], order[i]

        sections = []  # (topic index or None, header, body)
        for t in order:
            if rng.random() >= spec.omit_rate:
                paraphrases = topics[t][1]
                header = paraphrases[rng.integers(len(paraphrases))]
                sections.append((t, header, _body(rng, vocabs[t], spec)))
            if rng.random() < spec.distractor_rate:
                header = _distractor_header(rng, used_distractors)
                distractors.append(header)
                vocab = _vocabulary(spec.seed, 1000 + len(distractors), size=10)
                sections.append((None, header, _body(rng, vocab, spec)))

        parts = [f"Record {d + 1} prepared for collection review.\n\n"]
        offset = len(parts[0])
        for t, header, body in sections:
            chunk = f"{header}\n{body}\n\n"
            if t is not None:
                gold[(topics[t][0], doc_id)] = [(offset, offset + len(chunk))]
            parts.append(chunk)
            offset += len(chunk)
        text = "".join(parts)
        if text.endswith("\n\n"):
            text = text[:-1]
            for key in [k for k in gold if k[1] == doc_id]:
                s, e = gold[key][0]
                gold[key] = [(s, min(e, len(text)))]
        assert normalize_text(text) == text
        texts[doc_id] = text

    gold_toc = [{"label": label, "paraphrases": paraphrases} for label, paraphrases in topics]
    return SynthCollection(texts, gold_toc, gold, distractors)


def label_mapping(toc_labels: dict[int, str], gold_toc: list[dict]) -> dict[str, str]:
    """Map predicted topic ids to gold labels through the paraphrase lists.

    Predicted topics whose label is not a known paraphrase (e.g. a
    distractor header) are left unmapped.
    """
    lookup = {}
    for topic in gold_toc:
        for p in topic["paraphrases"]:
            lookup[p] = topic["label"]
    return {str(tid): lookup[label] for tid, label in toc_labels.items() if label in lookup}


def read_gold_toc(path: str | Path) -> list[dict]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return data["topics"] if isinstance(data, dict) else data
