from pathlib import Path

import pytest

from colltoc.config import render_config
from colltoc.headers import Segment
from colltoc.synthgen import SynthSpec, generate_collection


def make_segment(doc_ind=0, seg_ind=0.0, head="Head", body="body text", start=0, order=0):
    head_end = start + len(head)
    body_end = head_end + 1 + len(body)
    return Segment(doc_ind, seg_ind, head, body, (start, head_end), (head_end, body_end), order)


@pytest.fixture
def synth_workspace(tmp_path) -> Path:
    """A small synthetic collection plus a config.toml that points at it."""
    spec = SynthSpec(n_docs=12, n_topics=4, distractor_rate=0.0, seed=3)
    generate_collection(spec).write(tmp_path)
    (tmp_path / "config.toml").write_text(render_config("corpus", "run", k=4, seed=0), encoding="utf-8")
    return tmp_path


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
