"""Collection-wide table of contents extraction.

Headers are detected per document, every (header, body) segment becomes a
node of a weighted similarity graph, Louvain communities are found on that
graph, and the ``k`` communities covering most of the collection form the
table of contents. Each topic is then grounded back to character spans.
"""

from .corpus import Corpus, Document, load_corpus, normalize_text
from .errors import ColltocError

__all__ = ["ColltocError", "Corpus", "Document", "load_corpus", "normalize_text"]
__version__ = "0.1.0"
