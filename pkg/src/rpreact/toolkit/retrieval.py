"""Keyword retrieval over small corpora: RetrieveAgenda / RetrieveScirex.

Scoring is term frequency normalized by document length, summed over the
keyword's terms. Ties break on document id, so identical corpus plus
keyword always yields identical bytes.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from rpreact.toolkit.errors import ToolError

_WORD = re.compile(r"[a-z0-9]+")

TOP_K = 3


def _terms(text: str) -> list[str]:
    return _WORD.findall(text.lower())


class Corpus:
    def __init__(self, name: str, documents: dict[str, str]) -> None:
        if not documents:
            raise ToolError(f"corpus {name!r} is empty")
        self.name = name
        self.documents = dict(documents)
        self._tf: dict[str, dict[str, int]] = {}
        self._doc_len: dict[str, int] = {}
        self._build_index()

    def _build_index(self) -> None:
        self._tf.clear()
        self._doc_len.clear()
        for doc_id, text in self.documents.items():
            terms = _terms(text)
            self._doc_len[doc_id] = max(len(terms), 1)
            for term in terms:
                self._tf.setdefault(term, {}).setdefault(doc_id, 0)
                self._tf[term][doc_id] += 1

    def score(self, keyword: str, doc_id: str) -> float:
        total = 0
        for term in _terms(keyword):
            total += self._tf.get(term, {}).get(doc_id, 0)
        return total / self._doc_len[doc_id]

    def search(self, keyword: str, k: int = TOP_K) -> list[tuple[str, str]]:
        scored = [
            (doc_id, self.score(keyword, doc_id)) for doc_id in self.documents
        ]
        hits = [(d, s) for d, s in scored if s > 0]
        hits.sort(key=lambda pair: (-pair[1], pair[0]))
        return [(d, self.documents[d]) for d, _ in hits[:k]]


def load_corpus(name: str, path: str | Path) -> Corpus:
    """Load from a directory of .txt files or one JSONL file of {id, text}."""
    path = Path(path)
    documents: dict[str, str] = {}
    if path.is_dir():
        for txt in sorted(path.glob("*.txt")):
            documents[txt.stem] = txt.read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                doc = json.loads(line)
                documents[str(doc["id"])] = doc["text"]
    return Corpus(name, documents)


def retrieve(corpus: Corpus, keyword: str) -> str:
    hits = corpus.search(keyword)
    if not hits:
        return "No results found"
    return "\n\n".join(f"[{doc_id}] {text}" for doc_id, text in hits)
