"""Corpus ingestion and deterministic BM25 retrieval scoped to an agent's corpora."""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import yaml

# the C loader is an order of magnitude faster when libyaml is present
_YAML_LOADER = getattr(yaml, "CSafeLoader", yaml.SafeLoader)

WINDOW = 200
OVERLAP = 40
MIN_TAIL = 20
K1 = 1.2
B = 0.75

_TOKEN = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")


class IngestError(ValueError):
    pass


class RetrievalError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    raw = resources.files("hde.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in raw.splitlines() if w.strip() and not w.startswith("#"))


def build_query(dilemma: str, opponent_turn: str | None = None, stopwords: Iterable[str] | None = None) -> str:
    """Dilemma plus the opponent's last turn, lowercased with stopwords removed."""
    stop = default_stopwords() if stopwords is None else frozenset(stopwords)
    text = dilemma if not opponent_turn else f"{dilemma} {opponent_turn}"
    return " ".join(t for t in tokenize(text) if t not in stop)


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    corpus_id: str
    text: str
    position: int

    @property
    def token_estimate(self) -> int:
        return len(self.text.split())


def chunk_words(words: Sequence[str]) -> list[tuple[int, int]]:
    """Word spans for a 200-word window advancing 160 words at a time.

    A trailing window is kept only if it adds at least 20 words the previous
    window did not already cover; a sole window is always kept.
    """
    n = len(words)
    stride = WINDOW - OVERLAP
    spans: list[tuple[int, int]] = []
    start = 0
    while True:
        end = min(start + WINDOW, n)
        if spans and end - spans[-1][1] < MIN_TAIL:
            break
        spans.append((start, end))
        if end >= n:
            break
        start += stride
    return spans


def chunk_text(text: str, corpus_id: str) -> list[Chunk]:
    words = text.split()
    if not words:
        raise IngestError(f"{corpus_id}: source is empty")
    return [
        Chunk(f"{corpus_id}:{pos:04d}", corpus_id, " ".join(words[s:e]), pos)
        for pos, (s, e) in enumerate(chunk_words(words))
    ]


def read_source(path: str | Path) -> str:
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from None


def ingest(source: str | Path, corpus_id: str) -> list[Chunk]:
    text = read_source(source)
    if not text.strip():
        raise IngestError(f"{source}: empty file")
    return chunk_text(text, corpus_id)


@dataclass
class _Doc:
    chunk: Chunk
    tf: Counter
    length: int


class RetrievalIndex:
    """BM25 postings over chunks from one or more corpora.

    Document statistics (N, average length, document frequency) are taken
    over the requested scope only, so an agent's ranking never depends on
    corpora outside its scope.
    """

    def __init__(self, chunks: Iterable[Chunk] = (), k1: float = K1, b: float = B):
        self.k1 = k1
        self.b = b
        self._docs: dict[str, list[_Doc]] = {}
        for chunk in chunks:
            self.add(chunk)

    def add(self, chunk: Chunk) -> None:
        toks = tokenize(chunk.text)
        self._docs.setdefault(chunk.corpus_id, []).append(_Doc(chunk, Counter(toks), len(toks)))

    @property
    def corpus_ids(self) -> frozenset[str]:
        return frozenset(self._docs)

    def chunks(self, scope: Iterable[str] | None = None) -> list[Chunk]:
        ids = sorted(self._docs if scope is None else scope)
        return [d.chunk for cid in ids for d in self._docs[cid]]

    def _scoped(self, scope: Iterable[str]) -> list[_Doc]:
        scope = set(scope)
        if not scope:
            raise RetrievalError("scope must be non-empty")
        unknown = sorted(scope - set(self._docs))
        if unknown:
            raise RetrievalError(f"unknown corpus ids in scope: {unknown}")
        return [d for cid in sorted(scope) for d in self._docs[cid]]

    def retrieve(self, query: str, k: int, scope: Iterable[str]) -> list[tuple[Chunk, float]]:
        if k < 1:
            raise RetrievalError("k must be >= 1")
        docs = self._scoped(scope)
        terms = sorted(set(tokenize(query)))
        n = len(docs)
        avgdl = sum(d.length for d in docs) / n
        df = {t: sum(1 for d in docs if t in d.tf) for t in terms}
        terms = [t for t in terms if df[t]]
        if not terms:
            return []
        idf = {t: math.log(1.0 + (n - df[t] + 0.5) / (df[t] + 0.5)) for t in terms}
        scored = []
        for d in docs:
            norm = self.k1 * (1.0 - self.b + self.b * d.length / avgdl)
            score = 0.0
            for t in terms:
                tf = d.tf.get(t, 0)
                if tf:
                    score += idf[t] * tf * (self.k1 + 1.0) / (tf + norm)
            if score > 0.0:
                scored.append((d.chunk, score))
        scored.sort(key=lambda cs: (-cs[1], cs[0].chunk_id))
        return scored[:k]


def retrieve(index: RetrievalIndex, query: str, k: int, scope: Iterable[str]) -> list[tuple[Chunk, float]]:
    return index.retrieve(query, k, scope)


# -- manifests and the on-disk cache ------------------------------------------


@dataclass(frozen=True)
class CorpusEntry:
    corpus_id: str
    path: Path
    owner_agent_ids: tuple[str, ...] = ()


@dataclass
class CorpusManifest:
    path: Path
    corpora: list[CorpusEntry] = field(default_factory=list)

    def owned_by(self, agent_id: str) -> list[str]:
        return [c.corpus_id for c in self.corpora if agent_id in c.owner_agent_ids]

    @property
    def corpus_ids(self) -> list[str]:
        return [c.corpus_id for c in self.corpora]


def load_manifest(path: str | Path) -> CorpusManifest:
    path = Path(path)
    doc = yaml.load(path.read_text(encoding="utf-8"), Loader=_YAML_LOADER) or {}
    raw = doc.get("corpora") if isinstance(doc, dict) else doc
    if not raw:
        raise IngestError(f"{path}: manifest lists no corpora")
    entries = []
    for item in raw:
        src = Path(item["path"])
        if not src.is_absolute():
            src = path.parent / src
        entries.append(CorpusEntry(str(item["corpus_id"]), src, tuple(item.get("owner_agent_ids") or ())))
    ids = [e.corpus_id for e in entries]
    if len(set(ids)) != len(ids):
        raise IngestError(f"{path}: duplicate corpus ids")
    return CorpusManifest(path, entries)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def build_index(manifest: CorpusManifest, cache_path: str | Path | None = None) -> tuple[RetrievalIndex, dict]:
    """Build (or reload) the index for every corpus in the manifest.

    Returns the index and a summary with per-corpus cache hit/miss status.
    Cache entries are keyed by the sha256 of each source file.
    """
    missing = [str(c.path) for c in manifest.corpora if not c.path.is_file()]
    if missing:
        raise IngestError(f"missing corpus files: {missing}")
    cache: dict = {}
    if cache_path is not None and Path(cache_path).is_file():
        try:
            cache = json.loads(Path(cache_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            cache = {}
    cached = cache.get("corpora", {})
    out: dict = {}
    status: dict[str, str] = {}
    index = RetrievalIndex()
    for entry in manifest.corpora:
        digest = _sha256(entry.path.read_bytes())
        hit = cached.get(entry.corpus_id)
        if hit and hit.get("sha256") == digest:
            chunks = [Chunk(c["chunk_id"], entry.corpus_id, c["text"], c["position"]) for c in hit["chunks"]]
            status[entry.corpus_id] = "hit"
        else:
            chunks = ingest(entry.path, entry.corpus_id)
            status[entry.corpus_id] = "miss"
        for c in chunks:
            index.add(c)
        out[entry.corpus_id] = {
            "sha256": digest,
            "chunks": [{"chunk_id": c.chunk_id, "text": c.text, "position": c.position} for c in chunks],
        }
    stale = any(s == "miss" for s in status.values()) or set(cached) != set(out)
    if cache_path is not None and stale:
        Path(cache_path).parent.mkdir(parents=True, exist_ok=True)
        Path(cache_path).write_text(json.dumps({"corpora": out}, sort_keys=True), encoding="utf-8")
    summary = {
        "corpora": len(out),
        "chunks": sum(len(v["chunks"]) for v in out.values()),
        "status": status,
        "cache_hit": bool(status) and all(s == "hit" for s in status.values()),
    }
    return index, summary
