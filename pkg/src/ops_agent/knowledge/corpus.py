"""Document corpora: markdown files chunked on headings, searched with BM25."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..react.tokens import estimate_tokens
from .bm25 import Bm25Index, RankedHit
from .errors import UnreadablePath

MAX_CHUNK_TOKENS = 512
_MAX_CHUNK_CHARS = MAX_CHUNK_TOKENS * 4


@dataclass(frozen=True)
class DocChunk:
    source_path: str
    heading: str
    body: str

    @property
    def token_estimate(self) -> int:
        return estimate_tokens(self.body)


def _split_oversized(text: str) -> list[str]:
    """Split a section into <= _MAX_CHUNK_CHARS pieces on paragraph boundaries."""
    if len(text) <= _MAX_CHUNK_CHARS:
        return [text]
    pieces, current = [], ""
    for paragraph in text.split("\n\n"):
        while len(paragraph) > _MAX_CHUNK_CHARS:
            pieces.append(paragraph[:_MAX_CHUNK_CHARS])
            paragraph = paragraph[_MAX_CHUNK_CHARS:]
        candidate = f"{current}\n\n{paragraph}" if current else paragraph
        if len(candidate) > _MAX_CHUNK_CHARS:
            pieces.append(current)
            current = paragraph
        else:
            current = candidate
    if current:
        pieces.append(current)
    return [p for p in pieces if p.strip()]


def chunk_markdown(text: str, source_path: str) -> list[DocChunk]:
    """Split on heading lines; every chunk stays within the token limit."""
    sections: list[tuple[str, list[str]]] = []
    heading = ""
    lines: list[str] = []
    for line in text.splitlines():
        if line.startswith("#"):
            if lines and any(l.strip() for l in lines):
                sections.append((heading, lines))
            heading = line.lstrip("#").strip()
            lines = []
        else:
            lines.append(line)
    if lines and any(l.strip() for l in lines):
        sections.append((heading, lines))
    chunks = []
    for heading, lines in sections:
        body = "\n".join(lines).strip()
        for piece in _split_oversized(body):
            chunks.append(DocChunk(source_path=source_path, heading=heading, body=piece))
    return chunks


class DocCorpus:
    """Chunks from one or more directories of plain-text/markdown files."""

    def __init__(self, name: str):
        self.name = name
        self._chunks: list[DocChunk] = []
        self._index: Bm25Index | None = None

    def __len__(self) -> int:
        return len(self._chunks)

    def chunks(self) -> list[DocChunk]:
        return list(self._chunks)

    def chunk(self, ref: int) -> DocChunk:
        return self._chunks[ref]

    def ingest(self, directory: str | Path) -> int:
        """Chunk every *.md / *.txt file under `directory`; re-ingest replaces
        prior chunks from the same source paths. Returns the chunk count added."""
        directory = Path(directory)
        if not directory.is_dir():
            raise UnreadablePath(str(directory))
        files = sorted(p for p in directory.rglob("*") if p.suffix in (".md", ".txt") and p.is_file())
        added: list[DocChunk] = []
        replaced_paths = set()
        for path in files:
            source = str(path)
            replaced_paths.add(source)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise UnreadablePath(f"{path}: {exc}")
            added.extend(chunk_markdown(text, source))
        self._chunks = [c for c in self._chunks if c.source_path not in replaced_paths] + added
        self._index = None
        return len(added)

    def _ensure_index(self) -> Bm25Index:
        index = self._index
        if index is None:
            index = Bm25Index({
                i: f"{c.heading}\n{c.body}" for i, c in enumerate(self._chunks)
            })
            self._index = index
        return index

    def search(self, query: str, k: int) -> list[RankedHit]:
        if not query.strip() or not self._chunks:
            return []
        return self._ensure_index().search(query, k)
