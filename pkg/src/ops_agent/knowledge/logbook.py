"""Electronic logbook: append-only jsonl store with BM25 search.

Entries are both a retrieval source and a write target; ids are strictly
increasing in insertion order and survive reloads.
"""

from __future__ import annotations

import json
import shutil
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

from .bm25 import Bm25Index, RankedHit
from .errors import EmptyBody


@dataclass(frozen=True)
class LogbookEntry:
    id: int
    timestamp: float
    author: str
    title: str
    body: str
    tags: tuple[str, ...] = field(default_factory=tuple)

    def search_text(self) -> str:
        return f"{self.title}\n{self.body}\n{' '.join(self.tags)}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tags"] = list(self.tags)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LogbookEntry":
        return cls(
            id=int(d["id"]),
            timestamp=float(d["timestamp"]),
            author=d.get("author", ""),
            title=d["title"],
            body=d["body"],
            tags=tuple(d.get("tags", ())),
        )


class LogbookStore:
    """One jsonl file, one entry per line; posts are serialized, reads are lock-free."""

    def __init__(self, path: str | Path, clock: Callable[[], float] = time.time):
        self.path = Path(path)
        self.clock = clock
        self._lock = threading.Lock()
        self._entries: list[LogbookEntry] = []
        self._index: Bm25Index | None = None
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._entries.append(LogbookEntry.from_dict(json.loads(line)))

    @classmethod
    def open_seeded(cls, path: str | Path, seed_path: str | Path,
                    clock: Callable[[], float] = time.time) -> "LogbookStore":
        """Open `path`, first copying the seed file there if it does not exist yet."""
        path = Path(path)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(seed_path, path)
        return cls(path, clock=clock)

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def next_id(self) -> int:
        return (self._entries[-1].id + 1) if self._entries else 1

    def entries(self) -> list[LogbookEntry]:
        return list(self._entries)

    def get(self, entry_id: int) -> LogbookEntry:
        for entry in self._entries:
            if entry.id == entry_id:
                return entry
        raise KeyError(f"no logbook entry #{entry_id}")

    def post(self, title: str, body: str, author: str = "", tags: tuple[str, ...] = ()) -> int:
        if not title.strip() or not body.strip():
            raise EmptyBody("logbook entries need a non-empty title and body")
        with self._lock:
            entry = LogbookEntry(
                id=self.next_id,
                timestamp=float(self.clock()),
                author=author,
                title=title,
                body=body,
                tags=tuple(tags),
            )
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry.to_dict(), ensure_ascii=False) + "\n")
            self._entries.append(entry)
            self._index = None
            return entry.id

    def _ensure_index(self) -> Bm25Index:
        index = self._index
        if index is None:
            index = Bm25Index({e.id: e.search_text() for e in self._entries})
            self._index = index
        return index

    def search(self, query: str, k: int, since: float | None = None) -> list[RankedHit]:
        if not query.strip():
            return []
        hits = self._ensure_index().search(query, k=max(k, len(self._entries) or 1))
        if since is not None:
            by_id = {e.id: e for e in self._entries}
            hits = [h for h in hits if by_id[h.ref].timestamp >= since]
        return hits[:k]
