"""Expert chat relay: post a question to a channel, await the reply.

The outbound side speaks a generic {channel, text} contract; inbound replies
arrive through `deliver_reply` (wired to POST /relay/reply on the gateway) or
from registered responder callables (the scripted stand-ins for humans in
tests). A query transitions exactly once, pending -> answered | timed_out,
even when a reply races the timeout.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

PENDING = "pending"
ANSWERED = "answered"
TIMED_OUT = "timed_out"


class UnknownChannel(Exception):
    pass


class DuplicateChannel(Exception):
    pass


@dataclass
class ExpertQuery:
    id: str
    channel: str
    question: str
    posted_at: float
    state: str = PENDING
    reply: str | None = None
    answered_at: float | None = None
    _event: threading.Event = field(default_factory=threading.Event, repr=False)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "channel": self.channel,
            "question": self.question,
            "posted_at": self.posted_at,
            "state": self.state,
            "reply": self.reply,
            "answered_at": self.answered_at,
        }


Responder = Callable[[ExpertQuery, Callable[[str], None]], None]


class ExpertRelay:
    """Routes questions to expert channels and resolves the reply/timeout race."""

    def __init__(self, channels: tuple[str, ...] = (), log_path: str | Path | None = None,
                 clock: Callable[[], float] = time.time):
        self._channels: set[str] = set(channels)
        self._responders: dict[str, Responder] = {}
        self._queries: dict[str, ExpertQuery] = {}
        self._lock = threading.Lock()
        self._counter = 0
        self._clock = clock
        self.log_path = Path(log_path) if log_path else None
        if self.log_path and self.log_path.exists():
            self._replay_log()

    # -- setup ----------------------------------------------------------------

    def add_channel(self, channel: str):
        self._channels.add(channel)

    def channels(self) -> list[str]:
        return sorted(self._channels)

    def register_responder(self, channel: str, responder: Responder):
        with self._lock:
            if channel in self._responders:
                raise DuplicateChannel(channel)
            self._responders[channel] = responder
            self._channels.add(channel)

    # -- durable log ------------------------------------------------------------

    def _log(self, event: str, query: ExpertQuery, **extra):
        if self.log_path is None:
            return
        record = {"event": event, "at": self._clock(), **query.to_dict(), **extra}
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def _replay_log(self):
        for line in self.log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if record["event"] == "late_reply":
                continue
            query = self._queries.get(record["id"])
            if query is None:
                query = ExpertQuery(
                    id=record["id"],
                    channel=record["channel"],
                    question=record["question"],
                    posted_at=record["posted_at"],
                )
                self._queries[record["id"]] = query
                number = int(record["id"].split("-")[-1])
                self._counter = max(self._counter, number)
            query.state = record["state"]
            query.reply = record.get("reply")
            query.answered_at = record.get("answered_at")

    # -- operations ---------------------------------------------------------------

    def queries(self) -> list[ExpertQuery]:
        with self._lock:
            return list(self._queries.values())

    def get(self, query_id: str) -> ExpertQuery:
        query = self._queries.get(query_id)
        if query is None:
            raise KeyError(f"unknown query {query_id!r}")
        return query

    def ask(self, channel: str, question: str, timeout: float = 120.0) -> ExpertQuery:
        """Post a question; block until a reply arrives or the timeout passes."""
        if channel not in self._channels:
            raise UnknownChannel(channel)
        with self._lock:
            self._counter += 1
            query = ExpertQuery(
                id=f"q-{self._counter:04d}",
                channel=channel,
                question=question,
                posted_at=self._clock(),
            )
            self._queries[query.id] = query
            responder = self._responders.get(channel)
        self._log("asked", query)
        if responder is not None:
            responder(query, lambda text, q=query: self.deliver_reply(q.id, text))
        query._event.wait(timeout)
        with self._lock:
            if query.state == PENDING:
                query.state = TIMED_OUT
                self._log("timed_out", query)
        return query

    def deliver_reply(self, query_id: str, text: str) -> bool:
        """Resolve a pending query. Late or duplicate replies are logged and dropped."""
        query = self.get(query_id)
        with self._lock:
            if query.state != PENDING:
                self._log("late_reply", query, discarded_text=text)
                return False
            query.state = ANSWERED
            query.reply = text
            query.answered_at = self._clock()
            self._log("answered", query)
        query._event.set()
        return True
