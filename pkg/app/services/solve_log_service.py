"""
Solve Log Service

Counters of one solve plus an optional JSON-lines event file used by the
benchmark harness for auditing.
"""

import json
import logging
import threading
import time
from typing import Any, Dict, Optional, TextIO

from app.models.instance import SolveStats

logger = logging.getLogger(__name__)


class SolveLog:
    """
    Event sink of one solve.

    Every event is counted; when a path is given it is also appended to
    that file as one JSON object per line.
    """

    def __init__(self, path: Optional[str] = None, instance: Optional[str] = None):
        self.path = path
        self.instance = instance
        self.started = time.perf_counter()
        self.counters: Dict[str, float] = {
            "nodes": 0,
            "incumbents": 0,
            "cuts_added": 0,
            "opp_calls": 0,
            "opp_seconds": 0.0,
            "memo_hits": 0,
        }
        self._lock = threading.Lock()
        self._handle: Optional[TextIO] = None
        if path:
            try:
                self._handle = open(path, "a", encoding="utf-8")
            except OSError as e:
                logger.warning(f"⚠️ Could not open solve log {path}: {e}")

    def event(self, kind: str, **fields: Any) -> None:
        with self._lock:
            if self._handle is None:
                return
            record = {"t": round(time.perf_counter() - self.started, 6), "event": kind}
            if self.instance:
                record["instance"] = self.instance
            record.update(fields)
            self._handle.write(json.dumps(record, default=str) + "\n")

    def count(self, counter: str, amount: float = 1) -> None:
        with self._lock:
            self.counters[counter] = self.counters.get(counter, 0) + amount

    def incumbent(self, value: int, nodes: int) -> None:
        self.count("incumbents")
        self.event("incumbent", value=value, nodes=nodes)

    def cut(self, cut_dict: Dict) -> None:
        self.count("cuts_added")
        self.event("cut", cut=cut_dict)

    def opp(self, verdict: str, size: int, seconds: float, cached: bool) -> None:
        if cached:
            self.count("memo_hits")
        else:
            self.count("opp_calls")
            self.count("opp_seconds", seconds)
        self.event("opp", verdict=verdict, items=size, seconds=round(seconds, 6), cached=cached)

    def fill(self, stats: SolveStats) -> SolveStats:
        """Copy the counters into solution stats."""
        return stats.copy(update={
            "nodes": int(self.counters["nodes"]),
            "incumbents": int(self.counters["incumbents"]),
            "cuts_added": int(self.counters["cuts_added"]),
            "opp_calls": int(self.counters["opp_calls"]),
            "opp_seconds": float(self.counters["opp_seconds"]),
            "memo_hits": int(self.counters["memo_hits"]),
        })

    def close(self) -> None:
        with self._lock:
            if self._handle is not None:
                self._handle.close()
                self._handle = None

    def __enter__(self) -> "SolveLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
