"""
Tests for solve counters and the JSON-lines event file.
"""

import json

from app.models.instance import SolveStats
from app.services.solve_log_service import SolveLog


class TestSolveLog:

    def test_counters_without_file(self):
        log = SolveLog()
        log.opp("Infeasible", 3, 0.5, cached=False)
        log.opp("Infeasible", 3, 0.0, cached=True)
        log.cut({"base": [0, 1]})
        log.incumbent(4, nodes=10)
        stats = log.fill(SolveStats(l0=2))
        assert stats.opp_calls == 1
        assert stats.memo_hits == 1
        assert stats.opp_seconds == 0.5
        assert stats.cuts_added == 1
        assert stats.incumbents == 1
        assert stats.l0 == 2

    def test_events_written_as_json_lines(self, tmp_path):
        path = tmp_path / "events.jsonl"
        with SolveLog(str(path), instance="cl_01_020_01") as log:
            log.event("start", n=20)
            log.incumbent(7, nodes=3)
        records = [json.loads(line) for line in path.read_text().splitlines()]
        assert [r["event"] for r in records] == ["start", "incumbent"]
        assert all(r["instance"] == "cl_01_020_01" for r in records)
        assert records[1]["value"] == 7

    def test_appends_to_existing_file(self, tmp_path):
        path = tmp_path / "events.jsonl"
        for _ in range(2):
            with SolveLog(str(path)) as log:
                log.event("start")
        assert len(path.read_text().splitlines()) == 2

    def test_unwritable_path_only_counts(self, tmp_path):
        log = SolveLog(str(tmp_path / "missing" / "events.jsonl"))
        log.event("start")
        log.count("nodes", 5)
        assert log.counters["nodes"] == 5
        log.close()
