"""Suite reports: deterministic text/JSON rendering and exit codes."""

from __future__ import annotations

import hashlib
import json
import time

from .algebra import CheckRecord

TOOL_VERSION = "0.1.0"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


class SuiteReport:
    def __init__(self, suite_name, input_digest="", timings=False):
        self.suite_name = suite_name
        self.input_digest = input_digest
        self.records: list[CheckRecord] = []
        self.timings: dict[str, int] = {}
        self.with_timings = timings

    def add(self, records, timer_key=None, elapsed_ms=None):
        if isinstance(records, CheckRecord):
            records = [records]
        self.records.extend(records)
        if timer_key is not None and elapsed_ms is not None:
            self.timings[timer_key] = elapsed_ms

    def timed(self, key, fn):
        t0 = time.monotonic()
        out = fn()
        self.add(out, timer_key=key, elapsed_ms=int((time.monotonic() - t0) * 1000))
        return out

    @property
    def ok(self):
        return all(r.ok for r in self.records)

    def exit_code(self):
        return EXIT_OK if self.ok else EXIT_FAIL

    def sorted_records(self):
        return sorted(self.records, key=lambda r: r.name)

    def as_dict(self):
        d = {
            "tool": "ssw",
            "version": TOOL_VERSION,
            "suite": self.suite_name,
            "input_digest": self.input_digest,
            "checks": [r.as_dict() for r in self.sorted_records()],
            "ok": self.ok,
        }
        if self.with_timings:
            d["wall_time_ms"] = dict(sorted(self.timings.items()))
        return d

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=False) + "\n"

    def to_text(self):
        lines = [f"suite {self.suite_name}"]
        for r in self.sorted_records():
            lines.append(repr(r))
        n_pass = sum(1 for r in self.records if r.status == "pass")
        n_skip = sum(1 for r in self.records if r.status == "skip")
        n_fail = len(self.records) - n_pass - n_skip
        lines.append(f"{n_pass} passed, {n_fail} failed, {n_skip} skipped")
        return "\n".join(lines) + "\n"


def digest_of(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, bytes):
            h.update(p)
        else:
            h.update(str(p).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]
