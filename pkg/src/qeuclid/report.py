"""Structured pass/fail records for identity checks."""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, List, Optional


@dataclass
class CheckResult:
    check_id: str
    passed: bool
    residual: Optional[str] = None
    timing_ms: float = 0.0
    note: Optional[str] = None

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self, timings: bool = True) -> dict:
        out = {"check_id": self.check_id, "status": self.status, "residual": self.residual}
        if self.note:
            out["note"] = self.note
        if timings:
            out["timing_ms"] = round(self.timing_ms, 3)
        return out


@dataclass
class VerificationReport:
    """Ordered collection of :class:`CheckResult`.

    Check ids are unique; adding an id twice keeps the conjunction.
    """

    results: List[CheckResult] = field(default_factory=list)
    _clock: Optional[float] = field(default=None, repr=False)

    def add(self, check_id: str, passed: bool, residual: Optional[str] = None,
            timing_ms: Optional[float] = None, note: Optional[str] = None) -> CheckResult:
        if timing_ms is None:
            timing_ms = 0.0 if self._clock is None else (time.perf_counter() - self._clock) * 1e3
        res = CheckResult(check_id, bool(passed), None if passed else residual, timing_ms, note)
        for i, old in enumerate(self.results):
            if old.check_id == check_id:
                merged = CheckResult(check_id, old.passed and res.passed,
                                     old.residual or res.residual,
                                     old.timing_ms + res.timing_ms, old.note or note)
                self.results[i] = merged
                return merged
        self.results.append(res)
        return res

    @contextmanager
    def timed(self) -> Iterator["VerificationReport"]:
        self._clock = time.perf_counter()
        try:
            yield self
        finally:
            self._clock = None

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        for r in other.results:
            self.add(r.check_id, r.passed, r.residual, r.timing_ms, r.note)
        return self

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def __getitem__(self, check_id: str) -> CheckResult:
        for r in self.results:
            if r.check_id == check_id:
                return r
        raise KeyError(check_id)

    def __contains__(self, check_id: str) -> bool:
        return any(r.check_id == check_id for r in self.results)

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    def sorted(self) -> "VerificationReport":
        return VerificationReport(sorted(self.results, key=lambda r: r.check_id))
