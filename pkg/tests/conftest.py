import contextlib
import time

import pytest

_LINES: list = []


class Criterion:
    """Times a block, records one PASS/FAIL line and enforces the time limit."""

    def __init__(self, number: int, title: str, limit: float):
        self.number, self.title, self.limit = number, title, limit

    @contextlib.contextmanager
    def run(self):
        t0 = time.perf_counter()
        try:
            yield self
        except BaseException as exc:
            dt = time.perf_counter() - t0
            self._record(False, dt, f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
            raise
        dt = time.perf_counter() - t0
        ok = dt < self.limit
        self._record(ok, dt, "" if ok else f"over the {self.limit:g} s limit")
        assert ok, f"criterion {self.number} took {dt:.2f} s, limit {self.limit:g} s"

    def _record(self, ok, dt, why):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {self.number}: {self.title} ({dt:.2f} s / {self.limit:g} s)"
        if why:
            line += f"  {why}"
        _LINES.append((self.number, line))
        print(line)


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
