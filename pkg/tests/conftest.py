"""Shared acceptance-result log: one visible line per criterion at the end."""
import pytest


class AcceptanceLog:
    def __init__(self):
        self.lines = []

    def record(self, cid: int, desc: str, ok: bool, detail: str = "") -> bool:
        status = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        self.lines.append(f"criterion-{cid} {desc}: {status}{suffix}")
        return ok


_LOG = AcceptanceLog()


@pytest.fixture(scope="session")
def acceptance_log() -> AcceptanceLog:
    return _LOG


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _LOG.lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LOG.lines):
            terminalreporter.write_line(line)
