import os
import tempfile

# Keep the modulus cache out of the user's home during tests.
os.environ.setdefault("OTSTEGO_CACHE_DIR", tempfile.mkdtemp(prefix="otstego-test-cache-"))

import pytest  # noqa: E402

CRITERIA: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[number] = line
    print(line)


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[number])
