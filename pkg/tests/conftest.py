import contextlib

import pytest

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@contextlib.contextmanager
def criterion(number: int, label: str):
    """Record a pass/fail line for an acceptance criterion, then re-raise."""
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE[number] = (False, f"{label} -- {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
        raise
    ACCEPTANCE[number] = (True, label)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, label = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {label}")


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path
