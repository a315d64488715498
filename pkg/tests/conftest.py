import pytest

from couniv import kernels

# criterion number -> (verdict, detail); filled by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_report_header(config):
    return f"couniv kernel backend: {kernels.BACKEND}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_LINES):
        verdict, detail = ACCEPTANCE_LINES[num]
        terminalreporter.write_line(f"criterion {num:>2}: {verdict}  {detail}")


@pytest.fixture
def acceptance_line():
    def emit(num, ok, detail):
        ACCEPTANCE_LINES[num] = ("PASS" if ok else "FAIL", detail)
        print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit
