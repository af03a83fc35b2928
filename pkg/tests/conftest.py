import pytest

ACCEPTANCE_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(number, ok, desc, seconds):
        ACCEPTANCE_RESULTS.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {desc}  ({seconds:.2f} s)")
        print(ACCEPTANCE_RESULTS[-1])
    return record
