import pytest

_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record a criterion outcome as ``verdict(number, name, ok, detail)``."""
    table = request.config.stash.setdefault(_VERDICTS, {})

    def record(number, name, ok, detail):
        table[number] = (name, bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} [{number}] {name}: {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_VERDICTS, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(table):
        name, ok, detail = table[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{number:2d}] {name}: {detail}")
