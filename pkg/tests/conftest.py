import pytest

_RESULTS: list[tuple[str, bool, str]] = []


class Recorder:
    def __init__(self, label: str):
        self.label = label

    def check(self, ok: bool, detail: str) -> None:
        _RESULTS.append((self.label, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {self.label}: {detail}")
        assert ok, f"{self.label}: {detail}"


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    label = marker.args[0] if marker else request.node.name
    return Recorder(label)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
