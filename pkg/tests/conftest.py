import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(n, title): acceptance criterion this test gates")


def pytest_runtest_logreport(report):
    item_marker = getattr(report, "criterion", None)
    if item_marker is None:
        return
    n, title = item_marker
    if report.when == "call" or (report.when == "setup" and report.failed):
        prev = _criteria.get(n, (title, True, []))
        ok = prev[1] and report.passed
        notes = prev[2] + list(getattr(report, "criterion_notes", []))
        _criteria[n] = (title, ok, notes)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = marker.args
        report.criterion_notes = item.stash.get(NOTES_KEY, [])


NOTES_KEY = pytest.StashKey[list]()


@pytest.fixture
def note(request):
    """Attach a line of measured detail to the acceptance summary."""
    notes = request.node.stash.setdefault(NOTES_KEY, [])
    return notes.append


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        title, ok, notes = _criteria[n]
        tr.write_line("%s  criterion %d: %s" % ("PASS" if ok else "FAIL", n,
                                                 title))
        for line in notes:
            tr.write_line("        %s" % line)
