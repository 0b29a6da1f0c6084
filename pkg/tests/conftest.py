import numpy as np
import pytest

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title, gating=True): one acceptance criterion")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def report(request):
    """Attach a one-line measurement to the acceptance summary."""

    def _report(text):
        request.node.user_properties.append(("detail", text))

    return _report


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args[:2]
    gating = marker.kwargs.get("gating", True)
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "gating": gating, "items": {}})
    status, detail = entry["items"].get(item.nodeid, (None, []))
    if rep.skipped:
        status = "SKIP"
        detail = [str(rep.longrepr[2]) if isinstance(rep.longrepr, tuple) else "skipped"]
    elif rep.failed:
        status = "FAIL"
    elif rep.when == "call" and status is None:
        status = "PASS"
        met = [v for k, v in item.user_properties if k == "met"]
        if met and not met[-1]:
            status = "NOT MET"
    if rep.when == "call":
        detail = [v for k, v in item.user_properties if k == "detail"] or detail
    entry["items"][item.nodeid] = (status, detail)


_RANK = {"FAIL": 4, "NOT MET": 3, "PASS": 2, "SKIP": 1, None: 0}


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        tag = "" if e["gating"] else " (non-gating)"
        statuses = [st for st, _ in e["items"].values()]
        status = max(statuses, key=_RANK.get) or "NOT RUN"
        detail = "; ".join(d for _, ds in e["items"].values() for d in ds)
        line = f"criterion {number:>2}: {status:<7} {e['title']}{tag}"
        tr.write_line(line + (f" [{detail}]" if detail else ""))
