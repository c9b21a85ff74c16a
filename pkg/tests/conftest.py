"""Collects acceptance outcomes by criterion and prints one line per criterion."""

import pytest

CRITERIA = {
    1: "stationarity of every exact kernel",
    2: "coupling marginals and lifts",
    3: "operator identities and SW/SC/Metropolis comparison on K3",
    4: "graphic and cographic certificates",
    5: "subspace loss ratios",
    6: "canonical paths, encoding and congestion",
    7: "quantum sampler convergence and coupling bound",
    8: "sampling fidelity on the 3x3 torus",
    9: "4D toric two-seed consistency",
    10: "byte-identical reruns",
}

_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if marker:
        _outcomes.setdefault(marker, []).append((report.nodeid.split("::")[-1], report.passed))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n:2d}: NOT RUN  {title}")
            continue
        failed = [name for name, ok in results if not ok]
        status = "PASS" if not failed else "FAIL"
        extra = f"  (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {n:2d}: {status}  {title}{extra}")
