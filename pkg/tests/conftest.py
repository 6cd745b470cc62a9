from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def design():
    from binmcp.design import case_study_design
    return case_study_design()


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            lines += [v for k, v in rep.user_properties if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        def order(line: str) -> tuple[int, str]:
            key = line.split()[1]
            return int(key.rstrip("s")), key

        for line in sorted(lines, key=order):
            terminalreporter.write_line(line)
