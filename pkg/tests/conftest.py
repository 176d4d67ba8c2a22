import pytest

from manetsim.config import ScenarioConfig


def line_config(protocol="aodv", n=6, spacing=100.0, **kw):
    """Static line 0-1-...-(n-1); range reaches adjacent nodes only."""
    cfg = ScenarioConfig(protocol=protocol, nodes=n, range_m=spacing, duration=kw.pop("duration", 20.0),
                         positions=tuple((i * spacing, 0.0) for i in range(n)),
                         flow_pairs=kw.pop("flow_pairs", ((0, n - 1),)))
    cfg.adversary.fraction = 0.0
    for key, value in kw.items():
        setattr(cfg, key, value)
    return cfg


@pytest.fixture
def small_cfg():
    cfg = ScenarioConfig(nodes=20, duration=60.0, seed=3)
    return cfg


# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
