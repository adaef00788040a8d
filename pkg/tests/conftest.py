import pytest

from combsense.config import REFERENCE_CONFIG, load_config, parse_config
from combsense import pipeline

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ref_cfg():
    return load_config(REFERENCE_CONFIG)


@pytest.fixture(scope="session")
def ref_comb(ref_cfg):
    return pipeline.build_comb(ref_cfg)


@pytest.fixture(scope="session")
def ref_result(ref_cfg, ref_comb):
    return pipeline.simulate(ref_cfg, ref_comb)


@pytest.fixture(scope="session")
def default_cfg():
    return parse_config("")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
