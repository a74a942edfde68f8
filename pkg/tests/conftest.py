from importlib import resources

import pytest

from stochstore import Scenario, parse_scenario


def read_fixture_text(name: str) -> str:
    return (resources.files("stochstore") / "scenarios" / f"{name}.json").read_text(
        encoding="utf-8"
    )


@pytest.fixture(scope="session")
def fig2_scenario() -> Scenario:
    return parse_scenario(read_fixture_text("fig2_battery"))


@pytest.fixture(scope="session")
def day24_scenario() -> Scenario:
    return parse_scenario(read_fixture_text("day24_lognormal"))
