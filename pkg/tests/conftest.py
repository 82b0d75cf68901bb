import pytest

from evtwin.config import BehaviorParams, ChargingAreaConfig, PolicySet, ScenarioConfig
from evtwin.energy import EnergyConfig, PvParams, WindParams


def make_config(**overrides) -> ScenarioConfig:
    """Small two-area scenario; direct construction bypasses loader range
    checks so tests may use tiny fleets."""
    defaults = dict(
        nb_electrical=40,
        nb_gasoline=10,
        areas=(
            ChargingAreaConfig("C-Parking", 6, 2, 30),
            ChargingAreaConfig("J-Parking", 4, 1, 30),
        ),
        energy=EnergyConfig(pv=PvParams(nb_solar=100)),
        horizon_days=1,
        rng_seed=1,
        weather_ref="synthetic:q2",
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


@pytest.fixture
def small_config():
    return make_config()
