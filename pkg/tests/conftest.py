import pytest

from smibstab import (
    ControllerConfig,
    FaultScenario,
    SimulationConfig,
    SmibParams,
    simulate,
)

# Benchmark system used throughout: H = 4 s at 50 Hz, no damping,
# 0.8 p.u. mechanical power against a 1 p.u. line limit.


@pytest.fixture(scope="session")
def params():
    return SmibParams.from_operating_point(
        H=4.0, f0=50.0, D=0.0, p_mech=0.8, p_max=1.0
    )


@pytest.fixture(scope="session")
def make_controller():
    def factory(b, **overrides):
        kwargs = dict(tau=0.1, K=1.0, L=1.1, alpha=1.0, b=b)
        kwargs.update(overrides)
        return ControllerConfig(**kwargs)

    return factory


@pytest.fixture(scope="session")
def fault():
    return FaultScenario(delta0=0.2)


@pytest.fixture(scope="session")
def traj_b02(params, make_controller, fault):
    return simulate(fault, make_controller(0.2), params, SimulationConfig())


@pytest.fixture(scope="session")
def traj_binf(params, make_controller, fault):
    return simulate(fault, make_controller(float("inf")), params, SimulationConfig())


@pytest.fixture(scope="session")
def traj_unstable(params, fault):
    return simulate(fault, None, params, SimulationConfig())


@pytest.fixture(scope="session")
def traj_stable_unc(params):
    return simulate(FaultScenario(delta0=0.4), None, params, SimulationConfig())
