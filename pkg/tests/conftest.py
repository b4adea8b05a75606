import pytest
from hypothesis import HealthCheck, settings

from effham.env import FieldModel, from_string, sample_realization

settings.register_profile("effham", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("effham")


def cosine(amps, period=1.0):
    return FieldModel("periodic_cosine", {"amplitudes": list(amps), "period": period})


@pytest.fixture(scope="session")
def r_p2():
    return sample_realization(from_string("p^2"), 0)


@pytest.fixture(scope="session")
def r_cos():
    return sample_realization(from_string("p^2", cosine([1.0])), 0)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
