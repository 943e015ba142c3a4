import pytest

from vsturm.ivp import warm_up


@pytest.fixture(scope="session", autouse=True)
def _compiled_kernel():
    # trigger JIT compilation once so test timings measure the algorithms
    warm_up()
