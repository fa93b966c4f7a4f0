import random

import pytest

from edgepart.fixtures import MODEL_NAMES, load_fixture
from edgepart.model import build_model
from edgepart.profiles import CommCostModel, DeviceProfile, LayerProfile


def chain(num_layers, height=8, channels=4):
    """Input layer followed by same-size 1x1 convolutions."""
    layers = [{"kind": "input"}]
    layers += [{"kind": "convolution", "neurons": channels}] * (num_layers - 1)
    return build_model(f"chain{num_layers}", (height, height, channels), layers)


def manual_profile(model, comp, in_comm=None, ex_comm=None, send=None, recv=None):
    """Profile from explicit per-layer lists; missing lists are zeros."""
    n = len(model)
    zeros = [0.0] * n
    in_comm, ex_comm = in_comm or zeros, ex_comm or zeros
    send, recv = send or zeros, recv or zeros
    layers = {
        i + 1: LayerProfile(comp[i], 1.0 if comp[i] else 0.0, in_comm[i], ex_comm[i], send[i], recv[i])
        for i in range(n)
    }
    return DeviceProfile("manual", layers, CommCostModel(), CommCostModel())


def random_instance(seed, num_layers):
    """A chain with a random, heavy-tailed layer profile."""
    rng = random.Random(seed)
    model = chain(num_layers)
    comp = [0.0] + [rng.lognormvariate(0, 1) for _ in range(num_layers - 1)]
    in_comm = [rng.uniform(0, 0.1) for _ in range(num_layers)]
    send = [rng.uniform(0, 0.5) for _ in range(num_layers)]
    recv = [rng.uniform(0, 0.5) for _ in range(num_layers)]
    return model, manual_profile(model, comp, in_comm, send, send, recv)


@pytest.fixture(params=MODEL_NAMES)
def fixture_pair(request):
    return load_fixture(request.param)


@pytest.fixture(scope="session")
def vgg():
    return load_fixture("vgg16")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
