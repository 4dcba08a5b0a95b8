import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from lackawalk import graphs
from lackawalk.graphs import MarkedInstance

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# locally arc-transitive instances small enough for dense oracles
LAT_GRAPHS = {
    "cycle5": lambda: graphs.cycle(5),
    "cycle8": lambda: graphs.cycle(8),
    "complete6": lambda: graphs.complete(6),
    "torus3": lambda: graphs.torus(3, 3),
    "torus4": lambda: graphs.torus(4, 4),
    "hypercube3": lambda: graphs.hypercube(3),
    "johnson52": lambda: graphs.johnson(5, 2),
    "k33": lambda: graphs.complete_bipartite(3),
    "paley13": lambda: graphs.paley(13),
}
NON_LAT_GRAPHS = {
    "moebius8": lambda: graphs.moebius_ladder(8),
    "torus34": lambda: graphs.torus(3, 4),
}


@pytest.fixture(params=sorted(LAT_GRAPHS))
def lat_instance(request):
    return MarkedInstance(LAT_GRAPHS[request.param](), 0)


@pytest.fixture(params=sorted(NON_LAT_GRAPHS))
def non_lat_instance(request):
    return MarkedInstance(NON_LAT_GRAPHS[request.param](), 0)



def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
