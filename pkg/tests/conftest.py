import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ultragraph.graph_core import parse_edge_list

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

FIG1_TEXT = """\
# weighted graph of the worked example
a c 1
a b 1.5
a f 3
b c 4.5
b d 2
d e 1
d f 1
e f 3
c f 100
"""


@pytest.fixture
def fig1():
    return parse_edge_list(FIG1_TEXT)


@pytest.fixture
def fig1_path(tmp_path):
    p = tmp_path / "fig1.tsv"
    p.write_text(FIG1_TEXT)
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
