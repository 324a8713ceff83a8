import numpy as np
import pytest

from trendflag import TimeSeries


def make_series(values, start=2000, name="s", units=""):
    values = np.asarray(values, dtype=float)
    return TimeSeries(name, start + np.arange(values.size), values, units)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
