import numpy as np
import pytest

from rastersteps import Dataset, SyntheticSpec, synthesize


def make_dataset(cube, ds_id="test", variable="v") -> Dataset:
    cube = np.asarray(cube, dtype=np.float64)
    stamps = [f"2020-01-{d + 1:02d}T00:00:00+00:00" for d in range(cube.shape[0])]
    return Dataset(id=ds_id, variable=variable, cube=cube, timestamps=stamps,
                   extent=(0.0, 0.0, 1.0, 1.0))


@pytest.fixture
def ramp_dataset():
    return synthesize(SyntheticSpec("ramp", t=10, width=8, height=8))


@pytest.fixture
def burst_dataset():
    return synthesize(SyntheticSpec("burst", t=10, width=8, height=8, bursts=(5,)))
