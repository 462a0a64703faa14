import pytest

from rtmot.synthetic import crossing_paths, linear_motion


@pytest.fixture
def crossing_seq_dir(tmp_path):
    seq = crossing_paths(n_pairs=2, n_frames=60, seed=3)
    return seq.write(str(tmp_path / "seq")), seq


@pytest.fixture(scope="session")
def linear_seq():
    return linear_motion(seed=0)
