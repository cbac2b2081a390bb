import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

sys.path.insert(0, str(Path(__file__).parent))


def require_fixture(name: str) -> Path:
    path = FIXTURES / name
    if not path.exists():
        pytest.fail(
            f"missing shipped fixture {path}; run scripts/build_fixtures.py first"
        )
    return path


@pytest.fixture(scope="session")
def shipped_vae():
    from armteleop.vae import TrajectoryVAE

    return TrajectoryVAE.from_checkpoint(require_fixture("vae.json"))


@pytest.fixture(scope="session")
def shipped_mapper():
    from armteleop.mapper import PoseMapper

    return PoseMapper.from_checkpoint(require_fixture("mapper.json"))


@pytest.fixture(scope="session")
def shipped_baseline():
    from armteleop.mapper import PoseMapper

    return PoseMapper.from_checkpoint(require_fixture("baseline.json"))


@pytest.fixture(scope="session")
def operator_fixture():
    from armteleop.records import read_human_pose_file

    return read_human_pose_file(require_fixture("operator.jsonl"))


@pytest.fixture(scope="session")
def targets_fixture():
    from armteleop.evaluation import read_target_file

    return read_target_file(require_fixture("targets.jsonl"))


@pytest.fixture(scope="session")
def desk_dataset():
    """The ~5k-segment regime named by the training acceptance criterion.

    Fixed at 180 trajectories regardless of the config presets (the shipped
    desk preset generates a larger corpus).
    """
    from armteleop.trajectories import build_vae_dataset

    return build_vae_dataset(trajectory_count=180, seed=7)
