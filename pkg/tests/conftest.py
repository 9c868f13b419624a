from __future__ import annotations

import pytest

from mazeteach.planner import NoiseParams, PlannerParams, build_demo_bank
from mazeteach.task import builtin_task_path, load_task

SEED = 7

MINI_TASK_TOML = """\
name = "mini"
direction = "zone-to-point"
goal = [20.0, 55.0]

[workspace]
min = [0.0, 0.0]
max = [40.0, 60.0]

[[obstacles]]
min = [10.0, 25.0]
max = [40.0, 30.0]

[start_region]
min = [0.0, 0.0]
max = [40.0, 12.0]

[grid]
rows = 2
cols = 3
pitch = 4.0
origin = [14.0, 2.0]
"""


@pytest.fixture(scope="session")
def training_spec():
    return load_task(builtin_task_path("training"))


@pytest.fixture(scope="session")
def transfer_spec():
    return load_task(builtin_task_path("transfer"))


@pytest.fixture(scope="session")
def mini_task_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("tasks") / "mini.toml"
    path.write_text(MINI_TASK_TOML)
    return path


@pytest.fixture(scope="session")
def mini_spec(mini_task_path):
    return load_task(mini_task_path)


@pytest.fixture(scope="session")
def mini_bank(mini_spec):
    return build_demo_bank(mini_spec, PlannerParams(seed=SEED), NoiseParams(seed=SEED))


@pytest.fixture(scope="session")
def training_bank(training_spec):
    return build_demo_bank(
        training_spec, PlannerParams(seed=SEED), NoiseParams(seed=SEED)
    )
