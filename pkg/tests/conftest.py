import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

INSTANCE_DIR = os.path.join(os.path.dirname(__file__), "..", "instances")


def instance_path(name):
    path = os.path.abspath(os.path.join(INSTANCE_DIR, name))
    if not os.path.exists(path):
        pytest.fail(f"benchmark instance missing: {path}")
    return path


@pytest.fixture(scope="session")
def instances():
    return instance_path
