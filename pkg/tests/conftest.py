import os
import sys

import numpy as np
import pytest

import fewlabel as fl

sys.path.insert(0, os.path.dirname(__file__))  # make helpers importable

SYNTHETIC_BUNDLE = os.path.join(os.path.dirname(__file__), "..", "data", "synthetic")
CORA_BUNDLE = os.path.join(os.path.dirname(__file__), "..", "data", "cora")
CITESEER_BUNDLE = os.path.join(os.path.dirname(__file__), "..", "data", "citeseer")
THREE_NODE_BUNDLE = os.path.join(os.path.dirname(__file__), "fixtures", "three_node")


@pytest.fixture
def path3():
    """3-node path graph 0-1-2 with identity-ish features."""
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return fl.Graph.from_parts(3, [[0, 1], [1, 2]], X, [0, 1, 1], 2)


@pytest.fixture
def debug_mode():
    from fewlabel import autodiff as ad

    ad.set_debug(True)
    yield
    ad.set_debug(False)


def require_bundle(path, name):
    if not os.path.isdir(path):
        pytest.skip(
            f"{name} bundle not vendored at {os.path.normpath(path)} "
            f"(produce it with the converter; raw archives are not "
            f"available in this environment)"
        )
    return fl.load_bundle(path)
