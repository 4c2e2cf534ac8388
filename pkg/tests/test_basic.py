import sys
import os

import numpy as np

# ---------------------------------------------------------
# Path Setup: Add the parent directory to sys.path.
# This allows importing 'mhs_scan' without installing the package.
# ---------------------------------------------------------
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from mhs_scan import default_config, forward, init_weights


def test_mhs_scan_is_alive():
    """
    [Survival Check]
    Verifies that the library imports and one forward pass keeps the input shape.
    If this fails, the installation is broken.
    """
    config = default_config(c_l=12, n_heads=3)
    weights = init_weights(config)

    X = np.random.default_rng(0).standard_normal((1, 3, 3, 12))
    Y = forward(X, weights, config)

    assert Y.shape == X.shape
    assert np.all(np.isfinite(Y))


if __name__ == "__main__":
    # Allow running this file directly via python
    test_mhs_scan_is_alive()
