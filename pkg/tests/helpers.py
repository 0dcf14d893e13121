"""Shared helpers for numerical tests."""

from __future__ import annotations

PROFILE_CONFIG = """\
config_version = 1
outputs = ["boundary_functions", "spectral", "rates"]

[atom]
omega0 = 1.0
gamma0 = 1.0
alpha = "isotropic"

[[sweep]]
scenario = "static_mirror_thermal"
z0 = [0.5, 1.0, 2.0]
beta = inf
"""

ACCELERATED_CONFIG = """\
config_version = 1
outputs = ["rates", "equivalence", "relaxation"]
seed = 42

[atom]
alpha = "x"

[relaxation]
initial = ["excited", "ground", 0.25]
points = 6
ensemble = 500

[[sweep]]
scenario = "accelerated_mirror"
z0 = 1.0
a = [0.5, 1.0]

[[sweep]]
scenario = "accelerated_free_space"
a = 1.0
"""

FREE_SPACE_COMPARISON = """\
config_version = 1
outputs = ["comparison"]
method = "both"

[atom]
alpha = "x"

[[sweep]]
scenario = "static_free_space"
"""


def rel_diff(a: complex, b: complex) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale else 0.0
