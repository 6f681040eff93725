"""Shipped manifold specifications."""

from importlib import resources

NAMES = [
    "thrice_punctured_sphere",
    "once_punctured_torus",
    "figure3_surface",
    "figure_eight_knot",
]


def fixture_path(name: str):
    """Filesystem path of a shipped fixture JSON."""
    if name not in NAMES:
        raise KeyError(f"unknown fixture '{name}'; available: {NAMES}")
    return resources.files(__package__) / f"{name}.json"
