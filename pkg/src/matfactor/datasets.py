"""Bundled sample data."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def toy_panel_path() -> Path:
    """Path to the bundled synthetic 16 x 10 x 181 long-format panel.

    The sample mimics the shape of a quarterly multi-country macro panel
    (16 units, 10 indicators, 181 periods, ~11% missing cells) with a
    planted rank-(2, 2) factor structure.  All values are synthetic.
    """
    return Path(resources.files("matfactor").joinpath("data/toy_panel.csv"))
