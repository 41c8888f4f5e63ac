"""Example configurations shipped with the package."""

from __future__ import annotations

import json
from importlib import resources

from .config import Config, parse_config

# name -> whether the bank satisfies the OEP identities
STATIONARY_EXAMPLES = {
    "haar": True,
    "bspline_tight": True,
    "legall53": True,
    "haar_perturbed": False,
    "bspline_pruned": False,
}

NONSTATIONARY_EXAMPLES = {
    "haar_nonstationary": True,
    "haar_nonstationary_broken": False,
}

SHANNON_EXAMPLES = ("shannon_3_2", "shannon_sqrt2")


def example_path(name: str):
    return resources.files("dualframes") / "data" / f"{name}.json"


def example_names() -> list[str]:
    return sorted(p.name[:-5] for p in (resources.files("dualframes") / "data").iterdir()
                  if p.name.endswith(".json"))


def load_example(name: str) -> Config:
    path = example_path(name)
    if not path.is_file():
        raise KeyError(f"no shipped example named {name!r}; available: {', '.join(example_names())}")
    return parse_config(json.loads(path.read_text(encoding="utf-8")))


def load_bank(name: str):
    return load_example(name).bank
