"""Declarative experiment presets shipped with the package.

Each preset is a JSON file under ``parelm/presets/`` naming its panels; a
panel fixes one problem, a scheme list, a step-size list and a neuron-count
list, plus which quantity goes on the x axis when plotting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

PRESET_NAMES = ("fig1", "fig2", "fig3", "fig4")


@dataclass(frozen=True)
class PanelSpec:
    panel: str
    problem: str
    schemes: tuple[str, ...]
    dt_list: tuple[float, ...]
    n_list: tuple[int, ...]
    x_axis: str  # "N" or "Nt"

    def __post_init__(self):
        if self.x_axis not in ("N", "Nt"):
            raise ValueError(f"x_axis must be 'N' or 'Nt', got {self.x_axis!r}")
        if not self.schemes or not self.dt_list or not self.n_list:
            raise ValueError("panel sweep lists must be nonempty")


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    description: str
    panels: tuple[PanelSpec, ...]


def load_preset(name: str) -> ExperimentPreset:
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    raw = resources.files("parelm.presets").joinpath(f"{name}.json").read_text()
    data = json.loads(raw)
    panels = tuple(
        PanelSpec(
            panel=p["panel"],
            problem=p["problem"],
            schemes=tuple(p["schemes"]),
            dt_list=tuple(float(d) for d in p["dt_list"]),
            n_list=tuple(int(n) for n in p["n_list"]),
            x_axis=p["x_axis"],
        )
        for p in data["panels"]
    )
    return ExperimentPreset(name=data["name"], description=data.get("description", ""), panels=panels)
