"""TOML run configuration.

Sections: ``[sim]`` (every SimConfig field), ``[model]`` (kind = "sine" or
"powerlaw" with kappa), ``[kernel]`` (kind = "uniform" or "product_sine2"
with r0), ``[interface]`` (delta_seq, method) and ``[converge]`` (eps,
times, workers).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .dispersion import DispersionModel, model_from_config
from .interface import DEFAULT_DELTAS
from .kinetic.config import SimConfig
from .scattering import ScatteringKernel, kernel_from_config

_SECTIONS = {"sim", "model", "kernel", "interface", "converge"}


@dataclass
class RunConfig:
    sim: SimConfig
    model: DispersionModel
    kernel: ScatteringKernel
    delta_seq: tuple = DEFAULT_DELTAS
    coeff_method: str = "auto"
    eps_list: tuple = (0.4, 0.2, 0.1)
    times: tuple = (0.25, 0.5)
    workers: int = 1
    raw: dict = field(default_factory=dict)


def parse_config(data: dict) -> RunConfig:
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    sim_raw = dict(data.get("sim", {}))
    if "eps" not in sim_raw:
        sim_raw["eps"] = 0.1
    sim = SimConfig.from_mapping(sim_raw)
    iface = dict(data.get("interface", {}))
    # interface keys shared with [sim] may be given here as well
    for key in ("gamma_therm", "temperature", "n_k"):
        if key in iface:
            sim = sim.replace(**{key: iface.pop(key)})
    deltas = tuple(float(d) for d in iface.pop("delta_seq", DEFAULT_DELTAS))
    method = iface.pop("method", "auto")
    if iface:
        raise ValueError(f"unknown [interface] keys: {sorted(iface)}")
    conv = dict(data.get("converge", {}))
    eps_list = tuple(float(e) for e in conv.pop("eps", (0.4, 0.2, 0.1)))
    times = tuple(float(t) for t in conv.pop("times", (0.25, 0.5)))
    workers = int(conv.pop("workers", 1))
    if conv:
        raise ValueError(f"unknown [converge] keys: {sorted(conv)}")
    return RunConfig(sim, model_from_config(data.get("model")), kernel_from_config(data.get("kernel")),
                     deltas, method, eps_list, times, workers, data)


def load_config(path) -> RunConfig:
    with open(Path(path), "rb") as fh:
        return parse_config(tomllib.load(fh))
