"""JSON plant descriptions and run configurations.

Plant description (all matrices as nested lists)::

    {"pendulum": {"mu_cart": 0.5, ...},        # or "A_ct", "B_ct", "W_ct"
     "tau": 0.01,
     "W_discrete_override": [[...]],           # optional
     "X0": [[...]]}                            # optional

A plant may also be given already sampled with ``"A"``, ``"B"``, ``"W"``.

Run configuration::

    {"plant": {...} | "plant_file": "plant.json",
     "Q": [[...]], "Phi": [[...]],
     "gamma": 30.0 | "gamma_factor": 1.2 | "gamma_grid": [...],
     "barrier": {"t0": 1, "mu": 10, ...},
     "synthesis_file": "synthesis.json",        # simulate: reuse a design
     "T": 400000, "seed": 0, "seeds": {"dither": 0, "noise": 1, "init": 2},
     "cutoffs": [8191, 3, 3, 3], "precision": 64, "stride": 100,
     "save_q": false, "bits_file": false, "burn_in": 0.1}

``gamma_factor`` scales the full-information cost ``Tr(W S)``.  Relative
paths resolve against the configuration file's directory.
"""
from dataclasses import dataclass, field
import json
import os

import numpy as np

from .errors import InvalidParameterError
from .loop import Seeds
from .plant import ContinuousPlant, DiscretePlant, PendulumParams, build_pendulum, discretize
from .synthesis import BarrierSettings, LqgWeights, SynthesisResult
from .symbols import CutoffConfig

__all__ = ["load_plant", "plant_from_dict", "RunConfig", "load_run_config",
           "save_json", "load_synthesis"]


def plant_from_dict(desc):
    X0 = desc.get("X0")
    if "A" in desc:
        return DiscretePlant(desc["A"], desc["B"], desc["W"], X0=X0, tau=desc.get("tau"))
    if "tau" not in desc:
        raise InvalidParameterError("plant description needs a sampling period 'tau'")
    if "pendulum" in desc:
        ct = build_pendulum(PendulumParams(**desc["pendulum"]))
        W_ct = desc.get("W_ct")
        if W_ct is not None:
            ct = ContinuousPlant(ct.A_ct, ct.B_ct, W_ct)
    elif "A_ct" in desc:
        ct = ContinuousPlant(desc["A_ct"], desc["B_ct"], desc.get("W_ct"))
    else:
        raise InvalidParameterError("plant needs 'pendulum', 'A_ct'/'B_ct' or 'A'/'B'/'W'")
    return discretize(ct, float(desc["tau"]), W_override=desc.get("W_discrete_override"), X0=X0)


def load_plant(path):
    with open(path) as fh:
        return plant_from_dict(json.load(fh))


def save_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_synthesis(path):
    with open(path) as fh:
        return SynthesisResult.from_dict(json.load(fh))


@dataclass
class RunConfig:
    plant: DiscretePlant
    Q: np.ndarray
    Phi: np.ndarray
    gamma: float = None
    gamma_factor: float = None
    gamma_grid: list = None
    barrier: BarrierSettings = field(default_factory=BarrierSettings)
    synthesis_file: str = None
    T: int = 400000
    seeds: Seeds = field(default_factory=Seeds)
    cutoffs: tuple = (8191, 3, 3, 3)
    precision: int = 64
    stride: int = 100
    save_q: bool = False
    bits_file: bool = False
    burn_in: float = 0.1
    q_trace: str = None
    threads: int = 1

    @property
    def cutoff_config(self):
        return CutoffConfig(tuple(self.cutoffs), self.precision)

    def weights(self, gamma=None):
        return LqgWeights(self.Q, self.Phi, gamma if gamma is not None else 1.0)

    def resolve_gamma(self, floor):
        """Absolute cost target given the full-information cost ``floor``."""
        if self.gamma is not None:
            return float(self.gamma)
        if self.gamma_factor is not None:
            return float(self.gamma_factor) * floor
        raise InvalidParameterError("config needs 'gamma' or 'gamma_factor'")

    def resolve_grid(self, floor, points=8):
        if self.gamma_grid is not None:
            grid = [float(g) for g in self.gamma_grid]
        elif self.gamma_factor is not None and np.ndim(self.gamma_factor):
            grid = [float(f) * floor for f in self.gamma_factor]
        else:
            grid = np.geomspace(1.02 * floor, 20 * floor, points).tolist()
        return sorted(grid)


def _resolve(base, path):
    if path is None or os.path.isabs(path):
        return path
    return os.path.join(base, path)


def load_run_config(path, seed=None, threads=None):
    with open(path) as fh:
        raw = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    return run_config_from_dict(raw, base, seed=seed, threads=threads)


def run_config_from_dict(raw, base=".", seed=None, threads=None):
    if "plant" in raw:
        plant = plant_from_dict(raw["plant"])
    elif "plant_file" in raw:
        plant = load_plant(_resolve(base, raw["plant_file"]))
    else:
        raise InvalidParameterError("config needs 'plant' or 'plant_file'")
    m = plant.m
    Q = np.array(raw.get("Q", np.eye(m)), dtype=float)
    Phi = np.atleast_2d(np.array(raw.get("Phi", np.eye(plant.u)), dtype=float))

    if seed is not None:
        seeds = Seeds.from_base(seed)
    else:
        seeds = Seeds.from_base(int(raw.get("seed", 0)))
        if "seeds" in raw:
            seeds = Seeds(**{**seeds.__dict__, **raw["seeds"]})

    cfg = RunConfig(
        plant=plant, Q=Q, Phi=Phi,
        gamma=raw.get("gamma"), gamma_factor=raw.get("gamma_factor"),
        gamma_grid=raw.get("gamma_grid"),
        barrier=BarrierSettings(**raw.get("barrier", {})),
        synthesis_file=_resolve(base, raw.get("synthesis_file")),
        T=int(raw.get("T", 400000)), seeds=seeds,
        cutoffs=tuple(raw.get("cutoffs", (8191, 3, 3, 3))),
        precision=int(raw.get("precision", 64)),
        stride=int(raw.get("stride", 100)),
        save_q=bool(raw.get("save_q", False)),
        bits_file=bool(raw.get("bits_file", False)),
        burn_in=float(raw.get("burn_in", 0.1)),
        q_trace=_resolve(base, raw.get("q_trace")),
        threads=int(threads if threads is not None else raw.get("threads", 1)),
    )
    if cfg.T < 1:
        raise InvalidParameterError("T must be positive")
    if cfg.stride < 1:
        raise InvalidParameterError("stride must be positive")
    if len(cfg.cutoffs) != m:
        raise InvalidParameterError(f"need {m} cutoffs, got {len(cfg.cutoffs)}")
    cfg.cutoff_config  # validates k and p
    return cfg
