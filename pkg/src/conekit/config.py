"""Run configuration: JSON documents with strict key checking."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .jordan import algebra_from_config

BLOCKS = {
    "chain": {"steps", "n_scale", "ell0", "lambda0", "record_stride"},
    "diffusion": {"T", "h", "record_stride", "metric", "quadrature", "ell0", "lambda0", "track_g"},
    "distribution": {"family", "a", "b"},
    "mcmc": {"step_size", "burn_in", "thin", "adapt_target", "chains"},
    "verify": None,  # keys checked by each experiment
}
TOP_LEVEL = {"algebra", "p", "seed", "replicas", "output_dir"} | set(BLOCKS)
DEFAULT_SEED = 20240601
DEFAULT_REPLICAS = 1000


@dataclass
class RunConfig:
    algebra: dict
    p: float | None = None
    seed: int = DEFAULT_SEED
    replicas: int = DEFAULT_REPLICAS
    output_dir: str | None = None
    chain: dict = field(default_factory=dict)
    diffusion: dict = field(default_factory=dict)
    distribution: dict = field(default_factory=dict)
    mcmc: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - TOP_LEVEL
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for name, allowed in BLOCKS.items():
            block = d.get(name, {})
            if not isinstance(block, dict):
                raise ConfigError(f"'{name}' must be an object")
            if allowed is not None and set(block) - allowed:
                raise ConfigError(f"unknown keys in '{name}': {sorted(set(block) - allowed)}")
        alg = d.get("algebra", {"kind": "sym_real", "size": 2})
        try:
            algebra_from_config(alg)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"bad algebra: {exc}") from exc
        seed = d.get("seed", DEFAULT_SEED)
        replicas = d.get("replicas", DEFAULT_REPLICAS)
        if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an integer in [0, 2^64)")
        if not isinstance(replicas, int) or replicas < 1:
            raise ConfigError("replicas must be a positive integer")
        p = d.get("p")
        if p is not None and not isinstance(p, (int, float)):
            raise ConfigError("p must be a number")
        return cls(alg, None if p is None else float(p), seed, replicas, d.get("output_dir"),
                   **{name: dict(d.get(name, {})) for name in BLOCKS}, raw=copy.deepcopy(d))

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                d = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(d)

    def with_overrides(self, seed=None, replicas=None, output_dir=None):
        d = copy.deepcopy(self.raw)
        for key, val in (("seed", seed), ("replicas", replicas), ("output_dir", output_dir)):
            if val is not None:
                d[key] = val
        return RunConfig.from_dict(d)

    def make_algebra(self):
        return algebra_from_config(self.algebra)

    def to_dict(self):
        """Effective configuration, suitable for echoing into outputs.

        The output location is left out so that results do not depend on it.
        """
        d = copy.deepcopy(self.raw)
        d.pop("output_dir", None)
        d.setdefault("algebra", self.algebra)
        d["seed"] = self.seed
        d["replicas"] = self.replicas
        return d

    def sha256(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()
