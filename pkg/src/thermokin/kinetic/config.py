from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np


@dataclass(frozen=True)
class SimConfig:
    eps: float
    gamma_scat: float = 1.0
    gamma_therm: float = 1.0
    temperature: float = 1.0
    domain_half_width: float = 4.0
    n_y: int = 400
    n_k: int = 64
    t_end: float = 0.5
    cfl: float = 0.9
    seed: int = 20190214
    n_particles: int = 100_000

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        for name in ("gamma_scat", "gamma_therm", "domain_half_width", "t_end"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")
        if self.n_y <= 0 or self.n_y % 2:
            raise ValueError("n_y must be a positive even integer (cell face at y = 0)")
        if self.n_k <= 0 or self.n_k % 2:
            raise ValueError("n_k must be a positive even integer")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.n_particles <= 0:
            raise ValueError("n_particles must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def dy(self) -> float:
        return 2.0 * self.domain_half_width / self.n_y

    @property
    def y_faces(self) -> np.ndarray:
        return (np.arange(self.n_y + 1) - self.n_y // 2) * self.dy

    @property
    def y_centers(self) -> np.ndarray:
        return (np.arange(self.n_y) + 0.5 - self.n_y // 2) * self.dy

    def time_step(self, max_speed: float) -> float:
        """Advection-limited step cfl * eps * dy / max|omega_bar'|."""
        return self.cfl * self.eps * self.dy / max_speed

    def replace(self, **kw) -> "SimConfig":
        d = asdict(self)
        d.update(kw)
        return SimConfig(**d)

    @classmethod
    def from_mapping(cls, m: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(m) - known
        if unknown:
            raise ValueError(f"unknown [sim] keys: {sorted(unknown)}")
        return cls(**m)
