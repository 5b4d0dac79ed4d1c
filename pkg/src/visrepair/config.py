"""Tunables for the repair pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional, Sequence, Tuple


@dataclass(frozen=True)
class RepairConfig:
    """All knobs of the pipeline.

    ``d_offset`` and ``l_extended`` are absolute model units. When left as
    ``None`` they resolve from the input bounding-box diagonal ``D`` through
    ``d_offset_frac`` / ``l_extended_frac`` (see :meth:`resolve`).
    """

    n_total: int = 200_000
    n_min: int = 5
    n_dirs: int = 5
    max_bounces: int = 10
    d_offset: Optional[float] = None
    l_extended: Optional[float] = None
    d_offset_frac: float = 1.0 / 20000.0
    l_extended_frac: float = 1.0 / 1000.0
    rng_seed: int = 0
    visibility_threshold: float = 0.5
    openness_threshold: float = 0.5
    preserve_hole_boundaries: Tuple[Tuple[int, ...], ...] = ()
    retrace_after_reorient: bool = True
    simplify: bool = True
    threads: int = 1

    def __post_init__(self):
        if not (self.n_total >= self.n_min >= 1):
            raise ValueError("need n_total >= n_min >= 1")
        if self.n_dirs < 1:
            raise ValueError("n_dirs must be >= 1")
        if self.max_bounces < 0:
            raise ValueError("max_bounces must be >= 0")
        if self.d_offset is not None and not self.d_offset > 0:
            raise ValueError("d_offset must be positive")
        if self.l_extended is not None and self.l_extended < 0:
            raise ValueError("l_extended must be non-negative")
        for name in ("visibility_threshold", "openness_threshold"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")
        object.__setattr__(
            self,
            "preserve_hole_boundaries",
            tuple(tuple(int(i) for i in loop) for loop in self.preserve_hole_boundaries),
        )

    def resolve(self, diagonal: float) -> "RepairConfig":
        """Return a copy with absolute distances filled in from ``diagonal``."""
        d_offset = self.d_offset if self.d_offset is not None else diagonal * self.d_offset_frac
        l_ext = self.l_extended if self.l_extended is not None else diagonal * self.l_extended_frac
        if not d_offset > 0 or not math.isfinite(d_offset):
            raise ValueError("cannot resolve a positive d_offset from a zero-size model")
        return self.replace(d_offset=d_offset, l_extended=l_ext)

    def replace(self, **changes) -> "RepairConfig":
        data = asdict(self)
        data.update(changes)
        return RepairConfig(**data)

    def as_dict(self) -> dict:
        data = asdict(self)
        data["preserve_hole_boundaries"] = [list(l) for l in self.preserve_hole_boundaries]
        return data


def bbox_diagonal(vertices: Sequence[Sequence[float]]) -> float:
    import numpy as np

    v = np.asarray(vertices, dtype=float).reshape(-1, 3)
    if len(v) == 0:
        return 0.0
    return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))


__all__ = ["RepairConfig", "bbox_diagonal"]
