"""Persistence images.

A diagram is mapped to (birth, persistence) coordinates, every point is
replaced by an isotropic Gaussian weighted by its persistence, and the
resulting surface is integrated exactly over each cell of a uniform grid.
Because the Gaussian is separable, each cell integral is a product of two
differences of the normal CDF.

Pixel layout: ``pixels[i, j]`` covers the ``j``-th birth band and the
``i``-th persistence band, so row 0 holds the lowest persistences.  Images
flatten in C (row-major) order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .errors import FormatError, InvalidCell, InvalidConfig, InvalidPoint
from .persistence import PersistenceDiagram


class Weighting(enum.Enum):
    LINEAR_PERSISTENCE = "linear"


@dataclass(frozen=True)
class PersistenceImageConfig:
    grid_w: int = 50
    grid_h: int = 50
    sigma: float = 0.03
    birth_range: tuple[float, float] = (-1.5, 1.5)
    pers_range: tuple[float, float] | None = None
    weighting: Weighting = Weighting.LINEAR_PERSISTENCE

    def __post_init__(self):
        b_lo, b_hi = (float(v) for v in self.birth_range)
        object.__setattr__(self, "birth_range", (b_lo, b_hi))
        if self.pers_range is None:
            # widest lifetime a signal confined to the birth range can have
            object.__setattr__(self, "pers_range", (0.0, b_hi - b_lo))
        p_lo, p_hi = (float(v) for v in self.pers_range)
        object.__setattr__(self, "pers_range", (p_lo, p_hi))
        if int(self.grid_w) < 1 or int(self.grid_h) < 1:
            raise InvalidConfig("grid dimensions must be positive")
        if not self.sigma > 0:
            raise InvalidConfig("sigma must be positive")
        if not b_lo < b_hi:
            raise InvalidConfig(f"empty birth range {self.birth_range}")
        if not 0 <= p_lo < p_hi:
            raise InvalidConfig(f"invalid persistence range {self.pers_range}")

    @property
    def size(self) -> int:
        return self.grid_w * self.grid_h

    @property
    def birth_edges(self) -> np.ndarray:
        return np.linspace(*self.birth_range, self.grid_w + 1)

    @property
    def pers_edges(self) -> np.ndarray:
        return np.linspace(*self.pers_range, self.grid_h + 1)

    def to_json(self) -> dict:
        return {
            "grid_w": self.grid_w,
            "grid_h": self.grid_h,
            "sigma": self.sigma,
            "birth_range": list(self.birth_range),
            "pers_range": list(self.pers_range),
            "weighting": self.weighting.value,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PersistenceImageConfig":
        return cls(
            grid_w=int(doc.get("grid_w", 50)),
            grid_h=int(doc.get("grid_h", 50)),
            sigma=float(doc.get("sigma", 0.03)),
            birth_range=tuple(doc.get("birth_range", (-1.5, 1.5))),
            pers_range=tuple(doc["pers_range"]) if doc.get("pers_range") is not None else None,
            weighting=Weighting(doc.get("weighting", "linear")),
        )


@dataclass(frozen=True)
class PersistenceImage:
    pixels: np.ndarray
    config: PersistenceImageConfig

    def flatten(self) -> np.ndarray:
        return self.pixels.ravel(order="C")


def birth_persistence_transform(diagram) -> np.ndarray:
    """``(b, d) -> (b, d - b)`` for every pair; returns an ``(n, 2)`` array."""
    pairs = diagram.pairs if isinstance(diagram, PersistenceDiagram) else np.asarray(diagram, float)
    pairs = pairs.reshape(-1, 2)
    return np.column_stack([pairs[:, 0], pairs[:, 1] - pairs[:, 0]])


def point_weight(point, weighting=Weighting.LINEAR_PERSISTENCE) -> float:
    _, persistence = point
    if persistence < 0:
        raise InvalidPoint(f"negative persistence {persistence}")
    return float(persistence)


def _interval_mass(lo, hi):
    """Standard normal mass of ``[lo, hi]``, accurate in both tails."""
    upper = lo > 0
    return np.where(upper, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))


def axis_masses(centers, edges, sigma) -> np.ndarray:
    """Mass of ``N(c, sigma^2)`` in each bin; shape ``(len(centers), len(edges) - 1)``."""
    z = (np.asarray(edges, float)[None, :] - np.asarray(centers, float)[:, None]) / sigma
    return np.clip(_interval_mass(z[:, :-1], z[:, 1:]), 0.0, 1.0)


def gaussian_cell_mass(center, sigma, cell) -> float:
    """Integral of the isotropic Gaussian at ``center`` over ``cell``.

    ``cell`` is ``((x0, x1), (y0, y1))``.
    """
    (x0, x1), (y0, y1) = cell
    if not (x0 < x1 and y0 < y1):
        raise InvalidCell(f"degenerate cell {cell}")
    if not sigma > 0:
        raise InvalidConfig("sigma must be positive")
    u, v = center
    mx = axis_masses([u], [x0, x1], sigma)[0, 0]
    my = axis_masses([v], [y0, y1], sigma)[0, 0]
    return float(mx * my)


def rasterize(diagram, config: PersistenceImageConfig) -> PersistenceImage:
    """Persistence image of ``diagram`` on the grid described by ``config``."""
    points = birth_persistence_transform(diagram)
    pixels = np.zeros((config.grid_h, config.grid_w))
    if len(points):
        if np.any(points[:, 1] < 0):
            raise InvalidPoint("negative persistence in diagram")
        weights = points[:, 1]
        px = axis_masses(points[:, 0], config.birth_edges, config.sigma)
        py = axis_masses(points[:, 1], config.pers_edges, config.sigma)
        # points accumulate in diagram order, so the sum is reproducible
        for k in range(len(points)):
            if weights[k] != 0:
                pixels += np.outer(weights[k] * py[k], px[k])
    return PersistenceImage(pixels, config)


def write_image_csv(path, image) -> None:
    pixels = image.pixels if isinstance(image, PersistenceImage) else np.asarray(image)
    lines = [",".join(repr(float(v)) for v in row) for row in pixels]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_image_csv(path) -> np.ndarray:
    path = Path(path)
    try:
        rows = [[float(v) for v in ln.split(",")] for ln in path.read_text().splitlines() if ln.strip()]
        return np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def to_pgm(pixels) -> bytes:
    """Binary greyscale PGM; brightest pixel maps to 255, zero maps to 0.

    Rows are written top-down with the highest persistence band first.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    h, w = pixels.shape
    top = pixels.max() if pixels.size else 0.0
    if top > 0:
        grey = np.rint(np.clip(pixels / top, 0, 1) * 255).astype(np.uint8)
    else:
        grey = np.zeros((h, w), dtype=np.uint8)
    return f"P5\n{w} {h}\n255\n".encode("ascii") + grey[::-1].tobytes()
