"""Grayscale images <-> discrete measures on the unit square.

Pixel ``(row, col)`` of a ``height x width`` image has center
``((col + 0.5) / width, 1 - (row + 0.5) / height)``, so row 0 is the top of
the picture and the y axis points up.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .measure import DiscreteMeasure, MeasureError, from_points

CONVERSION_MODES = ("weighted-grid", "sampled")
RENDER_MODES = ("histogram", "splat")


class ImageFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GrayImage:
    pixels: np.ndarray  # (height, width), row-major, nonnegative

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ImageFormatError("image must be a nonempty 2D array")
        if np.any(self.pixels < 0):
            raise ImageFormatError("intensities must be nonnegative")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def image_to_measure(img: GrayImage, mode: str = "weighted-grid", sample_count: int | None = None,
                     seed: int | None = None) -> DiscreteMeasure:
    """Turn pixel intensities into a probability measure.

    ``weighted-grid`` puts one atom at each positive pixel center with weight
    proportional to intensity. ``sampled`` draws ``sample_count`` equally
    weighted atoms, choosing pixels proportionally to intensity and placing
    each uniformly inside its pixel.
    """
    pix = np.asarray(img.pixels, dtype=float)
    total = pix.sum()
    if total <= 0:
        raise ImageFormatError("image has no positive intensity")
    h, w = pix.shape
    if mode == "weighted-grid":
        rows, cols = np.nonzero(pix > 0)
        pts = np.column_stack([(cols + 0.5) / w, 1.0 - (rows + 0.5) / h])
        return from_points(pts, pix[rows, cols])
    if mode == "sampled":
        if not sample_count or sample_count < 1:
            raise ValueError("sampled mode needs a positive sample_count")
        rng = np.random.default_rng(seed)
        flat = rng.choice(pix.size, size=sample_count, p=(pix / total).ravel())
        rows, cols = np.divmod(flat, w)
        jitter = rng.random((sample_count, 2))
        pts = np.column_stack([(cols + jitter[:, 0]) / w, 1.0 - (rows + jitter[:, 1]) / h])
        return from_points(pts)
    raise ValueError(f"unknown conversion mode {mode!r}")


def rasterize(m: DiscreteMeasure, width: int, height: int, render: str = "histogram",
              bandwidth: float = 1.0) -> tuple[np.ndarray, int]:
    """Deposit the measure's mass on a pixel grid.

    Returns ``(density, clipped)``: a ``(height, width)`` array summing to 1
    and the number of atoms lying outside the unit square (those are moved to
    the nearest boundary pixel for ``histogram``; ``splat`` kernels are
    renormalized over the grid so no mass is lost either way).
    """
    if m.dim != 2:
        raise MeasureError(f"rendering needs a 2D measure, got dim={m.dim}")
    x, y = m.points[:, 0], m.points[:, 1]
    outside = (x < 0) | (x > 1) | (y < 0) | (y > 1)
    clipped = int(np.count_nonzero(outside))
    if render == "histogram":
        cols = np.clip(np.floor(x * width).astype(int), 0, width - 1)
        rows = np.clip(np.floor((1.0 - y) * height).astype(int), 0, height - 1)
        dens = np.zeros((height, width))
        np.add.at(dens, (rows, cols), m.weights)
        return dens, clipped
    if render == "splat":
        if bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        px = x * width - 0.5  # atom position in pixel-center units
        py = (1.0 - y) * height - 0.5
        kx = np.exp(-0.5 * ((np.arange(width)[None, :] - px[:, None]) / bandwidth) ** 2)
        ky = np.exp(-0.5 * ((np.arange(height)[None, :] - py[:, None]) / bandwidth) ** 2)
        norm = kx.sum(axis=1) * ky.sum(axis=1)
        # atoms far off-grid underflow to zero kernels; fall back to the nearest pixel
        bad = norm <= 0
        if np.any(bad):
            kx[bad] = 0.0
            ky[bad] = 0.0
            kx[bad, np.clip(np.rint(px[bad]).astype(int), 0, width - 1)] = 1.0
            ky[bad, np.clip(np.rint(py[bad]).astype(int), 0, height - 1)] = 1.0
            norm = kx.sum(axis=1) * ky.sum(axis=1)
        dens = (ky * (m.weights / norm)[:, None]).T @ kx
        return dens, clipped
    raise ValueError(f"unknown render mode {render!r}")


def measure_to_image(m: DiscreteMeasure, width: int, height: int, render: str = "histogram",
                     bandwidth: float = 1.0) -> GrayImage:
    """Render to an 8-bit-range image whose brightest pixel is 255."""
    dens, _ = rasterize(m, width, height, render, bandwidth)
    peak = dens.max()
    return GrayImage(np.rint(255.0 * dens / peak) if peak > 0 else dens)


def normalized_pixels(img: GrayImage) -> np.ndarray:
    pix = np.asarray(img.pixels, dtype=float)
    return 255.0 * pix / pix.max()


# -- file formats --------------------------------------------------------

def _read_pgm_ascii(text: str) -> np.ndarray:
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise ImageFormatError("not an ASCII PGM (P2) file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = np.array(tokens[4:4 + w * h], dtype=float)
    if vals.size != w * h:
        raise ImageFormatError("truncated PGM data")
    if maxval <= 0 or np.any(vals > maxval):
        raise ImageFormatError("PGM values exceed maxval")
    return vals.reshape(h, w)


def read_image(path) -> GrayImage:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] == b"P2":
        return GrayImage(_read_pgm_ascii(raw.decode("ascii")))
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("L", "I", "I;16", "1"):
            return GrayImage(np.asarray(im, dtype=float))
        raise ImageFormatError(f"{path}: expected a grayscale image, got mode {im.mode}")


def write_image(img: GrayImage, path) -> None:
    """Write as ASCII PGM when the suffix is ``.pgm``, otherwise as 8-bit PNG via Pillow."""
    path = Path(path)
    pix = np.clip(np.rint(np.asarray(img.pixels, dtype=float)), 0, 255).astype(np.uint8)
    if path.suffix.lower() == ".pgm":
        lines = ["P2", f"{img.width} {img.height}", "255"]
        lines += [" ".join(str(v) for v in row) for row in pix]
        path.write_text("\n".join(lines) + "\n")
        return
    from PIL import Image

    Image.fromarray(pix).save(path)
