"""Shared fixtures: synthetic rasters, PNG encoding, small coin sets."""

from __future__ import annotations

import io
import zipfile

import numpy as np
import pytest
from PIL import Image

from dielink.imaging import GrayImage, NormalizedImage, load_normalized
from dielink.synthetic import encode_png, make_die_set


def png_bytes(array: np.ndarray, mode: str | None = None) -> bytes:
    """Encode a numpy array (uint8 or float in [0,1]) as PNG bytes."""
    if array.dtype != np.uint8:
        array = np.rint(np.clip(array, 0.0, 1.0) * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(array, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def disc_image(size: int, diameter: float, fg: float = 0.9, bg: float = 0.05) -> GrayImage:
    """Bright disc centered on a dark field."""
    yy, xx = np.mgrid[0:size, 0:size]
    r = np.hypot(yy - size / 2.0, xx - size / 2.0)
    img = np.full((size, size), bg)
    img[r <= diameter / 2.0] = fg
    return GrayImage(img)


def build_zip(entries: list[tuple[str, bytes]]) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name, data in entries:
            zf.writestr(name, data)
    return buf.getvalue()


def normalized_coins(
    seed: int,
    *,
    n_dies: int = 2,
    coins_per_die: int = 2,
    canvas: int = 280,
    radius_range: tuple[int, int] = (85, 105),
) -> list[NormalizedImage]:
    """Small, fast synthetic coins run through the full loading pipeline."""
    coins = make_die_set(
        seed, n_dies=n_dies, coins_per_die=coins_per_die,
        canvas=canvas, radius_range=radius_range,
    )
    return [load_normalized(encode_png(img), name)[0] for name, img in sorted(coins.items())]


@pytest.fixture(scope="session")
def small_coin_pairs() -> list[NormalizedImage]:
    """Four coins from two dies, small canvas, ready for scoring."""
    return normalized_coins(11)


@pytest.fixture(scope="session")
def seventeen_coin_pngs() -> list[tuple[str, bytes]]:
    """Seventeen distinct decodable coin PNGs, small canvas, named entries."""
    coins = make_die_set(23, n_dies=6, coins_per_die=3, canvas=220, radius_range=(70, 85))
    entries = [(name, encode_png(img)) for name, img in sorted(coins.items())]
    assert len(entries) == 18
    return entries[:17]
