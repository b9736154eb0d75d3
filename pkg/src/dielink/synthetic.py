"""Synthetic dies and coin photographs for benchmarks, demos and tests.

A "die" is a random smooth relief on a disc with a raised rim; a "coin"
is the die rendered under a random similarity jitter (small rotation,
scale and translation, like separate photographs of different strikes)
plus independent pixel noise. Coins of the same die should score low
distances; coins of different dies should not align at all.
"""

from __future__ import annotations

import cv2
import numpy as np
from scipy import ndimage

BACKGROUND = 0.08

# jitter envelope: matches what the registration stage is built to recover
MAX_ROTATION_DEG = 15.0
SCALE_RANGE = (0.9, 1.1)
MAX_TRANSLATION = 20.0
NOISE_SIGMA = 0.05


def make_die(
    rng: np.random.Generator,
    *,
    canvas: int = 560,
    radius: int = 190,
    relief_amplitude: float = 0.25,
) -> np.ndarray:
    """Random smooth base relief on a disc with a bright rim, in [0, 1]."""
    yy, xx = np.mgrid[0:canvas, 0:canvas]
    center = canvas / 2.0
    r = np.hypot(yy - center, xx - center)

    relief = np.zeros((canvas, canvas))
    for sigma, amp in ((3, 0.5), (6, 0.8), (12, 1.0)):
        noise = ndimage.gaussian_filter(rng.standard_normal((canvas, canvas)), sigma)
        relief += amp * noise / max(noise.std(), 1e-9)
    relief /= max(relief.std(), 1e-9)

    img = np.full((canvas, canvas), BACKGROUND)
    inside = r <= radius
    img[inside] = 0.55 + relief_amplitude * relief[inside]
    rim = (r >= radius - 5) & (r <= radius)
    img[rim] = 0.85
    return np.clip(img, 0.0, 1.0)


def make_coin(
    rng: np.random.Generator,
    die: np.ndarray,
    *,
    max_rotation_deg: float = MAX_ROTATION_DEG,
    scale_range: tuple[float, float] = SCALE_RANGE,
    max_translation: float = MAX_TRANSLATION,
    noise_sigma: float = NOISE_SIGMA,
) -> np.ndarray:
    """One photograph of `die`: similarity jitter plus independent noise."""
    canvas = die.shape[0]
    angle = rng.uniform(-max_rotation_deg, max_rotation_deg)
    scale = rng.uniform(*scale_range)
    tx, ty = rng.uniform(-max_translation, max_translation, size=2)
    m = cv2.getRotationMatrix2D((canvas / 2.0, canvas / 2.0), angle, scale)
    m[0, 2] += tx
    m[1, 2] += ty
    warped = cv2.warpAffine(
        die.astype(np.float32), m, (canvas, canvas),
        flags=cv2.INTER_LINEAR, borderValue=BACKGROUND,
    ).astype(np.float64)
    noisy = warped + rng.normal(0.0, noise_sigma, die.shape)
    return np.clip(noisy, 0.0, 1.0)


def make_die_set(
    seed: int,
    *,
    n_dies: int = 5,
    coins_per_die: int = 4,
    canvas: int = 560,
    radius_range: tuple[int, int] = (170, 205),
) -> dict[str, np.ndarray]:
    """A family of dies with several coins each, keyed by file name.

    Names follow "die<d>_coin<c>.png": two coins are same-die exactly when
    the part before "_coin" matches. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    coins: dict[str, np.ndarray] = {}
    for d in range(n_dies):
        radius = int(rng.uniform(*radius_range))
        die = make_die(rng, canvas=canvas, radius=radius)
        for c in range(coins_per_die):
            coins[f"die{d:02d}_coin{c}.png"] = make_coin(rng, die)
    return coins


def same_die(name1: str, name2: str) -> bool:
    return name1.split("_coin")[0] == name2.split("_coin")[0]


def encode_png(img: np.ndarray) -> bytes:
    """8-bit grayscale PNG bytes of an image in [0, 1]."""
    u8 = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    ok, buf = cv2.imencode(".png", u8)
    if not ok:
        raise RuntimeError("PNG encoding failed")
    return buf.tobytes()
