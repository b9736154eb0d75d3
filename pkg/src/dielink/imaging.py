"""Decode coin photographs and normalize them to the working resolution.

Every comparison in the pipeline runs on a grayscale raster whose *coin*
(not the whole frame) spans roughly 400 px. The coin's pixel extent is the
"effective size": a 787 px photograph of a 390 px coin has effective size
390 and needs no reduction, while a 2000 px scan of the same coin does.

Images are only ever reduced, never upscaled.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import cv2
import numpy as np
from PIL import Image, ImageOps

from .errors import DecodeError, SegmentationFailure

# Target coin extent after normalization, px. Reduction kicks in above it.
TARGET_EXTENT = 400
# Acceptable extent band after a reduction (roughly +-10% of the target).
EXTENT_BAND = (360, 440)
# Below this extent the image is accepted but flagged as low quality.
MIN_QUALITY_EXTENT = 32

# ITU-R BT.709 luma weights for R, G, B.
_LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])

# Structuring element radius for the morphological cleanup, px.
_CLOSE_RADIUS = 3


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major luminance raster with values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("pixels must be a non-empty 2-D array")
        if not np.isfinite(arr).all():
            raise ValueError("pixels must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class EffectiveSize:
    """Pixel extent of the coin itself: max of its bounding-box sides."""

    extent: int

    def __post_init__(self):
        if self.extent < 1:
            raise ValueError("extent must be >= 1")


@dataclass(frozen=True, eq=False)
class NormalizedImage:
    """A grayscale image reduced so the coin extent is about 400 px.

    `scale_applied` is the reduction ratio (1.0 when no reduction happened,
    never above 1: images are not upscaled). `extent` is the coin extent
    after normalization.
    """

    image: GrayImage
    scale_applied: float
    source_name: str
    extent: int

    def __post_init__(self):
        if not 0.0 < self.scale_applied <= 1.0:
            raise ValueError("scale_applied must be in (0, 1]")


def load_image(data: bytes) -> GrayImage:
    """Decode PNG/JPEG/TIFF bytes into a luminance image.

    Color inputs are converted with BT.709 weights; EXIF orientation is
    applied. Raises DecodeError for unsupported or corrupt input, which
    signals that the file must be excluded and reported.
    """
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.load()
            img = ImageOps.exif_transpose(img)
            return GrayImage(_to_luminance(img))
    except DecodeError:
        raise
    except Exception as exc:
        raise DecodeError(f"cannot decode image: {exc}") from exc


def _to_luminance(img: Image.Image) -> np.ndarray:
    mode = img.mode
    if mode == "L":
        return np.asarray(img, dtype=np.float64) / 255.0
    if mode in ("I;16", "I;16L", "I;16B", "I;16N"):
        return np.asarray(img, dtype=np.float64) / 65535.0
    if mode == "F":
        return np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    if mode in ("RGBA", "LA", "PA"):
        # composite transparency onto white so the background stays contrasting
        base = Image.new("RGBA", img.size, (255, 255, 255, 255))
        base.paste(img, mask=img.convert("RGBA").split()[-1])
        img = base
    rgb = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return rgb @ _LUMA_WEIGHTS


def estimate_effective_size(img: GrayImage) -> EffectiveSize:
    """Measure the coin's extent via background segmentation.

    Otsu threshold on luminance, polarity fixed so the background (the side
    dominating the image border) is excluded, morphological close with a
    3 px radius, then the largest connected component's bounding box.

    Raises SegmentationFailure when no foreground separates from the
    background; callers fall back to the full image extent.
    """
    gray = np.rint(img.pixels * 255.0).astype(np.uint8)
    if gray.min() == gray.max():
        raise SegmentationFailure("image is uniform")

    _, mask = cv2.threshold(gray, 0, 255, cv2.THRESH_BINARY + cv2.THRESH_OTSU)

    border = np.concatenate([mask[0, :], mask[-1, :], mask[:, 0], mask[:, -1]])
    if border.mean() > 127:
        mask = cv2.bitwise_not(mask)

    size = 2 * _CLOSE_RADIUS + 1
    kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (size, size))
    mask = cv2.morphologyEx(mask, cv2.MORPH_CLOSE, kernel)

    n_labels, _, stats, _ = cv2.connectedComponentsWithStats(mask)
    if n_labels < 2:
        raise SegmentationFailure("no foreground region found")
    areas = stats[1:, cv2.CC_STAT_AREA]
    best = 1 + int(np.argmax(areas))
    w = int(stats[best, cv2.CC_STAT_WIDTH])
    h = int(stats[best, cv2.CC_STAT_HEIGHT])
    extent = max(w, h)
    if extent >= max(img.width, img.height):
        # foreground filling the frame means nothing was separated
        raise SegmentationFailure("foreground covers the whole image")
    return EffectiveSize(extent)


def normalize(img: GrayImage, eff: EffectiveSize, source_name: str = "") -> NormalizedImage:
    """Reduce `img` so the coin extent lands on the 400 px target.

    Extents at or below the target are returned unchanged (no upscaling).
    Downscaling uses area-averaging resampling, which is alias-free and
    deterministic.
    """
    if eff.extent <= TARGET_EXTENT:
        return NormalizedImage(img, 1.0, source_name, eff.extent)

    scale = TARGET_EXTENT / eff.extent
    new_w = max(1, int(round(img.width * scale)))
    new_h = max(1, int(round(img.height * scale)))
    resized = cv2.resize(img.pixels, (new_w, new_h), interpolation=cv2.INTER_AREA)
    reduced = GrayImage(np.clip(resized, 0.0, 1.0))
    return NormalizedImage(reduced, scale, source_name, int(round(eff.extent * scale)))


def load_normalized(data: bytes, source_name: str) -> tuple[NormalizedImage, str | None]:
    """Decode and normalize one photograph; the whole-pipeline entry point.

    When segmentation fails the full image extent is used instead. Returns
    the normalized image plus an optional quality warning (degenerate coin
    extents degrade results but are not rejected).
    """
    img = load_image(data)
    try:
        eff = estimate_effective_size(img)
    except SegmentationFailure:
        eff = EffectiveSize(max(img.width, img.height))
    norm = normalize(img, eff, source_name)
    warning = None
    if norm.extent < MIN_QUALITY_EXTENT:
        warning = (
            f"{source_name}: coin extent {norm.extent}px is below "
            f"{MIN_QUALITY_EXTENT}px, comparison quality will be poor"
        )
    return norm, warning
