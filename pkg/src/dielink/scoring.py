"""SSIM-based pair distances and full-dataset scoring.

Each unordered image pair gets one distance in [0, 1]: the pair is
registered, the structural similarity s of the aligned overlap is
computed, and the distance is (1 - s) / 2. A distance near 0 means the
two coins are very likely struck by the same die; unalignable pairs get
the maximum distance 1.

Scoring is direction-canonical (the smaller-extent image is registered
onto the larger), so distance(a, b) == distance(b, a) by construction.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from threading import Lock
from typing import Callable, Iterable, Sequence

import cv2
import numpy as np

from .errors import (
    ConsensusFailure,
    DatasetTooSmall,
    DegenerateGeometry,
    EmptyOverlap,
    NoMatches,
    TooFewKeypoints,
)
from .imaging import GrayImage, NormalizedImage
from .registration import (
    Keypoints,
    SimilarityTransform,
    detect_keypoints,
    estimate_transform,
    match_keypoints,
    warp,
)

WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
# Windows with less than this fraction of valid pixels are skipped.
MIN_VALID_WINDOW_FRAC = 0.8
# Stabilizing constants (0.01 L)^2 and (0.03 L)^2 with luminance range L = 1.
C1 = (0.01 * 1.0) ** 2
C2 = (0.03 * 1.0) ** 2


@dataclass(frozen=True)
class PairScore:
    """Distance for one unordered image pair, stored canonically.

    `name1` <= `name2` lexicographically. `alignable` is False when
    registration failed, in which case the distance is exactly 1.
    `transform` maps name2's image onto name1's frame (None when
    unalignable); the review UI uses it to display the pair registered.
    """

    name1: str
    name2: str
    distance: float
    alignable: bool
    transform: SimilarityTransform | None = None

    def __post_init__(self):
        if self.name1 > self.name2:
            raise ValueError("pair must be stored in lexicographic order")
        if not 0.0 <= self.distance <= 1.0:
            raise ValueError("distance must lie in [0, 1]")


@dataclass(frozen=True)
class DistanceMatrix:
    """All N(N-1)/2 pair scores of one dataset, canonically ordered."""

    coin_names: tuple[str, ...]
    scores: tuple[PairScore, ...] = field(repr=False)

    def __post_init__(self):
        n = len(self.coin_names)
        expected = n * (n - 1) // 2
        if len(self.scores) != expected:
            raise ValueError(f"expected {expected} scores for {n} coins, got {len(self.scores)}")
        names = set(self.coin_names)
        seen = set()
        for s in self.scores:
            if s.name1 not in names or s.name2 not in names:
                raise ValueError(f"score references unknown coin: {s.name1}/{s.name2}")
            key = (s.name1, s.name2)
            if s.name1 == s.name2 or key in seen:
                raise ValueError(f"duplicate or degenerate pair: {key}")
            seen.add(key)

    def lookup(self, name1: str, name2: str) -> PairScore:
        a, b = sorted((name1, name2))
        for s in self.scores:
            if s.name1 == a and s.name2 == b:
                return s
        raise KeyError(f"no pair ({a}, {b})")

    def as_square(self) -> np.ndarray:
        """Full symmetric distance matrix in `coin_names` order."""
        n = len(self.coin_names)
        index = {name: i for i, name in enumerate(self.coin_names)}
        d = np.zeros((n, n))
        for s in self.scores:
            i, j = index[s.name1], index[s.name2]
            d[i, j] = d[j, i] = s.distance
        return d


def _pixels(img) -> np.ndarray:
    if isinstance(img, NormalizedImage):
        return img.image.pixels
    if isinstance(img, GrayImage):
        return img.pixels
    return np.asarray(img, dtype=np.float64)


def gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    """Normalized 2-D Gaussian weighting window."""
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def uniform_window(size: int) -> np.ndarray:
    """Flat window: plain per-block statistics."""
    return np.full((size, size), 1.0 / (size * size))


def _correlate(img: np.ndarray, window: np.ndarray) -> np.ndarray:
    return cv2.filter2D(img, -1, window, borderType=cv2.BORDER_CONSTANT)


def ssim(
    a,
    b,
    mask: np.ndarray | None = None,
    *,
    window: np.ndarray | None = None,
    min_valid_frac: float = MIN_VALID_WINDOW_FRAC,
) -> float:
    """Mean local SSIM of two aligned images over the valid overlap.

    Local statistics are window-weighted (11x11 Gaussian, sigma 1.5 by
    default); each window position contributes

        ((2 mu_a mu_b + C1)(2 cov_ab + C2))
        / ((mu_a^2 + mu_b^2 + C1)(var_a + var_b + C2))

    Window positions with less than `min_valid_frac` of their pixels valid
    are skipped; the remaining windows renormalize their weights over the
    valid pixels. Raises EmptyOverlap when no window qualifies.
    """
    x = _pixels(a)
    y = _pixels(b)
    if x.shape != y.shape:
        raise ValueError("images must have identical dimensions")
    if window is None:
        window = gaussian_window()
    if mask is None:
        mask = np.ones(x.shape, dtype=bool)
    if mask.shape != x.shape:
        raise ValueError("mask must match the image dimensions")
    if not mask.any():
        raise EmptyOverlap("overlap mask is empty")

    m = mask.astype(np.float64)
    xm = x * m
    ym = y * m

    weight = _correlate(m, window)
    coverage = _correlate(m, np.full(window.shape, 1.0 / window.size))
    keep = (coverage >= min_valid_frac - 1e-12) & (weight > 0)
    if not keep.any():
        raise EmptyOverlap("no window has enough valid pixels")

    safe = np.where(weight > 0, weight, 1.0)
    mu_x = _correlate(xm, window) / safe
    mu_y = _correlate(ym, window) / safe
    var_x = _correlate(xm * x, window) / safe - mu_x * mu_x
    var_y = _correlate(ym * y, window) / safe - mu_y * mu_y
    cov = _correlate(xm * y, window) / safe - mu_x * mu_y

    num = (2.0 * mu_x * mu_y + C1) * (2.0 * cov + C2)
    den = (mu_x * mu_x + mu_y * mu_y + C1) * (var_x + var_y + C2)
    smap = num / den
    return float(smap[keep].mean())


def pair_seed(seed: int, name1: str, name2: str) -> int:
    """Stable per-pair consensus seed derived from the two file names."""
    digest = hashlib.sha256(f"{seed}:{name1}:{name2}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _registration_direction(
    a: NormalizedImage, b: NormalizedImage
) -> tuple[NormalizedImage, NormalizedImage]:
    """(reference, moving): the smaller-extent image moves onto the larger."""
    if a.extent != b.extent:
        return (a, b) if a.extent > b.extent else (b, a)
    return (a, b) if a.source_name <= b.source_name else (b, a)


def _score_pair(
    ref: NormalizedImage,
    mov: NormalizedImage,
    kp_ref: Keypoints | None,
    kp_mov: Keypoints | None,
    seed: int,
) -> tuple[float, bool, SimilarityTransform | None]:
    """Register mov onto ref and score; returns (distance, alignable, mov->ref)."""
    if kp_ref is None or kp_mov is None:
        return 1.0, False, None
    try:
        matches = match_keypoints(kp_mov, kp_ref)
        fit = estimate_transform(matches, kp_mov, kp_ref, seed=seed)
        warped, valid = warp(mov.image, fit.transform, output_shape=ref.image.pixels.shape)
        s = ssim(ref.image, warped, valid)
    except (NoMatches, DegenerateGeometry, ConsensusFailure, EmptyOverlap):
        return 1.0, False, None
    distance = min(max((1.0 - s) / 2.0, 0.0), 1.0)
    return distance, True, fit.transform


def _detect_or_none(img: NormalizedImage) -> Keypoints | None:
    try:
        return detect_keypoints(img)
    except TooFewKeypoints:
        return None


def pair_distance(a: NormalizedImage, b: NormalizedImage, *, seed: int = 0) -> PairScore:
    """Distance in [0, 1] for one image pair.

    Registration failures never raise here: an unalignable pair is the
    strongest evidence against a die link and maps to distance 1.
    """
    name1, name2 = sorted((a.source_name, b.source_name))
    ref, mov = _registration_direction(a, b)
    distance, alignable, transform = _score_pair(
        ref, mov, _detect_or_none(ref), _detect_or_none(mov), pair_seed(seed, name1, name2)
    )
    if transform is not None and mov.source_name != name2:
        transform = transform.inverse()
    return PairScore(name1, name2, distance, alignable, transform)


ProgressCallback = Callable[[int, int], None]


def score_dataset(
    images: Sequence[NormalizedImage] | Iterable[NormalizedImage],
    *,
    seed: int = 0,
    max_workers: int | None = None,
    progress: ProgressCallback | None = None,
) -> DistanceMatrix:
    """Score every unordered pair of a same-type image set.

    Keypoints are detected once per image; pairs are then scored on a
    bounded worker pool. Deterministic for a fixed seed regardless of the
    worker count. `progress` is called with (scored, total) as pairs
    complete.
    """
    imgs = sorted(images, key=lambda im: im.source_name)
    names = [im.source_name for im in imgs]
    if len(names) != len(set(names)):
        raise ValueError("image names must be unique")
    n = len(imgs)
    if n < 2:
        raise DatasetTooSmall(f"need at least 2 images, got {n}")

    index = {name: i for i, name in enumerate(names)}
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = len(pairs)
    done = 0
    lock = Lock()

    def tick():
        nonlocal done
        if progress is None:
            return
        with lock:
            done += 1
            progress(done, total)

    def run_pair(ij: tuple[int, int]) -> PairScore:
        i, j = ij
        name1, name2 = names[i], names[j]
        ref, mov = _registration_direction(imgs[i], imgs[j])
        kp_ref = keypoints[index[ref.source_name]]
        kp_mov = keypoints[index[mov.source_name]]
        distance, alignable, transform = _score_pair(
            ref, mov, kp_ref, kp_mov, pair_seed(seed, name1, name2)
        )
        if transform is not None and mov.source_name != name2:
            transform = transform.inverse()
        tick()
        return PairScore(name1, name2, distance, alignable, transform)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        keypoints = list(pool.map(_detect_or_none, imgs))
        scores = list(pool.map(run_pair, pairs))

    scores.sort(key=lambda s: (s.name1, s.name2))
    return DistanceMatrix(tuple(names), tuple(scores))
