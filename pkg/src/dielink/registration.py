"""Align two normalized coin images with a robust similarity transform.

The stage is classic feature-based registration: oriented multi-scale
corners with binary descriptors (ORB), Hamming matching under a
nearest/second-nearest ratio test, then random-sample consensus over
two-point similarity hypotheses with a least-squares refit on the inliers.

Consensus sampling is seeded per pair, so a full registration is
bit-reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np
from scipy import ndimage

from .errors import ConsensusFailure, DegenerateGeometry, NoMatches, TooFewKeypoints
from .imaging import GrayImage, NormalizedImage

MIN_KEYPOINTS = 8
MAX_KEYPOINTS = 1000
RATIO_THRESHOLD = 0.75
CONSENSUS_ITERATIONS = 2000
INLIER_THRESHOLD_PX = 3.0
MIN_INLIER_RATIO = 0.30
# Absolute inlier floor (capped at the match count): a 30% ratio over a
# dozen matches is noise, not consensus.
MIN_INLIER_COUNT = 8


@dataclass(frozen=True, eq=False)
class Keypoints:
    """Interest points of one image, detection order preserved.

    `xy` holds subpixel coordinates (n, 2); `scale` the patch diameter in
    px; `orientation` radians; `descriptors` packed binary rows (n, 32).
    """

    xy: np.ndarray
    scale: np.ndarray
    orientation: np.ndarray
    descriptors: np.ndarray

    def __len__(self) -> int:
        return self.xy.shape[0]


@dataclass(frozen=True, eq=False)
class MatchSet:
    """One-to-one correspondences surviving the ratio test.

    `scores` are Hamming distances (lower is better). Indices point into
    the keypoint sets the matcher was called with.
    """

    indices_a: np.ndarray
    indices_b: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return self.indices_a.shape[0]


@dataclass(frozen=True)
class SimilarityTransform:
    """Rotation + uniform scale + translation, mapping source to target px."""

    rotation: float
    scale: float
    translation: tuple[float, float]

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def identity(cls) -> "SimilarityTransform":
        return cls(0.0, 1.0, (0.0, 0.0))

    def matrix(self) -> np.ndarray:
        """2x3 matrix M with p' = M @ [x, y, 1]."""
        c = self.scale * np.cos(self.rotation)
        s = self.scale * np.sin(self.rotation)
        tx, ty = self.translation
        return np.array([[c, -s, tx], [s, c, ty]])

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        m = self.matrix()
        return pts @ m[:, :2].T + m[:, 2]

    def inverse(self) -> "SimilarityTransform":
        z = self.scale * np.exp(1j * self.rotation)
        t = complex(*self.translation)
        zi = 1.0 / z
        ti = -t / z
        return SimilarityTransform(float(np.angle(zi)), float(abs(zi)), (ti.real, ti.imag))

    def compose(self, other: "SimilarityTransform") -> "SimilarityTransform":
        """Transform equivalent to applying `other` first, then self."""
        z1 = self.scale * np.exp(1j * self.rotation)
        z2 = other.scale * np.exp(1j * other.rotation)
        t1 = complex(*self.translation)
        t2 = complex(*other.translation)
        z = z1 * z2
        t = z1 * t2 + t1
        return SimilarityTransform(float(np.angle(z)), float(abs(z)), (t.real, t.imag))


@dataclass(frozen=True, eq=False)
class TransformFit:
    """A fitted transform plus its consensus quality.

    `inlier_ratio` is the best hypothesis' support over all matches and
    `residual` the RMS reprojection error of the refit over those inliers.
    """

    transform: SimilarityTransform
    inliers: np.ndarray
    inlier_ratio: float
    residual: float


def detect_keypoints(img: NormalizedImage | GrayImage) -> Keypoints:
    """Detect up to MAX_KEYPOINTS oriented corners with binary descriptors.

    Deterministic for identical input. Raises TooFewKeypoints below
    MIN_KEYPOINTS, which scores the pair as unalignable.
    """
    gray = img.image if isinstance(img, NormalizedImage) else img
    u8 = np.rint(gray.pixels * 255.0).astype(np.uint8)
    orb = cv2.ORB_create(nfeatures=MAX_KEYPOINTS)
    kps, descriptors = orb.detectAndCompute(u8, None)
    if descriptors is None or len(kps) < MIN_KEYPOINTS:
        raise TooFewKeypoints(f"found {0 if descriptors is None else len(kps)} keypoints")

    xy = np.array([k.pt for k in kps], dtype=np.float64)
    scale = np.array([k.size for k in kps], dtype=np.float64)
    orientation = np.deg2rad([k.angle for k in kps])
    # canonical order: strongest first, position as tie-break
    responses = np.array([k.response for k in kps])
    order = np.lexsort((xy[:, 1], xy[:, 0], -responses))
    return Keypoints(xy[order], scale[order], orientation[order], descriptors[order])


def match_keypoints(a: Keypoints, b: Keypoints) -> MatchSet:
    """Match descriptors of `a` against `b` with the 0.75 ratio test.

    Matches are made one-to-one greedily by ascending Hamming distance.
    Raises NoMatches when nothing survives.
    """
    if len(a) == 0 or len(b) == 0:
        raise NoMatches("empty keypoint set")
    matcher = cv2.BFMatcher(cv2.NORM_HAMMING)
    candidates = []
    for knn in matcher.knnMatch(a.descriptors, b.descriptors, k=2):
        if len(knn) < 2:
            continue
        first, second = knn
        if first.distance < RATIO_THRESHOLD * second.distance:
            candidates.append((first.distance, first.queryIdx, first.trainIdx))
    candidates.sort()

    used_a: set[int] = set()
    used_b: set[int] = set()
    ia, ib, scores = [], [], []
    for dist, qa, tb in candidates:
        if qa in used_a or tb in used_b:
            continue
        used_a.add(qa)
        used_b.add(tb)
        ia.append(qa)
        ib.append(tb)
        scores.append(dist)
    if not ia:
        raise NoMatches("ratio test left no correspondences")
    return MatchSet(np.array(ia), np.array(ib), np.array(scores, dtype=np.float64))


def _umeyama_similarity(src: np.ndarray, dst: np.ndarray) -> SimilarityTransform:
    """Least-squares similarity fit (no reflection) mapping src onto dst."""
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    sc = src - mu_s
    dc = dst - mu_d
    cov = dc.T @ sc / len(src)
    u, s, vt = np.linalg.svd(cov)
    d = np.sign(np.linalg.det(u) * np.linalg.det(vt))
    if d == 0:
        d = 1.0
    diag = np.array([1.0, d])
    rot_matrix = (u * diag) @ vt
    variance = (sc * sc).sum() / len(src)
    if variance <= 0:
        raise DegenerateGeometry("source points are coincident")
    scale = float((s * diag).sum() / variance)
    if not scale > 0:
        raise DegenerateGeometry("degenerate similarity fit (non-positive scale)")
    rotation = float(np.arctan2(rot_matrix[1, 0], rot_matrix[0, 0]))
    t = mu_d - scale * (rot_matrix @ mu_s)
    return SimilarityTransform(rotation, scale, (float(t[0]), float(t[1])))


def estimate_transform(
    matches: MatchSet,
    a: Keypoints,
    b: Keypoints,
    *,
    seed: int = 0,
    iterations: int = CONSENSUS_ITERATIONS,
    inlier_threshold: float = INLIER_THRESHOLD_PX,
    min_inlier_ratio: float = MIN_INLIER_RATIO,
) -> TransformFit:
    """Fit the similarity transform mapping `a` keypoints onto `b`.

    Random-sample consensus over two-point hypotheses (all generated from
    one seeded stream, so the result is reproducible), then a least-squares
    refit on the winning inlier set.

    Raises DegenerateGeometry for coincident geometry and ConsensusFailure
    when the best support is under `min_inlier_ratio` (or under the
    absolute MIN_INLIER_COUNT floor).
    """
    m = len(matches)
    if m < 3:
        raise DegenerateGeometry(f"need at least 3 matches, got {m}")

    p = a.xy[matches.indices_a].view(np.complex128).ravel()
    q = b.xy[matches.indices_b].view(np.complex128).ravel()

    rng = np.random.default_rng(seed)
    idx = rng.integers(0, m, size=(2, iterations))
    i1, i2 = idx[0], idx[1]
    dp = p[i2] - p[i1]
    dq = q[i2] - q[i1]
    valid = (i1 != i2) & (np.abs(dp) > 1e-9)
    z = np.where(valid, dq / np.where(valid, dp, 1.0), 0.0)
    valid &= np.abs(z) > 1e-12
    if not valid.any():
        raise DegenerateGeometry("all sampled point pairs are coincident")
    t = q[i1] - z * p[i1]

    residuals = np.abs(z[:, None] * p[None, :] + t[:, None] - q[None, :])
    inlier_table = (residuals <= inlier_threshold) & valid[:, None]
    counts = inlier_table.sum(axis=1)
    best = int(np.argmax(counts))
    support = int(counts[best])

    needed = max(int(np.ceil(min_inlier_ratio * m)), min(MIN_INLIER_COUNT, m))
    if support < max(needed, 2):
        raise ConsensusFailure(f"best hypothesis has {support}/{m} inliers")

    inliers = inlier_table[best]
    src = np.column_stack([p.real, p.imag])[inliers]
    dst = np.column_stack([q.real, q.imag])[inliers]
    transform = _umeyama_similarity(src, dst)

    refit_residuals = np.linalg.norm(transform.apply(src) - dst, axis=1)
    residual = float(np.sqrt(np.mean(refit_residuals**2)))
    return TransformFit(transform, inliers, support / m, residual)


def warp(
    img: NormalizedImage | GrayImage,
    transform: SimilarityTransform,
    *,
    output_shape: tuple[int, int] | None = None,
) -> tuple[GrayImage, np.ndarray]:
    """Resample `img` under `transform` with bilinear interpolation.

    Returns the warped image and a boolean validity mask; pixels whose
    source sample falls outside the input are invalid and must be excluded
    from any scoring overlap.
    """
    gray = img.image if isinstance(img, NormalizedImage) else img
    src = gray.pixels
    h, w = output_shape if output_shape is not None else src.shape

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    inv = transform.inverse()
    c = inv.scale * np.cos(inv.rotation)
    s = inv.scale * np.sin(inv.rotation)
    tx, ty = inv.translation
    sx = c * xx - s * yy + tx
    sy = s * xx + c * yy + ty

    # snap float fuzz from the trig onto exact grid positions so axis-aligned
    # transforms resample exactly
    sx = np.where(np.abs(sx - np.rint(sx)) < 1e-9, np.rint(sx), sx)
    sy = np.where(np.abs(sy - np.rint(sy)) < 1e-9, np.rint(sy), sy)

    valid = (sx >= 0) & (sx <= src.shape[1] - 1) & (sy >= 0) & (sy <= src.shape[0] - 1)
    out = ndimage.map_coordinates(src, [sy, sx], order=1, mode="constant", cval=0.0)
    return GrayImage(np.clip(out, 0.0, 1.0)), valid
