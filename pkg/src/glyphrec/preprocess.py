"""Raster preprocessing chain for glyph images.

Rasters are plain numpy arrays in row-major (row, col) order:
grayscale images are 2-D float64, binary images and skeletons are 2-D
bool with True = foreground (ink).  A skeleton is a binary image that
additionally satisfies the one-pixel thinness invariant (no 2x2 square
of foreground), checkable with :func:`is_thin`.

The full chain for one glyph is :func:`preprocess_chain`:
binarize -> bounding box -> crop -> resize to a square -> zero-mean
normalize + 3x3 Gaussian smooth (gray path) and thinning (binary path).
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyGlyphError, ShapeError

DEFAULT_SIDE = 64


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle; x, y is the top-left corner (x = column)."""

    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class PreprocessResult:
    """Output of the preprocessing chain for one glyph.

    gray      -- side x side float image, zero-mean then Gaussian smoothed
    binary    -- side x side bool image, nearest-neighbor resampled ink mask
    skeleton  -- side x side bool image, thinned ink mask
    bbox_ratio -- width/height of the bounding box in the original image
    """

    gray: np.ndarray
    binary: np.ndarray
    skeleton: np.ndarray
    bbox_ratio: float


def _as_gray(img) -> np.ndarray:
    a = np.asarray(img, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ShapeError(f"expected a nonempty 2-D gray image, got shape {a.shape}")
    return a


def _as_binary(img) -> np.ndarray:
    a = np.asarray(img)
    if a.ndim != 2 or a.size == 0:
        raise ShapeError(f"expected a nonempty 2-D binary image, got shape {a.shape}")
    return a.astype(bool)


def otsu_threshold(img) -> int:
    """Threshold maximizing between-class variance on the 256-bin histogram.

    Returns the smallest t in [0, 255] maximizing the variance of the
    split {value <= t} vs {value > t}.  Intensities are rounded and
    clipped into 0..255 before histogramming.
    """
    a = _as_gray(img)
    levels = np.clip(np.rint(a), 0, 255).astype(np.int64)
    hist = np.bincount(levels.ravel(), minlength=256).astype(float)
    total = hist.sum()
    w0 = np.cumsum(hist)                # pixels with value <= t
    moment = np.cumsum(hist * np.arange(256))
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    var = np.zeros(256)
    mu0 = np.divide(moment, w0, out=np.zeros(256), where=w0 > 0)
    mu1 = np.divide(moment[-1] - moment, w1, out=np.zeros(256), where=w1 > 0)
    var[valid] = w0[valid] * w1[valid] * (mu0[valid] - mu1[valid]) ** 2
    return int(np.argmax(var))


def binarize(img) -> np.ndarray:
    """Global Otsu threshold; the side with fewer pixels becomes foreground.

    A constant image has no usable split and comes back all background.
    When both sides are equally large the darker side is taken as ink.
    """
    a = _as_gray(img)
    t = otsu_threshold(a)
    levels = np.clip(np.rint(a), 0, 255)
    dark = levels <= t
    n_dark = int(np.count_nonzero(dark))
    if n_dark == 0 or n_dark == dark.size:
        return np.zeros(a.shape, dtype=bool)
    if n_dark <= dark.size - n_dark:
        return dark
    return ~dark


def bounding_box(img) -> Rect:
    """Tightest rectangle containing all foreground pixels."""
    a = _as_binary(img)
    rows = np.flatnonzero(a.any(axis=1))
    if rows.size == 0:
        raise EmptyGlyphError("image has no foreground pixels")
    cols = np.flatnonzero(a.any(axis=0))
    return Rect(
        x=int(cols[0]),
        y=int(rows[0]),
        w=int(cols[-1] - cols[0] + 1),
        h=int(rows[-1] - rows[0] + 1),
    )


# -- resampling --------------------------------------------------------------

def _catmull_rom(t: np.ndarray) -> np.ndarray:
    # cubic convolution kernel with a = -0.5
    a = -0.5
    t = np.abs(t)
    t2 = t * t
    t3 = t2 * t
    near = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0
    far = a * t3 - 5.0 * a * t2 + 8.0 * a * t - 4.0 * a
    return np.where(t <= 1.0, near, np.where(t < 2.0, far, 0.0))


def _bicubic_weights(n_in: int, n_out: int) -> np.ndarray:
    """Dense n_out x n_in resampling matrix, one axis of the separable kernel.

    Output sample o reads the source at (o + 0.5) * n_in/n_out - 0.5;
    the four taps around that point clamp to the edge.
    """
    w = np.zeros((n_out, n_in))
    scale = n_in / n_out
    src = (np.arange(n_out) + 0.5) * scale - 0.5
    base = np.floor(src).astype(int)
    for m in range(-1, 3):
        idx = np.clip(base + m, 0, n_in - 1)
        weight = _catmull_rom(src - (base + m))
        np.add.at(w, (np.arange(n_out), idx), weight)
    return w


def resize_bicubic(img, side: int) -> np.ndarray:
    """Resample a gray image to side x side with the a=-0.5 cubic kernel."""
    a = _as_gray(img)
    if side < 2:
        raise ShapeError(f"target side must be >= 2, got {side}")
    wr = _bicubic_weights(a.shape[0], side)
    wc = _bicubic_weights(a.shape[1], side)
    return wr @ a @ wc.T


def resize_nearest(img, side: int) -> np.ndarray:
    """Nearest-neighbor resample of a binary image to side x side."""
    a = _as_binary(img)
    if side < 1:
        raise ShapeError(f"target side must be >= 1, got {side}")
    rows = np.clip(((np.arange(side) + 0.5) * a.shape[0] / side).astype(int), 0, a.shape[0] - 1)
    cols = np.clip(((np.arange(side) + 0.5) * a.shape[1] / side).astype(int), 0, a.shape[1] - 1)
    return a[np.ix_(rows, cols)]


def normalize_zero_mean(img) -> np.ndarray:
    """Subtract the image mean."""
    a = _as_gray(img)
    return a - a.mean()


def gaussian_smooth_3x3(img) -> np.ndarray:
    """Convolve with the 3x3 binomial Gaussian (1/16)[[1,2,1],[2,4,2],[1,2,1]].

    Borders are handled by edge replication, so a constant image passes
    through unchanged.
    """
    a = _as_gray(img)
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise ShapeError(f"image must be at least 3x3 to smooth, got {a.shape}")
    p = np.pad(a, 1, mode="edge")
    out = (
        p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:]
        + 2.0 * p[1:-1, :-2] + 4.0 * p[1:-1, 1:-1] + 2.0 * p[1:-1, 2:]
        + p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]
    )
    return out / 16.0


# -- thinning ----------------------------------------------------------------

def _neighbor_rings(padded: np.ndarray):
    # p2..p9 clockwise starting at north, matching the classic thinning layout
    p2 = padded[:-2, 1:-1]
    p3 = padded[:-2, 2:]
    p4 = padded[1:-1, 2:]
    p5 = padded[2:, 2:]
    p6 = padded[2:, 1:-1]
    p7 = padded[2:, :-2]
    p8 = padded[1:-1, :-2]
    p9 = padded[:-2, :-2]
    return p2, p3, p4, p5, p6, p7, p8, p9


def _thin_subiteration(img: np.ndarray, first: bool) -> tuple[np.ndarray, bool]:
    p = np.pad(img, 1, constant_values=False)
    ring = _neighbor_rings(p)
    p2, p3, p4, p5, p6, p7, p8, p9 = ring
    b = np.zeros(img.shape, dtype=np.uint8)
    for n in ring:
        b += n
    a = np.zeros(img.shape, dtype=np.uint8)
    for cur, nxt in zip(ring, ring[1:] + ring[:1]):
        a += (~cur) & nxt
    if first:
        direct = ~(p2 & p4 & p6) & ~(p4 & p6 & p8)
    else:
        direct = ~(p2 & p4 & p8) & ~(p2 & p6 & p8)
    delete = img & (b >= 2) & (b <= 6) & (a == 1) & direct
    if not delete.any():
        return img, False
    return img & ~delete, True


def skeletonize(img) -> np.ndarray:
    """Iterative two-subpass thinning (Zhang-Suen) to a one-pixel skeleton.

    Runs both directional subiterations per pass, deleting in parallel,
    until a fixed point.  An all-background image is returned unchanged.
    """
    a = _as_binary(img).copy()
    while True:
        a, c1 = _thin_subiteration(a, first=True)
        a, c2 = _thin_subiteration(a, first=False)
        if not (c1 or c2):
            return a


def is_thin(skel) -> bool:
    """True when no 2x2 square is fully foreground."""
    a = _as_binary(skel)
    if a.shape[0] < 2 or a.shape[1] < 2:
        return True
    return not (a[:-1, :-1] & a[1:, :-1] & a[:-1, 1:] & a[1:, 1:]).any()


# -- full chain --------------------------------------------------------------

def preprocess_chain(raw, side: int = DEFAULT_SIDE) -> PreprocessResult:
    """Run the whole preprocessing chain on one raw grayscale glyph.

    Order: binarize, bounding box, crop both rasters to the box, bicubic
    resize of the gray crop / nearest-neighbor resize of the ink mask to
    side x side, then zero-mean + Gaussian smoothing on the gray path and
    thinning on the binary path.  The aspect ratio is taken from the
    original (pre-resize) box.
    """
    a = _as_gray(raw)
    mask = binarize(a)
    box = bounding_box(mask)  # raises EmptyGlyphError on blank input
    gray_crop = a[box.y:box.y + box.h, box.x:box.x + box.w]
    mask_crop = mask[box.y:box.y + box.h, box.x:box.x + box.w]
    gray = gaussian_smooth_3x3(normalize_zero_mean(resize_bicubic(gray_crop, side)))
    binary = resize_nearest(mask_crop, side)
    return PreprocessResult(
        gray=gray,
        binary=binary,
        skeleton=skeletonize(binary),
        bbox_ratio=box.w / box.h,
    )


def write_pgm(path, img) -> None:
    """Debug dump of a raster as binary PGM (P5).

    Gray images are affinely rescaled to 0..255 (a constant image maps
    to 0); binary images map foreground to 255.
    """
    a = np.asarray(img)
    if a.dtype == bool:
        data = np.where(a, 255, 0).astype(np.uint8)
    else:
        a = _as_gray(a)
        lo, hi = a.min(), a.max()
        if hi > lo:
            data = np.rint((a - lo) * (255.0 / (hi - lo))).astype(np.uint8)
        else:
            data = np.zeros(a.shape, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())
