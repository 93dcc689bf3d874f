"""Spatial-domain feature families and the fused descriptor.

Four families are extracted per glyph:

* topology of the skeleton: loop, endpoint, branch-point and cross-point
  counts plus the original bounding-box aspect ratio (5 values)
* zoning: foreground-pixel sums over a uniform g x g grid (g=8 -> 64)
* transition counts: normalized foreground->background switches per
  scan row and column (64 + 64)
* local binary patterns: normalized row/column projection profiles of
  the 8-neighbor LBP code image (64 + 64)

Concatenated in that order the fused vector has 325 entries; the fixed
segment layout is exposed in FEATURE_SEGMENTS.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError, DataError, ShapeError
from .preprocess import PreprocessResult

LBP_POINTS = 8
LBP_RADIUS = 1
DEFAULT_ZONE_GRID = 8

# fixed layout of the fused vector (start, stop) when all families are
# extracted on a 64x64 raster with the default zone grid
FEATURE_SEGMENTS = {
    "topo": slice(0, 5),
    "zones": slice(5, 69),
    "transitions": slice(69, 197),
    "lbp": slice(197, 325),
}
FUSED_DIM = 325
FEATURE_FAMILIES = tuple(FEATURE_SEGMENTS)

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def _binary(img) -> np.ndarray:
    a = np.asarray(img)
    if a.ndim != 2 or a.size == 0:
        raise ShapeError(f"expected a nonempty 2-D binary image, got shape {a.shape}")
    return a.astype(bool)


def _square_gray(img) -> np.ndarray:
    a = np.asarray(img, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 3:
        raise ShapeError(f"expected a square gray image of side >= 3, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class TopoFeatures:
    loops: int
    endpoints: int
    branch_points: int
    cross_points: int
    aspect_ratio: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.loops, self.endpoints, self.branch_points,
             self.cross_points, self.aspect_ratio],
            dtype=float,
        )


@dataclass(frozen=True)
class ZoneFeatures:
    grid: int
    sums: np.ndarray  # g*g zone sums, row-major


@dataclass(frozen=True)
class TransitionVector:
    horizontal: np.ndarray  # one entry per scan row
    vertical: np.ndarray    # one entry per scan column

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.horizontal, self.vertical])


@dataclass(frozen=True)
class LbpProfile:
    row_profile: np.ndarray
    col_profile: np.ndarray
    P: int = LBP_POINTS
    R: int = LBP_RADIUS

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.row_profile, self.col_profile])


@dataclass(frozen=True)
class FeatureVector:
    """Fused descriptor; `values` follows the FEATURE_SEGMENTS layout."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (FUSED_DIM,):
            raise ShapeError(f"fused vector must have {FUSED_DIM} entries, got {self.values.shape}")

    def segment(self, name: str) -> np.ndarray:
        return self.values[FEATURE_SEGMENTS[name]]


# -- skeleton topology -------------------------------------------------------

def count_loops(skel) -> int:
    """Number of holes: background 4-components on the padded image minus 1."""
    a = _binary(skel)
    bg = ~np.pad(a, 1, constant_values=False)
    _, n = ndimage.label(bg, structure=_FOUR_CONNECTED)
    return int(n) - 1


def neighbor_counts(skel) -> np.ndarray:
    """Per-pixel count of foreground 8-neighbors (out-of-image = background)."""
    a = _binary(skel)
    p = np.pad(a, 1, constant_values=False).astype(np.uint8)
    total = np.zeros(a.shape, dtype=np.uint8)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            total += p[1 + dr:p.shape[0] - 1 + dr, 1 + dc:p.shape[1] - 1 + dc]
    return total


def count_endpoints(skel) -> int:
    """Foreground pixels with exactly one foreground 8-neighbor."""
    a = _binary(skel)
    return int(np.count_nonzero(a & (neighbor_counts(a) == 1)))


def count_branch_points(skel) -> int:
    """Foreground pixels with exactly three foreground 8-neighbors."""
    a = _binary(skel)
    return int(np.count_nonzero(a & (neighbor_counts(a) == 3)))


def count_cross_points(skel) -> int:
    """Foreground pixels with exactly four foreground 8-neighbors."""
    a = _binary(skel)
    return int(np.count_nonzero(a & (neighbor_counts(a) == 4)))


# -- zoning ------------------------------------------------------------------

def zone_features(img, g: int = DEFAULT_ZONE_GRID) -> ZoneFeatures:
    """Foreground-pixel sum per cell of a uniform g x g grid.

    The image side must be divisible by g; zone (r, c) covers rows
    [r*side/g, (r+1)*side/g) and the analogous column band.
    """
    a = _binary(img)
    side = a.shape[0]
    if a.shape[1] != side:
        raise ShapeError(f"zoning expects a square image, got {a.shape}")
    if g < 1 or side % g != 0:
        raise ConfigurationError(f"zone grid {g} does not divide image side {side}")
    cell = side // g
    sums = a.reshape(g, cell, g, cell).sum(axis=(1, 3))
    return ZoneFeatures(grid=g, sums=sums.astype(float).ravel())


# -- transition counts -------------------------------------------------------

def transition_features(img) -> TransitionVector:
    """Normalized foreground->background transition counts per row and column.

    Rows are scanned left to right and columns top to bottom, with a
    virtual background pixel past the far edge so strokes touching the
    border still register their trailing transition.  Counts are divided
    by the number of scan lines.
    """
    a = _binary(img)
    side = a.shape[0]
    if a.shape[1] != side:
        raise ShapeError(f"transition counts expect a square image, got {a.shape}")
    pad_right = np.pad(a, ((0, 0), (0, 1)), constant_values=False)
    t_h = (a & ~pad_right[:, 1:]).sum(axis=1)
    pad_down = np.pad(a, ((0, 1), (0, 0)), constant_values=False)
    t_v = (a & ~pad_down[1:, :]).sum(axis=0)
    return TransitionVector(horizontal=t_h / side, vertical=t_v / side)


# -- local binary patterns ---------------------------------------------------

# neighbor offsets (drow, dcol) clockwise from the top-left corner; the
# first offset owns the most significant bit of the 8-bit code
_LBP_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1),
    (1, 1), (1, 0), (1, -1), (0, -1),
)


def lbp_code(gray, x: int, y: int) -> int:
    """8-bit pattern at interior pixel (x=column, y=row).

    Bit k (MSB first) is set when the k-th clockwise neighbor, starting
    at the top-left, is >= the center value.
    """
    a = np.asarray(gray, dtype=float)
    if not (1 <= y < a.shape[0] - 1 and 1 <= x < a.shape[1] - 1):
        raise ConfigurationError(f"pixel ({x}, {y}) is not interior to shape {a.shape}")
    center = a[y, x]
    code = 0
    for k, (dr, dc) in enumerate(_LBP_OFFSETS):
        if a[y + dr, x + dc] >= center:
            code += 1 << (7 - k)
    return code


def lbp_image(gray) -> np.ndarray:
    """Code image over all interior pixels; the one-pixel border stays 0."""
    a = np.asarray(gray, dtype=float)
    if a.ndim != 2 or a.shape[0] < 3 or a.shape[1] < 3:
        raise ShapeError(f"LBP needs at least a 3x3 gray image, got {a.shape}")
    center = a[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for k, (dr, dc) in enumerate(_LBP_OFFSETS):
        nb = a[1 + dr:a.shape[0] - 1 + dr, 1 + dc:a.shape[1] - 1 + dc]
        codes |= (nb >= center).astype(np.uint8) << (7 - k)
    out = np.zeros(a.shape, dtype=np.uint8)
    out[1:-1, 1:-1] = codes
    return out


def lbp_profile(gray) -> LbpProfile:
    """Row and column sums of the LBP code image, scaled into [0, 1].

    The divisor is the maximum attainable line sum, side * 255.
    """
    a = _square_gray(gray)
    codes = lbp_image(a).astype(float)
    denom = a.shape[0] * 255.0
    return LbpProfile(
        row_profile=codes.sum(axis=1) / denom,
        col_profile=codes.sum(axis=0) / denom,
    )


# -- fusion ------------------------------------------------------------------

def topo_features(pre: PreprocessResult) -> TopoFeatures:
    skel = pre.skeleton
    return TopoFeatures(
        loops=count_loops(skel),
        endpoints=count_endpoints(skel),
        branch_points=count_branch_points(skel),
        cross_points=count_cross_points(skel),
        aspect_ratio=pre.bbox_ratio,
    )


def extract_all(pre: PreprocessResult, g: int = DEFAULT_ZONE_GRID) -> FeatureVector:
    """Fused descriptor: topology | zones | transitions | LBP."""
    parts = [
        topo_features(pre).as_array(),
        zone_features(pre.binary, g).sums,
        transition_features(pre.binary).as_array(),
        lbp_profile(pre.gray).as_array(),
    ]
    return FeatureVector(values=np.concatenate(parts))


# -- feature matrix CSV ------------------------------------------------------

def write_features_csv(path, sample_ids, labels, matrix) -> None:
    """One row per sample: sample_id, label, f0..f{d-1} at 17 significant digits."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or len(sample_ids) != x.shape[0] or len(labels) != x.shape[0]:
        raise ShapeError("sample_ids, labels and matrix rows must agree")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "label"] + [f"f{j}" for j in range(x.shape[1])])
        for sid, lab, row in zip(sample_ids, labels, x):
            writer.writerow([sid, int(lab)] + [f"{v:.17g}" for v in row])


def read_features_csv(path):
    """Inverse of :func:`write_features_csv`.

    Returns (sample_ids, labels, matrix) with labels as an int array.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["sample_id", "label"]:
            raise DataError(f"{path}: not a feature matrix CSV (bad header)")
        width = len(header) - 2
        ids, labels, rows = [], [], []
        for line, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise DataError(f"{path}:{line}: expected {len(header)} columns, got {len(rec)}")
            ids.append(rec[0])
            labels.append(int(rec[1]))
            rows.append([float(v) for v in rec[2:]])
    if not rows:
        raise DataError(f"{path}: feature matrix has no rows")
    return ids, np.array(labels, dtype=int), np.array(rows, dtype=float).reshape(len(rows), width)
