"""Glyph corpora: disk loading, seeded synthetic generation, stratified splits.

A corpus is an ordered list of labeled grayscale glyph images.  The
synthetic generator stands in for a real handwriting database: ten base
shapes chosen to span the topology feature space (0-2 loops, 0-4
endpoints, branch/cross junctions) are rendered at 96x96 with integer
Bresenham/midpoint rasterization and per-sample distortions, so a given
SyntheticSpec always produces bit-identical pixels.

All randomness comes from numpy's PCG64 bit generator seeded with the
spec's 64-bit seed; draws happen in a fixed documented order (per class,
per sample: rotation, scale, row shift, col shift, then the noise-flip
field when the flip probability is nonzero).
"""

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    ConfigurationError,
    DataError,
    EmptyCorpusError,
    InsufficientPopulationError,
)

CANVAS_SIDE = 96
MIN_GLYPH_SIDE = 8
IMAGE_SUFFIXES = (".png", ".pgm")


class CorpusLoadWarning(UserWarning):
    """Per-file problem while loading a corpus directory (file skipped)."""


@dataclass(frozen=True)
class GlyphSample:
    image: np.ndarray  # 2-D uint8 grayscale
    label: int
    sample_id: str


@dataclass(frozen=True)
class Corpus:
    samples: tuple
    class_count: int
    class_names: tuple

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=int)

    def validate(self) -> None:
        if self.class_count < 1 or len(self.class_names) != self.class_count:
            raise ConfigurationError("class_names must have one entry per class")
        seen = set()
        for s in self.samples:
            if s.label < 0 or s.label >= self.class_count:
                raise DataError(f"sample {s.sample_id}: label {s.label} out of range")
            if s.sample_id in seen:
                raise DataError(f"duplicate sample_id {s.sample_id}")
            seen.add(s.sample_id)
            h, w = s.image.shape
            if h < MIN_GLYPH_SIDE or w < MIN_GLYPH_SIDE:
                raise DataError(f"sample {s.sample_id}: image {w}x{h} below minimum size")


@dataclass(frozen=True)
class SplitSpec:
    train_per_class: int
    test_per_class: int
    seed: int

    def __post_init__(self):
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise ConfigurationError("split sizes must be positive")


@dataclass(frozen=True)
class Distortion:
    rotation_max_deg: float = 12.0
    scale_jitter: float = 0.12
    translate_max_px: int = 5
    noise_flip_prob: float = 0.02
    stroke_width_px: int = 3

    def __post_init__(self):
        if self.rotation_max_deg < 0:
            raise ConfigurationError("rotation_max_deg must be >= 0")
        if not 0.0 <= self.scale_jitter <= 0.5:
            raise ConfigurationError("scale_jitter must lie in [0, 0.5]")
        if self.translate_max_px < 0:
            raise ConfigurationError("translate_max_px must be >= 0")
        if not 0.0 <= self.noise_flip_prob <= 0.2:
            raise ConfigurationError("noise_flip_prob must lie in [0, 0.2]")
        if self.stroke_width_px < 1:
            raise ConfigurationError("stroke_width_px must be >= 1")


@dataclass(frozen=True)
class SyntheticSpec:
    class_count: int
    samples_per_class: int
    seed: int
    distortion: Distortion = field(default_factory=Distortion)

    def __post_init__(self):
        if self.class_count < 2:
            raise ConfigurationError("class_count must be >= 2")
        if self.samples_per_class < 1:
            raise ConfigurationError("samples_per_class must be >= 1")


# -- template shapes ----------------------------------------------------------
#
# Coordinates are (row, col) floats around the origin; extent ~ +/-28 so a
# template fits the 96x96 canvas with room for the default distortions.
# "polyline" vertices are joined by Bresenham segments, "circle" is a
# midpoint-circle outline, "disc" a filled circle.

_TEMPLATES = (
    ("ring", (("circle", 0.0, 0.0, 26.0),)),
    ("bar", (("polyline", ((0.0, -28.0), (0.0, 28.0))),)),
    ("cross", (
        ("polyline", ((-26.0, 0.0), (26.0, 0.0))),
        ("polyline", ((0.0, -26.0), (0.0, 26.0))),
    )),
    ("tee", (
        ("polyline", ((-26.0, -24.0), (-26.0, 24.0))),
        ("polyline", ((-26.0, 0.0), (26.0, 0.0))),
    )),
    ("twinring", (
        ("circle", 0.0, -13.0, 13.0),
        ("circle", 0.0, 13.0, 13.0),
    )),
    ("ell", (("polyline", ((-26.0, -20.0), (26.0, -20.0), (26.0, 20.0))),)),
    ("scurve", (
        ("polyline", ((-26.0, 22.0), (-26.0, -22.0), (0.0, -22.0),
                      (0.0, 22.0), (26.0, 22.0), (26.0, -22.0))),
    )),
    ("triangle", (
        ("polyline", ((26.0, -26.0), (26.0, 26.0), (-26.0, 0.0), (26.0, -26.0))),
    )),
    ("disc", (("disc", 0.0, 0.0, 16.0),)),
    ("zigzag", (
        ("polyline", ((-24.0, -28.0), (24.0, -14.0), (-24.0, 0.0),
                      (24.0, 14.0), (-24.0, 28.0))),
    )),
)

TEMPLATE_NAMES = tuple(name for name, _ in _TEMPLATES)


def bresenham_line(r0: int, c0: int, r1: int, c1: int):
    """Integer line from (r0, c0) to (r1, c1) inclusive."""
    points = []
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r0 < r1 else -1
    sc = 1 if c0 < c1 else -1
    err = dc - dr
    r, c = r0, c0
    while True:
        points.append((r, c))
        if r == r1 and c == c1:
            return points
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr


def midpoint_circle(rc: int, cc: int, radius: int):
    """Integer circle outline centered at (rc, cc)."""
    points = []
    x = radius
    y = 0
    err = 1 - radius
    while x >= y:
        for dr, dc in ((y, x), (y, -x), (-y, x), (-y, -x),
                       (x, y), (x, -y), (-x, y), (-x, -y)):
            points.append((rc + dr, cc + dc))
        y += 1
        if err < 0:
            err += 2 * y + 1
        else:
            x -= 1
            err += 2 * (y - x) + 1
    return points


def _disc_offsets(diameter: int):
    r = diameter // 2 + 1
    offs = []
    for dr in range(-r, r + 1):
        for dc in range(-r, r + 1):
            if 4 * (dr * dr + dc * dc) <= diameter * diameter:
                offs.append((dr, dc))
    return offs


def _render_template(primitives, theta_deg: float, scale: float,
                     center: tuple, stroke_width: int) -> np.ndarray:
    """Rasterize one distorted template onto a boolean canvas.

    Vertices are rotated/scaled in float, rounded once to integers, and
    all per-pixel work from there on is integer only.
    """
    th = math.radians(theta_deg)
    cos_t, sin_t = math.cos(th), math.sin(th)

    def xform(r, c):
        rr = scale * (cos_t * r - sin_t * c) + center[0]
        cc = scale * (sin_t * r + cos_t * c) + center[1]
        return int(round(rr)), int(round(cc))

    pts = []
    for prim in primitives:
        kind = prim[0]
        if kind == "polyline":
            verts = [xform(r, c) for r, c in prim[1]]
            for (r0, c0), (r1, c1) in zip(verts, verts[1:]):
                pts.extend(bresenham_line(r0, c0, r1, c1))
        elif kind == "circle":
            rc, cc = xform(prim[1], prim[2])
            pts.extend(midpoint_circle(rc, cc, max(1, round(prim[3] * scale))))
        elif kind == "disc":
            rc, cc = xform(prim[1], prim[2])
            rad = max(1, round(prim[3] * scale))
            for dr in range(-rad, rad + 1):
                for dc in range(-rad, rad + 1):
                    if dr * dr + dc * dc <= rad * rad:
                        pts.append((rc + dr, cc + dc))
        else:
            raise ConfigurationError(f"unknown template primitive {kind!r}")

    mask = np.zeros((CANVAS_SIDE, CANVAS_SIDE), dtype=bool)
    arr = np.array(pts, dtype=int)
    for dr, dc in _disc_offsets(stroke_width):
        rr = arr[:, 0] + dr
        cc = arr[:, 1] + dc
        keep = (rr >= 0) & (rr < CANVAS_SIDE) & (cc >= 0) & (cc < CANVAS_SIDE)
        mask[rr[keep], cc[keep]] = True
    return mask


def template_image(class_index: int, stroke_width: int = 3) -> np.ndarray:
    """Undistorted rendering of a template class (ink 0 on white 255)."""
    _, prims = _TEMPLATES[class_index % len(_TEMPLATES)]
    half = CANVAS_SIDE // 2
    mask = _render_template(prims, 0.0, 1.0, (half, half), stroke_width)
    return np.where(mask, 0, 255).astype(np.uint8)


def _class_name(index: int, class_count: int) -> str:
    width = max(2, len(str(class_count - 1)))
    return f"c{index:0{width}d}_{TEMPLATE_NAMES[index % len(TEMPLATE_NAMES)]}"


def generate_synthetic(spec: SyntheticSpec) -> Corpus:
    """Seeded synthetic corpus; identical specs give bit-identical corpora."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    dist = spec.distortion
    half = CANVAS_SIDE // 2
    names = tuple(_class_name(k, spec.class_count) for k in range(spec.class_count))
    samples = []
    for k in range(spec.class_count):
        prims = _TEMPLATES[k % len(_TEMPLATES)][1]
        for i in range(spec.samples_per_class):
            theta = rng.uniform(-dist.rotation_max_deg, dist.rotation_max_deg)
            scale = rng.uniform(1.0 - dist.scale_jitter, 1.0 + dist.scale_jitter)
            dr = int(rng.integers(-dist.translate_max_px, dist.translate_max_px + 1))
            dc = int(rng.integers(-dist.translate_max_px, dist.translate_max_px + 1))
            mask = _render_template(prims, theta, scale, (half + dr, half + dc),
                                    dist.stroke_width_px)
            img = np.where(mask, 0, 255).astype(np.uint8)
            if dist.noise_flip_prob > 0.0:
                flips = rng.random(img.shape) < dist.noise_flip_prob
                img[flips] ^= 255
            samples.append(GlyphSample(image=img, label=k,
                                       sample_id=f"{names[k]}-{i:04d}"))
    corpus = Corpus(samples=tuple(samples), class_count=spec.class_count,
                    class_names=names)
    corpus.validate()
    return corpus


# -- disk I/O -----------------------------------------------------------------

def load_directory(root) -> Corpus:
    """Load a corpus from one subdirectory per class (lexicographic = label order).

    Unreadable or undersized image files are skipped with a
    CorpusLoadWarning instead of aborting the load.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"corpus root {root} is not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise EmptyCorpusError(f"{root} contains no class subdirectories")
    samples = []
    for label, cdir in enumerate(class_dirs):
        files = sorted(p for p in cdir.iterdir()
                       if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
        for path in files:
            try:
                with Image.open(path) as im:
                    img = np.asarray(im.convert("L"), dtype=np.uint8)
            except Exception as exc:
                warnings.warn(f"skipping unreadable image {path}: {exc}",
                              CorpusLoadWarning, stacklevel=2)
                continue
            if img.ndim != 2 or min(img.shape) < MIN_GLYPH_SIDE:
                warnings.warn(f"skipping undersized image {path} ({img.shape})",
                              CorpusLoadWarning, stacklevel=2)
                continue
            samples.append(GlyphSample(image=img, label=label,
                                       sample_id=str(path.relative_to(root))))
    if not samples:
        raise EmptyCorpusError(f"{root} contains no readable images")
    corpus = Corpus(samples=tuple(samples), class_count=len(class_dirs),
                    class_names=tuple(d.name for d in class_dirs))
    corpus.validate()
    return corpus


def save_png_tree(corpus: Corpus, out_dir) -> Path:
    """Write a corpus as out_dir/<class_name>/<sample>.png plus manifest.csv.

    Returns the manifest path.  Class directory names sort in label
    order, so load_directory round-trips the labels.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = out / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "label", "class_name", "path"])
        for s in corpus.samples:
            cname = corpus.class_names[s.label]
            cdir = out / cname
            cdir.mkdir(exist_ok=True)
            fname = s.sample_id.replace("/", "_") + ".png"
            Image.fromarray(s.image, mode="L").save(cdir / fname)
            writer.writerow([s.sample_id, s.label, cname, f"{cname}/{fname}"])
    return manifest


# -- splitting ----------------------------------------------------------------

def stratified_indices(labels, train_per_class: int, test_per_class: int,
                       seed: int, class_names=None):
    """Disjoint per-class index draws, then a shuffle of each side.

    Returns (train_idx, test_idx) into `labels`.  Classes are processed
    in ascending label order with one PCG64 stream, so the result is a
    pure function of (labels, sizes, seed).
    """
    labels = np.asarray(labels, dtype=int)
    rng = np.random.Generator(np.random.PCG64(seed))
    need = train_per_class + test_per_class
    train_parts, test_parts = [], []
    for k in np.unique(labels):
        idx = np.flatnonzero(labels == k)
        if idx.size < need:
            name = class_names[k] if class_names else str(k)
            raise InsufficientPopulationError(
                f"class {name} has {idx.size} samples; split needs {need}")
        perm = rng.permutation(idx)
        train_parts.append(perm[:train_per_class])
        test_parts.append(perm[train_per_class:need])
    train_idx = rng.permutation(np.concatenate(train_parts))
    test_idx = rng.permutation(np.concatenate(test_parts))
    return train_idx, test_idx


def split_stratified(corpus: Corpus, spec: SplitSpec):
    """Split a corpus into (train, test) per the stratified protocol."""
    train_idx, test_idx = stratified_indices(
        corpus.labels, spec.train_per_class, spec.test_per_class,
        spec.seed, class_names=corpus.class_names)
    pick = lambda idx: Corpus(
        samples=tuple(corpus.samples[i] for i in idx),
        class_count=corpus.class_count,
        class_names=corpus.class_names,
    )
    return pick(train_idx), pick(test_idx)
