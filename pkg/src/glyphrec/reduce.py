"""Feature scaling and PCA fusion.

Scaling maps each training column onto [-1, +1]; PCA is fitted on the
scaled training matrix with the sample covariance (divisor n-1) and a
hand-rolled cyclic Jacobi eigensolver, which keeps the decomposition
free of iterative-solver tolerances and reproducible across platforms.
The default component count is 76.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError
from .modelio import read_model, write_model

DEFAULT_COMPONENTS = 76
DEFAULT_VARIANCE_TAU = 0.95


def _matrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ShapeError(f"expected a nonempty 2-D matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class MinMaxScaler:
    col_min: np.ndarray
    col_max: np.ndarray


def scaler_fit(x) -> MinMaxScaler:
    """Column-wise extrema of the training matrix."""
    a = _matrix(x)
    return MinMaxScaler(col_min=a.min(axis=0), col_max=a.max(axis=0))


def scaler_apply(s: MinMaxScaler, x) -> np.ndarray:
    """Map values into [-1, +1] per the fitted extrema.

    Constant columns map to 0; values outside the fitted range (test
    data) are not clipped.
    """
    a = _matrix(x)
    if a.shape[1] != s.col_min.size:
        raise ShapeError(f"scaler fitted on {s.col_min.size} columns, got {a.shape[1]}")
    span = s.col_max - s.col_min
    safe = np.where(span > 0, span, 1.0)
    out = 2.0 * (a - s.col_min) / safe - 1.0
    out[:, span == 0] = 0.0
    return out


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray          # k x d, rows orthonormal, descending variance
    explained_variance: np.ndarray  # k eigenvalues
    explained_ratio: np.ndarray     # k shares of the total variance


def jacobi_eigh(sym, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) unsorted; eigenvector j is the
    j-th column.  Sweeps run until the off-diagonal Frobenius norm drops
    below tol relative to the input norm.  Early sweeps skip rotations
    below a shrinking threshold to save work on nearly diagonal rows.
    """
    a = np.array(sym, dtype=float, copy=True)
    d = a.shape[0]
    if a.shape != (d, d):
        raise ShapeError(f"jacobi_eigh expects a square matrix, got {a.shape}")
    v = np.eye(d)
    if d == 1:
        return np.diag(a).copy(), v
    scale = max(1.0, float(np.linalg.norm(a)))
    for sweep in range(max_sweeps):
        off = math_off = float(np.sqrt(2.0 * np.sum(np.tril(a, -1) ** 2)))
        if off <= tol * scale:
            break
        thresh = 0.2 * off / (d * d) if sweep < 3 else 0.0
        for p in range(d - 1):
            hot = np.flatnonzero(np.abs(a[p, p + 1:]) > thresh)
            for q in p + 1 + hot:
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v


def pca_fit(x, k: int = DEFAULT_COMPONENTS) -> PcaModel:
    """Top-k principal directions of the sample covariance.

    Requires 1 <= k <= min(n-1, d).  Rows of `components` are ordered by
    descending eigenvalue and sign-fixed so each row's largest-magnitude
    entry is positive.  explained_ratio is relative to the total
    variance over all d directions.
    """
    a = _matrix(x)
    n, d = a.shape
    if n < 2:
        raise ConfigurationError(f"PCA needs at least 2 samples, got {n}")
    if not 1 <= k <= min(n - 1, d):
        raise ConfigurationError(f"component count {k} outside [1, {min(n - 1, d)}]")
    mean = a.mean(axis=0)
    centered = a - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = jacobi_eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    comps = eigvecs[:, order].T[:k].copy()
    flip = comps[np.arange(k), np.argmax(np.abs(comps), axis=1)] < 0
    comps[flip] *= -1.0
    total = float(eigvals.sum())
    ratio = eigvals[:k] / total if total > 0 else np.zeros(k)
    return PcaModel(mean=mean, components=comps,
                    explained_variance=eigvals[:k], explained_ratio=ratio)


def pca_transform(m: PcaModel, x) -> np.ndarray:
    a = _matrix(x)
    if a.shape[1] != m.mean.size:
        raise ShapeError(f"PCA fitted on {m.mean.size} columns, got {a.shape[1]}")
    return (a - m.mean) @ m.components.T


def pca_truncate(m: PcaModel, k: int) -> PcaModel:
    """Keep the first k components of an already fitted model."""
    if not 1 <= k <= m.components.shape[0]:
        raise ConfigurationError(f"cannot truncate to {k} of {m.components.shape[0]} components")
    return PcaModel(mean=m.mean, components=m.components[:k],
                    explained_variance=m.explained_variance[:k],
                    explained_ratio=m.explained_ratio[:k])


def scree(m: PcaModel):
    """(component number, explained ratio, cumulative ratio) per component."""
    cum = np.cumsum(m.explained_ratio)
    return [(i + 1, float(r), float(c))
            for i, (r, c) in enumerate(zip(m.explained_ratio, cum))]


def components_for_variance(m: PcaModel, tau: float = DEFAULT_VARIANCE_TAU) -> int:
    """Smallest k whose cumulative explained ratio reaches tau.

    Falls back to the full fitted count when tau is never reached.
    """
    if not 0.0 < tau <= 1.0:
        raise ConfigurationError(f"variance threshold {tau} outside (0, 1]")
    cum = np.cumsum(m.explained_ratio)
    hit = np.flatnonzero(cum >= tau)
    return int(hit[0]) + 1 if hit.size else int(m.explained_ratio.size)


# -- persistence ---------------------------------------------------------------

def save_scaler(s: MinMaxScaler, path) -> None:
    write_model(path, "minmax", {"col_min": s.col_min, "col_max": s.col_max})


def load_scaler(path) -> MinMaxScaler:
    kind, f = read_model(path)
    if kind != "minmax":
        raise ShapeError(f"{path}: expected a minmax model, found {kind}")
    return MinMaxScaler(col_min=f["col_min"], col_max=f["col_max"])


def save_pca(m: PcaModel, path) -> None:
    write_model(path, "pca", {
        "k": m.components.shape[0],
        "mean": m.mean,
        "components": m.components,
        "explained_variance": m.explained_variance,
        "explained_ratio": m.explained_ratio,
    })


def load_pca(path) -> PcaModel:
    kind, f = read_model(path)
    if kind != "pca":
        raise ShapeError(f"{path}: expected a pca model, found {kind}")
    return PcaModel(mean=f["mean"], components=f["components"],
                    explained_variance=f["explained_variance"],
                    explained_ratio=f["explained_ratio"])
