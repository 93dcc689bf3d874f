"""Flat textual key-value model files.

Every persisted model (scaler, PCA, k-NN, ELM, SVM) uses one format: a
header line, a `kind` line, then `name type dims` records followed by
their data lines.  Reals are written with 17 significant digits so a
save/load round trip is bit-exact for float64.

    glyphrec-model 1
    kind pca
    k int 76
    mean vec 325
    <325 reals on one line>
    components mat 76 325
    <76 lines of 325 reals>
"""

import numpy as np

from .errors import DataError

_MAGIC = "glyphrec-model 1"


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def write_model(path, kind: str, items: dict) -> None:
    """Write named fields in order; values may be int, float, str, or arrays."""
    lines = [_MAGIC, f"kind {kind}"]
    for name, value in items.items():
        if isinstance(value, bool):
            raise DataError(f"field {name}: bool is not a supported model field type")
        if isinstance(value, (int, np.integer)):
            lines.append(f"{name} int {int(value)}")
        elif isinstance(value, (float, np.floating)):
            lines.append(f"{name} float {_fmt(value)}")
        elif isinstance(value, str):
            lines.append(f"{name} str {value}")
        else:
            arr = np.asarray(value)
            if arr.ndim == 1:
                if np.issubdtype(arr.dtype, np.integer):
                    lines.append(f"{name} ivec {arr.size}")
                    lines.append(" ".join(str(int(v)) for v in arr))
                else:
                    lines.append(f"{name} vec {arr.size}")
                    lines.append(" ".join(_fmt(v) for v in arr))
            elif arr.ndim == 2:
                lines.append(f"{name} mat {arr.shape[0]} {arr.shape[1]}")
                for row in arr:
                    lines.append(" ".join(_fmt(v) for v in row))
            else:
                raise DataError(f"field {name}: unsupported rank {arr.ndim}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_model(path):
    """Read a model file; returns (kind, {name: value})."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _MAGIC:
        raise DataError(f"{path}: not a glyphrec model file")
    if len(lines) < 2 or not lines[1].startswith("kind "):
        raise DataError(f"{path}: missing model kind")
    kind = lines[1][5:].strip()
    fields = {}
    i = 2
    try:
        while i < len(lines):
            if not lines[i].strip():
                i += 1
                continue
            name, ftype, rest = lines[i].split(" ", 2)
            if ftype == "int":
                fields[name] = int(rest)
                i += 1
            elif ftype == "float":
                fields[name] = float(rest)
                i += 1
            elif ftype == "str":
                fields[name] = rest
                i += 1
            elif ftype in ("vec", "ivec"):
                n = int(rest)
                dtype = int if ftype == "ivec" else float
                data = np.array(lines[i + 1].split(), dtype=dtype)
                if data.size != n:
                    raise DataError(f"{path}: field {name} expected {n} values")
                fields[name] = data
                i += 2
            elif ftype == "mat":
                r, c = (int(v) for v in rest.split())
                rows = [np.array(lines[i + 1 + j].split(), dtype=float)
                        for j in range(r)]
                mat = np.vstack(rows) if rows else np.zeros((0, c))
                if mat.shape != (r, c):
                    raise DataError(f"{path}: field {name} expected shape {(r, c)}")
                fields[name] = mat
                i += 1 + r
            else:
                raise DataError(f"{path}: unknown field type {ftype!r}")
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: malformed model file ({exc})") from exc
    return kind, fields
