"""Reading and writing coefficient triples (Matrix Market and JSON bundles)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatch, NonSquare, ParseError
from .linearization import QuadPencil

_FIELDS = {"real", "complex", "integer", "pattern"}
_SYMMETRY = {"general", "symmetric", "hermitian", "skew-symmetric"}


def _tokens(line: str) -> list[tuple[str, int]]:
    """Whitespace tokens with their 1-based column."""
    out = []
    col = 0
    for part in line.split():
        col = line.index(part, col)
        out.append((part, col + 1))
        col += len(part)
    return out


def _number(tok: tuple[str, int], path: str, lineno: int, kind=float):
    text, col = tok
    try:
        return kind(text)
    except ValueError:
        raise ParseError(f"bad number {text!r}", path, lineno, col) from None


def read_matrix_market(path: str | Path) -> NDArray[np.complex128]:
    """Dense complex matrix from a Matrix Market file (array or coordinate)."""
    path = str(path)
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from exc
    if not lines:
        raise ParseError("empty file", path, 1)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise ParseError("missing '%%MatrixMarket matrix' banner", path, 1, 1)
    fmt, fld, sym = (h.lower() for h in head[2:])
    if fmt not in ("array", "coordinate"):
        raise ParseError(f"unknown format {fmt!r}", path, 1)
    if fld not in _FIELDS or (fmt == "array" and fld == "pattern"):
        raise ParseError(f"unsupported field {fld!r}", path, 1)
    if sym not in _SYMMETRY:
        raise ParseError(f"unsupported symmetry {sym!r}", path, 1)

    body = [(i + 1, ln) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", path, len(lines))
    lineno, size_line = body[0]
    toks = _tokens(size_line)
    need = 2 if fmt == "array" else 3
    if len(toks) != need:
        raise ParseError(f"size line needs {need} integers", path, lineno, 1)
    dims = [_number(t, path, lineno, int) for t in toks]
    rows, cols = dims[0], dims[1]
    if rows < 0 or cols < 0:
        raise ParseError("negative dimension", path, lineno, 1)
    width = 2 if fld == "complex" else (0 if fld == "pattern" else 1)
    out = np.zeros((rows, cols), dtype=np.complex128)

    def value(tks, ln):
        if width == 0:
            return 1.0
        if len(tks) != width:
            raise ParseError(f"expected {width} value token(s), got {len(tks)}", path, ln,
                             tks[0][1] if tks else 1)
        v = _number(tks[0], path, ln)
        if width == 2:
            v = complex(v, _number(tks[1], path, ln))
        return v

    entries = body[1:]
    if fmt == "array":
        if sym == "general":
            slots = [(i, j) for j in range(cols) for i in range(rows)]
        else:
            first = 1 if sym == "skew-symmetric" else 0
            slots = [(i, j) for j in range(cols) for i in range(j + first, rows)]
        if len(entries) != len(slots):
            ln = entries[-1][0] if entries else lineno
            raise ParseError(f"expected {len(slots)} entries, found {len(entries)}", path, ln)
        triples = [(i, j, value(_tokens(line), ln)) for (ln, line), (i, j) in zip(entries, slots)]
    else:
        nnz = dims[2]
        if len(entries) != nnz:
            ln = entries[-1][0] if entries else lineno
            raise ParseError(f"expected {nnz} entries, found {len(entries)}", path, ln)
        triples = []
        for ln, line in entries:
            tks = _tokens(line)
            if len(tks) < 2:
                raise ParseError("entry needs row and column indices", path, ln, 1)
            i = _number(tks[0], path, ln, int) - 1
            j = _number(tks[1], path, ln, int) - 1
            if not (0 <= i < rows and 0 <= j < cols):
                raise ParseError(f"index ({i + 1}, {j + 1}) out of range", path, ln, tks[0][1])
            triples.append((i, j, value(tks[2:], ln)))
    for i, j, v in triples:
        out[i, j] += v
        if i != j and sym != "general":
            if sym == "symmetric":
                out[j, i] += v
            elif sym == "hermitian":
                out[j, i] += np.conj(v)
            else:
                out[j, i] -= v
    if not np.all(np.isfinite(out)):
        raise ParseError("non-finite entry", path)
    return out


def write_matrix_market(path: str | Path, a) -> None:
    """Write a dense matrix in array format; values round-trip exactly."""
    a = np.asarray(a)
    is_complex = np.iscomplexobj(a) and np.any(a.imag != 0)
    fld = "complex" if is_complex else "real"
    lines = [f"%%MatrixMarket matrix array {fld} general", f"{a.shape[0]} {a.shape[1]}"]
    for j in range(a.shape[1]):
        for i in range(a.shape[0]):
            v = complex(a[i, j])
            lines.append(f"{v.real!r} {v.imag!r}" if is_complex else f"{v.real!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _bundle_matrix(data, n: int, name: str, path: str) -> NDArray[np.complex128]:
    if name not in data:
        raise ParseError(f"bundle lacks {name!r}", path)
    arr = data[name]
    try:
        vals = np.array(arr, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{name}: entries must be numbers or [re, im] pairs", path) from None
    if vals.shape in ((n, n, 2), (n * n, 2)):
        vals = vals[..., 0] + 1j * vals[..., 1]
    elif vals.shape not in ((n, n), (n * n,)):
        raise DimensionMismatch(f"{name} has shape {vals.shape}, expected {n}x{n} entries")
    return np.array(vals, dtype=np.complex128).reshape(n, n)


def read_bundle(path: str | Path) -> QuadPencil:
    """JSON bundle {"n": n, "M": ..., "C": ..., "K": ...}, rows of [re, im] pairs."""
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None
    if not isinstance(data, dict) or not isinstance(data.get("n"), int) or data["n"] < 1:
        raise ParseError("bundle needs a positive integer 'n'", path)
    n = data["n"]
    return QuadPencil(*(_bundle_matrix(data, n, key, path) for key in ("M", "C", "K")))


def write_bundle(path: str | Path, p: QuadPencil) -> None:
    data = {"n": p.n}
    for key, a in zip("MCK", p.triple()):
        data[key] = [[[float(v.real), float(v.imag)] for v in row] for row in a]
    Path(path).write_text(json.dumps(data) + "\n")


def load_triple(paths=None, bundle=None) -> QuadPencil:
    """QuadPencil from three Matrix Market files or one JSON bundle."""
    if bundle is not None:
        return read_bundle(bundle)
    if paths is None or len(paths) != 3:
        raise ValueError("need exactly three Matrix Market paths (M, C, K)")
    mats = [read_matrix_market(pth) for pth in paths]
    for pth, a in zip(paths, mats):
        if a.shape[0] != a.shape[1]:
            raise NonSquare(f"{pth}: matrix is {a.shape[0]}x{a.shape[1]}")
    if len({a.shape for a in mats}) != 1:
        raise DimensionMismatch(f"coefficient sizes differ: {[a.shape for a in mats]}")
    return QuadPencil(*mats)
