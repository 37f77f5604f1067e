"""File formats: CSV tables with a versioned comment header, JSON, and PGM maps."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import FuzzyVariable, Interval, MembershipSample, from_alpha_cuts
from .data import PixelMap, SampleEnsemble
from .extension import PBoxFamily
from .interaction import JointAlphaCut, joint_cut_from_dict
from .random_field import KLExpansion

SCHEMA_VERSION = 1


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, kind: str, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# fuzzyuq {kind} v{SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path) -> tuple[str, list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    kind = ""
    if lines and lines[0].startswith("#"):
        kind = lines[0].lstrip("# ").strip()
        lines = lines[1:]
    reader = list(csv.reader(lines))
    return kind, reader[0], reader[1:]


def write_cut_table(path, fv: FuzzyVariable) -> None:
    write_csv(path, "cut-table", ["alpha", "lo", "hi"], zip(fv.levels, fv.lower, fv.upper))


def read_cut_table(path) -> FuzzyVariable:
    _, _, rows = read_csv(path)
    levels = [float(r[0]) for r in rows]
    return from_alpha_cuts(levels, [Interval(float(r[1]), float(r[2])) for r in rows])


def write_membership_samples(path, samples: Sequence[MembershipSample]) -> None:
    write_csv(path, "membership", ["abscissa", "degree"], ((s.abscissa, s.degree) for s in samples))


def write_pbox(path, pbox: PBoxFamily) -> None:
    write_csv(path, "pbox", ["alpha", "u0", "F_left", "F_right"], pbox.rows())


def read_pbox(path) -> PBoxFamily:
    _, _, rows = read_csv(path)
    arr = np.array(rows, dtype=float)
    levels = np.unique(arr[:, 0])
    grid = np.unique(arr[:, 1])
    left = arr[:, 2].reshape(levels.size, grid.size)
    right = arr[:, 3].reshape(levels.size, grid.size)
    return PBoxFamily(grid, levels, left, right)


def write_field(path, xs, variables: Sequence[FuzzyVariable]) -> None:
    """Fuzzy field as rows (x, alpha, lo, hi)."""
    rows = (
        (x, a, lo, hi)
        for x, fv in zip(xs, variables)
        for a, lo, hi in zip(fv.levels, fv.lower, fv.upper)
    )
    write_csv(path, "fuzzy-field", ["x", "alpha", "lo", "hi"], rows)


def dump_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def fuzzy_to_json(fv: FuzzyVariable) -> str:
    return json.dumps(fv.to_dict())


def fuzzy_from_json(text: str) -> FuzzyVariable:
    return FuzzyVariable.from_dict(json.loads(text))


def joint_cut_to_json(cut: JointAlphaCut) -> str:
    return json.dumps(cut.to_dict())


def joint_cut_from_json(text: str) -> JointAlphaCut:
    return joint_cut_from_dict(json.loads(text))


def write_points(path, points) -> None:
    pts = np.atleast_2d(points)
    write_csv(path, "points", [f"z{i + 1}" for i in range(pts.shape[1])], pts.tolist())


def write_eigenpairs(path, kl: KLExpansion, count: int | None = None) -> None:
    count = kl.size if count is None else count
    cols = ["j", "lambda"] + [f"phi@{x:g}" for x in kl.grid]
    rows = ([j + 1, kl.eigenvalues[j], *kl.eigenvectors[:, j]] for j in range(count))
    write_csv(path, "eigenpairs", cols, rows)


def write_ensemble(path, ensemble: SampleEnsemble) -> None:
    write_csv(path, "ensemble", ["bar", "station", "x", "a", "b"], ensemble.rows())


def read_ensemble(path) -> SampleEnsemble:
    _, _, rows = read_csv(path)
    arr = np.array(rows, dtype=float)
    bars, stations = int(arr[:, 0].max()), int(arr[:, 1].max())
    values = np.empty((bars, stations))
    values[arr[:, 0].astype(int) - 1, arr[:, 1].astype(int) - 1] = arr[:, 3]
    xs = np.empty(stations)
    xs[arr[:, 1].astype(int) - 1] = arr[:, 2]
    return SampleEnsemble(values, xs)


def write_pgm(path, pixmap: PixelMap) -> None:
    header = f"P5\n{pixmap.width} {pixmap.height}\n255\n".encode()
    Path(path).write_bytes(header + (pixmap.occupancy * 255).astype(np.uint8).tobytes())


def read_pgm(path) -> PixelMap:
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while not raw[end : end + 1].isspace():
            end += 1
        tokens.append(raw[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise ValueError("only binary (P5) PGM maps are supported")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.frombuffer(raw[pos + 1 : pos + 1 + width * height], dtype=np.uint8)
    if data.size != width * height:
        raise ValueError("truncated PGM data")
    return PixelMap((data.reshape(height, width) > maxval // 2).astype(np.uint8))


def map_to_rle(pixmap: PixelMap) -> dict:
    """Fiber runs per row as [start, length] pairs."""
    runs = []
    for row in pixmap.occupancy:
        padded = np.concatenate([[0], row.astype(np.int8), [0]])
        d = np.diff(padded)
        starts = np.nonzero(d == 1)[0]
        ends = np.nonzero(d == -1)[0]
        runs.append([[int(s), int(e - s)] for s, e in zip(starts, ends)])
    return {"width": pixmap.width, "height": pixmap.height, "runs": runs}


def map_from_rle(data: dict) -> PixelMap:
    occ = np.zeros((data["height"], data["width"]), dtype=np.uint8)
    for i, row in enumerate(data["runs"]):
        for start, length in row:
            occ[i, start : start + length] = 1
    return PixelMap(occ)
