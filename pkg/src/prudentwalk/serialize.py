"""File formats: JSONL trajectories, CSV tables, exact-pmf golden tables.

Formats (all round-trip, parse(serialize(x)) == x):

- 2D trajectories: one JSON object per line with
  {"seed", "variant", "n", "steps"} where steps is a run-length encoded
  direction string over RLUD, e.g. "R3U1D2".
- 3D trajectories: same with directions XxYyZz (upper = +, lower = -).
- effective / hat paths: {"seed", "n", "values"} with values the
  delta-encoded increments (cumulative sums rebuild the path from 0).
- excursion tables: CSV "k,kind,start,end,displacement,wall,crossed".
- exact exit-law oracle: text lines "L m prob_num prob_den".
- Z samples: CSV "u,z1,z2,sigma1,sigma2,seed".
- norm series: CSV "t,mean,stderr,nseeds".
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

import numpy as np

from .lattice import LatticePath, LatticePath3D

__all__ = [
    "rle_encode",
    "rle_decode",
    "path2d_to_record",
    "record_to_path2d",
    "path3d_to_record",
    "record_to_path3d",
    "effective_to_record",
    "record_to_values",
    "write_jsonl",
    "read_jsonl",
    "excursions_to_csv",
    "csv_to_excursions",
    "exit_pmf_table_text",
    "parse_exit_pmf_table",
    "z_samples_to_csv",
    "norm_series_to_csv",
    "ParseError",
]

_DIRS_2D = {(1, 0): "R", (-1, 0): "L", (0, 1): "U", (0, -1): "D"}
_STEPS_2D = {v: k for k, v in _DIRS_2D.items()}
_DIRS_3D = {
    (1, 0, 0): "X",
    (-1, 0, 0): "x",
    (0, 1, 0): "Y",
    (0, -1, 0): "y",
    (0, 0, 1): "Z",
    (0, 0, -1): "z",
}
_STEPS_3D = {v: k for k, v in _DIRS_3D.items()}
_RLE_TOKEN = re.compile(r"([A-Za-z])(\d+)")


class ParseError(ValueError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def rle_encode(sites: np.ndarray, table: dict) -> str:
    deltas = np.diff(np.asarray(sites), axis=0)
    out = []
    prev = None
    count = 0
    for d in map(tuple, deltas.tolist()):
        ch = table[d]
        if ch == prev:
            count += 1
        else:
            if prev is not None:
                out.append(f"{prev}{count}")
            prev, count = ch, 1
    if prev is not None:
        out.append(f"{prev}{count}")
    return "".join(out)


def rle_decode(text: str, table: dict, dim: int) -> np.ndarray:
    pos = 0
    moves = []
    for m in _RLE_TOKEN.finditer(text):
        if m.start() != pos:
            raise ValueError(f"bad run-length token at offset {pos}")
        ch, num = m.group(1), int(m.group(2))
        if ch not in table:
            raise ValueError(f"unknown direction {ch!r}")
        moves.append((table[ch], num))
        pos = m.end()
    if pos != len(text):
        raise ValueError(f"bad run-length token at offset {pos}")
    if not moves:
        return np.zeros((1, dim), dtype=np.int64)
    deltas = np.repeat(
        np.array([s for s, _ in moves], dtype=np.int64),
        np.array([n for _, n in moves], dtype=np.int64),
        axis=0,
    )
    sites = np.zeros((deltas.shape[0] + 1, dim), dtype=np.int64)
    np.cumsum(deltas, axis=0, out=sites[1:])
    return sites


def path2d_to_record(path: LatticePath) -> dict:
    return {
        "seed": path.seed,
        "variant": path.variant,
        "n": len(path),
        "steps": rle_encode(path.sites, _DIRS_2D),
    }


def record_to_path2d(rec: dict) -> LatticePath:
    sites = rle_decode(rec["steps"], _STEPS_2D, 2)
    if sites.shape[0] - 1 != rec["n"]:
        raise ValueError("step count disagrees with n")
    return LatticePath(sites, variant=rec.get("variant", "prudent"), seed=rec.get("seed"))


def path3d_to_record(path: LatticePath3D) -> dict:
    return {
        "seed": path.seed,
        "variant": "walk3d",
        "n": len(path),
        "steps": rle_encode(path.sites, _DIRS_3D),
    }


def record_to_path3d(rec: dict) -> LatticePath3D:
    sites = rle_decode(rec["steps"], _STEPS_3D, 3)
    if sites.shape[0] - 1 != rec["n"]:
        raise ValueError("step count disagrees with n")
    return LatticePath3D(sites, seed=rec.get("seed"))


def effective_to_record(values: np.ndarray, seed=None) -> dict:
    v = np.asarray(values, dtype=np.int64)
    return {"seed": seed, "n": int(v.shape[0] - 1), "values": np.diff(v).tolist()}


def record_to_values(rec: dict) -> np.ndarray:
    deltas = np.asarray(rec["values"], dtype=np.int64)
    out = np.zeros(deltas.shape[0] + 1, dtype=np.int64)
    np.cumsum(deltas, out=out[1:])
    return out


def write_jsonl(records, fh) -> None:
    for rec in records:
        fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_jsonl(fh):
    records = []
    for i, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON ({e.msg})", i) from None
    return records


EXCURSION_HEADER = "k,kind,start,end,displacement,wall,crossed"


def excursions_to_csv(records, fh) -> None:
    fh.write(EXCURSION_HEADER + "\n")
    for r in records:
        fh.write(
            f"{r.index},{r.kind},{r.start},{r.end},{r.displacement},"
            f"{r.wall_length},{int(r.crossed)}\n"
        )


def csv_to_excursions(fh):
    from .walk2d import ExcursionRecord

    header = fh.readline().strip()
    if header != EXCURSION_HEADER:
        raise ParseError(f"expected header {EXCURSION_HEADER!r}", 1)
    out = []
    for i, line in enumerate(fh, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ParseError("expected 7 comma-separated fields", i)
        try:
            out.append(
                ExcursionRecord(
                    index=int(parts[0]),
                    kind=parts[1],
                    start=int(parts[2]),
                    end=int(parts[3]),
                    displacement=int(parts[4]),
                    wall_length=int(parts[5]),
                    crossed=bool(int(parts[6])),
                )
            )
        except ValueError as e:
            raise ParseError(str(e), i) from None
    return out


def exit_pmf_table_text(width: int, m_max: int) -> str:
    """Golden-file format for the exact exit-law oracle."""
    from .effective import exit_time_pmf_table

    lines = []
    for m, p in enumerate(exit_time_pmf_table(width, m_max), start=1):
        lines.append(f"{width} {m} {p.numerator} {p.denominator}")
    return "\n".join(lines) + "\n"


def parse_exit_pmf_table(text: str) -> dict[tuple[int, int], Fraction]:
    out = {}
    for i, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError("expected 'L m num den'", i)
        L, m, num, den = (int(v) for v in parts)
        out[(L, m)] = Fraction(num, den)
    return out


def z_samples_to_csv(samples, fh) -> None:
    """samples: iterable of (ZProcessSample, seed)."""
    fh.write("u,z1,z2,sigma1,sigma2,seed\n")
    for z, seed in samples:
        for u, (z1, z2) in zip(z.u_grid, z.points):
            fh.write(f"{u:.10g},{z1:.10g},{z2:.10g},{z.sigma1},{z.sigma2},{seed}\n")


def norm_series_to_csv(series: dict, fh) -> None:
    fh.write("t,mean,stderr,nseeds\n")
    for t, m, s in zip(series["t"], series["mean"], series["stderr"]):
        fh.write(f"{int(t)},{m:.10g},{s:.10g},{series['nseeds']}\n")
