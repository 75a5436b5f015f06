"""File formats: matrix text, ASCII/SVG renders, scene JSON, curve CSV, archive."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .evaluator import Evaluation
from .grid import GridError, as_matrix, matrix_hash
from .sarsa import ArchiveEntry, CurveRow, RunArtifacts
from .tiler import PARKING_KINDS, TileKind, TileMap

SCENE_FORMAT = "garagegen-scene"
SCENE_VERSION = 1

# ---- matrix text format -------------------------------------------------


def format_matrix(S: np.ndarray) -> str:
    h, w = S.shape
    lines = [f"{h} {w}"] + [" ".join(str(int(v)) for v in row) for row in S]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise GridError("matrix file must start with 'h w'")
    h, w = int(lines[0][0]), int(lines[0][1])
    rows = lines[1:]
    if len(rows) != h or any(len(r) != w for r in rows):
        raise GridError(f"matrix body does not match declared {h}x{w}")
    return as_matrix([[int(x) for x in r] for r in rows])


def write_matrix(path: str | Path, S: np.ndarray) -> None:
    Path(path).write_text(format_matrix(S))


def read_matrix(path: str | Path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


# ---- ASCII ---------------------------------------------------------------

ASCII_CHARS = {-1: "#", 0: ".", 1: "=", 2: "E", 3: "X"}
_ASCII_CODES = {ch: code for code, ch in ASCII_CHARS.items()}


def render_ascii(S: np.ndarray) -> str:
    return "\n".join("".join(ASCII_CHARS[int(v)] for v in row) for row in S)


def parse_ascii(text: str) -> np.ndarray:
    try:
        return as_matrix([[_ASCII_CODES[ch] for ch in line] for line in text.split("\n")])
    except KeyError as exc:
        raise GridError(f"unknown ASCII cell {exc.args[0]!r}") from None


# ---- SVG -----------------------------------------------------------------

TILE_COLORS = {
    TileKind.CROSSROADS: "#2e7d32",
    TileKind.TJUNCTION: "#43a047",
    TileKind.STRAIGHT: "#66bb6a",
    TileKind.PARK1: "#ef6c00",
    TileKind.PARK2: "#fb8c00",
    TileKind.PARK3: "#ffb74d",
    TileKind.FREE: "#e0e0e0",
    TileKind.ENTRANCE: "#1e88e5",
    TileKind.EXIT: "#8e24aa",
    TileKind.OBSTACLE: "#424242",
}
_GLYPH_KINDS = PARKING_KINDS | {TileKind.TJUNCTION, TileKind.STRAIGHT}
_UNIT = {"N": (0, -1), "E": (1, 0), "S": (0, 1), "W": (-1, 0)}


def _num(x: float) -> str:
    return f"{x:.6g}"


def render_svg(t: TileMap, R: list[float], C: list[float]) -> str:
    """Tiles drawn at real-world size (metres), legend stacked below the grid."""
    h, w = t.shape
    if len(R) != h or len(C) != w:
        raise GridError(f"dimension vectors {len(R)}x{len(C)} do not match tile map {h}x{w}")
    xs = np.concatenate([[0.0], np.cumsum(C)])
    ys = np.concatenate([[0.0], np.cumsum(R)])
    width, height = float(xs[-1]), float(ys[-1])
    sw = min(min(R), min(C))  # legend swatch size
    legend_h = sw * 1.2 * len(TileKind)
    total_h = height + sw * 0.5 + legend_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_num(width)} {_num(total_h)}" '
        f'width="{_num(width)}" height="{_num(total_h)}" overflow="visible">',
        '<g id="tiles">',
    ]
    glyphs = []
    for r in range(h):
        for c in range(w):
            kind, orient = t.tiles[r][c]
            x, y, cw, rh = xs[c], ys[r], C[c], R[r]
            out.append(
                f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(cw)}" height="{_num(rh)}" '
                f'fill="{TILE_COLORS[kind]}" stroke="#000" stroke-width="{_num(sw * 0.02)}" '
                f'data-kind="{kind.value}"/>'
            )
            if kind in _GLYPH_KINDS:
                cx, cy = x + cw / 2, y + rh / 2
                ux, uy = _UNIT[orient]
                glyphs.append(
                    f'<line x1="{_num(cx)}" y1="{_num(cy)}" x2="{_num(cx + ux * cw * 0.4)}" '
                    f'y2="{_num(cy + uy * rh * 0.4)}"/>'
                )
    out.append("</g>")
    out.append(f'<g id="glyphs" stroke="#000" stroke-width="{_num(sw * 0.06)}">')
    out += glyphs
    out.append("</g>")
    out.append(f'<g id="legend" font-size="{_num(sw * 0.6)}" font-family="sans-serif">')
    for i, kind in enumerate(TileKind):
        y = height + sw * 0.5 + i * sw * 1.2
        out.append(
            f'<rect x="0" y="{_num(y)}" width="{_num(sw)}" height="{_num(sw)}" fill="{TILE_COLORS[kind]}"/>'
        )
        out.append(f'<text x="{_num(sw * 1.3)}" y="{_num(y + sw * 0.75)}">{kind.value}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---- scene JSON ----------------------------------------------------------


@dataclass
class GarageSpec:
    matrix: np.ndarray
    row_widths: list[float]
    col_widths: list[float]

    def __eq__(self, other):
        return (
            isinstance(other, GarageSpec)
            and np.array_equal(self.matrix, other.matrix)
            and self.row_widths == other.row_widths
            and self.col_widths == other.col_widths
        )


@dataclass
class Provenance:
    seed: int
    config_hash: str
    matrix_hash: str
    tool_version: str = __version__


@dataclass
class SceneDoc:
    garage: GarageSpec
    tiles: TileMap
    evaluation: Evaluation
    provenance: Provenance
    version: int = SCENE_VERSION

    def to_dict(self) -> dict:
        S = self.garage.matrix
        counts = self.tiles.counts()
        return {
            "format": SCENE_FORMAT,
            "version": self.version,
            "garage": {
                "h": int(S.shape[0]),
                "w": int(S.shape[1]),
                "matrix": S.astype(int).tolist(),
                "row_widths": self.garage.row_widths,
                "col_widths": self.garage.col_widths,
            },
            "tiles": self.tiles.to_rows(),
            "tile_counts": {k.value: counts[k] for k in TileKind},
            "evaluation": self.evaluation.to_dict(),
            "provenance": {
                "seed": self.provenance.seed,
                "config_hash": self.provenance.config_hash,
                "matrix_hash": self.provenance.matrix_hash,
                "tool_version": self.provenance.tool_version,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> SceneDoc:
        validate_scene(d)
        g = d["garage"]
        S = as_matrix(g["matrix"])
        p = d["provenance"]
        if matrix_hash(S) != p["matrix_hash"]:
            raise GridError("provenance.matrix_hash does not match the embedded matrix")
        return cls(
            GarageSpec(S, g["row_widths"], g["col_widths"]),
            TileMap.from_rows(d["tiles"], p["matrix_hash"]),
            Evaluation.from_dict(d["evaluation"]),
            Provenance(p["seed"], p["config_hash"], p["matrix_hash"], p["tool_version"]),
            d["version"],
        )


def scene_schema() -> dict:
    return json.loads(resources.files("garagegen").joinpath("schema/scene.schema.json").read_text())


def validate_scene(doc: dict) -> None:
    jsonschema.validate(doc, scene_schema())


def export_scene(
    spec: GarageSpec, t: TileMap, e: Evaluation, *, seed: int, config_hash: str
) -> str:
    """Serialise a scene document; raises on any cross-field inconsistency."""
    h, w = spec.matrix.shape
    if t.shape != (h, w):
        raise GridError(f"tiles: tile map {t.shape} does not match matrix {(h, w)}")
    if len(spec.row_widths) != h:
        raise GridError(f"row_widths: {len(spec.row_widths)} entries for {h} rows")
    if len(spec.col_widths) != w:
        raise GridError(f"col_widths: {len(spec.col_widths)} entries for {w} columns")
    digest = matrix_hash(spec.matrix)
    if t.source_hash != digest:
        raise GridError("tiles: tile map was built from a different matrix")
    counts = t.counts()
    if sum(counts[k] for k in PARKING_KINDS) != e.n_spots or counts[TileKind.FREE] != e.unused:
        raise GridError("evaluation: spot counts disagree with the tile map")
    doc = SceneDoc(spec, t, e, Provenance(seed, config_hash, digest)).to_dict()
    validate_scene(doc)
    return json.dumps(doc, indent=1) + "\n"


def import_scene(text: str) -> SceneDoc:
    return SceneDoc.from_dict(json.loads(text))


# ---- evaluation, curve, archive -----------------------------------------


def evaluation_json(e: Evaluation, S: np.ndarray) -> str:
    d = {"matrix_hash": matrix_hash(S), **e.to_dict()}
    return json.dumps(d, indent=1) + "\n"


CURVE_HEADER = ["episode", "return", "score", "epsilon"]


def curve_row(row: CurveRow) -> list[str]:
    return [str(row.episode), repr(row.ret), repr(row.score), repr(row.epsilon)]


def export_curve(run: RunArtifacts) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CURVE_HEADER)
    for row in run.curve:
        wr.writerow(curve_row(row))
    return buf.getvalue()


def write_archive(directory: str | Path, entries: list[ArchiveEntry]) -> None:
    """One matrix file per rank plus an ``index.json`` listing hash and score."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    index = []
    for rank, e in enumerate(entries):
        name = f"rank_{rank:03d}.txt"
        write_matrix(d / name, e.matrix)
        index.append({"rank": rank, "file": name, "hash": e.hash, "score": e.score, "episode": e.episode})
    (d / "index.json").write_text(json.dumps(index, indent=1) + "\n")
