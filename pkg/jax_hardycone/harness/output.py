import csv
import json
import logging
import math
from typing import IO, Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# local imports
from ..dataclass import SweepCell, SweepConfig  # noqa: E402
from .config import config_hash  # noqa: E402

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "jax-hardycone"
SVG_METADATA = {"Date": None}


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def to_jsonable(obj):
    """
    Convert namedtuples, numpy arrays and scalars to plain JSON types
    """
    if hasattr(obj, "_asdict"):
        return {key: to_jsonable(value) for key, value in obj._asdict().items()}
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    if hasattr(obj, "tolist"):
        return to_jsonable(obj.tolist())
    return obj


def write_json(obj, stream: IO[str]):
    json.dump(to_jsonable(obj), stream, indent=2, sort_keys=True)
    stream.write("\n")


def write_rows(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence]):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])


def write_sweep_csv(stream: IO[str], cells: Sequence[SweepCell], config: SweepConfig):
    """
    One metadata line with the config hash, then the header and one row per cell
    """
    stream.write(f"# config-sha256: {config_hash(config)}\n")
    write_rows(stream, SweepCell._fields, cells)


def plot_dichotomy(path: str, cells: Sequence[SweepCell], config: SweepConfig):
    """
    Colored (c, p) cells (certifier pass / zeta_0 divergent / neither) with the
    critical exponent overlaid
    """
    cs = sorted({cell.c for cell in cells})
    ps = sorted({cell.p for cell in cells})
    grid = np.full((len(ps), len(cs)), np.nan)
    for cell in cells:
        code = 0.0
        if cell.cert_analytic == "pass":
            code = 1.0
        elif cell.zeta0_verdict == "divergent":
            code = 2.0
        grid[ps.index(cell.p), cs.index(cell.c)] = code

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.pcolormesh(
        _edges(cs), _edges(ps), grid, cmap="viridis", vmin=0.0, vmax=2.0, shading="flat"
    )
    curve = sorted(
        (cell.c, cell.p_critical)
        for cell in cells
        if isinstance(cell.p_critical, float) and math.isfinite(cell.p_critical)
    )
    if curve:
        xs, ys = zip(*dict(curve).items())
        ax.plot(xs, ys, color="white", linewidth=1.5, label="critical exponent")
        ax.legend(loc="upper right")
    ax.set_xlabel("c")
    ax.set_ylabel("p")
    ax.set_ylim(ps[0] - 0.5 * _step(ps), ps[-1] + 0.5 * _step(ps))
    ax.set_title(f"N={config.N}, {config.mode}")
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)


def plot_curve(path: str, xs, ys, xlabel: str, ylabel: str, mark=None):
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot(xs, ys, marker="o", markersize=3)
    if mark is not None:
        ax.plot([mark[0]], [mark[1]], marker="*", markersize=10, color="red")
        ax.annotate("hemisphere", mark, textcoords="offset points", xytext=(6, 6))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)


def _step(values: Sequence[float]) -> float:
    return values[1] - values[0] if len(values) > 1 else 1.0


def _edges(values: Sequence[float]) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    half = 0.5 * _step(values)
    return np.concatenate([values - half, [values[-1] + half]])
