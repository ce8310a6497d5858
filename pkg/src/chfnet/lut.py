"""CHF look-up table: loading, trilinear interpolation, diameter correction.

The table is a dense grid over pressure [MPa], mass flux [kg/m2/s] and
thermodynamic exit quality [-]; values are CHF in kW/m2 for an 8 mm tube.

CSV layout (UTF-8, one row per grid node, any row order)::

    pressure_mpa,mass_flux_kg_m2s,quality,chf_kw_m2
    0.1,0,-0.5,4500
    ...
"""
import csv
import io
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import GridIncompleteError, LutFormatError, OutOfRangeError, ValidationError

LUT_COLUMNS = ("pressure_mpa", "mass_flux_kg_m2s", "quality", "chf_kw_m2")
FEATURE_NAMES = LUT_COLUMNS[:3]
REFERENCE_DIAMETER_MM = 8.0

# Axes of the 2006 table (15 x 21 x 23 = 7245 nodes).
LUT2006_PRESSURES = (0.1, 0.3, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 21.0)
LUT2006_MASS_FLUXES = (0.0, 50.0, 100.0, 300.0, 500.0, 750.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0,
                       3500.0, 4000.0, 4500.0, 5000.0, 5500.0, 6000.0, 6500.0, 7000.0, 7500.0, 8000.0)
LUT2006_QUALITIES = (-0.5, -0.4, -0.3, -0.2, -0.15, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3,
                     0.35, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

# Minimum coverage required of any loaded table.
REQUIRED_SPAN = {"pressure": (0.1, 21.0), "mass_flux": (0.0, 8000.0), "quality": (-0.5, 1.0)}


def _check_axis(name, axis):
    axis = np.asarray(axis, dtype=np.float64)
    if axis.ndim != 1 or axis.size < 2:
        raise LutFormatError(f"{name} axis needs at least 2 values, got {axis.size}")
    if not np.all(np.isfinite(axis)):
        raise LutFormatError(f"{name} axis has non-finite values")
    if np.any(np.diff(axis) <= 0):
        raise LutFormatError(f"{name} axis is not strictly increasing")
    return axis


@dataclass(frozen=True, eq=False)
class LutGrid:
    """Immutable (pressure, mass flux, quality) -> CHF table."""

    pressures: np.ndarray
    mass_fluxes: np.ndarray
    qualities: np.ndarray
    chf_values: np.ndarray
    require_full_span: bool = True

    def __post_init__(self):
        p = _check_axis("pressure", self.pressures)
        g = _check_axis("mass_flux", self.mass_fluxes)
        x = _check_axis("quality", self.qualities)
        v = np.asarray(self.chf_values, dtype=np.float64)
        if v.shape != (p.size, g.size, x.size):
            raise LutFormatError(f"chf_values shape {v.shape} does not match axes {(p.size, g.size, x.size)}")
        if not np.all(np.isfinite(v)):
            raise LutFormatError("chf_values contain non-finite entries")
        if np.any(v < 0):
            raise LutFormatError("chf_values contain negative entries")
        if self.require_full_span:
            for name, axis in (("pressure", p), ("mass_flux", g), ("quality", x)):
                lo, hi = REQUIRED_SPAN[name]
                if axis[0] > lo or axis[-1] < hi:
                    raise LutFormatError(
                        f"{name} axis spans [{axis[0]}, {axis[-1]}], must cover [{lo}, {hi}]")
        for arr in (p, g, x, v):
            arr.setflags(write=False)
        object.__setattr__(self, "pressures", p)
        object.__setattr__(self, "mass_fluxes", g)
        object.__setattr__(self, "qualities", x)
        object.__setattr__(self, "chf_values", v)

    @property
    def shape(self):
        return self.chf_values.shape

    @property
    def axes(self):
        return self.pressures, self.mass_fluxes, self.qualities

    def __len__(self):
        return self.chf_values.size


@dataclass(frozen=True)
class QueryPoint:
    pressure: float
    mass_flux: float
    quality: float
    diameter: float = REFERENCE_DIAMETER_MM

    def __post_init__(self):
        vals = (self.pressure, self.mass_flux, self.quality, self.diameter)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"query has non-finite fields: {self}")
        if self.diameter <= 0:
            raise ValidationError(f"diameter must be positive, got {self.diameter}")


def _read_rows(source):
    if isinstance(source, (str, Path)) and not (isinstance(source, str) and "\n" in source):
        with open(source, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    if isinstance(source, str):
        return list(csv.reader(io.StringIO(source)))
    return list(csv.reader(source))


def load_lut(source, require_full_span=True):
    """Parse a LUT CSV into a :class:`LutGrid`.

    ``source`` may be a path, the CSV text itself, or an open text stream.
    Set ``require_full_span=False`` for reduced test grids that do not cover
    the full 2006 parameter range.
    """
    rows = _read_rows(source)
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise LutFormatError("empty LUT file")
    header = tuple(c.strip() for c in rows[0])
    if header != LUT_COLUMNS:
        raise LutFormatError(f"bad header {header}, expected {LUT_COLUMNS}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise LutFormatError(f"line {lineno}: expected 4 fields, got {len(row)}")
        try:
            data.append(tuple(float(c) for c in row))
        except ValueError as exc:
            raise LutFormatError(f"line {lineno}: {exc}") from None
    if not data:
        raise LutFormatError("LUT file has a header but no rows")
    arr = np.array(data)
    if np.any(arr[:, 3] < 0):
        bad = int(np.argmax(arr[:, 3] < 0)) + 2
        raise LutFormatError(f"line {bad}: negative CHF value")

    axes = [np.unique(arr[:, i]) for i in range(3)]
    for name, axis in zip(("pressure", "mass_flux", "quality"), axes):
        if axis.size < 2:
            raise LutFormatError(f"{name} axis needs at least 2 values, got {axis.size}")
    shape = tuple(a.size for a in axes)
    idx = tuple(np.searchsorted(axes[i], arr[:, i]) for i in range(3))
    flat = np.ravel_multi_index(idx, shape)
    counts = np.bincount(flat, minlength=math.prod(shape))
    if np.any(counts > 1):
        dup = np.unravel_index(int(np.argmax(counts > 1)), shape)
        raise LutFormatError(f"duplicate node {tuple(float(axes[i][dup[i]]) for i in range(3))}")
    if np.any(counts == 0):
        missing = np.unravel_index(int(np.argmax(counts == 0)), shape)
        node = tuple(float(axes[i][missing[i]]) for i in range(3))
        raise GridIncompleteError(
            f"grid incomplete: {math.prod(shape) - len(arr)} node(s) missing, e.g. (P, G, x) = {node}")
    values = np.empty(math.prod(shape))
    values[flat] = arr[:, 3]
    return LutGrid(axes[0], axes[1], axes[2], values.reshape(shape), require_full_span=require_full_span)


def write_lut(grid, dest):
    """Write ``grid`` in the LUT CSV layout, axis-major order."""
    lines = [",".join(LUT_COLUMNS)]
    for (p, g, x), v in zip(itertools.product(*grid.axes), grid.chf_values.ravel()):
        lines.append(f"{float(p)!r},{float(g)!r},{float(x)!r},{float(v)!r}")
    Path(dest).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _check_in_range(grid, p, g, x):
    for name, axis, q in (("pressure", grid.pressures, p), ("mass_flux", grid.mass_fluxes, g),
                          ("quality", grid.qualities, x)):
        q = np.asarray(q, dtype=np.float64)
        bad = ~((q >= axis[0]) & (q <= axis[-1]))
        if np.any(bad):
            raise OutOfRangeError(
                f"{name}={np.asarray(q)[bad].ravel()[0]!r} outside [{axis[0]}, {axis[-1]}]")


def interpolate(grid, p, g, x):
    """Trilinear interpolation of CHF_8mm [kW/m2] at (p, g, x).

    Accepts scalars or broadcastable arrays. Queries on the boundary are in
    range; anything outside the grid raises :class:`OutOfRangeError` (no
    extrapolation).
    """
    _check_in_range(grid, p, g, x)
    q = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (p, g, x)))
    out = kernels.trilinear(grid.pressures, grid.mass_fluxes, grid.qualities, grid.chf_values, *q)
    if np.ndim(out) == 0:
        return float(out)
    return out


def correct_diameter(chf_8mm, d_real):
    """Rescale an 8 mm table value to a tube of diameter ``d_real`` [mm].

    Uses CHF = CHF_8mm * (d_real / 8) ** 0.5. Note that the usual Groeneveld
    correction is the reciprocal, (8 / d) ** 0.5, and is not applied here.
    """
    d = np.asarray(d_real, dtype=np.float64)
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        raise ValidationError(f"diameter must be finite and positive, got {d_real!r}")
    c = np.asarray(chf_8mm, dtype=np.float64)
    if np.any(c < 0):
        raise ValidationError(f"chf_8mm must be non-negative, got {chf_8mm!r}")
    out = c * (d / REFERENCE_DIAMETER_MM) ** 0.5
    if np.ndim(out) == 0:
        return float(out)
    return out


def lookup(grid, query):
    """Interpolate at a :class:`QueryPoint` and apply the diameter correction."""
    return correct_diameter(interpolate(grid, query.pressure, query.mass_flux, query.quality),
                            query.diameter)


def flatten(grid):
    """One sample per grid node: pressure outermost, quality innermost."""
    from .dataset import Dataset

    mesh = np.meshgrid(*grid.axes, indexing="ij")
    features = np.column_stack([m.ravel() for m in mesh])
    return Dataset(features, grid.chf_values.ravel().copy(), FEATURE_NAMES)
