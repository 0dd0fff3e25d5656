"""Coefficient fields: generation, CSV I/O, and derived quantities.

All scalar coefficients are piecewise constant per square fine cell (both
triangles of a cell share the value), stored row-major with row 0 the bottom
row of cells.  Vector fields store one 2-vector per cell, evaluated at cell
centers.
"""

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import FieldError

# Channel layouts, one per pattern id.  Each rectangle is half-open
# [x0, x1) x [y0, y1) in unit coordinates; a cell belongs to the channel when
# its center falls inside.  Coordinates are multiples of 1/8 so any resolution
# divisible by 8 resolves the strips exactly.
_PATTERNS = {
    "A": [
        (0.0, 1.0, 0.125, 0.25),
        (0.0, 1.0, 0.5, 0.625),
        (0.25, 0.375, 0.625, 1.0),
        (0.625, 0.75, 0.0, 0.375),
    ],
    "B": [
        (0.0, 1.0, 0.75, 0.875),
        (0.5, 0.625, 0.0, 1.0),
        (0.0, 0.5, 0.25, 0.375),
    ],
    "C": [
        (0.125, 0.25, 0.125, 0.875),
        (0.125, 0.875, 0.125, 0.25),
        (0.375, 1.0, 0.625, 0.75),
    ],
    "D": [
        (0.75, 0.875, 0.25, 1.0),
        (0.0, 0.625, 0.375, 0.5),
        (0.375, 0.5, 0.75, 0.875),
    ],
}

# Contrast values used by the "paper" preset.
PRESET_KAPPA1_CHANNEL = 1.0e4
PRESET_KAPPA2_CHANNEL = 1.0e2
PRESET_QHAT_CHANNEL = 1.0e7
PRESET_QTILDE_CHANNEL = 1.0e1

Q_SCENARIOS = ("pos_large", "neg_mixed")


@dataclass
class FieldSet:
    """Per-cell coefficients bound to a grid resolution.

    ``kappa1/kappa2`` must be positive, ``c11/c22`` positive, ``q1/q2`` any
    sign, ``b1/b2`` are (n_cells, 2) arrays.
    """

    cells_per_side: int
    kappa1: np.ndarray
    kappa2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    c11: np.ndarray
    c22: np.ndarray

    def __post_init__(self):
        n2 = self.cells_per_side ** 2
        for name in ("kappa1", "kappa2", "q1", "q2", "c11", "c22"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if arr.size == 1:
                arr = np.full(n2, arr[0])
            if arr.size != n2:
                raise FieldError(f"{name}: expected {n2} cells, got {arr.size}")
            if not np.all(np.isfinite(arr)):
                raise FieldError(f"{name}: non-finite values")
            setattr(self, name, arr)
        for name in ("b1", "b2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.size == 2:
                arr = np.broadcast_to(arr.reshape(1, 2), (n2, 2)).copy()
            if arr.shape != (n2, 2):
                raise FieldError(f"{name}: expected ({n2}, 2), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise FieldError(f"{name}: non-finite values")
            setattr(self, name, arr)
        if np.any(self.kappa1 <= 0) or np.any(self.kappa2 <= 0):
            raise FieldError("permeability must be positive everywhere")
        if np.any(self.c11 <= 0) or np.any(self.c22 <= 0):
            raise FieldError("storage coefficients must be positive everywhere")

    def bounds(self):
        """(kappa_min, kappa_max, b_bar, q_bar) over both continua."""
        kmin = min(self.kappa1.min(), self.kappa2.min())
        kmax = max(self.kappa1.max(), self.kappa2.max())
        bbar = max(np.linalg.norm(self.b1, axis=1).max(),
                   np.linalg.norm(self.b2, axis=1).max())
        qbar = max(np.abs(self.q1).max(), np.abs(self.q2).max())
        return kmin, kmax, bbar, qbar


def derived_fields(fs):
    """Symmetric/antisymmetric splits (b_s, b_a, q_s, q_a), pointwise."""
    b_s = 0.5 * (fs.b1 + fs.b2)
    b_a = 0.5 * (fs.b1 - fs.b2)
    q_s = 0.5 * (fs.q1 + fs.q2)
    q_a = 0.5 * (fs.q1 - fs.q2)
    return b_s, b_a, q_s, q_a


def gen_channel_field(cells_per_side, background, channel_value, pattern_id):
    """Deterministic high-contrast field: background with marked channels."""
    n = int(cells_per_side)
    if n < 1:
        raise FieldError(f"cells_per_side={cells_per_side}: must be positive")
    if pattern_id not in _PATTERNS:
        raise FieldError(
            f"unknown pattern {pattern_id!r}; choose one of {sorted(_PATTERNS)}")
    centers = (np.arange(n) + 0.5) / n
    cx, cy = np.meshgrid(centers, centers)
    mask = np.zeros((n, n), dtype=bool)
    for x0, x1, y0, y1 in _PATTERNS[pattern_id]:
        mask |= (cx >= x0) & (cx < x1) & (cy >= y0) & (cy < y1)
    field = np.full((n, n), float(background))
    field[mask] = float(channel_value)
    return field.ravel()


def pattern_cells(cells_per_side, pattern_id):
    """(ix, iy) pairs of the channel cells of a pattern, row-major order."""
    vals = gen_channel_field(cells_per_side, 0.0, 1.0, pattern_id)
    idx = np.nonzero(vals.reshape(cells_per_side, cells_per_side))
    return list(zip(idx[1].tolist(), idx[0].tolist()))


def eval_convection_preset(cells_per_side, which):
    """Rotating convection field evaluated at cell centers.

    ``which`` selects the field of the first or second continuum; the second
    is the component swap of the first.
    """
    n = int(cells_per_side)
    centers = (np.arange(n) + 0.5) / n
    x, y = np.meshgrid(centers, centers)
    g1 = 10.0 * (1.0 - np.cos(2 * np.pi * x)) * np.sin(2 * np.pi * y)
    g2 = 10.0 * np.sin(2 * np.pi * x) * (1.0 - np.cos(2 * np.pi * y))
    if which == "b1":
        out = np.stack([g1.ravel(), -g2.ravel()], axis=1)
    elif which == "b2":
        out = np.stack([-g2.ravel(), g1.ravel()], axis=1)
    else:
        raise FieldError(f"which={which!r}: expected 'b1' or 'b2'")
    return out


def preset_fields(cells_per_side, q_scenario="pos_large", b_scale=1.0):
    """The experiment coefficient set at a given resolution.

    ``pos_large`` uses equal, large positive interaction coefficients with
    1e7-contrast channels; ``neg_mixed`` uses unequal negative ones built
    from a 10-contrast channel field.
    """
    n = int(cells_per_side)
    kappa1 = gen_channel_field(n, 1.0, PRESET_KAPPA1_CHANNEL, "A")
    kappa2 = gen_channel_field(n, 1.0, PRESET_KAPPA2_CHANNEL, "B")
    if q_scenario == "pos_large":
        qhat = gen_channel_field(n, 1.0, PRESET_QHAT_CHANNEL, "C")
        q1, q2 = qhat, qhat.copy()
    elif q_scenario == "neg_mixed":
        qtilde = gen_channel_field(n, 1.0, PRESET_QTILDE_CHANNEL, "D")
        q1, q2 = -10.0 * qtilde, -qtilde
    else:
        raise FieldError(
            f"unknown q_scenario {q_scenario!r}; choose one of {Q_SCENARIOS}")
    b1 = b_scale * eval_convection_preset(n, "b1")
    b2 = b_scale * eval_convection_preset(n, "b2")
    return FieldSet(n, kappa1, kappa2, q1, q2, b1, b2, 1.0, 1.0)


def load_scalar_field(path, cells_per_side):
    """Load a per-cell scalar field from CSV (row 0 = bottom row of cells)."""
    path = Path(path)
    if not path.exists():
        raise FieldError(f"field file not found: {path}")
    try:
        values = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise FieldError(f"{path}: cannot parse CSV field ({exc})") from exc
    n = int(cells_per_side)
    if values.shape != (n, n):
        raise FieldError(
            f"{path}: expected shape ({n}, {n}), got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise FieldError(f"{path}: non-finite entries in field")
    return values.ravel()


def save_scalar_field(path, values, cells_per_side):
    """Write a per-cell field as CSV, inverse of :func:`load_scalar_field`."""
    n = int(cells_per_side)
    arr = np.asarray(values, dtype=float).reshape(n, n)
    np.savetxt(path, arr, delimiter=",", fmt="%.17g")


FIELD_FILES = ("kappa1", "kappa2", "q1", "q2", "b1x", "b1y", "b2x", "b2y")


def save_field_set(fs, directory):
    """Write all eight field CSVs of a FieldSet into a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n = fs.cells_per_side
    save_scalar_field(directory / "kappa1.csv", fs.kappa1, n)
    save_scalar_field(directory / "kappa2.csv", fs.kappa2, n)
    save_scalar_field(directory / "q1.csv", fs.q1, n)
    save_scalar_field(directory / "q2.csv", fs.q2, n)
    save_scalar_field(directory / "b1x.csv", fs.b1[:, 0], n)
    save_scalar_field(directory / "b1y.csv", fs.b1[:, 1], n)
    save_scalar_field(directory / "b2x.csv", fs.b2[:, 0], n)
    save_scalar_field(directory / "b2y.csv", fs.b2[:, 1], n)
    return [directory / f"{name}.csv" for name in FIELD_FILES]


def load_field_set(directory, cells_per_side):
    """Load the eight field CSVs written by :func:`save_field_set`."""
    directory = Path(directory)
    n = int(cells_per_side)
    k1 = load_scalar_field(directory / "kappa1.csv", n)
    k2 = load_scalar_field(directory / "kappa2.csv", n)
    q1 = load_scalar_field(directory / "q1.csv", n)
    q2 = load_scalar_field(directory / "q2.csv", n)
    b1 = np.stack([load_scalar_field(directory / "b1x.csv", n),
                   load_scalar_field(directory / "b1y.csv", n)], axis=1)
    b2 = np.stack([load_scalar_field(directory / "b2x.csv", n),
                   load_scalar_field(directory / "b2y.csv", n)], axis=1)
    return FieldSet(n, k1, k2, q1, q2, b1, b2, 1.0, 1.0)


_ASSETS = {
    "kappa1": ("kappa1_128.csv", 128),
    "kappa2": ("kappa2_128.csv", 128),
    "qhat": ("qhat_128.csv", 128),
    "qtilde": ("qtilde_128.csv", 128),
}


def load_preset_asset(name):
    """Load one of the shipped 128x128 coefficient CSVs by short name."""
    if name not in _ASSETS:
        raise FieldError(f"unknown asset {name!r}; choose one of {sorted(_ASSETS)}")
    fname, n = _ASSETS[name]
    with resources.as_file(resources.files("dualmsfem.assets") / fname) as p:
        return load_scalar_field(p, n)


def poincare_constant():
    """Poincare constant of the unit square with zero boundary values."""
    return 1.0 / (math.sqrt(2.0) * math.pi)
