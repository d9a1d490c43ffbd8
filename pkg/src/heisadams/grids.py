"""Cell-centered grids for box and Koranyi-ball domains in H^1.

A GridDomain is an axis-aligned box [-Lx,Lx] x [-Ly,Ly] x [-Lt,Lt] cut into
nx*ny*nt cells; fields live at cell centers and every cell carries volume
hx*hy*ht.  Centers are generated from integer offsets so that for odd cell
counts the middle cell sits exactly at the origin.

Boundary handling: values outside the domain mask are identically zero, and
the outermost in-mask ring is clamped to zero as well ("free" cells are the
eroded mask).  Together with zero ghost layers this discretizes u = 0 and a
vanishing one-sided normal difference on the boundary, which keeps the
discrete quadratic form exactly consistent with its gradient (see operators).
A mirror ghost policy (even reflection about the clamped ring, giving a
vanishing *centered* normal difference) is available where that reading of
the boundary condition is wanted.

The t-spacing may differ from the horizontal spacing; ht = 2*hx*hy makes the
cell centers a subgroup of the group, which some exactness tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .group import gauge_arr

_MAGIC = b"HGRD0001"


def _centers(n: int, half_extent: float) -> np.ndarray:
    h = 2.0 * half_extent / n
    # (2i - (n-1)) * h/2 is exactly 0 at the middle cell of an odd axis
    return (2.0 * np.arange(n) - (n - 1)) * (h / 2.0)


@dataclass
class GridDomain:
    """Discretized box with an optional membership mask (e.g. a gauge ball)."""

    shape: tuple[int, int, int]
    extents: tuple[float, float, float]
    mask: np.ndarray | None = None          # cells belonging to Omega; default all
    _weight_cache: dict = dc_field(default_factory=dict, repr=False)
    _coord_cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.mask is None:
            self.mask = np.ones(self.shape, dtype=bool)
        if self.mask.shape != self.shape:
            raise ValueError("mask shape does not match grid shape")

    # -- geometry ------------------------------------------------------------

    @property
    def spacing(self) -> tuple[float, float, float]:
        nx, ny, nt = self.shape
        Lx, Ly, Lt = self.extents
        return (2.0 * Lx / nx, 2.0 * Ly / ny, 2.0 * Lt / nt)

    @property
    def cell_volume(self) -> float:
        hx, hy, ht = self.spacing
        return hx * hy * ht

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        nx, ny, nt = self.shape
        Lx, Ly, Lt = self.extents
        return _centers(nx, Lx), _centers(ny, Ly), _centers(nt, Lt)

    def coords(self):
        """Meshgrids (X, Y, T) of cell centers, cached."""
        if "XYZ" not in self._coord_cache:
            xs, ys, ts = self.axes()
            self._coord_cache["XYZ"] = np.meshgrid(xs, ys, ts, indexing="ij")
        return self._coord_cache["XYZ"]

    def gauge(self) -> np.ndarray:
        if "gauge" not in self._coord_cache:
            X, Y, T = self.coords()
            self._coord_cache["gauge"] = gauge_arr(X, Y, T)
        return self._coord_cache["gauge"]

    @property
    def origin_cell(self) -> tuple[int, int, int] | None:
        """Index of the cell centered exactly at 0, or None."""
        nx, ny, nt = self.shape
        if nx % 2 and ny % 2 and nt % 2:
            return (nx // 2, ny // 2, nt // 2)
        return None

    def contains_origin(self) -> bool:
        X, Y, T = self.coords()
        hx, hy, ht = self.spacing
        inside = (np.abs(X) <= hx / 2) & (np.abs(Y) <= hy / 2) & (np.abs(T) <= ht / 2)
        return bool((inside & self.mask).any())

    # -- dof structure ---------------------------------------------------------

    def free_mask(self) -> np.ndarray:
        """Cells that carry degrees of freedom: mask eroded by one cell.

        The removed ring is the discrete Dirichlet boundary (clamped to 0).
        """
        if "free" not in self._coord_cache:
            m = self.mask
            er = m.copy()
            er[1:, :, :] &= m[:-1, :, :]
            er[:-1, :, :] &= m[1:, :, :]
            er[:, 1:, :] &= m[:, :-1, :]
            er[:, :-1, :] &= m[:, 1:, :]
            er[:, :, 1:] &= m[:, :, :-1]
            er[:, :, :-1] &= m[:, :, 1:]
            er[0, :, :] = er[-1, :, :] = False
            er[:, 0, :] = er[:, -1, :] = False
            er[:, :, 0] = er[:, :, -1] = False
            self._coord_cache["free"] = er
        return self._coord_cache["free"]

    def domain_volume(self) -> float:
        return float(self.mask.sum()) * self.cell_volume

    # -- singular weight -------------------------------------------------------

    def singular_weight(self, a: float, head_cells: float = 6.0, subsamples: int = 4) -> np.ndarray:
        """Per-cell weights for the measure rho^-a d xi, cached per a.

        Off the singular head the weight is gauge(center)^-a.  Cells whose
        center lies within head_cells*max(h) of the origin in gauge distance
        get the cell average of rho^-a by subsamples^3 midpoint subsampling
        (even counts, so no subsample ever lands on the origin); this removes
        the O(h) quadrature excess a bare midpoint value would leave next to
        the singular sheet |z|^4 = t^2 scale.
        """
        if a < 0:
            raise ValueError("weight exponent a must be >= 0")
        if a >= 4.0 and self.contains_origin():
            raise ValueError(f"rho^-{a} is not integrable over a domain containing 0")
        key = (round(float(a), 12), head_cells, subsamples)
        if key in self._weight_cache:
            return self._weight_cache[key]
        if a == 0.0:
            w = np.ones(self.shape)
            w[~self.mask] = 0.0
            self._weight_cache[key] = w
            return w

        rho = self.gauge()
        hx, hy, ht = self.spacing
        hmax = max(hx, hy, ht)
        w = np.zeros(self.shape)
        far = rho > head_cells * hmax
        w[far] = rho[far] ** (-a)

        near = ~far
        if near.any():
            xs, ys, ts = self.axes()
            q = subsamples
            ox = (-0.5 + (np.arange(q) + 0.5) / q) * hx
            oy = (-0.5 + (np.arange(q) + 0.5) / q) * hy
            ot = (-0.5 + (np.arange(q) + 0.5) / q) * ht
            OX, OY, OT = np.meshgrid(ox, oy, ot, indexing="ij")
            for i, j, k in zip(*np.where(near)):
                sub = gauge_arr(xs[i] + OX, ys[j] + OY, ts[k] + OT)
                w[i, j, k] = float(np.mean(sub ** (-a)))
        w[~self.mask] = 0.0
        self._weight_cache[key] = w
        return w


def box_grid(n: int, extent: float = 1.0, t_extent: float | None = None,
             nt: int | None = None) -> GridDomain:
    """Full box [-extent,extent]^2 x [-t_extent,t_extent], n cells per axis."""
    te = extent if t_extent is None else t_extent
    ntc = n if nt is None else nt
    return GridDomain(shape=(n, n, ntc), extents=(extent, extent, te))


def ball_grid(n: int, radius: float = 1.0) -> GridDomain:
    """Koranyi ball of given radius, masked out of its bounding box.

    The gauge ball {(|z|^4+t^2)^(1/4) <= R} has bounding box
    [-R,R]^2 x [-R^2,R^2]; the t-axis gets the same cell count so ht differs
    from hx when R != 1.
    """
    dom = GridDomain(shape=(n, n, n), extents=(radius, radius, radius ** 2))
    dom.mask = dom.gauge() <= radius
    return dom


def group_lattice_grid(n: int, extent: float = 1.0, nt: int | None = None) -> GridDomain:
    """Box grid whose centers form a subgroup: ht = 2*hx*hy exactly."""
    hx = 2.0 * extent / n
    ntc = n if nt is None else nt
    ht = 2.0 * hx * hx
    return GridDomain(shape=(n, n, ntc), extents=(extent, extent, ntc * ht / 2.0))


@dataclass
class GridField:
    """Real values at the cell centers of a GridDomain."""

    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.domain.shape:
            raise ValueError("field values do not match grid shape")

    def copy(self) -> "GridField":
        return GridField(self.domain, self.values.copy())

    def masked(self) -> np.ndarray:
        return self.values[self.domain.mask]

    def project_free(self) -> "GridField":
        """Zero everything but the free cells (boundary-condition projection)."""
        out = np.where(self.domain.free_mask(), self.values, 0.0)
        return GridField(self.domain, out)

    def __add__(self, other):
        return GridField(self.domain, self.values + other.values)

    def __sub__(self, other):
        return GridField(self.domain, self.values - other.values)

    def __mul__(self, c: float):
        return GridField(self.domain, self.values * c)

    __rmul__ = __mul__


def zeros(domain: GridDomain) -> GridField:
    return GridField(domain, np.zeros(domain.shape))


def from_function(domain: GridDomain, fn) -> GridField:
    """Sample fn(X, Y, T) at cell centers; zero outside the mask."""
    X, Y, T = domain.coords()
    vals = np.asarray(fn(X, Y, T), dtype=float)
    vals = np.where(domain.mask, vals, 0.0)
    return GridField(domain, vals)


def gauge_power_field(domain: GridDomain, a: float) -> GridField:
    """The field rho^-a with the singular head cell-averaged.

    This is the canonical discrete stand-in for gauge^-a in oracle tests; it
    reuses the singular-weight construction so the origin cell is finite.
    """
    return GridField(domain, domain.singular_weight(a).copy())


# -- serialization -----------------------------------------------------------

def save_field(f: GridField, path: str | Path) -> None:
    """Flat binary layout: magic, dims (int64), extents+spacing (float64),
    then values in x-fastest order.  Little-endian throughout."""
    nx, ny, nt = f.domain.shape
    header = np.array([nx, ny, nt], dtype="<i8").tobytes()
    geom = np.array(list(f.domain.extents) + list(f.domain.spacing), dtype="<f8").tobytes()
    payload = np.asarray(f.values, dtype="<f8").ravel(order="F").tobytes()
    Path(path).write_bytes(_MAGIC + header + geom + payload)


def load_field(path: str | Path) -> GridField:
    raw = Path(path).read_bytes()
    if raw[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path}: not a grid-field file")
    off = len(_MAGIC)
    dims = np.frombuffer(raw, dtype="<i8", count=3, offset=off)
    off += 3 * 8
    geom = np.frombuffer(raw, dtype="<f8", count=6, offset=off)
    off += 6 * 8
    nx, ny, nt = (int(d) for d in dims)
    vals = np.frombuffer(raw, dtype="<f8", count=nx * ny * nt, offset=off)
    dom = GridDomain(shape=(nx, ny, nt), extents=(geom[0], geom[1], geom[2]))
    return GridField(dom, vals.reshape((nx, ny, nt), order="F").copy())


def field_to_csv(f: GridField, path: str | Path) -> None:
    """x,y,t,value rows for small grids."""
    X, Y, T = f.domain.coords()
    with open(path, "w") as fh:
        fh.write("x,y,t,value\n")
        for x, y, t, v in zip(X.ravel(), Y.ravel(), T.ravel(), f.values.ravel()):
            fh.write(f"{x:.17g},{y:.17g},{t:.17g},{v:.17g}\n")
