"""Structured triangulation of the unit square with a coarse block overlay.

The fine mesh has ``nc*nf`` square cells per side, each split into two P1
triangles along the lower-left to upper-right diagonal.  Coarse vertices sit
on the ``nc x nc`` block lattice; every interior coarse vertex owns a
neighborhood made of the four blocks touching it.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError


@dataclass(frozen=True)
class Neighborhood:
    """Index sets for one coarse neighborhood.

    ``boundary_nodes`` walks the perimeter counterclockwise starting at the
    node with the lowest global index (the bottom-left corner).
    """

    vertex: int                 # coarse vertex id (full lattice numbering)
    elements: np.ndarray        # triangle ids covering the neighborhood
    nodes: np.ndarray           # all fine nodes, ascending global index
    interior_nodes: np.ndarray  # nodes strictly inside the neighborhood
    boundary_nodes: np.ndarray  # perimeter nodes, CCW from lowest index


@dataclass(frozen=True)
class GridGeometry:
    """Immutable fine/coarse grid description. Safe to share across threads."""

    nc: int
    nf: int
    nodes: np.ndarray            # ((n+1)^2, 2) vertex coordinates
    triangles: np.ndarray        # (2*n^2, 3) node ids, fixed diagonal split
    coarse_vertices: np.ndarray  # ((nc+1)^2,) fine-node id of each lattice point
    coarse_interior: np.ndarray  # ((nc+1)^2,) bool, True for interior vertices
    interior_vertices: np.ndarray  # ids (lattice numbering) of interior vertices
    neighborhoods: dict = field(repr=False, default_factory=dict)

    @property
    def cells_per_side(self):
        return self.nc * self.nf

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @property
    def h(self):
        return 1.0 / self.cells_per_side

    @property
    def n_interior_coarse(self):
        return self.interior_vertices.size

    def node_id(self, ix, iy):
        """Global id of the fine node at integer coordinates (ix, iy)."""
        return iy * (self.cells_per_side + 1) + ix

    def boundary_node_mask(self):
        """Boolean mask of fine nodes on the outer boundary of the square."""
        n = self.cells_per_side
        ix = np.arange(self.n_nodes) % (n + 1)
        iy = np.arange(self.n_nodes) // (n + 1)
        return (ix == 0) | (ix == n) | (iy == 0) | (iy == n)

    def free_nodes(self):
        """Interior fine node ids (the unconstrained DOFs of one continuum)."""
        return np.nonzero(~self.boundary_node_mask())[0]

    def triangle_areas(self):
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def cell_centers(self):
        """Centers of the square cells, row-major from the bottom row."""
        n = self.cells_per_side
        c = (np.arange(n) + 0.5) / n
        cx, cy = np.meshgrid(c, c)
        return np.column_stack([cx.ravel(), cy.ravel()])

    def triangle_of_cell(self, values_per_cell):
        """Expand a per-cell array to a per-triangle array (lower, upper)."""
        values_per_cell = np.asarray(values_per_cell)
        return np.repeat(values_per_cell.reshape(-1), 2)


def build_grid(nc, nf):
    """Build the fine triangulation and coarse overlay.

    Parameters
    ----------
    nc : int
        Coarse blocks per side, at least 2 (otherwise there is no interior
        coarse vertex to carry basis functions).
    nf : int
        Fine cells per coarse block per side, at least 1.
    """
    nc, nf = int(nc), int(nf)
    if nc < 2:
        raise GridError(f"nc={nc}: no interior coarse vertices (need nc >= 2)")
    if nf < 1:
        raise GridError(f"nf={nf}: need at least one fine cell per block side")

    n = nc * nf
    coords = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(coords, coords)
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    ix, iy = np.meshgrid(np.arange(n), np.arange(n))
    ix, iy = ix.ravel(), iy.ravel()
    v00 = iy * (n + 1) + ix
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    # Both triangles of a cell share the lower-left/upper-right diagonal.
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    cx, cy = np.meshgrid(np.arange(nc + 1), np.arange(nc + 1))
    cx, cy = cx.ravel(), cy.ravel()
    coarse_vertices = cy * nf * (n + 1) + cx * nf
    coarse_interior = (cx > 0) & (cx < nc) & (cy > 0) & (cy < nc)
    interior_vertices = np.nonzero(coarse_interior)[0]

    g = GridGeometry(
        nc=nc,
        nf=nf,
        nodes=nodes,
        triangles=triangles,
        coarse_vertices=coarse_vertices,
        coarse_interior=coarse_interior,
        interior_vertices=interior_vertices,
    )
    for j in interior_vertices:
        g.neighborhoods[int(j)] = _build_neighborhood(g, int(j))
    return g


def _build_neighborhood(g, j):
    n = g.cells_per_side
    nc, nf = g.nc, g.nf
    cx, cy = j % (nc + 1), j // (nc + 1)
    x0, y0 = (cx - 1) * nf, (cy - 1) * nf  # bottom-left fine cell of the patch
    m = 2 * nf                             # patch is m x m fine cells

    cells_x, cells_y = np.meshgrid(np.arange(x0, x0 + m), np.arange(y0, y0 + m))
    cells = (cells_y * n + cells_x).ravel()
    elements = np.sort(np.concatenate([2 * cells, 2 * cells + 1]))

    nx, ny = np.meshgrid(np.arange(x0, x0 + m + 1), np.arange(y0, y0 + m + 1))
    all_nodes = np.sort((ny * (n + 1) + nx).ravel())

    # Perimeter walk, counterclockwise from the bottom-left corner (which is
    # the lowest global index of the patch).
    bottom = [(x0 + t, y0) for t in range(m)]
    right = [(x0 + m, y0 + t) for t in range(m)]
    top = [(x0 + m - t, y0 + m) for t in range(m)]
    left = [(x0, y0 + m - t) for t in range(m)]
    ring = bottom + right + top + left
    boundary = np.array([yy_ * (n + 1) + xx_ for xx_, yy_ in ring], dtype=np.int64)

    interior = np.setdiff1d(all_nodes, boundary, assume_unique=False)
    return Neighborhood(
        vertex=j,
        elements=elements,
        nodes=all_nodes,
        interior_nodes=interior,
        boundary_nodes=boundary,
    )


def neighborhood(g, j):
    """Return (elements, interior nodes, boundary nodes) of coarse vertex j.

    ``j`` uses the full coarse-lattice numbering; non-interior vertices have
    no neighborhood and raise ``GridError``.
    """
    j = int(j)
    if j < 0 or j >= g.coarse_vertices.size:
        raise GridError(f"coarse vertex {j} out of range")
    if not g.coarse_interior[j]:
        raise GridError(f"coarse vertex {j} is not interior; no neighborhood")
    nb = g.neighborhoods[j]
    return nb.elements, nb.interior_nodes, nb.boundary_nodes
