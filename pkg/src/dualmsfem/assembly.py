"""Sparse assembly of all bilinear forms of the dual-continuum system.

Every public assembler returns a CSR matrix over all fine nodes of one
continuum; :func:`assemble_block_system` combines them into the 2x2 block
operator on free (non-Dirichlet) DOFs.  Coefficients are piecewise constant
per cell, so every element integral here is exact for P1 elements.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError
from .coeffs import derived_fields


def _p1_geometry(g):
    """Per-triangle areas and P1 gradient coefficients.

    Local basis i has gradient (b[:, i], c[:, i]) / (2*area).
    """
    p = g.nodes[g.triangles]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (x[:, 0] * b[:, 0] + x[:, 1] * b[:, 1] + x[:, 2] * b[:, 2])
    return area, b, c


def _per_triangle(g, values, name="coefficient"):
    """Broadcast scalar / per-cell / per-triangle data to per-triangle."""
    arr = np.asarray(values, dtype=float).reshape(-1)
    n_cells = g.cells_per_side ** 2
    if arr.size == 1:
        return np.full(g.n_triangles, arr[0])
    if arr.size == n_cells:
        return np.repeat(arr, 2)
    if arr.size == g.n_triangles:
        return arr
    raise AssemblyError(
        f"{name}: expected scalar, {n_cells} per-cell or {g.n_triangles} "
        f"per-triangle values, got {arr.size}")


def _scatter(g, element_matrices):
    """Sum (T, 3, 3) element contributions into a global CSR matrix."""
    tri = g.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    mat = sp.coo_matrix(
        (element_matrices.ravel(), (rows, cols)),
        shape=(g.n_nodes, g.n_nodes))
    return mat.tocsr()


def assemble_stiffness(g, kappa):
    """Diffusion matrix with cellwise-constant positive permeability."""
    kt = _per_triangle(g, kappa, "kappa")
    if np.any(kt <= 0):
        raise AssemblyError("kappa must be positive on every cell")
    area, b, c = _p1_geometry(g)
    scale = (kt / (4.0 * area))[:, None, None]
    elem = scale * (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :])
    return _scatter(g, elem)


def assemble_weighted_mass(g, weight):
    """Weighted P1 mass matrix; the weight may take any sign."""
    wt = _per_triangle(g, weight, "weight")
    area, _, _ = _p1_geometry(g)
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    elem = (wt * area)[:, None, None] * base[None, :, :]
    return _scatter(g, elem)


def assemble_convection(g, b_field):
    """Convection matrix: entry (m, n) integrates (b . grad trial_n) test_m."""
    bf = np.asarray(b_field, dtype=float)
    if bf.size == 2:
        bf = np.broadcast_to(bf.reshape(1, 2), (g.cells_per_side ** 2, 2))
    bx = _per_triangle(g, bf[:, 0], "b_x")
    by = _per_triangle(g, bf[:, 1], "b_y")
    _, b, c = _p1_geometry(g)
    # integral of each test function over the triangle is area/3, so the
    # element matrix has identical rows (bx*b_n + by*c_n)/6.
    rowvals = (bx[:, None] * b + by[:, None] * c) / 6.0
    elem = np.broadcast_to(rowvals[:, None, :], (g.n_triangles, 3, 3)).copy()
    return _scatter(g, elem)


def nodal_gradients(g, u):
    """Cellwise-constant gradient (per triangle) of a P1 nodal field."""
    area, b, c = _p1_geometry(g)
    vals = np.asarray(u, dtype=float)[g.triangles]
    gx = np.sum(vals * b, axis=1) / (2.0 * area)
    gy = np.sum(vals * c, axis=1) / (2.0 * area)
    return gx, gy


def assemble_s_matrix(g, kappa, pou):
    """Spectral weight matrix: mass weighted by kappa * sum_j |grad chi_j|^2.

    ``pou`` is a partition-of-unity object (rows of nodal values with an
    ``interior_vertices`` attribute) or a plain array of nodal vectors; only
    the vectors tied to interior coarse vertices enter the sum.
    """
    if hasattr(pou, "interior_rows"):
        rows = pou.interior_rows()
    else:
        rows = np.atleast_2d(np.asarray(pou, dtype=float))
    if len(rows) == 0:
        raise AssemblyError("partition of unity is empty")
    weight = np.zeros(g.n_triangles)
    for chi in rows:
        chi = np.asarray(chi).reshape(-1)
        if chi.size != g.n_nodes:
            raise AssemblyError(
                f"chi vector has {chi.size} entries, expected {g.n_nodes}")
        gx, gy = nodal_gradients(g, chi)
        weight += gx * gx + gy * gy
    kt = _per_triangle(g, kappa, "kappa")
    if np.any(kt <= 0):
        raise AssemblyError("kappa must be positive on every cell")
    return assemble_weighted_mass(g, kt * weight)


def assemble_load(g, f):
    """P1 load vector; f may be scalar, per-cell, per-node, or callable."""
    if callable(f):
        cent = g.nodes[g.triangles].mean(axis=1)
        ft = f(cent[:, 0], cent[:, 1])
        ft = np.broadcast_to(np.asarray(ft, dtype=float), (g.n_triangles,))
    else:
        arr = np.asarray(f, dtype=float).reshape(-1)
        if arr.size == g.n_nodes and arr.size != g.cells_per_side ** 2:
            return assemble_weighted_mass(g, 1.0) @ arr
        ft = _per_triangle(g, arr, "source")
    area, _, _ = _p1_geometry(g)
    contrib = ft * area / 3.0
    load = np.zeros(g.n_nodes)
    for i in range(3):
        np.add.at(load, g.triangles[:, i], contrib)
    return load


def restrict_local(operand, nodes):
    """Restrict a global matrix or nodal vector to a neighborhood node set."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if sp.issparse(operand):
        if nodes.max(initial=-1) >= operand.shape[0]:
            raise AssemblyError("node index out of range in local restriction")
        return operand[nodes][:, nodes]
    arr = np.asarray(operand)
    if nodes.max(initial=-1) >= arr.shape[0]:
        raise AssemblyError("node index out of range in local restriction")
    return arr[nodes]


def is_symmetric(mat, rel_tol=1e-12):
    """Check max |A - A^T| against rel_tol * max |A|."""
    diff = (mat - mat.T).tocoo()
    scale = np.abs(mat.data).max() if mat.nnz else 0.0
    if diff.nnz == 0:
        return True
    return np.abs(diff.data).max() <= rel_tol * max(scale, 1.0)


def dump_coo(mat, path):
    """Debug dump: one 'row col value' line per stored nonzero."""
    coo = sp.coo_matrix(mat)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")


@dataclass
class BlockSystem:
    """Assembled operators of the coupled system.

    Full-size blocks keep all fine nodes; ``B`` and ``C`` act on the free
    DOFs only (both continua stacked, continuum 1 first).
    """

    g: object
    A1: sp.csr_matrix
    A2: sp.csr_matrix
    N1: sp.csr_matrix
    N2: sp.csr_matrix
    MQ1: sp.csr_matrix
    MQ2: sp.csr_matrix
    MC1: sp.csr_matrix
    MC2: sp.csr_matrix
    free: np.ndarray
    B: sp.csr_matrix
    C: sp.csr_matrix

    @property
    def n_free(self):
        return self.free.size

    def full_to_free(self, u1, u2):
        return np.concatenate([np.asarray(u1)[self.free],
                               np.asarray(u2)[self.free]])

    def free_to_full(self, x):
        n = self.n_free
        u1 = np.zeros(self.g.n_nodes)
        u2 = np.zeros(self.g.n_nodes)
        u1[self.free] = x[:n]
        u2[self.free] = x[n:]
        return u1, u2

    def load_free(self, f1, f2):
        F1 = assemble_load(self.g, f1)
        F2 = assemble_load(self.g, f2)
        return np.concatenate([F1[self.free], F2[self.free]])


def assemble_block_system(g, fs):
    """Assemble the block operator realizing the coupled bilinear form.

    The free-DOF operator is
    ``[[A1+N1+MQ1, -(N1+MQ1)], [-(N2+MQ2), A2+N2+MQ2]]`` with Dirichlet rows
    and columns removed.
    """
    A1 = assemble_stiffness(g, fs.kappa1)
    A2 = assemble_stiffness(g, fs.kappa2)
    N1 = assemble_convection(g, fs.b1)
    N2 = assemble_convection(g, fs.b2)
    MQ1 = assemble_weighted_mass(g, fs.q1)
    MQ2 = assemble_weighted_mass(g, fs.q2)
    MC1 = assemble_weighted_mass(g, fs.c11)
    MC2 = assemble_weighted_mass(g, fs.c22)

    free = g.free_nodes()
    ixf = np.ix_(free, free)

    def sub(mat):
        return sp.csr_matrix(mat.tocsc()[:, free][free, :])

    K1 = sub(A1 + N1 + MQ1)
    K12 = sub(-(N1 + MQ1))
    K21 = sub(-(N2 + MQ2))
    K2 = sub(A2 + N2 + MQ2)
    B = sp.bmat([[K1, K12], [K21, K2]], format="csr")
    C = sp.block_diag([sub(MC1), sub(MC2)], format="csr")
    del ixf
    return BlockSystem(g, A1, A2, N1, N2, MQ1, MQ2, MC1, MC2, free, B, C)


def a_form_free(sys):
    """Block-diagonal diffusion operator on free DOFs (the a-form)."""
    free = sys.free
    return sp.block_diag(
        [sys.A1.tocsc()[:, free][free, :], sys.A2.tocsc()[:, free][free, :]],
        format="csr")


def aqs_form_free(sys, fs):
    """Symmetrized operator a + q_s on free DOFs (basis-construction form)."""
    _, _, q_s, _ = derived_fields(fs)
    MQs = assemble_weighted_mass(sys.g, q_s)
    free = sys.free
    Ms = sp.csr_matrix(MQs.tocsc()[:, free][free, :])
    A1f = sys.A1.tocsc()[:, free][free, :]
    A2f = sys.A2.tocsc()[:, free][free, :]
    return sp.bmat([[A1f + Ms, -Ms], [-Ms, A2f + Ms]], format="csr")
