"""Rotated cubes and boxes realised as axis-aligned grids in a local frame.

A cell domain is a box [lo, lo + dims*h) in local coordinates z together
with an orthogonal matrix R and a translation c; physical points are
y = R z + c.  The last local axis is distinguished: it is mapped onto the
prescribed unit normal nu (R e_n = nu), so jump data and interface seeds
depend on z_n alone.

The rotation is a Householder reflection composed with a fixed sign
convention: identity when nu = e_n, and for normals on the lower
hemisphere (negative last nonzero component) the rotation of -nu composed
with a flip of the last axis, which makes the rotated unit cube the same
point set for nu and -nu.  Householder matrices of rational normals are
rational, which the interval process in :mod:`cellhom.homogenise` relies
on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .integrand import InputDomainError, Integrand

__all__ = [
    "Rotation",
    "CellDomain",
    "ResolutionError",
    "rotation_for_normal",
    "make_cell",
    "make_box_cell",
    "boundary_nodes",
    "localize_integrand",
]

ORTHO_TOL = 1e-12


class ResolutionError(ValueError):
    """Raised when the requested spacing cannot resolve the domain."""


@dataclass(frozen=True, eq=False)
class Rotation:
    """Orthogonal matrix R with R e_n = nu."""

    nu: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        R = self.matrix
        n = R.shape[0]
        if np.max(np.abs(R.T @ R - np.eye(n))) > ORTHO_TOL:
            raise InputDomainError("rotation matrix is not orthogonal")
        if np.linalg.norm(R[:, -1] - self.nu) > 1e-10:
            raise InputDomainError("rotation does not map e_n to nu")


def _last_nonzero_sign(nu, tol=1e-12):
    for i in range(len(nu) - 1, -1, -1):
        if abs(nu[i]) > tol:
            return 1.0 if nu[i] > 0 else -1.0
    raise InputDomainError("normal vector is numerically zero")


def _householder_to_last_axis(nu):
    n = len(nu)
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    if np.linalg.norm(nu - e_n) < 1e-14:
        return np.eye(n)
    w = e_n - nu
    return np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)


def rotation_for_normal(nu) -> Rotation:
    """Deterministic orthogonal R with R e_n = nu.

    Identity for nu = e_n; for normals with negative last nonzero
    component, R(-nu) composed with the last-axis flip, so that
    R(nu) Q_1 and R(-nu) Q_1 coincide as point sets.
    """
    nu = np.asarray(nu, dtype=float).reshape(-1)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-10:
        raise InputDomainError(f"normal must be a unit vector, |nu| = {np.linalg.norm(nu):.3g}")
    if _last_nonzero_sign(nu) > 0:
        R = _householder_to_last_axis(nu)
    else:
        R = _householder_to_last_axis(-nu)
        flip = np.eye(len(nu))
        flip[-1, -1] = -1.0
        R = R @ flip
    R = np.asarray(R)
    R.setflags(write=False)
    nu = nu.copy()
    nu.setflags(write=False)
    return Rotation(nu=nu, matrix=R)


@dataclass(frozen=True, eq=False)
class CellDomain:
    """Axis-aligned grid on a local box, mapped by z -> R z + center.

    ``lo`` is the local lower corner, ``dims`` the number of grid cells
    per axis, ``h`` the uniform spacing; the realised side along axis i
    is dims[i] * h.  ``side`` and ``elongation`` record the nominal
    construction parameters of centred cube cells (0 for raw boxes).
    """

    center: np.ndarray
    rotation: Rotation
    h: float
    lo: np.ndarray
    dims: tuple
    side: float = 0.0
    elongation: int = 1

    @property
    def n(self):
        return len(self.dims)

    @property
    def node_shape(self):
        return tuple(d + 1 for d in self.dims)

    @property
    def num_nodes(self):
        return int(np.prod(self.node_shape))

    @property
    def num_cells(self):
        return int(np.prod(self.dims))

    @property
    def realised_sides(self):
        return np.asarray(self.dims, dtype=float) * self.h

    @property
    def volume(self):
        return float(np.prod(self.realised_sides))

    @property
    def cross_section(self):
        """Measure of the box section orthogonal to the last local axis."""
        return float(np.prod(self.realised_sides[:-1])) if self.n > 1 else 1.0

    def frame_map(self, z):
        """Physical coordinates of local points (..., n)."""
        z = np.asarray(z, dtype=float)
        return z @ self.rotation.matrix.T + self.center

    @cached_property
    def node_axes(self):
        return tuple(self.lo[i] + self.h * np.arange(self.dims[i] + 1) for i in range(self.n))

    @cached_property
    def local_nodes(self):
        grids = np.meshgrid(*self.node_axes, indexing="ij")
        return np.stack(grids, axis=-1)

    @cached_property
    def global_nodes(self):
        out = self.frame_map(self.local_nodes)
        out.setflags(write=False)
        return out

    @cached_property
    def cell_centers_local(self):
        """Flattened cell centres in the local frame, shape (num_cells, n)."""
        axes = tuple(self.lo[i] + self.h * (np.arange(self.dims[i]) + 0.5) for i in range(self.n))
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack(grids, axis=-1).reshape(-1, self.n)

    @cached_property
    def cell_centers_global(self):
        out = self.frame_map(self.cell_centers_local)
        out.setflags(write=False)
        return out

    @cached_property
    def boundary_mask(self):
        mask = np.zeros(self.node_shape, dtype=bool)
        for axis in range(self.n):
            sl = [slice(None)] * self.n
            sl[axis] = 0
            mask[tuple(sl)] = True
            sl[axis] = -1
            mask[tuple(sl)] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def node_index(self):
        idx = np.arange(self.num_nodes).reshape(self.node_shape)
        idx.setflags(write=False)
        return idx

    @cached_property
    def cell_corner_nodes(self):
        """Flat node ids of the 2^n corners of every cell, one array per corner."""
        sets = []
        for bits in range(2**self.n):
            sl = tuple(slice(1, None) if bits >> a & 1 else slice(0, -1) for a in range(self.n))
            ids = self.node_index[sl].reshape(-1)
            ids.setflags(write=False)
            sets.append(ids)
        return tuple(sets)

    @cached_property
    def cell_edge_nodes(self):
        """Base node ids and their forward neighbour per axis (the FD stencil)."""
        base = tuple(slice(0, -1) for _ in range(self.n))
        pbase = self.node_index[base].reshape(-1)
        pbase.setflags(write=False)
        shifts = []
        for axis in range(self.n):
            sl = list(base)
            sl[axis] = slice(1, None)
            ids = self.node_index[tuple(sl)].reshape(-1)
            ids.setflags(write=False)
            shifts.append(ids)
        return pbase, tuple(shifts)


def make_cell(center, side, nu, k=1, h=0.25) -> CellDomain:
    """Centred rotated cell with local extents (k*side, ..., k*side, side).

    Extents snap to the nearest whole number of cells at spacing h; the
    realised sides are recorded on the domain.  Requires h <= side/4 so
    every axis carries at least four cells.
    """
    if side <= 0:
        raise InputDomainError("side must be positive")
    if k < 1 or int(k) != k:
        raise InputDomainError("elongation k must be a positive integer")
    if h > side / 4 + 1e-12:
        raise ResolutionError(f"spacing h={h} too coarse for side {side}; need h <= side/4")
    rot = rotation_for_normal(nu)
    n = len(rot.nu)
    extents = np.full(n, float(k) * side)
    extents[-1] = float(side)
    dims = tuple(max(4, int(round(e / h))) for e in extents)
    lo = -0.5 * np.asarray(dims, dtype=float) * h
    center = np.asarray(center, dtype=float).reshape(-1)
    if center.shape[0] != n:
        raise InputDomainError("center dimension does not match normal")
    lo.setflags(write=False)
    center = center.copy()
    center.setflags(write=False)
    return CellDomain(center=center, rotation=rot, h=float(h), lo=lo, dims=dims, side=float(side), elongation=int(k))


def make_box_cell(nu, lo, hi, h, center=None) -> CellDomain:
    """Grid on the rotated box R([lo, hi)) + center; extents snap to h."""
    rot = nu if isinstance(nu, Rotation) else rotation_for_normal(nu)
    lo = np.asarray(lo, dtype=float).reshape(-1)
    hi = np.asarray(hi, dtype=float).reshape(-1)
    n = len(rot.nu)
    if lo.shape[0] != n or hi.shape[0] != n:
        raise InputDomainError("box corners must match the normal dimension")
    if np.any(hi <= lo):
        raise InputDomainError("box must have positive extents")
    dims = tuple(max(2, int(round((hi[i] - lo[i]) / h))) for i in range(n))
    if center is None:
        center = np.zeros(n)
    center = np.asarray(center, dtype=float).reshape(-1).copy()
    lo = lo.copy()
    lo.setflags(write=False)
    center.setflags(write=False)
    return CellDomain(center=center, rotation=rot, h=float(h), lo=lo, dims=dims)


def boundary_nodes(cell: CellDomain, which: str = "all") -> np.ndarray:
    """Sorted flat indices of nodes on the requested boundary faces.

    ``perp`` selects faces on the first n-1 local axes, ``para`` the two
    faces normal to the last local axis; their union is ``all`` and they
    overlap exactly on edge nodes.
    """
    n = cell.n
    if which == "all":
        mask = cell.boundary_mask
    elif which in ("perp", "para"):
        axes = range(n - 1) if which == "perp" else [n - 1]
        mask = np.zeros(cell.node_shape, dtype=bool)
        for axis in axes:
            sl = [slice(None)] * n
            sl[axis] = 0
            mask[tuple(sl)] = True
            sl[axis] = -1
            mask[tuple(sl)] = True
    else:
        raise InputDomainError(f"unknown boundary selector {which!r}")
    return np.flatnonzero(mask.reshape(-1))


def localize_integrand(cell: CellDomain, g: Integrand) -> Integrand:
    """Pull g back to the local frame: g~(z, xi) = g(R z + c, xi R^T).

    Energies of local fields under g~ equal energies of the mapped fields
    under g; Frobenius norms are rotation invariant, so radial densities
    only get their coefficient recentred.
    """
    R = cell.rotation.matrix
    c = cell.center

    if g.is_radial:
        if g.coeff is None:
            return replace(g, id=f"{g.id}@local")
        base_coeff = g.coeff

        def coeff(points):
            return base_coeff(np.asarray(points, dtype=float) @ R.T + c)

        return replace(g, id=f"{g.id}@local", coeff=coeff)

    base_eval = g.generic_eval

    def gen(points, xis):
        pts = np.asarray(points, dtype=float) @ R.T + c
        mats = np.asarray(xis, dtype=float) @ R.T
        return base_eval(pts, mats)

    rec = None
    if g.recession_eval is not None:
        base_rec = g.recession_eval

        def rec(points, xis):
            pts = np.asarray(points, dtype=float) @ R.T + c
            mats = np.asarray(xis, dtype=float) @ R.T
            return base_rec(pts, mats)

    return replace(g, id=f"{g.id}@local", generic_eval=gen, recession_eval=rec)
