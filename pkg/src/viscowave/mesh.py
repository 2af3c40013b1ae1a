"""Uniform rectangular meshes of axis-aligned domains.

Vertices, elements, and edges are numbered lexicographically with x
running fastest.  Edges come in two runs: all vertical edges first (unit
normal fixed as +x), then all horizontal edges (unit normal +y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ElementRect", "StructuredMesh"]


@dataclass(frozen=True)
class ElementRect:
    """Axis-aligned extent of a single element."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def hx(self) -> float:
        return self.x1 - self.x0

    @property
    def hy(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> tuple[float, float]:
        return 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)

    @property
    def corners(self) -> np.ndarray:
        """Corner coordinates, counterclockwise from lower left, shape (4, 2)."""
        return np.array(
            [
                [self.x0, self.y0],
                [self.x1, self.y0],
                [self.x1, self.y1],
                [self.x0, self.y1],
            ]
        )


class StructuredMesh:
    """Uniform nx-by-ny mesh of congruent rectangles.

    Parameters
    ----------
    nx, ny : int
        Number of elements along each axis.
    bounds : tuple of float, optional
        Domain corners ``(x0, y0, x1, y1)``; defaults to the unit square.

    Attributes
    ----------
    hx, hy : float
        Element edge lengths.
    n_vertices, n_elements, n_edges : int
        Entity counts; ``n_edges`` counts vertical and horizontal edges
        together.
    vertex_coords : ndarray, shape (n_vertices, 2)
    elem_vertices : ndarray, shape (n_elements, 4)
        Vertex ids, counterclockwise from the lower-left corner.
    elem_edges : ndarray, shape (n_elements, 4)
        Edge ids in the order (left, right, bottom, top).
    edge_vertices : ndarray, shape (n_edges, 2)
    edge_normal_axis : ndarray, shape (n_edges,)
        0 where the fixed unit normal is +x, 1 where it is +y.
    boundary_vertex, boundary_edge : ndarray of bool
    """

    def __init__(self, nx, ny, bounds=(0.0, 0.0, 1.0, 1.0)):
        if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
            raise ValueError(f"element counts must be positive integers, got {nx}x{ny}")
        nx, ny = int(nx), int(ny)
        x0, y0, x1, y1 = (float(b) for b in bounds)
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"degenerate domain bounds {bounds}")
        self.nx = nx
        self.ny = ny
        self.bounds = (x0, y0, x1, y1)
        self.hx = (x1 - x0) / nx
        self.hy = (y1 - y0) / ny

        self.n_vertices = (nx + 1) * (ny + 1)
        self.n_elements = nx * ny
        self.n_vertical_edges = (nx + 1) * ny
        self.n_horizontal_edges = nx * (ny + 1)
        self.n_edges = self.n_vertical_edges + self.n_horizontal_edges

        X, Y = np.meshgrid(x0 + self.hx * np.arange(nx + 1), y0 + self.hy * np.arange(ny + 1))
        self.vertex_coords = np.column_stack([X.ravel(), Y.ravel()])

        ie, je = np.meshgrid(np.arange(nx), np.arange(ny))
        ie, je = ie.ravel(), je.ravel()
        ll = je * (nx + 1) + ie
        self.elem_vertices = np.column_stack([ll, ll + 1, ll + nx + 2, ll + nx + 1])
        left = je * (nx + 1) + ie
        bottom = self.n_vertical_edges + je * nx + ie
        self.elem_edges = np.column_stack([left, left + 1, bottom, bottom + nx])

        iv, jv = np.meshgrid(np.arange(nx + 1), np.arange(ny))
        iv, jv = iv.ravel(), jv.ravel()
        vlow = jv * (nx + 1) + iv
        ih, jh = np.meshgrid(np.arange(nx), np.arange(ny + 1))
        ih, jh = ih.ravel(), jh.ravel()
        hlow = jh * (nx + 1) + ih
        self.edge_vertices = np.vstack(
            [
                np.column_stack([vlow, vlow + nx + 1]),
                np.column_stack([hlow, hlow + 1]),
            ]
        )
        self.edge_normal_axis = np.concatenate(
            [
                np.zeros(self.n_vertical_edges, dtype=int),
                np.ones(self.n_horizontal_edges, dtype=int),
            ]
        )

        gx = np.rint((self.vertex_coords[:, 0] - x0) / self.hx).astype(int)
        gy = np.rint((self.vertex_coords[:, 1] - y0) / self.hy).astype(int)
        self.boundary_vertex = (gx == 0) | (gx == nx) | (gy == 0) | (gy == ny)
        self.boundary_edge = np.concatenate(
            [
                (iv == 0) | (iv == nx),
                (jh == 0) | (jh == ny),
            ]
        )

    def vertex_index(self, i, j):
        """Global id of vertex (i, j), 0 <= i <= nx, 0 <= j <= ny."""
        return j * (self.nx + 1) + i

    def element_index(self, i, j):
        """Global id of element (i, j), 0 <= i < nx, 0 <= j < ny."""
        return j * self.nx + i

    def element_rect(self, e) -> ElementRect:
        """Extent of element ``e``; corners come out counterclockwise from lower left."""
        if not 0 <= e < self.n_elements:
            raise ValueError(f"element id {e} out of range")
        ie, je = e % self.nx, e // self.nx
        x0, y0 = self.bounds[0], self.bounds[1]
        return ElementRect(
            x0 + ie * self.hx,
            y0 + je * self.hy,
            x0 + (ie + 1) * self.hx,
            y0 + (je + 1) * self.hy,
        )

    def element_centers(self) -> np.ndarray:
        """Centers of all elements, shape (n_elements, 2)."""
        ie = np.arange(self.n_elements) % self.nx
        je = np.arange(self.n_elements) // self.nx
        return np.column_stack(
            [
                self.bounds[0] + (ie + 0.5) * self.hx,
                self.bounds[1] + (je + 0.5) * self.hy,
            ]
        )

    def __repr__(self):
        return f"StructuredMesh(nx={self.nx}, ny={self.ny}, bounds={self.bounds})"
