"""Uniform 1D meshes, grid functions with zero exterior extension, and
the restriction of continuous profiles onto mesh nodes.

A mesh is the portion of the uniform lattice {jh : j integer} that falls
in a truncation interval [a, b]; grid functions carry one value per node
and are implicitly zero outside the interval.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Mesh", "GridFunction", "restrict"]


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh {jh} intersected with [a, b].

    a and b must be (floating-point) multiples of h with a < 0 < b;
    nodes are jh for j = j_min..j_max.
    """

    h: float
    a: float
    b: float
    j_min: int = field(init=False)
    j_max: int = field(init=False)

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValueError(f"mesh size must be positive, got {self.h}")
        if not self.a < 0.0 < self.b:
            raise ValueError(f"truncation interval must straddle 0, got [{self.a}, {self.b}]")
        j_min = round(self.a / self.h)
        j_max = round(self.b / self.h)
        for j, end in ((j_min, self.a), (j_max, self.b)):
            if abs(j * self.h - end) > 4.0 * np.spacing(abs(end) + self.h):
                raise ValueError(
                    f"endpoint {end} is not a multiple of h={self.h} (nearest node {j * self.h})"
                )
        object.__setattr__(self, "j_min", j_min)
        object.__setattr__(self, "j_max", j_max)

    @property
    def n_points(self):
        return self.j_max - self.j_min + 1

    @property
    def nodes(self):
        """Node coordinates jh as an array of length n_points."""
        return np.arange(self.j_min, self.j_max + 1) * self.h

    def window_slice(self, c, d):
        """Index slice of the nodes lying in the closed interval [c, d]."""
        x = self.nodes
        idx = np.nonzero((x >= c - 1e-12 * self.h) & (x <= d + 1e-12 * self.h))[0]
        if idx.size == 0:
            raise ValueError(f"window [{c}, {d}] contains no mesh nodes")
        return slice(int(idx[0]), int(idx[-1]) + 1)


@dataclass
class GridFunction:
    """Real values sampled on the nodes of a mesh, zero outside [a, b]."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_points,):
            raise ValueError(
                f"expected {self.mesh.n_points} values, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function values must be finite")

    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def copy(self):
        return GridFunction(self.mesh, self.values.copy())

    def to_csv(self, path_or_buf):
        """Write the grid function as CSV with header ``x,value``.

        One node per row, 17 significant digits (round-trip exact).
        """
        buf = path_or_buf if hasattr(path_or_buf, "write") else open(path_or_buf, "w")
        try:
            buf.write("x,value\n")
            for x, v in zip(self.mesh.nodes, self.values):
                buf.write(f"{x:.17g},{v:.17g}\n")
        finally:
            if buf is not path_or_buf:
                buf.close()

    @staticmethod
    def from_csv(path_or_buf, mesh=None):
        """Read a ``x,value`` CSV back into a GridFunction.

        If mesh is omitted it is reconstructed from the x column
        (assumed uniform and straddling zero).
        """
        buf = path_or_buf if hasattr(path_or_buf, "read") else open(path_or_buf)
        try:
            data = np.loadtxt(buf, delimiter=",", skiprows=1, ndmin=2)
        finally:
            if buf is not path_or_buf:
                buf.close()
        x, v = data[:, 0], data[:, 1]
        if mesh is None:
            h = float(np.median(np.diff(x)))
            mesh = Mesh(h=h, a=float(x[0]), b=float(x[-1]))
        if not np.allclose(mesh.nodes, x, rtol=0.0, atol=1e-9 * mesh.h):
            raise ValueError("CSV nodes do not match the supplied mesh")
        return GridFunction(mesh, v)


def restrict(F, mesh):
    """Sample a continuous profile F onto the mesh nodes.

    This is the pointwise restriction (R_h F)(jh) = F(jh); the sup norm
    of the result never exceeds sup |F|.
    """
    vals = np.array([float(F(x)) for x in mesh.nodes])
    if not np.all(np.isfinite(vals)):
        raise ValueError("profile produced non-finite samples")
    return GridFunction(mesh, vals)
