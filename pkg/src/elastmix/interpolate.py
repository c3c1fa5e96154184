"""Global stress interpolation and elementwise displacement projection.

The stress interpolant of a smooth symmetric field matches, per diagonal
component, its averages over every (n-1)-face perpendicular to that
component's axis and over every element, and, per off-diagonal pair, its
averages over every (n-2)-face perpendicular to that pair of axes.  In 2D
those subfaces are points and the average degenerates to the vertex value.
Because every functional is attached to a single global entity the result is
conforming by construction.

The displacement projection is the elementwise L2-best approximation with
component i in span{1, x_i}; only the right-hand moments need quadrature,
the 2x2 Gram of {1, xi} per unit volume is [[1, 1/2], [1/2, 1/3]] exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .assembly import DofMap
from .element import eval_disp_basis, eval_stress_basis, eval_stress_basis_div
from .grid import TensorGrid, multi_index_array
from .quadrature import tensor_rule

# Inverse of the unit-volume Gram [[1, 1/2], [1/2, 1/3]] of {1, xi}.
_MOMENT_SOLVE = np.array([[4.0, -6.0], [-6.0, 12.0]])


@dataclass(frozen=True)
class StressField:
    """Coefficient vector over the global stress unknowns of a DOF map."""

    dofs: DofMap
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.dofs.n_stress,):
            raise ValueError(
                f"expected {self.dofs.n_stress} stress coefficients, got {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def eval_elements(self, xi: np.ndarray) -> np.ndarray:
        """Tensor values at reference points on every element, (ne, m, dim, dim)."""
        basis = eval_stress_basis(self.dofs.grid.dim, xi)
        local = self.coeffs[self.dofs.element_stress]
        return np.einsum("el,lmij->emij", local, basis)

    def div_elements(self, xi: np.ndarray) -> np.ndarray:
        """Divergence at reference points on every element, (ne, m, dim)."""
        grid = self.dofs.grid
        div = eval_stress_basis_div(grid.dim, xi, grid.spacing)
        local = self.coeffs[self.dofs.element_stress]
        return np.einsum("el,lmi->emi", local, div)

    def eval_on_element(self, elem_multi, xi: np.ndarray) -> np.ndarray:
        """Tensor values at reference points on one element, (m, dim, dim)."""
        grid = self.dofs.grid
        basis = eval_stress_basis(grid.dim, xi)
        local = self.coeffs[self.dofs.element_stress[grid.element_flat(elem_multi)]]
        return np.einsum("l,lmij->mij", local, basis)


@dataclass(frozen=True)
class DisplacementField:
    """Coefficient vector over the global displacement unknowns of a DOF map."""

    dofs: DofMap
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.dofs.n_disp,):
            raise ValueError(
                f"expected {self.dofs.n_disp} displacement coefficients, got {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def eval_elements(self, xi: np.ndarray) -> np.ndarray:
        """Vector values at reference points on every element, (ne, m, dim)."""
        basis = eval_disp_basis(self.dofs.grid.dim, xi)
        local = self.coeffs[self.dofs.element_disp]
        return np.einsum("el,lmi->emi", local, basis)

    def eval_on_element(self, elem_multi, xi: np.ndarray) -> np.ndarray:
        grid = self.dofs.grid
        basis = eval_disp_basis(grid.dim, xi)
        local = self.coeffs[self.dofs.element_disp[grid.element_flat(elem_multi)]]
        return np.einsum("l,lmi->mi", local, basis)


def interp_stress(
    grid: TensorGrid,
    dofs: DofMap,
    sigma: Callable[[np.ndarray], np.ndarray],
    npts: int = 5,
) -> StressField:
    """Interpolate a smooth symmetric-tensor field into the stress space.

    ``sigma`` maps points of shape (m, dim) to tensors of shape (m, dim, dim)
    with continuous entries; in 2D the off-diagonal functionals are vertex
    point values, so continuity is required, not just integrability.
    """
    dim = grid.dim
    h = grid.spacing
    coeffs = np.zeros(dofs.n_stress)

    for i in range(dim):
        free = [k for k in range(dim) if k != i]
        pts, w = tensor_rule(npts, dim - 1)
        multis = multi_index_array(grid.face_dims(i))
        x = np.empty((multis.shape[0], pts.shape[0], dim))
        x[:, :, free] = (
            grid.lo[free]
            + multis[:, None, free] * h[free]
            + pts[None, :, :] * h[free]
        )
        x[:, :, i] = (grid.lo[i] + multis[:, i] * h[i])[:, None]
        vals = sigma(x.reshape(-1, dim)).reshape(x.shape[0], x.shape[1], dim, dim)
        start = dofs.diag_face_offsets[i]
        coeffs[start : start + multis.shape[0]] = vals[:, :, i, i] @ w

    pts, w = tensor_rule(npts, dim)
    x = grid.element_origins()[:, None, :] + pts[None, :, :] * h
    vals = sigma(x.reshape(-1, dim)).reshape(x.shape[0], x.shape[1], dim, dim)
    for i in range(dim):
        start = dofs.diag_volume_offsets[i]
        coeffs[start : start + grid.n_elements] = vals[:, :, i, i] @ w

    for i, j in grid.axis_pairs():
        free = [k for k in range(dim) if k not in (i, j)]
        pts, w = tensor_rule(npts, dim - 2)
        multis = multi_index_array(grid.subface_dims(i, j))
        x = np.empty((multis.shape[0], pts.shape[0], dim))
        if free:
            x[:, :, free] = (
                grid.lo[free]
                + multis[:, None, free] * h[free]
                + pts[None, :, :] * h[free]
            )
        x[:, :, i] = (grid.lo[i] + multis[:, i] * h[i])[:, None]
        x[:, :, j] = (grid.lo[j] + multis[:, j] * h[j])[:, None]
        vals = sigma(x.reshape(-1, dim)).reshape(x.shape[0], x.shape[1], dim, dim)
        start = dofs.shear_offsets[(i, j)]
        coeffs[start : start + multis.shape[0]] = vals[:, :, i, j] @ w

    return StressField(dofs, coeffs)


def project_displacement(
    grid: TensorGrid,
    dofs: DofMap,
    u: Callable[[np.ndarray], np.ndarray],
    npts: int = 5,
) -> DisplacementField:
    """Elementwise L2 projection of a vector field onto the displacement space."""
    dim = grid.dim
    pts, w = tensor_rule(npts, dim)
    x = grid.element_origins()[:, None, :] + pts[None, :, :] * grid.spacing
    vals = np.asarray(u(x.reshape(-1, dim))).reshape(x.shape)

    vol = grid.element_volume
    m0 = vol * np.einsum("eqi,q->ei", vals, w)
    m1 = vol * np.einsum("eqi,qi,q->ei", vals, pts, w)

    coeffs = np.zeros(dofs.n_disp)
    local = np.empty((grid.n_elements, 2 * dim))
    local[:, 0::2] = (_MOMENT_SOLVE[0, 0] * m0 + _MOMENT_SOLVE[0, 1] * m1) / vol
    local[:, 1::2] = (_MOMENT_SOLVE[1, 0] * m0 + _MOMENT_SOLVE[1, 1] * m1) / vol
    coeffs[dofs.element_disp] = local
    return DisplacementField(dofs, coeffs)
