"""Error norms, superclose norms, rate fitting and stability probes.

Continuous-versus-discrete errors are measured by elementwise tensor Gauss
quadrature of the squared pointwise differences; the divergence of the exact
stress is taken from the load evaluator, which is exact for manufactured
solutions and avoids differentiating the stress.  Discrete-versus-discrete
(superclose) norms are quadratic forms of coefficient differences in the
local Gram matrices, hence carry no quadrature error at all.

The stability probes are dense small-scale measurements: the inf-sup
constant is the square root of the smallest eigenvalue of B S^-1 B^T against
the displacement mass matrix, with S the H(div) Gram of the stress space,
and the kernel ellipticity ratio is the smallest Rayleigh quotient of the
compliance form over the numerical null space of B.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.linalg

from .assembly import (
    assemble,
    assemble_disp_mass,
    assemble_stress_gram,
    build_dof_map,
)
from .element import disp_mass, stress_divdiv_gram, stress_l2_gram
from .grid import TensorGrid
from .interpolate import DisplacementField, StressField
from .manufactured import ExactSolution
from .material import LameParams
from .quadrature import tensor_rule


@dataclass(frozen=True)
class ErrorRecord:
    """Measured norms for one grid level; unset entries are None.

    The H(div) norm satisfies hdiv^2 = l2^2 + div^2 by definition.
    """

    h: float
    stress_dofs: int
    disp_dofs: int
    sigma_l2: float | None = None
    sigma_div: float | None = None
    sigma_hdiv: float | None = None
    u_l2: float | None = None
    super_sigma_l2: float | None = None
    super_sigma_div: float | None = None
    super_sigma_hdiv: float | None = None
    super_u_l2: float | None = None

    def merged(self, other: "ErrorRecord") -> "ErrorRecord":
        """Fill this record's unset fields from another record of the same level."""
        updates = {
            name: getattr(other, name)
            for name in (
                "sigma_l2", "sigma_div", "sigma_hdiv", "u_l2",
                "super_sigma_l2", "super_sigma_div", "super_sigma_hdiv", "super_u_l2",
            )
            if getattr(self, name) is None and getattr(other, name) is not None
        }
        return replace(self, **updates)


def error_norms(
    grid: TensorGrid,
    exact: ExactSolution,
    sigma_h: StressField,
    u_h: DisplacementField,
    npts: int = 5,
) -> ErrorRecord:
    """L2 and H(div) errors of the stress and L2 error of the displacement."""
    if sigma_h.dofs.grid is not grid or u_h.dofs.grid is not grid:
        raise ValueError("fields do not live on the given grid")
    dim = grid.dim
    pts, w = tensor_rule(npts, dim)
    x = grid.element_origins()[:, None, :] + pts[None, :, :] * grid.spacing
    flat = x.reshape(-1, dim)
    vol = grid.element_volume

    sig_diff = exact.sigma(flat).reshape(x.shape[0], -1, dim, dim) - sigma_h.eval_elements(pts)
    sigma_l2_sq = vol * float(np.einsum("eqij,eqij,q->", sig_diff, sig_diff, w))

    div_diff = exact.f(flat).reshape(x.shape) - sigma_h.div_elements(pts)
    sigma_div_sq = vol * float(np.einsum("eqi,eqi,q->", div_diff, div_diff, w))

    u_diff = exact.u(flat).reshape(x.shape) - u_h.eval_elements(pts)
    u_l2_sq = vol * float(np.einsum("eqi,eqi,q->", u_diff, u_diff, w))

    return ErrorRecord(
        h=grid.max_spacing,
        stress_dofs=sigma_h.dofs.n_stress,
        disp_dofs=u_h.dofs.n_disp,
        sigma_l2=np.sqrt(sigma_l2_sq),
        sigma_div=np.sqrt(sigma_div_sq),
        sigma_hdiv=np.sqrt(sigma_l2_sq + sigma_div_sq),
        u_l2=np.sqrt(u_l2_sq),
    )


def superclose_norms(
    sigma_h: StressField,
    pi_sigma: StressField,
    u_h: DisplacementField,
    ph_u: DisplacementField,
) -> ErrorRecord:
    """Distances between discrete fields, exact via local Gram matrices."""
    dofs = sigma_h.dofs
    if pi_sigma.dofs is not dofs or u_h.dofs is not dofs or ph_u.dofs is not dofs:
        raise ValueError("fields do not share a DOF map")
    grid = dofs.grid
    box = grid.element_box(next(iter(grid.elements())))

    d_sigma = (sigma_h.coeffs - pi_sigma.coeffs)[dofs.element_stress]
    l2_sq = float(np.einsum("el,lk,ek->", d_sigma, stress_l2_gram(box), d_sigma))
    div_sq = float(np.einsum("el,lk,ek->", d_sigma, stress_divdiv_gram(box), d_sigma))

    d_u = (u_h.coeffs - ph_u.coeffs)[dofs.element_disp]
    u_sq = float(np.einsum("el,lk,ek->", d_u, disp_mass(box), d_u))

    return ErrorRecord(
        h=grid.max_spacing,
        stress_dofs=dofs.n_stress,
        disp_dofs=dofs.n_disp,
        super_sigma_l2=np.sqrt(l2_sq),
        super_sigma_div=np.sqrt(div_sq),
        super_sigma_hdiv=np.sqrt(l2_sq + div_sq),
        super_u_l2=np.sqrt(u_sq),
    )


def fit_rate(hs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.shape != errors.shape or hs.size < 3:
        raise ValueError("need at least 3 matching (h, error) pairs")
    if (hs <= 0).any() or (errors <= 0).any():
        raise ValueError("h and error values must be positive")
    if (np.diff(hs) >= 0).any():
        raise ValueError("h values must be strictly decreasing")
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)


def _dense_stability_operators(grid: TensorGrid, material: LameParams, max_dofs: int):
    dofs = build_dof_map(grid)
    if dofs.n_total > max_dofs:
        raise ValueError(
            f"probe needs a dense eigensolve; {dofs.n_total} unknowns exceed "
            f"the budget of {max_dofs}"
        )
    system = assemble(grid, material, dofs)
    g_l2, g_div = assemble_stress_gram(grid, dofs)
    hdiv_gram = (g_l2 + g_div).toarray()
    mass_v = assemble_disp_mass(grid, dofs).toarray()
    return system.M.toarray(), system.B.toarray(), hdiv_gram, mass_v


def infsup_probe(grid: TensorGrid, material: LameParams, max_dofs: int = 3000) -> float:
    """Discrete inf-sup constant of the divergence coupling.

    For each displacement v the best stress gives sup_tau (div tau, v) /
    ||tau||_Hdiv = sqrt(v^T B S^-1 B^T v); minimizing over ||v||_0 = 1 is a
    generalized eigenvalue problem against the displacement mass matrix.
    """
    _, b, hdiv_gram, mass_v = _dense_stability_operators(grid, material, max_dofs)
    schur = b @ scipy.linalg.solve(hdiv_gram, b.T, assume_a="pos")
    eigs = scipy.linalg.eigh(0.5 * (schur + schur.T), mass_v, eigvals_only=True)
    return float(np.sqrt(max(eigs[0], 0.0)))


def kernel_basis(b: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the numerical null space of a dense matrix."""
    _, svals, vt = scipy.linalg.svd(b, full_matrices=True)
    tol = svals.max(initial=0.0) * max(b.shape) * np.finfo(float).eps
    rank = int((svals > tol).sum())
    return vt[rank:].T


def kernel_ellipticity_probe(
    grid: TensorGrid, material: LameParams, max_dofs: int = 3000
) -> float:
    """Smallest Rayleigh quotient of the compliance form on the kernel of B.

    On that kernel the divergence vanishes pointwise, so the H(div) norm in
    the denominator coincides with the L2 norm and the ratio is bounded below
    by the smallest eigenvalue of the compliance tensor, 1/(2 mu + n lam).
    """
    m, b, hdiv_gram, _ = _dense_stability_operators(grid, material, max_dofs)
    z = kernel_basis(b)
    if z.shape[1] == 0:
        raise ValueError("divergence operator has no kernel on this grid")
    a_k = z.T @ m @ z
    s_k = z.T @ hdiv_gram @ z
    eigs = scipy.linalg.eigh(0.5 * (a_k + a_k.T), 0.5 * (s_k + s_k.T), eigvals_only=True)
    return float(eigs[0])
