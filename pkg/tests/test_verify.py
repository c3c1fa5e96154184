import numpy as np
import pytest

from elastmix.assembly import (
    assemble_disp_mass,
    assemble_stress_gram,
    build_dof_map,
)
from elastmix.grid import unit_grid
from elastmix.interpolate import (
    DisplacementField,
    StressField,
    project_displacement,
)
from elastmix.manufactured import sine_solution
from elastmix.material import LameParams
from elastmix.verify import (
    error_norms,
    fit_rate,
    infsup_probe,
    kernel_ellipticity_probe,
    superclose_norms,
)

MAT = LameParams(mu=0.5, lam=1.0)


def test_fit_rate_pure_power_laws():
    hs = [0.25, 0.125, 0.0625, 0.03125]
    assert fit_rate(hs, [3.0 * h for h in hs]) == pytest.approx(1.0, abs=1e-12)
    assert fit_rate(hs, [0.7 * h**1.5 for h in hs]) == pytest.approx(1.5, abs=1e-12)


def test_fit_rate_with_multiplicative_noise():
    hs = np.array([0.25, 0.125, 0.0625, 0.03125])
    for seed in range(20):
        rng = np.random.default_rng(seed)
        noise = 1.0 + 0.05 * rng.uniform(-1.0, 1.0, size=hs.size)
        rate = fit_rate(hs, 2.0 * hs**1.5 * noise)
        assert 1.35 <= rate <= 1.65


def test_fit_rate_validation():
    with pytest.raises(ValueError):
        fit_rate([0.5, 0.25], [1.0, 0.5])
    with pytest.raises(ValueError):
        fit_rate([0.5, 0.25, 0.125], [1.0, -0.5, 0.25])
    with pytest.raises(ValueError):
        fit_rate([0.25, 0.5, 0.125], [1.0, 0.5, 0.25])
    with pytest.raises(ValueError):
        fit_rate([0.5, 0.25, 0.0], [1.0, 0.5, 0.25])


def _solved_level(n=4):
    from elastmix.assembly import assemble, assemble_load
    from elastmix.solver import solve

    grid = unit_grid(2, n)
    dofs = build_dof_map(grid)
    exact = sine_solution(2, MAT)
    system = assemble(grid, MAT, dofs)
    load = assemble_load(grid, exact.f, dofs)
    sigma_h, u_h, _ = solve(system, load)
    return grid, dofs, exact, sigma_h, u_h


def test_hdiv_norm_pythagoras():
    grid, dofs, exact, sigma_h, u_h = _solved_level()
    rec = error_norms(grid, exact, sigma_h, u_h)
    assert rec.sigma_hdiv**2 == pytest.approx(
        rec.sigma_l2**2 + rec.sigma_div**2, rel=1e-13
    )


def test_error_norms_of_projection():
    # one element, u_1 = x1^2: distance to its linear projection is
    # sqrt(integral of (x^2 - x + 1/6)^2) = sqrt(1/180)
    grid = unit_grid(2, 1)
    dofs = build_dof_map(grid)
    exact = sine_solution(2, MAT)

    def u(x):
        x = np.atleast_2d(x)
        out = np.zeros_like(x)
        out[:, 0] = x[:, 0] ** 2
        return out

    fake_exact = type(exact)(
        name="quadratic", dim=2, material=MAT, u=u, grad_u=exact.grad_u, f=exact.f
    )
    ph_u = project_displacement(grid, dofs, u)
    rec = error_norms(grid, fake_exact, StressField(dofs, np.zeros(dofs.n_stress)), ph_u)
    assert rec.u_l2 == pytest.approx(np.sqrt(1.0 / 180.0), rel=1e-12)


def test_error_norms_zero_fields_give_exact_norms():
    # with zero discrete fields the errors are the norms of the exact
    # solution; for mu = 1/2, lam = 0 these have closed forms
    material = LameParams(mu=0.5, lam=0.0)
    grid = unit_grid(2, 4)
    dofs = build_dof_map(grid)
    exact = sine_solution(2, material)
    rec = error_norms(
        grid,
        exact,
        StressField(dofs, np.zeros(dofs.n_stress)),
        DisplacementField(dofs, np.zeros(dofs.n_disp)),
    )
    assert rec.u_l2 == pytest.approx(np.sqrt(0.5), rel=1e-9)
    assert rec.sigma_l2 == pytest.approx(np.pi * np.sqrt(3.0) / 2.0, rel=1e-9)
    assert rec.sigma_div == pytest.approx(np.pi**2 * np.sqrt(5.0) / 2.0, rel=1e-9)


def test_superclose_unit_volume_coefficient():
    # a unit coefficient on one diagonal volume DOF has L2 norm
    # sqrt(int (6 xi - 6 xi^2)^2) = sqrt(6/5) on the unit element
    grid = unit_grid(2, 1)
    dofs = build_dof_map(grid)
    base = np.zeros(dofs.n_stress)
    bumped = base.copy()
    bumped[dofs.diag_volume_index(0, (0, 0))] = 1.0
    zeros_u = DisplacementField(dofs, np.zeros(dofs.n_disp))
    rec = superclose_norms(
        StressField(dofs, bumped), StressField(dofs, base), zeros_u, zeros_u
    )
    assert rec.super_sigma_l2 == pytest.approx(np.sqrt(6.0 / 5.0), rel=1e-14)


def test_superclose_matches_global_gram_matvec():
    grid = unit_grid(2, 3)
    dofs = build_dof_map(grid)
    rng = np.random.default_rng(44)
    a = rng.standard_normal(dofs.n_stress)
    b = rng.standard_normal(dofs.n_stress)
    ua = rng.standard_normal(dofs.n_disp)
    ub = rng.standard_normal(dofs.n_disp)
    rec = superclose_norms(
        StressField(dofs, a),
        StressField(dofs, b),
        DisplacementField(dofs, ua),
        DisplacementField(dofs, ub),
    )
    g_l2, g_div = assemble_stress_gram(grid, dofs)
    mass = assemble_disp_mass(grid, dofs)
    d, du = a - b, ua - ub
    assert rec.super_sigma_l2**2 == pytest.approx(d @ (g_l2 @ d), rel=1e-12)
    assert rec.super_sigma_hdiv**2 == pytest.approx(
        d @ ((g_l2 + g_div) @ d), rel=1e-12
    )
    assert rec.super_u_l2**2 == pytest.approx(du @ (mass @ du), rel=1e-12)


def test_superclose_identical_fields_zero():
    grid = unit_grid(2, 2)
    dofs = build_dof_map(grid)
    s = StressField(dofs, np.random.default_rng(9).standard_normal(dofs.n_stress))
    u = DisplacementField(dofs, np.zeros(dofs.n_disp))
    rec = superclose_norms(s, s, u, u)
    assert rec.super_sigma_hdiv == 0.0
    assert rec.super_u_l2 == 0.0


def test_mismatched_maps_rejected():
    grid_a = unit_grid(2, 2)
    grid_b = unit_grid(2, 3)
    dofs_a = build_dof_map(grid_a)
    dofs_b = build_dof_map(grid_b)
    exact = sine_solution(2, MAT)
    sig_b = StressField(dofs_b, np.zeros(dofs_b.n_stress))
    u_b = DisplacementField(dofs_b, np.zeros(dofs_b.n_disp))
    with pytest.raises(ValueError):
        error_norms(grid_a, exact, sig_b, u_b)
    sig_a = StressField(dofs_a, np.zeros(dofs_a.n_stress))
    u_a = DisplacementField(dofs_a, np.zeros(dofs_a.n_disp))
    with pytest.raises(ValueError):
        superclose_norms(sig_a, sig_b, u_a, u_b)


def test_infsup_probe_positive_and_mesh_stable():
    betas = [infsup_probe(unit_grid(2, n), MAT) for n in (2, 4)]
    assert all(b > 0 for b in betas)
    assert betas[1] > 0.9 * betas[0]


def test_kernel_ellipticity_bounded_below():
    alpha = kernel_ellipticity_probe(unit_grid(2, 2), MAT)
    assert alpha >= MAT.compliance_floor(2) - 1e-10


def test_probe_budget_enforced():
    with pytest.raises(ValueError, match="budget"):
        infsup_probe(unit_grid(2, 32), MAT, max_dofs=3000)
    with pytest.raises(ValueError, match="budget"):
        kernel_ellipticity_probe(unit_grid(2, 32), MAT, max_dofs=100)


def test_superclose_rate_exceeds_plain_rate():
    from elastmix.study import run_level

    hs, plain, close = [], [], []
    for n in (4, 8, 16):
        level, _ = run_level(unit_grid(2, n), MAT, "sine")
        hs.append(level.record.h)
        plain.append(level.record.sigma_hdiv)
        close.append(level.record.super_sigma_hdiv)
    assert fit_rate(hs, close) >= fit_rate(hs, plain) + 0.35
