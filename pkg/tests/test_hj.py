import math
import random

import pytest

from hjgen import hj
from hjgen.errors import DomainError
from hjgen.fields import Status
from hjgen.numerics import SolverConfig, central_difference
from hjgen.verify import finite_diff_partials

CFG = SolverConfig(root_tol=1e-12, resid_tol=1e-12, quad_tol=1e-10, scan_points=16)

FREE = hj.HJProblem("1", "0", "q", sigma=1, x0=0.0)
OSC = hj.HJProblem("1", "x^2", "q^2/2", sigma=1, x0=0.0, eps_adm=1e-3)
OSC_G0 = hj.HJProblem("1", "x^2", "0", sigma=1, x0=0.0)


def axis(lo, hi, n):
    return [hi if i == n - 1 else lo + (hi - lo) * i / (n - 1) for i in range(n)]


def test_problem_validation():
    with pytest.raises(ValueError):
        hj.HJProblem("1", "0", "q", sigma=2)
    with pytest.raises(ValueError):
        hj.HJProblem("1", "0", "q", eps_adm=0.0)


def test_momentum_values():
    assert hj.momentum(FREE, 0.3, 4.0) == pytest.approx(2.0, abs=1e-15)
    osc = hj.HJProblem("1", "x^2", "0", sigma=1)
    assert hj.momentum(osc, 1.0, 4.0) == pytest.approx(math.sqrt(3.0), abs=1e-15)
    neg = hj.HJProblem("1", "0", "q", sigma=-1)
    assert hj.momentum(neg, 0.3, 4.0) == pytest.approx(-2.0, abs=1e-15)


def test_momentum_admissibility():
    with pytest.raises(DomainError):
        hj.momentum(OSC_G0, 1.0, 1.0 - 1e-12)  # q - V below the margin
    bad_a = hj.HJProblem("x", "0", "q", sigma=1)  # kinetic coefficient 0 at x=0
    with pytest.raises(DomainError):
        hj.momentum(bad_a, 0.0, 4.0)


def test_momentum_partials_flat_potential():
    dp_dx, dp_dq = hj.momentum_partials(FREE, 17.3, 4.0)
    assert dp_dx == 0.0
    assert dp_dq == pytest.approx(0.25, abs=1e-15)


def test_momentum_partials_oscillator_against_finite_differences():
    dp_dx, dp_dq = hj.momentum_partials(OSC_G0, 1.0, 4.0)
    assert dp_dx == pytest.approx(-1.0 / math.sqrt(3.0), abs=1e-12)
    assert dp_dq == pytest.approx(1.0 / (2.0 * math.sqrt(3.0)), abs=1e-12)
    fd_x = central_difference(lambda s: hj.momentum(OSC_G0, s, 4.0), 1.0, 1e-6)
    fd_q = central_difference(lambda v: hj.momentum(OSC_G0, 1.0, v), 4.0, 1e-6)
    assert dp_dx == pytest.approx(fd_x, abs=1e-8)
    assert dp_dq == pytest.approx(fd_q, abs=1e-8)


def test_momentum_partials_odd_in_branch_sign():
    pos = hj.HJProblem("1", "x^2", "0", sigma=1)
    neg = hj.HJProblem("1", "x^2", "0", sigma=-1)
    pp = hj.momentum_partials(pos, 1.0, 4.0)
    pn = hj.momentum_partials(neg, 1.0, 4.0)
    assert pn[0] == -pp[0] and pn[1] == -pp[1]
    assert hj.momentum(neg, 1.0, 4.0) == -hj.momentum(pos, 1.0, 4.0)


def test_correction_integrand():
    assert hj.correction_integrand(FREE, 1.7, 4.0) == 0.0  # flat potential
    assert hj.correction_integrand(OSC_G0, 1.0, 4.0) == pytest.approx(
        -1.0 / math.sqrt(3.0), abs=1e-12
    )
    assert hj.correction_integrand(OSC_G0, 0.0, 4.0) == 0.0  # x factor


def test_correction_term_free_particle_is_generator_exactly():
    # flat potential: the integrand is identically zero, so no quadrature
    # error at all is tolerated
    for x, q in ((0.5, 1.0), (2.0, 3.7), (1.3, 9.0)):
        assert hj.correction_term(FREE, x, q, CFG) == q


def test_correction_term_oscillator_closed_form():
    # antiderivative (x/2) sqrt(q - x^2) - (q/2) asin(x / sqrt(q))
    got = hj.correction_term(OSC_G0, 1.0, 4.0, CFG)
    exact = 0.5 * math.sqrt(3.0) - 2.0 * math.asin(0.5)
    assert got == pytest.approx(exact, abs=1e-9)
    assert exact == pytest.approx(-0.18117214741215896, abs=1e-15)


def test_correction_term_at_base_point():
    assert hj.correction_term(OSC, 0.0, 4.0, CFG) == 8.0  # empty integral leaves G


def test_constraint_free_particle_closed_root():
    # G = C q with C = 1: the root law is q = x^2 / (4 a (C - t)^2)
    assert hj.constraint(FREE, 2.0, 0.0, 1.0, CFG) == pytest.approx(0.0, abs=1e-12)


def test_constraint_oscillator_root_relation():
    # with G = q^2/2 the root obeys q = t + asin(x / sqrt(q)) / 2
    q, status = hj.solve_point(OSC, 1.0, 0.5, 0.05, 6.0, CFG)
    assert status is Status.RESOLVED
    # scalar iteration oracle for the same fixed point
    ref = 1.2
    for _ in range(500):
        ref = 0.5 + 0.5 * math.asin(1.0 / math.sqrt(ref))
    assert q == pytest.approx(ref, abs=1e-9)


def test_constraint_at_base_point_is_time_independent_of_x():
    g1 = hj.constraint(FREE, 0.0, 0.3, 2.0, CFG)
    assert g1 == pytest.approx(1.0 - 0.3, abs=1e-15)  # G'(q) - t


def test_solve_point_free_particle_values():
    q, status = hj.solve_point(FREE, 2.0, 0.0, 0.01, 20.0, CFG)
    assert status is Status.RESOLVED and q == pytest.approx(1.0, abs=1e-10)
    q, status = hj.solve_point(FREE, 1.0, 0.5, 0.01, 20.0, CFG)
    assert status is Status.RESOLVED and q == pytest.approx(1.0, abs=1e-10)


def test_solve_point_validates_range():
    with pytest.raises(ValueError):
        hj.solve_point(FREE, 1.0, 0.0, 5.0, 5.0, CFG)


def test_solve_point_degenerate_at_origin():
    # at x = x0 = 0 the free-particle condition loses its q dependence
    q, status = hj.solve_point(FREE, 0.0, 0.3, 0.01, 20.0, CFG)
    assert q is None and status is Status.NO_ROOT
    q, status = hj.solve_point(FREE, 0.0, 1.0, 0.01, 20.0, CFG, warm=7.0)
    assert status is Status.MULTI_ROOT and q == 7.0


def test_action_value_free_particle():
    assert hj.action_value(FREE, 2.0, 0.0, 1.0, CFG) == pytest.approx(1.0, abs=1e-12)
    assert hj.action_value(FREE, 1.0, 0.5, 1.0, CFG) == pytest.approx(0.5, abs=1e-12)


def test_action_value_oscillator_closed_form():
    # (x/2) sqrt(q-x^2) + (q/2) asin(x/sqrt(q)) + q t at q=4, x=1
    base = 0.5 * math.sqrt(3.0) + 2.0 * math.asin(0.5)
    assert base == pytest.approx(1.9132229549810362, abs=1e-14)
    for t in (0.0, 0.3):
        got = hj.action_value(OSC_G0, 1.0, t, 4.0, CFG)
        assert got == pytest.approx(base + 4.0 * t, abs=1e-9)


def test_separation_action_values():
    assert hj.separation_action(FREE, 1.0, 2.0, 3.0, CFG) == pytest.approx(5.0, abs=1e-12)
    got = hj.separation_action(OSC_G0, 1.0, 0.5, 0.0, CFG)
    exact = 0.25 * math.sqrt(0.75) + 0.5 * math.asin(0.5)
    assert exact == pytest.approx(0.47830573874525905, abs=1e-15)
    assert got == pytest.approx(exact, abs=1e-9)
    assert hj.separation_action(OSC_G0, 1.0, 0.0, 0.0, CFG) == 0.0


def test_separation_action_admissibility():
    with pytest.raises(DomainError):
        hj.separation_action(OSC_G0, 0.5, 0.9, 0.0, CFG)  # E - V < 0 on the path


def test_solve_grid_free_particle_matches_closed_form():
    field = hj.solve_grid(FREE, axis(0.5, 2.0, 13), axis(0.0, 0.5, 11), (0.01, 20.0), CFG)
    assert field.resolved_fraction() == 1.0
    for i, x in enumerate(field.axis1):
        for j, t in enumerate(field.axis2):
            assert field.value[i][j] == pytest.approx(
                x * x / (4.0 * (1.0 - t)), abs=1e-10
            )
            assert field.q[i][j] == pytest.approx(
                x * x / (4.0 * (1.0 - t) ** 2), abs=1e-10
            )
            assert field.p[i][j] == hj.momentum(FREE, x, field.q[i][j])


def test_solve_grid_momentum_consistency():
    field = hj.solve_grid(OSC, axis(0.15, 0.45, 21), axis(0.2, 0.5, 21), (0.05, 6.0), CFG)
    assert field.resolved_fraction() == 1.0
    for i in range(1, 20):
        for j in range(1, 20):
            ds = finite_diff_partials(field, i, j)
            assert abs(ds[0] - field.p[i][j]) < 2e-4
            assert abs(ds[1] - field.q[i][j]) < 2e-4


def test_solve_grid_all_domain_fail_below_potential():
    field = hj.solve_grid(OSC_G0, axis(0.5, 0.9, 5), axis(0.0, 0.4, 5), (0.01, 0.2), CFG)
    assert all(s is Status.DOMAIN_FAIL for row in field.status for s in row)


def test_constraint_direct_form_matches_simplified():
    rng = random.Random(3)
    for _ in range(25):
        x = rng.uniform(0.1, 0.9)
        t = rng.uniform(0.0, 0.4)
        q = rng.uniform(1.5, 6.0)
        g1 = hj.constraint(OSC_G0, x, t, q, CFG)
        g2 = hj.constraint(OSC_G0, x, t, q, CFG, direct=True)
        assert abs(g1 - g2) <= 10.0 * CFG.quad_tol


def test_constraint_is_negative_q_derivative_of_action():
    rng = random.Random(11)
    tight = SolverConfig(root_tol=1e-12, resid_tol=1e-12, quad_tol=1e-13, scan_points=16)
    for _ in range(40):
        x = rng.uniform(0.1, 0.9)
        t = rng.uniform(0.0, 0.4)
        q = rng.uniform(1.5, 6.0)
        g = hj.constraint(OSC_G0, x, t, q, tight)
        h = 1e-6 * (1.0 + abs(q))
        fd = central_difference(
            lambda v: hj.action_value(OSC_G0, x, t, v, tight), q, h
        )
        assert abs(g - (-fd)) <= 1e-6 * (1.0 + abs(g))


def test_generator_shift_gauge():
    shifted = hj.HJProblem("1", "x^2", "q^2/2 + 5", sigma=1, x0=0.0, eps_adm=1e-3)
    grid = (axis(0.15, 0.45, 9), axis(0.2, 0.5, 9))
    f1 = hj.solve_grid(OSC, grid[0], grid[1], (0.05, 6.0), CFG)
    f2 = hj.solve_grid(shifted, grid[0], grid[1], (0.05, 6.0), CFG)
    for i in range(9):
        for j in range(9):
            assert f2.q[i][j] == f1.q[i][j]
            assert f2.value[i][j] == pytest.approx(f1.value[i][j] - 5.0, abs=1e-12)


def test_base_point_choice_changes_member_not_validity():
    # different x0 values give different family members; both satisfy the
    # equation, checked through the momentum consistency identity
    for x0 in (0.0, 0.3):
        prob = hj.HJProblem("1", "x^2", "q^2/2", sigma=1, x0=x0, eps_adm=1e-3)
        field = hj.solve_grid(prob, axis(0.15, 0.45, 15), axis(0.2, 0.5, 15), (0.05, 6.0), CFG)
        assert field.resolved_fraction() == 1.0
        for i in range(1, 14):
            for j in range(1, 14):
                ds = finite_diff_partials(field, i, j)
                assert abs(ds[0] - field.p[i][j]) < 1e-3
                assert abs(ds[1] - field.q[i][j]) < 1e-3
    f0 = hj.solve_grid(
        hj.HJProblem("1", "x^2", "q^2/2", sigma=1, x0=0.0, eps_adm=1e-3),
        axis(0.15, 0.45, 5), axis(0.2, 0.5, 5), (0.05, 6.0), CFG,
    )
    f3 = hj.solve_grid(
        hj.HJProblem("1", "x^2", "q^2/2", sigma=1, x0=0.3, eps_adm=1e-3),
        axis(0.15, 0.45, 5), axis(0.2, 0.5, 5), (0.05, 6.0), CFG,
    )
    assert any(
        f0.value[i][j] != pytest.approx(f3.value[i][j], abs=1e-6)
        for i in range(5)
        for j in range(5)
    )


def test_solve_grid_threaded_bitwise_identical():
    serial = hj.solve_grid(FREE, axis(0.5, 2.0, 9), axis(0.0, 0.5, 9), (0.01, 20.0), CFG)
    threaded = hj.solve_grid(
        FREE, axis(0.5, 2.0, 9), axis(0.0, 0.5, 9), (0.01, 20.0), CFG, threads=3
    )
    assert serial.q == threaded.q
    assert serial.value == threaded.value
    assert serial.p == threaded.p
    assert serial.status == threaded.status
