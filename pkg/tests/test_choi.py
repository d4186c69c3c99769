import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metradeoff.choi import (
    ChiVector,
    ChoiOperator,
    apply_RF,
    apply_RG,
    bell_pair_vector,
    build_RF,
    build_RG,
    chi_to_kraus,
    choi_from_chi,
    maxent_operator,
    mc_RF,
    mc_RG,
    optimize,
    rg_from_rf,
    verify_tp,
)
from metradeoff.fidelity import closed_form_F, closed_form_G, gf_residual
from metradeoff.haar import SeededStream
from metradeoff.instrument import b_from_a, optimal_kraus
from metradeoff.linalg import max_eig_herm, partial_trace, vectorize

from conftest import random_matrix


def choi_of_kraus(A):
    v = vectorize(A)
    return np.outer(v, v.conj())


@pytest.mark.parametrize("d", [2, 3, 4])
def test_RF_RG_trace_positive(d):
    for R in (build_RF(d), build_RG(d)):
        assert R.trace() == pytest.approx(1.0, abs=1e-12)
        assert R.min_eig() >= -1e-10


@pytest.mark.parametrize("d", [2, 3])
def test_identity_and_random_guess(d):
    # |chi> = |I>>_13|I>>_24 already has norm^2 = d^2 = Tr R0
    chi = ChiVector(0.0, 1.0, d)
    v = chi.vector()
    assert chi.norm2 == d**2
    assert np.vdot(v, build_RF(d).matrix @ v).real == pytest.approx(1.0)
    assert np.vdot(v, build_RG(d).matrix @ v).real == pytest.approx(1 / d**2)


def test_max_eigenvalues_d2():
    d = 2
    lam, v = max_eig_herm(build_RF(d).matrix)
    assert lam == pytest.approx(1 / d**2, abs=1e-14)
    chi = bell_pair_vector(d, (1, 3), (2, 4)) / d
    assert abs(abs(np.vdot(chi, v)) - 1) < 1e-12
    lam, _ = max_eig_herm(build_RG(d).matrix)
    assert lam == pytest.approx(2 / d**4, abs=1e-14)


def test_rg_intermediate_identity():
    for d in (2, 3):
        assert np.max(np.abs(rg_from_rf(build_RF(d)) - build_RG(d).matrix)) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 5])
def test_matrix_free_operators(d, rng):
    v = rng.standard_normal(d**4) + 1j * rng.standard_normal(d**4)
    if d <= 3:
        assert np.allclose(apply_RF(v, d), build_RF(d).matrix @ v, atol=1e-15)
        assert np.allclose(apply_RG(v, d), build_RG(d).matrix @ v, atol=1e-15)
    else:
        # d=5: compare against the dense terms built directly
        RF = (np.eye(d**4) + maxent_operator(d, [(1, 3), (2, 4)])
              - (maxent_operator(d, [(1, 3)]) + maxent_operator(d, [(2, 4)])) / d) / (d * d * (d * d - 1))
        assert np.allclose(apply_RF(v, d), RF @ v, atol=1e-14)


def test_subspace_overlap_exact():
    for d in (2, 3, 4):
        c1 = bell_pair_vector(d, (1, 2), (3, 4))
        c2 = bell_pair_vector(d, (1, 3), (2, 4))
        assert np.vdot(c1, c2) == d
        assert np.vdot(c1, c1) == d * d
        chi = ChiVector(0.3, 0.7, d)
        assert np.vdot(chi.vector(), chi.vector()).real == pytest.approx(chi.norm2)


def test_chi_vector_is_choi_of_kraus():
    d = 3
    x, y = 0.4, 0.9
    A = x * np.outer(vectorize(np.eye(d)), vectorize(np.eye(d))) + y * np.eye(d * d)
    assert np.allclose(ChiVector(x, y, d).vector(), vectorize(A))


@pytest.mark.slow
def test_RF_monte_carlo():
    mean, err = mc_RF(2, 100_000, SeededStream(21))
    assert np.max(np.abs(mean - build_RF(2).matrix)) <= 3 * err.max()


@pytest.mark.slow
def test_RG_monte_carlo():
    mean, err = mc_RG(2, 100_000, SeededStream(22))
    assert np.max(np.abs(mean - build_RG(2).matrix)) <= 3 * err.max()


def test_optimize_endpoints():
    for d in (2, 3):
        opt = optimize(0.0, d)
        assert opt.point.a == pytest.approx(0, abs=1e-12)
        assert opt.point.F == pytest.approx(1, abs=1e-12)
        assert opt.point.G == pytest.approx(1 / d**2, abs=1e-12)
        assert opt.chi.x == 0 and opt.chi.y > 0
        assert opt.residual < 1e-10
    opt = optimize(1.0, 2)
    assert opt.point.F == pytest.approx(0.5, abs=1e-12)
    assert opt.point.G == pytest.approx(0.5, abs=1e-12)
    assert opt.point.a == pytest.approx(1, abs=1e-12)
    assert opt.degenerate


@pytest.mark.parametrize("d", [2, 3, 4])
def test_optimize_on_curve(d):
    for p in np.linspace(0, 1, 11):
        opt = optimize(float(p), d)
        assert opt.residual < 1e-8
        assert abs(gf_residual(opt.point.F, opt.point.G, d)) < 1e-8
        assert opt.chi.x >= 0 and opt.chi.y >= 0


def test_optimize_matrix_free_large_d():
    for p in (0.0, 0.5, 0.95, 1.0):
        opt = optimize(p, 8)
        assert opt.residual < 1e-8
        assert abs(gf_residual(opt.point.F, opt.point.G, 8)) < 1e-8


def test_optimize_dense_and_reduced_agree():
    for p in (0.2, 0.8):
        a = optimize(p, 3, dense=True)
        b = optimize(p, 3, dense=False)
        assert a.point.F == pytest.approx(b.point.F, abs=1e-12)
        assert a.eigenvalue == pytest.approx(b.eigenvalue, abs=1e-12)


def test_optimize_rejects_p():
    with pytest.raises(ValueError):
        optimize(1.5, 2)


def test_chi_to_kraus_limits():
    for d in (2, 3):
        A, a, b = chi_to_kraus(ChiVector(0.0, 1.0, d))
        assert (a, b) == (0.0, 1.0)
        assert np.allclose(A, np.eye(d * d))
    A, a, b = chi_to_kraus(ChiVector(1.0, 0.0, 2))
    assert (a, b) == (1.0, 0.0)
    phi = vectorize(np.eye(2))
    assert np.allclose(A, np.outer(phi, phi))
    with pytest.raises(ValueError):
        chi_to_kraus(ChiVector(0.0, 0.0, 2))


@given(st.floats(0.01, 5), st.floats(0, 5), st.integers(2, 4))
def test_chi_to_kraus_normalization(x, y, d):
    _, a, b = chi_to_kraus(ChiVector(x, y, d))
    assert abs((a * a + b * b) * d * d + 2 * a * b * d - d * d) < 1e-12 * d * d


def test_chi_pairing_matches_closed_form():
    d = 2
    opt = optimize(0.5, d)
    chi = opt.chi
    v = chi.vector()
    scale = d**2 / chi.norm2
    _, a, _ = chi_to_kraus(chi)
    assert closed_form_F(a, d) == pytest.approx(np.vdot(v, build_RF(d).matrix @ v).real * scale, abs=1e-10)
    assert closed_form_G(a, d) == pytest.approx(np.vdot(v, build_RG(d).matrix @ v).real * scale, abs=1e-10)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_choi_pairing_along_family(d):
    RF, RG = build_RF(d).matrix, build_RG(d).matrix
    for a in np.linspace(0, 1, 11):
        a = float(a)
        R0 = choi_of_kraus(optimal_kraus(a, b_from_a(a, d), np.eye(d)))
        assert np.trace(RF @ R0).real == pytest.approx(closed_form_F(a, d), abs=1e-10)
        assert np.trace(RG @ R0).real == pytest.approx(closed_form_G(a, d), abs=1e-10)


def test_verify_tp_on_optimizer_output():
    for p in (0.0, 0.5, 1.0):
        R0 = choi_from_chi(optimize(p, 2).chi)
        rep = verify_tp(R0, n=2000, stream=SeededStream(1))
        assert rep.tp_error < 1e-9 and rep.trace_error < 1e-9 and rep.min_eig > -1e-9
        assert rep.mc_ok and rep.ok()


def test_verify_tp_random_chi(rng):
    for _ in range(10):
        x, y = rng.uniform(0, 2, size=2)
        d = int(rng.integers(2, 4))
        rep = verify_tp(choi_from_chi(ChiVector(x, y, d)), n=None)
        assert rep.tp_error < 1e-9 and rep.trace_error < 1e-9


def test_verify_tp_flags_scaled_operator():
    d = 2
    R0 = choi_from_chi(optimize(0.3, d).chi)
    rep = verify_tp(ChoiOperator(2 * R0.matrix, d), n=2000, stream=SeededStream(2))
    assert rep.trace_error == pytest.approx(d * d)
    assert rep.tp_error == pytest.approx(d)
    assert not rep.mc_ok and not rep.ok()


def test_rotated_marginal_reduction(rng):
    # Tr_34 of the rotated Choi operator only sees the rotation on subsystem 1
    d = 2
    R0 = choi_from_chi(ChiVector(0.4, 0.8, d)).matrix
    U = np.linalg.qr(random_matrix(rng, d))[0]
    W = np.kron(np.kron(U, np.eye(d)), np.kron(U.conj(), np.eye(d)))
    lhs = partial_trace(W @ R0 @ W.conj().T, (d,) * 4, [3, 4])
    V = np.kron(U, np.eye(d))
    rhs = V @ partial_trace(R0, (d,) * 4, [3, 4]) @ V.conj().T
    assert np.allclose(lhs, rhs, atol=1e-13)


def test_choi_operator_validation():
    with pytest.raises(ValueError):
        ChoiOperator(np.eye(8), 2)
    with pytest.raises(ValueError):
        ChoiOperator(np.triu(np.ones((16, 16))), 2)
