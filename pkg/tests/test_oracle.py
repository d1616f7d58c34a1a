import numpy as np
import pytest

from lindblad3q import oracle
from lindblad3q.errors import CapacityError, HeadroomError
from lindblad3q.kerr import KerrModel
from lindblad3q.model import QuadraticLindbladSpec, single_mode_boson, single_mode_fermion

from conftest import random_u1_spec


def direct_generator(Hop, jumps, rho):
    """``L rho`` from operator products, ``i d rho/dt = L rho``."""
    out = Hop @ rho - rho @ Hop
    for J in jumps:
        Jd = J.conj().T
        out += 1j * (2 * J @ rho @ Jd - Jd @ J @ rho - rho @ Jd @ J) / 2
    return out


def random_density(rng, D):
    X = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


def test_trace_preserving(rng):
    assert oracle.build_boson_liouvillian(random_u1_spec(rng, 2), (4, 4)).trace_residual() < 1e-12
    assert oracle.build_fermion_liouvillian(random_u1_spec(rng, 3, "fermion")).trace_residual() < 1e-12


def test_closed_oscillator_spectrum():
    spec = QuadraticLindbladSpec.from_dissipators("boson", [[0.8]], [[0.0]], [[0.0]])
    ev = oracle.liouvillian_spectrum(oracle.build_boson_liouvillian(spec, 5))
    expected = np.array([0.8 * (m - n) for m in range(5) for n in range(5)])
    np.testing.assert_allclose(np.sort(ev.real), np.sort(expected), atol=1e-12)
    assert np.abs(ev.imag).max() < 1e-12


def test_apply_matches_operator_products(rng):
    kappa, nth, omega0, N_c = 0.3, 0.4, 1.1, 6
    liou = oracle.build_boson_liouvillian(single_mode_boson(omega0, kappa, nth), N_c)
    a = oracle.boson_annihilators((N_c,))[0].toarray()
    jumps = [np.sqrt(kappa * (nth + 1)) * a, np.sqrt(kappa * nth) * a.conj().T]
    rho = random_density(rng, N_c)
    np.testing.assert_allclose(liou.apply(rho), direct_generator(omega0 * a.conj().T @ a, jumps, rho), atol=1e-13)


def test_kerr_generator_matches_operator_products(rng):
    model, N_c = KerrModel(0.5, 0.9, 0.2, 0.3), 6
    liou = oracle.build_boson_liouvillian(model, N_c)
    a = oracle.boson_annihilators((N_c,))[0].toarray()
    ad = a.conj().T
    Hop = 0.5 * ad @ a + 0.45 * ad @ ad @ a @ a
    jumps = [np.sqrt(0.2 * 1.3) * a, np.sqrt(0.2 * 0.3) * ad]
    rho = random_density(rng, N_c)
    np.testing.assert_allclose(liou.apply(rho), direct_generator(Hop, jumps, rho), atol=1e-13)


def test_sparse_eigenvalues_match_dense():
    liou = oracle.build_boson_liouvillian(single_mode_boson(1.0, 0.5, 0.5), 20)
    dense = oracle.liouvillian_spectrum(liou)
    near = oracle.liouvillian_eigenvalues_near(liou, -0.4j, 12)
    assert np.abs(near[:, None] - dense[None, :]).min(axis=1).max() < 1e-10


def test_fermion_operators_anticommute():
    ops = [o.toarray() for o in oracle.fermion_annihilators(3)]
    for i, a in enumerate(ops):
        for j, b in enumerate(ops):
            np.testing.assert_allclose(a @ b.conj().T + b.conj().T @ a, np.eye(8) * (i == j), atol=1e-15)
            np.testing.assert_allclose(a @ b + b @ a, 0, atol=1e-15)


def test_hermiticity_preserved(rng):
    liou = oracle.build_boson_liouvillian(random_u1_spec(rng, 2), (3, 3))
    rho = oracle.evolve_density(liou, random_density(rng, 9), 0.7)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)


def test_fermion_level_eigenvalues():
    ev = oracle.liouvillian_spectrum(oracle.build_fermion_liouvillian(single_mode_fermion(0.4, 0.2, 0.25)))
    expected = [0.0, -0.2j, 0.4 - 0.1j, -0.4 - 0.1j]
    assert sorted(ev, key=lambda e: (e.real, e.imag)) == pytest.approx(
        sorted(expected, key=lambda e: (e.real, e.imag)), abs=1e-12)


def test_occupation_relaxation():
    kappa, nth, N_c = 0.5, 0.3, 30
    liou = oracle.build_boson_liouvillian(single_mode_boson(1.0, kappa, nth), N_c)
    n_op = np.diag(np.arange(N_c)).astype(complex)
    for t in (0.5, 2.0, 6.0):
        rho = oracle.evolve_density(liou, oracle.fock_state(2, N_c), t)
        expected = 2 * np.exp(-kappa * t) + nth * (1 - np.exp(-kappa * t))
        assert oracle.expectation(rho, n_op).real == pytest.approx(expected, abs=1e-8)


def test_evolution_semigroup(rng):
    liou = oracle.build_boson_liouvillian(random_u1_spec(rng, 1), 8)
    rho0 = oracle.fock_state(1, 8)
    once = oracle.evolve_density(liou, rho0, 1.3)
    twice = oracle.evolve_density(liou, oracle.evolve_density(liou, rho0, 0.6), 0.7)
    np.testing.assert_allclose(once, twice, atol=1e-12)
    listed = oracle.evolve_density(liou, rho0, [1.3, 0.0])
    np.testing.assert_allclose(listed[0], once, atol=1e-12)
    np.testing.assert_array_equal(listed[1], rho0)


def test_steady_state_unique(rng):
    liou = oracle.build_boson_liouvillian(single_mode_boson(1.0, 0.4, 0.5), 40)
    rho = oracle.steady_state(liou)
    np.testing.assert_allclose(np.diag(rho).real, np.diag(oracle.thermal_state(0.5, 40)).real, atol=1e-8)
    small = oracle.build_fermion_liouvillian(random_u1_spec(rng, 2, "fermion"))
    assert np.sum(np.abs(oracle.liouvillian_spectrum(small)) < 1e-10) == 1


def test_vacuum_and_coherent_phase_space():
    assert oracle.wigner_numeric(oracle.fock_state(0, 5), 0.0) == pytest.approx(2.0)
    rho = oracle.coherent_state(2.0, 40)
    n_op = np.diag(np.arange(40)).astype(complex)
    assert oracle.expectation(rho, n_op).real == pytest.approx(4.0, abs=1e-10)
    assert oracle.characteristic_numeric(rho, 0.0) == pytest.approx(1.0)


def test_displacement_methods_agree():
    gamma = 0.9 - 1.3j
    np.testing.assert_allclose(oracle.displacement_operator(gamma, 12),
                               oracle.displacement_operator(gamma, 12, method="expm"), atol=1e-12)


def test_truncated_state_warns():
    with pytest.warns(UserWarning, match="top two"):
        oracle.coherent_state(3.0, 10)


def test_ladder_identities():
    N_c = 30
    identity = np.eye(N_c, dtype=complex)
    identity[-2:, -2:] = 0  # keep headroom
    assert np.abs(oracle.apply_superoperator_ladder(identity, "a_q")[:-3, :-3]).max() < 1e-15
    parity = np.diag((-1.0) ** np.arange(N_c)).astype(complex)
    parity[-2:, -2:] = 0
    assert np.abs(oracle.apply_superoperator_ladder(parity, "a_cl")[:-3, :-3]).max() < 1e-15
    # a rho_th = nth/(nth+1) rho_th a, i.e. (a_cl + (2 nth + 1) a_q) rho_th = 0
    nth = 0.3
    thermal = oracle.thermal_state(nth, N_c)
    combo = (oracle.apply_superoperator_ladder(thermal, "a_cl")
             + (2 * nth + 1) * oracle.apply_superoperator_ladder(thermal, "a_q"))
    assert np.abs(combo).max() < 1e-15


def test_ladder_headroom_enforced():
    with pytest.raises(HeadroomError):
        oracle.apply_superoperator_ladder(oracle.fock_state(9, 10), "a_q_dag")
    with pytest.raises(ValueError):
        oracle.apply_superoperator_ladder(oracle.fock_state(0, 10), "a_x")


def test_capacity_limits(rng):
    with pytest.raises(CapacityError):
        oracle.build_boson_liouvillian(random_u1_spec(rng, 2), (20, 20))
    assert oracle.build_boson_liouvillian(random_u1_spec(rng, 2), (20, 20), cap=None).D == 400
    with pytest.raises(CapacityError):
        oracle.build_fermion_liouvillian(random_u1_spec(rng, 9, "fermion"))


def test_kernel_numeric_free_evolution():
    spec = QuadraticLindbladSpec.from_dissipators("boson", [[0.6]], [[0.0]], [[0.0]])
    liou = oracle.build_boson_liouvillian(spec, 30)
    eta, alpha, t = 0.3 + 0.2j, 0.8 - 0.4j, 1.1
    moved = alpha * np.exp(-0.6j * t)
    expected = np.exp(np.conj(eta) * moved - eta * np.conj(moved))
    assert oracle.kernel_numeric(liou, [eta], [alpha], t) == pytest.approx(expected, abs=1e-8)
