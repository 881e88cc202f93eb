import math

import numpy as np
import pytest

from diamondsim import (DissipationSpec, TimeGrid, basis_state, decompose, default_schedule,
                        dissipator_apply, evolve_coherence, evolve_density, gaussian_schedule,
                        hamiltonian_at, propagator, superoperator_matrices, total_decoherence_rates)
from diamondsim.decision_tree import populations_at
from diamondsim.dynamics import QuantumState, constant_propagator, flow_matrix
from diamondsim.errors import GridError, IntegrityError, IntervalError, SpecError, StateError

from conftest import random_density, random_hermitian

# populations from a step-5e-4 RK4 run of the default schedule starting in |0>
FROZEN_POPS = {
    4.0: [0.16172995781166097, 0.5549572920696155, 0.2832978215771907, 1.4928541532895298e-05],
    10.0: [0.010986703147406364, 0.5490243889445879, 0.3310058318321281, 0.10898307607587754],
}

ZERO = gaussian_schedule((0, 0, 0, 0), (0, 0), 1.0, delta=0.0)
SHORT = TimeGrid(0.0, 2.0, 1e-3, 10)


def deph(m, n, rate, **kw):
    d = np.zeros((4, 4))
    d[m, n] = d[n, m] = rate
    return DissipationSpec(gamma_deph=d, **kw)


def pop(k, m, rate, **kw):
    p = np.zeros((4, 4))
    p[k, m] = rate
    return DissipationSpec(gamma_pop=p, **kw)


@pytest.fixture(scope="module")
def default_runs(gens4, f4):
    grid = TimeGrid(0.0, 10.0, 1e-3)
    rho0 = basis_state(0)
    dens = evolve_density(rho0, default_schedule(), grid, gens=gens4)
    coh = evolve_coherence(decompose(rho0, gens4)[1], default_schedule(), grid, gens4, f4)
    return dens, coh


def test_grid_validation():
    for args in [(1, 0, 0.1), (0, 1, 0), (0, 1, 2), (0, 1, -0.1)]:
        with pytest.raises(GridError):
            TimeGrid(*args)
    with pytest.raises(GridError):
        TimeGrid(0, 1, 0.1, 0)
    g = TimeGrid(0, 10, 1e-3, 10)
    assert g.n_steps == 10000 and len(g.sample_times()) == 1001


def test_stride_keeps_final_sample():
    g = TimeGrid(0, 1, 0.1, 3)
    np.testing.assert_allclose(g.sample_times(), [0, 0.3, 0.6, 0.9, 1.0])
    traj = evolve_density(basis_state(0), default_schedule(), g)
    assert len(traj) == 5 and np.all(np.diff(traj.times) > 0)


def test_zero_hamiltonian_coherence_constant(gens4, f4):
    rng = np.random.default_rng(0)
    v0 = decompose(random_density(rng), gens4)[1]
    traj = evolve_coherence(v0, ZERO, SHORT, gens4, f4)
    assert np.all(traj.coherence == v0)


def test_flow_sign_from_liouville(gens4, f4):
    """Finite-difference Liouville derivative fixes the coherence-flow convention."""
    from diamondsim import g_matrix, gamma_coefficients
    rng = np.random.default_rng(11)
    rho, H = random_density(rng), random_hermitian(rng)
    drho = 1j * (rho @ H - H @ rho)
    dv = decompose(drho, gens4)[1]
    A = flow_matrix(g_matrix(gamma_coefficients(H, gens4), f4))
    np.testing.assert_allclose(A @ decompose(rho, gens4)[1], dv, atol=1e-12)


def test_picture_equivalence(default_runs):
    dens, coh = default_runs
    assert np.max(np.abs(dens.rho - coh.rho)) <= 1e-8
    np.testing.assert_allclose(dens.coherence, coh.coherence, atol=1e-8)


def test_coherence_norm_conserved(default_runs):
    _, coh = default_runs
    norms = np.linalg.norm(coh.coherence, axis=1)
    assert np.max(np.abs(norms - norms[0])) <= 1e-8


def test_state_views_consistent(default_runs, gens4):
    dens, _ = default_runs
    s = dens.states[500]
    np.testing.assert_allclose(QuantumState.from_rho(s.rho, gens4).coherence, s.coherence, atol=1e-12)


def test_maximally_mixed_fixed_point():
    traj = evolve_density(np.eye(4) / 4, default_schedule(), TimeGrid(0, 10, 1e-2, 10))
    assert np.max(np.abs(traj.rho - np.eye(4) / 4)) <= 1e-15


def test_default_populations_regression(default_runs):
    dens, _ = default_runs
    for t, expected in FROZEN_POPS.items():
        np.testing.assert_allclose(populations_at(dens, t), expected, atol=1e-6)


def test_unitary_conservation(default_runs):
    dens, _ = default_runs
    assert np.max(np.abs(dens.traces - 1)) <= 1e-10
    assert np.max(np.abs(dens.purities - 1)) <= 1e-8
    assert np.max(np.abs(dens.rho - dens.rho.conj().transpose(0, 2, 1))) <= 1e-10


def test_step_halving(default_runs):
    dens, _ = default_runs
    fine = evolve_density(basis_state(0), default_schedule(), TimeGrid(0, 10, 5e-4, 2))
    assert np.max(np.abs(fine.rho - dens.rho)) <= 1e-6


def test_invalid_initial_state():
    bad = [np.eye(4), np.triu(np.ones((4, 4))) / 4, np.diag([1.5, -0.5, 0, 0]), np.eye(3) / 3]
    for rho in bad:
        with pytest.raises(StateError):
            evolve_density(rho, ZERO, SHORT)


def test_analytic_dephasing():
    psi = np.array([1, 1, 0, 0]) / math.sqrt(2)
    rho0 = np.outer(psi, psi)
    traj = evolve_density(rho0, ZERO, TimeGrid(0, 10, 1e-3, 10), deph(0, 1, 0.3))
    np.testing.assert_allclose(traj.rho[:, 0, 1], 0.5 * np.exp(-0.3 * traj.times), atol=1e-8, rtol=0)
    assert np.max(np.abs(traj.populations - [0.5, 0.5, 0, 0])) <= 1e-10


def test_rates_validation():
    with pytest.raises(SpecError):
        pop(1, 0, -0.1)
    with pytest.raises(SpecError):
        DissipationSpec(gamma_deph=np.triu(np.ones((4, 4)), 1))
    with pytest.raises(SpecError):
        DissipationSpec(gamma_diag=[0, 0, 0, math.inf])
    with pytest.raises(SpecError):
        DissipationSpec(mode="redfield")


def test_total_decoherence_rates():
    assert np.all(total_decoherence_rates(DissipationSpec()) == 0)
    r = total_decoherence_rates(deph(0, 1, 0.3))
    expected = np.zeros((4, 4)); expected[0, 1] = expected[1, 0] = 0.3
    np.testing.assert_array_equal(r, expected)
    # gamma_21 (|1> -> |2>) enters Gamma_mn when one of m, n is 1 and neither is 2
    r = total_decoherence_rates(pop(2, 1, 0.4))
    expected = np.zeros((4, 4))
    for m, n in [(0, 1), (1, 3)]:
        expected[m, n] = expected[n, m] = 0.2
    np.testing.assert_allclose(r, expected, atol=1e-15)
    np.testing.assert_array_equal(r, r.T)


def test_total_decoherence_brute_force():
    rng = np.random.default_rng(5)
    p = rng.uniform(0, 1, (4, 4)); np.fill_diagonal(p, 0)
    spec = DissipationSpec(gamma_pop=p)
    r = total_decoherence_rates(spec)
    for m in range(4):
        for n in range(4):
            if m != n:
                others = [k for k in range(4) if k != m and k != n]
                assert r[m, n] == pytest.approx(0.5 * sum(p[k, m] + p[k, n] for k in others))


def test_dissipator_examples():
    rng = np.random.default_rng(1)
    rho = random_density(rng)
    assert np.all(dissipator_apply(DissipationSpec(), rho) == 0)
    out = dissipator_apply(pop(2, 1, 0.4), rho)
    assert out[0, 1] == pytest.approx(0.2 * rho[0, 1])
    assert np.all(np.diag(out) == 0)
    out = dissipator_apply(pop(2, 1, 0.4, mode="lindblad"), basis_state(1))
    assert out[1, 1] == pytest.approx(0.4) and out[2, 2] == pytest.approx(-0.4)
    assert abs(np.trace(out)) <= 1e-15


def lindblad_rhs_diag(p, rho):
    """Diagonal of sum_km gamma_km (L rho L^+ - 1/2 {L^+ L, rho}) with L = |k><m|."""
    out = np.zeros((4, 4), complex)
    for k in range(4):
        for m in range(4):
            if p[k, m]:
                L = np.zeros((4, 4)); L[k, m] = 1
                out += p[k, m] * (L @ rho @ L.T - 0.5 * (L.T @ L @ rho + rho @ L.T @ L))
    return np.diag(out)


def test_lindblad_population_terms_match_jump_operators():
    rng = np.random.default_rng(2)
    p = rng.uniform(0, 1, (4, 4)); np.fill_diagonal(p, 0)
    rho = random_density(rng)
    out = dissipator_apply(DissipationSpec(gamma_pop=p, mode="lindblad"), rho)
    np.testing.assert_allclose(-np.diag(out), lindblad_rhs_diag(p, rho), atol=1e-14)


def test_dissipator_hermitian():
    rng = np.random.default_rng(4)
    p = rng.uniform(0, 1, (4, 4)); np.fill_diagonal(p, 0)
    d = rng.uniform(0, 1, (4, 4)); d = d + d.T; np.fill_diagonal(d, 0)
    for mode in ("paper-literal", "lindblad"):
        spec = DissipationSpec(p, d, rng.uniform(0, 1, 4), mode)
        out = dissipator_apply(spec, random_density(rng))
        np.testing.assert_allclose(out, out.conj().T, atol=1e-15)


def test_trace_preservation_modes():
    rng = np.random.default_rng(6)
    rho0 = random_density(rng)
    p = rng.uniform(0, 0.5, (4, 4)); np.fill_diagonal(p, 0)
    grid = TimeGrid(0, 10, 1e-3, 50)
    for spec in (DissipationSpec(gamma_pop=p, mode="lindblad", gamma_diag=[0.1, 0.2, 0, 0]),
                 DissipationSpec(gamma_pop=p, gamma_deph=np.full((4, 4), 0.1) - 0.1 * np.eye(4))):
        traj = evolve_density(rho0, default_schedule(), grid, spec, check=False)
        assert np.max(np.abs(traj.traces - 1)) <= 1e-10
        assert np.max(np.abs(traj.rho - traj.rho.conj().transpose(0, 2, 1))) <= 1e-10


def test_paper_literal_state_decay_leaks_trace():
    spec = DissipationSpec(gamma_diag=[0.2, 0, 0, 0])
    assert not spec.preserves_trace
    traj = evolve_density(basis_state(0), ZERO, SHORT, spec)
    np.testing.assert_allclose(traj.traces, np.exp(-0.2 * traj.times), atol=1e-10)


def test_zero_rates_match_unitary(default_runs):
    dens, _ = default_runs
    zero = evolve_density(basis_state(0), default_schedule(), TimeGrid(0, 10, 1e-3), DissipationSpec())
    assert np.max(np.abs(zero.rho - dens.rho)) <= 1e-10


def test_positivity_abort():
    rho0 = np.full((4, 4), 0.25)
    with pytest.raises(IntegrityError) as exc:
        evolve_density(rho0, ZERO, TimeGrid(0, 5, 1e-2), deph(0, 1, 1.0))
    assert exc.value.diagnostics["min_eigenvalue"] < -1e-6


def test_superoperator_coherent_part():
    rng = np.random.default_rng(8)
    L, G = superoperator_matrices(np.zeros((4, 4)))
    assert np.all(L == 0) and np.all(G == 0)
    for _ in range(10):
        H, rho = random_hermitian(rng), random_density(rng)
        L, _ = superoperator_matrices(H)
        np.testing.assert_allclose(1j * L @ rho.reshape(-1), (1j * (rho @ H - H @ rho)).reshape(-1), atol=1e-12)


def test_superoperator_dephasing_diagonal():
    _, G = superoperator_matrices(np.zeros((4, 4)), deph(0, 2, 0.5))
    assert np.all(G == np.diag(np.diag(G)))
    assert G[2, 2] == 0.5 and G[8, 8] == 0.5


def test_superoperator_full_rhs():
    rng = np.random.default_rng(9)
    p = rng.uniform(0, 1, (4, 4)); np.fill_diagonal(p, 0)
    for mode in ("paper-literal", "lindblad"):
        spec = DissipationSpec(gamma_pop=p, gamma_diag=rng.uniform(0, 1, 4), mode=mode)
        H, rho = random_hermitian(rng), random_density(rng)
        L, G = superoperator_matrices(H, spec)
        rhs = 1j * (rho @ H - H @ rho) - dissipator_apply(spec, rho)
        np.testing.assert_allclose(1j * L @ rho.reshape(-1) - G @ rho.reshape(-1), rhs.reshape(-1), atol=1e-12)


def test_propagator_identity_and_errors():
    s = default_schedule()
    assert np.all(propagator(s, 3.0, 3.0) == np.eye(4))
    with pytest.raises(IntervalError):
        propagator(s, 2.0, 1.0)


def test_propagator_composition_and_unitarity():
    s = default_schedule()
    U01, U12, U02 = propagator(s, 0, 4), propagator(s, 4, 10), propagator(s, 0, 10)
    for U in (U01, U12, U02):
        assert np.max(np.abs(U.conj().T @ U - np.eye(4))) <= 1e-8
        np.testing.assert_allclose(np.sum(np.abs(U) ** 2, axis=0), 1, atol=1e-8)
    assert np.max(np.abs(U02 - U12 @ U01)) <= 1e-8


def test_propagator_diagonal_closed_form():
    delta, T = 0.7, 3.0
    s = gaussian_schedule((0, 0, 0, 0), (0, 0), 1.0, delta=delta)
    ph = np.exp(-1j * delta * T)
    np.testing.assert_allclose(propagator(s, 0, T), np.diag([1, ph, 1, ph]), atol=1e-12)
    np.testing.assert_allclose(constant_propagator(hamiltonian_at(s, 0), T), np.diag([1, ph, 1, ph]), atol=1e-12)


def test_propagator_columns_match_density_run(default_runs):
    """|U_i0|^2 from the midpoint propagator vs RK4 populations (independent integrators)."""
    dens, _ = default_runs
    U = propagator(default_schedule(), 0, 10)
    np.testing.assert_allclose(np.abs(U[:, 0]) ** 2, dens.populations[-1], atol=1e-6)
