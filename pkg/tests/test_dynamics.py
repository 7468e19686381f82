import math

import numpy as np
import pytest

from entransfer.dynamics import (
    InteractionSchedule,
    apply_cavity_decay,
    boundary_population,
    closed_form_elements,
    field_after_pair,
    interact_pair,
    jc_unitary,
    max_over_tau2,
    pair_state_from_field,
    reduced_qubit_state,
    residual_field_state,
    run_schedule,
    sequential_pair,
    staggered_interaction,
)
from entransfer.errors import DimensionError
from entransfer.fock import DensityOperator, HilbertSpec, number_operator, partial_trace
from entransfer.measures import negativity, negativity_from_elements
from entransfer.qubits import QubitPairMatrix
from entransfer.squeezing import SqueezeParams, assemble_cavity_state_closed_form

from conftest import THETA, cavity


def fock_state(levels, n_max):
    d = n_max + 1
    v = np.zeros(d * d)
    v[levels[0] * d + levels[1]] = 1.0
    return DensityOperator(HilbertSpec((d, d)), np.outer(v, v))


def excitations(joint):
    dq1, dq2, dA, dB = joint.spec.dims
    diag = np.real(np.diagonal(joint.matrix)).reshape(dq1, dq2, dA, dB)
    q1, q2, a, b = np.meshgrid(*(np.arange(d) for d in (dq1, dq2, dA, dB)), indexing="ij")
    return float(np.sum(diag * (q1 + q2 + a + b)))


class TestJaynesCummings:
    def test_identity_at_zero(self):
        np.testing.assert_allclose(jc_unitary(0.0, 4), np.eye(10), atol=1e-15)

    @pytest.mark.parametrize("tau", [0.3, 1.7, 5.0])
    def test_unitary(self, tau):
        U = jc_unitary(tau, 6)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(14), atol=1e-14)

    def test_single_photon_rabi(self):
        d = 5
        for tau in (0.4, math.pi / 2, 2.2):
            U = jc_unitary(tau, d - 1)
            g1, e0 = 1, d  # |0,1>, |1,0>
            assert U[e0, g1] == pytest.approx(-1j * math.sin(tau))
        U = jc_unitary(math.pi / 2, d - 1)
        assert U[d, 1] == pytest.approx(-1j)

    def test_conserves_excitation(self):
        n = 6
        U = jc_unitary(1.3, n)
        X = np.kron(np.diag([0.0, 1.0]), np.eye(n + 1)) + np.kron(np.eye(2), number_operator(n))
        np.testing.assert_allclose(U @ X, X @ U, atol=1e-13)

    def test_boundary_state_frozen(self):
        U = jc_unitary(0.9, 3)
        assert U[7, 7] == 1.0
        assert np.count_nonzero(U[:, 7]) == 1

    def test_rejects_small_cutoff(self):
        with pytest.raises(DimensionError):
            jc_unitary(1.0, 0)


class TestJointEvolution:
    def test_zero_time(self):
        rho = cavity(0.46, 8, 1e-2)
        joint = interact_pair(rho, 0.0)
        pair = reduced_qubit_state(joint)
        np.testing.assert_allclose(np.real(np.diag(pair.matrix)), [0, 0, 0, 1], atol=1e-15)
        np.testing.assert_allclose(residual_field_state(joint).matrix, rho.matrix, atol=1e-15)

    def test_vacuum_field_leaves_qubits_down(self):
        for tau in (0.5, 2.0):
            joint = interact_pair(fock_state((0, 0), 3), tau)
            pair = reduced_qubit_state(joint)
            assert pair.F == pytest.approx(1.0)
            np.testing.assert_allclose(residual_field_state(joint).matrix, fock_state((0, 0), 3).matrix, atol=1e-15)

    def test_single_photon_excites_qubit(self):
        joint = interact_pair(fock_state((1, 0), 3), math.pi / 2)
        q1 = partial_trace(joint, 0).matrix
        assert q1[1, 1].real == pytest.approx(1.0)

    def test_purity_and_excitations_conserved(self):
        rho = cavity(0.86, 10, 1e-2)
        before = interact_pair(rho, 0.0)
        after = interact_pair(rho, 1.1)
        p0 = np.sum(np.abs(before.matrix) ** 2)
        p1 = np.sum(np.abs(after.matrix) ** 2)
        assert p1 == pytest.approx(p0, abs=1e-12)
        assert excitations(after) == pytest.approx(excitations(before), abs=1e-8)
        assert boundary_population(after) == 0.0

    def test_photons_lost_equal_qubit_excitation(self):
        rho = cavity(0.86, 10, 1e-2)
        joint = interact_pair(rho, 2.3)
        field = residual_field_state(joint)
        N = number_operator(10)
        I = np.eye(11)
        photons = lambda s: s.expectation(np.kron(N, I) + np.kron(I, N)).real
        pair = reduced_qubit_state(joint)
        excited = 2 * pair.A + pair.B + pair.C
        assert photons(rho) - photons(field) == pytest.approx(excited, abs=1e-10)

    def test_x_shape_and_completion(self):
        rho = cavity(0.86, 10, 1e-2)
        pair = reduced_qubit_state(interact_pair(rho, 1.4))
        assert pair.off_x_magnitude() < 1e-8
        assert pair.F == pytest.approx(1 - pair.A - pair.B - pair.C, abs=1e-8)

    def test_weak_squeezing_full_transfer(self):
        # |00> + r|11> in the cavities maps to |00> - r|11> in the qubits at tau = pi/2
        r = 0.05
        p = SqueezeParams(r, math.pi / 2, 8)
        rho = assemble_cavity_state_closed_form(p)
        pair = reduced_qubit_state(interact_pair(rho, math.pi / 2))
        assert pair.B == pytest.approx(0.0, abs=1e-4)
        assert pair.C == pytest.approx(0.0, abs=1e-4)
        assert pair.D == pytest.approx(r / (1 + r**2), rel=5e-3)
        assert pair.A == pytest.approx(r**2 / (1 + r**2), rel=5e-3)


class TestRoutes:
    @pytest.mark.parametrize("tau", [0.0, 0.7, math.pi / 2, 3.9])
    def test_three_routes_agree(self, tau):
        r, n = 0.86, 12
        rho = cavity(r, n, 1e-2)
        oracle = reduced_qubit_state(interact_pair(rho, tau)).matrix
        fast = pair_state_from_field(rho, tau).matrix
        A, B, C, D, F = closed_form_elements(r, THETA, tau, n, tol_trunc=1e-2)
        series = QubitPairMatrix.from_elements(A, B, C, D, F).matrix
        assert np.max(np.abs(oracle - fast)) < 1e-12
        assert np.max(np.abs(oracle - series)) < 1e-12

    def test_closed_form_at_fig_peak(self):
        rho = cavity(0.26, 20, 1e-6)
        oracle = reduced_qubit_state(interact_pair(rho, math.pi / 2))
        A, B, C, D, F = closed_form_elements(0.26, THETA, math.pi / 2, 20)
        np.testing.assert_allclose([A, B, C, D, F], oracle.elements(), atol=1e-10)

    def test_closed_form_trivial_cases(self):
        assert closed_form_elements(0.86, THETA, 0.0, 20) == (0.0, 0.0, 0.0, 0.0, 1.0)
        A, B, C, D, F = closed_form_elements(0.0, THETA, np.linspace(0, 4, 9), 20)
        assert np.all(A == 0) and np.all(B == 0) and np.all(C == 0) and np.all(D == 0)
        np.testing.assert_allclose(F, 1.0)

    def test_closed_form_vectorised(self):
        taus = np.linspace(0, 4.7, 7)
        vec = closed_form_elements(0.46, THETA, taus, 20)
        for i, t in enumerate(taus):
            np.testing.assert_allclose([x[i] for x in vec], closed_form_elements(0.46, THETA, t, 20), atol=1e-15)

    @pytest.mark.parametrize("taus", [(0.8, 0.3), (2.0, 1.1)])
    def test_unequal_times(self, taus):
        rho = cavity(0.86, 10, 1e-2)
        oracle = reduced_qubit_state(interact_pair(rho, *taus)).matrix
        np.testing.assert_allclose(pair_state_from_field(rho, *taus).matrix, oracle, atol=1e-12)

    @pytest.mark.parametrize("tau", [0.6, 2.5])
    def test_field_after_pair_matches_oracle(self, tau):
        rho = cavity(0.86, 10, 1e-2)
        oracle = residual_field_state(interact_pair(rho, tau)).matrix
        np.testing.assert_allclose(field_after_pair(rho, tau).matrix, oracle, atol=1e-13)

    def test_negativity_ignores_outer_populations(self):
        # moving weight between |11> and |00> leaves the smaller PT eigenvalue alone
        A, B, C, D, F = closed_form_elements(0.86, THETA, 1.4, 20)
        base = negativity(QubitPairMatrix.from_elements(A, B, C, D, F))
        shifted = negativity(QubitPairMatrix.from_elements(A + 0.01, B, C, D, F - 0.01))
        assert shifted == pytest.approx(base, abs=1e-12)
        assert base == pytest.approx(negativity_from_elements(B, C, D), abs=1e-12)


class TestSecondPair:
    def test_untouched_field_gives_first_pair(self):
        rho = cavity(0.86, 12, 1e-2)
        for tau in (0.9, 2.1):
            np.testing.assert_allclose(
                sequential_pair(field_after_pair(rho, 0.0), tau).matrix,
                pair_state_from_field(rho, tau).matrix,
                atol=1e-15,
            )

    def test_zero_time(self):
        pair = sequential_pair(cavity(0.86, 12, 1e-2), 0.0)
        np.testing.assert_allclose(np.real(np.diag(pair.matrix)), [0, 0, 0, 1], atol=1e-15)

    def test_vacuum_field(self):
        t, e = max_over_tau2(fock_state((0, 0), 4), [0.5, 0.1, 1.0])
        assert (t, e) == (0.1, 0.0)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            max_over_tau2(fock_state((0, 0), 4), [])

    def test_first_pair_maximum_when_untouched(self):
        rho = cavity(0.86, 20, 1e-6)
        grid = np.arange(0, 151) * math.pi / 100
        _, best = max_over_tau2(field_after_pair(rho, 0.0), grid)
        first = max(negativity(pair_state_from_field(rho, t)) for t in grid)
        assert best == pytest.approx(first, abs=1e-12)

    def test_grid_refinement(self):
        rho = field_after_pair(cavity(0.86, 20, 1e-6), math.pi / 4)
        coarse = max_over_tau2(rho, np.arange(0, 76) * math.pi / 50)[1]
        fine = max_over_tau2(rho, np.arange(0, 151) * math.pi / 100)[1]
        assert abs(fine - coarse) < 1e-3

    def test_second_pair_empty_after_three_half_pi(self):
        # the first pair swaps out every one-photon coherence the second pair could use
        rho = field_after_pair(cavity(0.86, 20, 1e-6), 3 * math.pi / 2)
        _, e = max_over_tau2(rho, np.arange(0, 151) * math.pi / 100)
        assert e == 0.0

    def test_schedule(self):
        rho = cavity(0.86, 12, 1e-2)
        first, field, second = run_schedule(rho, InteractionSchedule(1.0))
        assert second is None
        first, field, second = run_schedule(rho, InteractionSchedule(1.0, 1.5, kappa_tbar=0.2))
        np.testing.assert_allclose(
            second.matrix, sequential_pair(apply_cavity_decay(field_after_pair(rho, 1.0), 0.2), 1.5).matrix
        )

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            InteractionSchedule(1.0, delta_tau=2.0)
        with pytest.raises(ValueError):
            InteractionSchedule(-1.0)
        with pytest.raises(ValueError):
            InteractionSchedule(1.0, kappa_tbar=math.inf)


class TestDecay:
    def test_identity_at_zero(self):
        rho = cavity(0.86, 10, 1e-2)
        assert apply_cavity_decay(rho, 0.0) is rho

    def test_vacuum_unchanged(self):
        vac = fock_state((0, 0), 3)
        np.testing.assert_allclose(apply_cavity_decay(vac, 0.7).matrix, vac.matrix)

    def test_two_level_hand_value(self):
        w, k = 0.3, 0.25
        d = 2
        m = np.zeros((4, 4))
        m[0, 0], m[2, 2] = 1 - w, w  # |0,0>, |1,0>
        rho = DensityOperator(HilbertSpec((d, d)), m)
        out = np.real(np.diag(apply_cavity_decay(rho, k).matrix))
        expected = np.array([1 - w, 0, w * math.exp(-2 * k), 0])
        np.testing.assert_allclose(out, expected / expected.sum(), atol=1e-15)

    def test_positivity_and_photon_loss(self):
        rho = field_after_pair(cavity(0.86, 12, 1e-2), 1.0)
        N = np.kron(number_operator(12), np.eye(13)) + np.kron(np.eye(13), number_operator(12))
        last = np.inf
        for k in np.linspace(0, 1, 6):
            out = apply_cavity_decay(rho, k)
            assert np.linalg.eigvalsh(out.matrix)[0] > -1e-14
            assert np.trace(out.matrix).real == pytest.approx(rho.trace, abs=1e-12)
            n = out.expectation(N).real / out.trace
            assert n <= last + 1e-15
            last = n

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            apply_cavity_decay(fock_state((0, 0), 2), -0.1)


class TestStaggered:
    def test_no_delay(self):
        rho = cavity(0.26, 20, 1e-6)
        a = staggered_interaction(rho, math.pi / 2, 0.0).matrix
        np.testing.assert_allclose(a, pair_state_from_field(rho, math.pi / 2).matrix, atol=1e-15)

    def test_matches_oracle(self):
        rho = cavity(0.86, 10, 1e-2)
        oracle = reduced_qubit_state(interact_pair(rho, 1.5, 1.5 - 0.4)).matrix
        np.testing.assert_allclose(staggered_interaction(rho, 1.5, 0.4).matrix, oracle, atol=1e-12)

    def test_small_delay_is_negligible(self):
        rho = cavity(0.26, 20, 1e-6)
        e0 = negativity(staggered_interaction(rho, math.pi / 2, 0.0))
        e1 = negativity(staggered_interaction(rho, math.pi / 2, 1e-2))
        assert abs(e1 - e0) < 1e-2

    def test_full_delay(self):
        pair = staggered_interaction(cavity(0.86, 20, 1e-6), 1.2, 1.2)
        assert negativity(pair) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            staggered_interaction(cavity(0.26, 20, 1e-6), 1.0, 1.5)
