import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from entransfer.errors import DimensionError, StateError
from entransfer.fock import (
    DensityOperator,
    HilbertSpec,
    PureState,
    annihilation,
    apply_operator,
    beam_splitter,
    creation,
    evolve,
    number_operator,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    tensor,
)

from conftest import random_density


def naive_partial_trace(m, dims, keep):
    """Element-by-element reduction, used as an oracle."""
    n = len(dims)
    keep = sorted(keep)
    drop = [i for i in range(n) if i not in keep]
    kd = [dims[i] for i in keep]
    dd = [dims[i] for i in drop]
    dk = int(np.prod(kd))
    out = np.zeros((dk, dk), dtype=complex)
    for a, ka in enumerate(itertools.product(*[range(d) for d in kd])):
        for b, kb in enumerate(itertools.product(*[range(d) for d in kd])):
            s = 0
            for env in itertools.product(*[range(d) for d in dd]):
                ia, ib = [0] * n, [0] * n
                for pos, v in zip(keep, ka):
                    ia[pos] = v
                for pos, v in zip(keep, kb):
                    ib[pos] = v
                for pos, v in zip(drop, env):
                    ia[pos] = ib[pos] = v
                s += m[np.ravel_multi_index(ia, dims), np.ravel_multi_index(ib, dims)]
            out[a, b] = s
    return out


def embed(op, targets, dims):
    """Full-space matrix of a local operator, built from Kronecker products and a permutation."""
    n = len(dims)
    rest = [i for i in range(n) if i not in targets]
    order = list(targets) + rest
    drest = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(drest))
    pdims = [dims[i] for i in order]
    t = full.reshape(pdims * 2)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(int(np.prod(dims)), -1)


class TestSpecAndStates:
    def test_spec_rejects_bad_dims(self):
        with pytest.raises(DimensionError):
            HilbertSpec(())
        with pytest.raises(DimensionError):
            HilbertSpec((2, 1))

    def test_spec_index_check(self):
        spec = HilbertSpec((2, 3))
        assert spec.total_dim == 6
        with pytest.raises(DimensionError):
            spec.check_index(2)

    def test_pure_state_norm(self):
        spec = HilbertSpec((2,))
        with pytest.raises(StateError):
            PureState(spec, [1.0, 1.0])
        # a small truncation deficit is allowed
        PureState(spec, [np.sqrt(1 - 1e-10), 0.0])

    def test_pure_state_dimension(self):
        with pytest.raises(DimensionError):
            PureState(HilbertSpec((2, 2)), [1.0, 0.0])

    def test_basis(self):
        psi = PureState.basis(HilbertSpec((2, 3)), (1, 2))
        assert psi.amplitudes[5] == 1
        with pytest.raises(DimensionError):
            PureState.basis(HilbertSpec((2, 3)), (2, 0))

    def test_density_validation(self):
        spec = HilbertSpec((2,))
        with pytest.raises(StateError, match="Hermitian"):
            DensityOperator(spec, [[0.5, 0.5], [0.0, 0.5]])
        with pytest.raises(StateError, match="trace"):
            DensityOperator(spec, [[0.5, 0.0], [0.0, 0.6]])
        with pytest.raises(StateError, match="semidefinite|PSD"):
            DensityOperator(spec, [[1.2, 0.0], [0.0, -0.2]])

    def test_density_with_reduced_trace(self):
        rho = DensityOperator(HilbertSpec((2,)), np.diag([0.5, 0.4]), trace=0.9)
        assert rho.trace == 0.9

    def test_purity(self):
        rho = DensityOperator(HilbertSpec((2,)), np.eye(2) / 2)
        assert rho.purity() == pytest.approx(0.5)


class TestPartialOperations:
    def test_partial_trace_matches_naive(self, rng):
        dims = (2, 3, 2)
        m = random_density(rng, 12)
        rho = DensityOperator(HilbertSpec(dims), m)
        for keep in [(0,), (1,), (2,), (0, 2), (1, 2), (0, 1)]:
            got = partial_trace(rho, keep).matrix
            np.testing.assert_allclose(got, naive_partial_trace(m, dims, keep), atol=1e-13)

    def test_partial_trace_of_product(self, rng):
        a = DensityOperator(HilbertSpec((3,)), random_density(rng, 3))
        b = DensityOperator(HilbertSpec((2,)), random_density(rng, 2))
        ab = tensor(a, b)
        np.testing.assert_allclose(partial_trace(ab, 0).matrix, a.matrix, atol=1e-14)
        np.testing.assert_allclose(partial_trace(ab, 1).matrix, b.matrix, atol=1e-14)

    def test_pure_and_mixed_reduction_agree(self, rng):
        v = rng.normal(size=12) + 1j * rng.normal(size=12)
        psi = PureState(HilbertSpec((3, 4)), v / np.linalg.norm(v))
        np.testing.assert_allclose(
            partial_trace(psi, 1).matrix, partial_trace(psi.projector(), 1).matrix, atol=1e-14
        )

    def test_partial_transpose_bell(self):
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        rho = DensityOperator(HilbertSpec((2, 2)), np.outer(phi, phi))
        lam = np.linalg.eigvalsh(partial_transpose(rho, 1))
        np.testing.assert_allclose(lam, [-0.5, 0.5, 0.5, 0.5], atol=1e-14)
        np.testing.assert_allclose(partial_transpose(rho, 0), partial_transpose(rho, 1), atol=1e-14)

    def test_permute_roundtrip(self, rng):
        rho = DensityOperator(HilbertSpec((2, 3, 4)), random_density(rng, 24))
        p = permute_subsystems(rho, (2, 0, 1))
        assert p.spec.dims == (4, 2, 3)
        back = permute_subsystems(p, (1, 2, 0))
        np.testing.assert_allclose(back.matrix, rho.matrix, atol=1e-15)
        with pytest.raises(DimensionError):
            permute_subsystems(rho, (0, 0, 1))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 2, 2)]))
    def test_partial_trace_keeps_trace_and_positivity(self, seed, dims):
        rng = np.random.default_rng(seed)
        rho = DensityOperator(HilbertSpec(dims), random_density(rng, int(np.prod(dims)), rank=2))
        red = partial_trace(rho, 0)
        assert np.trace(red.matrix).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(red.matrix)[0] > -1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_partial_transpose_involution(self, seed):
        rng = np.random.default_rng(seed)
        rho = DensityOperator(HilbertSpec((2, 3)), random_density(rng, 6))
        once = DensityOperator._trusted(rho.spec, partial_transpose(rho, 1))
        np.testing.assert_allclose(partial_transpose(once, 1), rho.matrix, atol=1e-15)


class TestLadderOperators:
    def test_matrix_elements(self):
        a = annihilation(4)
        for n in range(1, 5):
            assert a[n - 1, n] == pytest.approx(np.sqrt(n))
        np.testing.assert_allclose(creation(4), a.conj().T)
        np.testing.assert_allclose(creation(4) @ a, number_operator(4), atol=1e-14)

    def test_commutator_below_cutoff(self):
        a = annihilation(6)
        comm = a @ a.conj().T - a.conj().T @ a
        np.testing.assert_allclose(np.diag(comm)[:-1], 1.0, atol=1e-14)
        # the top level carries the truncation artefact -n_max
        assert comm[-1, -1] == pytest.approx(-6.0)

    def test_rejects_small_cutoff(self):
        with pytest.raises(DimensionError):
            annihilation(0)


class TestBeamSplitter:
    @pytest.mark.parametrize("theta", [0.0, 0.3, np.pi / 4, 1.3])
    def test_unitary(self, theta):
        U = beam_splitter(theta, 5)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(36), atol=1e-12)

    @pytest.mark.parametrize("theta", [0.2, 0.9])
    def test_matches_full_generator(self, theta):
        # the truncated generator is block diagonal in total excitation, so a
        # single dense exponential must give the same matrix
        n = 4
        a = annihilation(n)
        G = np.kron(a, a.conj().T) - np.kron(a.conj().T, a)
        np.testing.assert_allclose(beam_splitter(theta, n), expm(theta * G), atol=1e-12)

    def test_conserves_total_photons(self):
        n = 5
        U = beam_splitter(0.7, n)
        N = np.kron(number_operator(n), np.eye(n + 1)) + np.kron(np.eye(n + 1), number_operator(n))
        np.testing.assert_allclose(U @ N, N @ U, atol=1e-12)

    def test_single_photon_split(self):
        theta = 0.4
        U = beam_splitter(theta, 3)
        out = U[:, 0 * 4 + 1]  # |0>_A |1>_a
        assert out[0 * 4 + 1] == pytest.approx(np.cos(theta))
        assert out[1 * 4 + 0] == pytest.approx(-np.sin(theta))

    def test_two_photon_interference(self):
        U = beam_splitter(np.pi / 4, 3)
        out = U[:, 1 * 4 + 1]
        assert abs(out[1 * 4 + 1]) < 1e-13
        assert abs(out[2 * 4 + 0]) ** 2 == pytest.approx(0.5)

    def test_identity_at_zero(self):
        np.testing.assert_allclose(beam_splitter(0.0, 3), np.eye(16), atol=1e-15)


class TestOperatorApplication:
    def test_apply_matches_embedding(self, rng):
        dims = (2, 3, 2)
        rho = DensityOperator(HilbertSpec(dims), random_density(rng, 12))
        op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        for targets in [(0, 2), (2, 0)]:
            full = embed(op, targets, dims)
            got = apply_operator(rho, op, targets).matrix
            np.testing.assert_allclose(got, full @ rho.matrix @ full.conj().T, atol=1e-12)

    def test_apply_to_pure_state(self, rng):
        dims = (3, 2)
        v = rng.normal(size=6) + 0j
        psi = PureState(HilbertSpec(dims), v / np.linalg.norm(v))
        op = rng.normal(size=(2, 2))
        got = apply_operator(psi, op, (1,)).amplitudes
        np.testing.assert_allclose(got, np.kron(np.eye(3), op) @ psi.amplitudes, atol=1e-14)

    def test_apply_rejects_bad_targets(self, rng):
        rho = DensityOperator(HilbertSpec((2, 2)), np.eye(4) / 4)
        with pytest.raises(DimensionError):
            apply_operator(rho, np.eye(4), (0, 0))
        with pytest.raises(DimensionError):
            apply_operator(rho, np.eye(3), (0,))

    def test_evolve_preserves_spectrum(self, rng):
        rho = DensityOperator(HilbertSpec((2, 3)), random_density(rng, 6))
        U = expm(-1j * (lambda h: h + h.conj().T)(rng.normal(size=(6, 6)) + 0j))
        out = evolve(rho, U)
        np.testing.assert_allclose(np.linalg.eigvalsh(out.matrix), np.linalg.eigvalsh(rho.matrix), atol=1e-12)
        with pytest.raises(DimensionError):
            evolve(rho, np.eye(5))
