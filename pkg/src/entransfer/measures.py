"""Entanglement and mixedness of qubit pairs, and Gaussian-style tests on two modes.

Quadratures follow ``q = (a + a†)/sqrt(2)``, ``p = -i (a - a†)/sqrt(2)``, so
the vacuum covariance matrix is ``I/2`` and the uncertainty-type function
:func:`simon_delta` uses the matching constants (``1/4`` and ``/4``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StateError
from .fock import DensityOperator, TOL_HERM, TOL_PSD, TOL_TRACE
from .qubits import QubitPairMatrix

NEG_TOL = 1e-10

J = np.array([[0.0, 1.0], [-1.0, 0.0]])
SYMPLECTIC_FORM = np.kron(np.eye(2), J)


def _pair_matrix(rho) -> np.ndarray:
    """4x4 matrix of a qubit pair, validated as a density matrix.

    Negativity and purity are invariant under relabelling the basis of each
    qubit, so the ordering of the input does not matter here.
    """
    if isinstance(rho, QubitPairMatrix):
        return rho.standard()
    if isinstance(rho, DensityOperator):
        if rho.spec.dims != (2, 2):
            raise StateError(f"expected a two-qubit state, got dims {rho.spec.dims}")
        m = rho.matrix
    else:
        m = np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise StateError(f"expected a 4x4 density matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > TOL_HERM:
        raise StateError("matrix is not Hermitian")
    if abs(np.trace(m).real - 1.0) > TOL_TRACE:
        raise StateError(f"trace {np.trace(m).real!r} is not 1")
    if np.linalg.eigvalsh(m)[0] < -TOL_PSD:
        raise StateError("matrix is not positive semidefinite")
    return m


def _pt_qubit2(m: np.ndarray) -> np.ndarray:
    return m.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def negativity(rho) -> float:
    """``-2 * lambda_min`` of the partial transpose on qubit 2, or 0 if it is PSD."""
    m = _pair_matrix(rho)
    lam = float(np.linalg.eigvalsh(_pt_qubit2(m))[0])
    return -2.0 * lam if lam < -NEG_TOL else 0.0


def lambda_minus_closed_form(B, C, D) -> float:
    """Smaller eigenvalue of the ``{|10>, |01>}`` block of an X-state's partial transpose."""
    if B < 0 or C < 0:
        raise ValueError(f"populations must be non-negative, got B={B}, C={C}")
    return 0.5 * (B + C - np.sqrt(4.0 * abs(D) ** 2 + (B - C) ** 2))


def negativity_from_elements(B, C, D) -> float:
    lam = lambda_minus_closed_form(B, C, D)
    return -2.0 * lam if lam < -NEG_TOL else 0.0


def linear_entropy(rho) -> float:
    """``(4/3) (1 - Tr rho^2)``: 0 for pure states, 1 for ``I/4``."""
    m = _pair_matrix(rho)
    return float(4.0 / 3.0 * (1.0 - np.sum(np.abs(m) ** 2)))


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"family parameter p must lie in [0, 1], got {p}")


def mems_state(p: float) -> QubitPairMatrix:
    """Boundary family with a vanishing ``|01>`` population."""
    _check_p(p)
    s = np.sqrt(1.0 + 3.0 * p * p)
    m = np.diag([(1 + s) / 6, (2 - s) / 3, 0.0, (1 + s) / 6]).astype(complex)
    m[0, 3] = m[3, 0] = p / 2
    return QubitPairMatrix(m)


def werner_state(p: float) -> QubitPairMatrix:
    """``p |phi+><phi+| + (1 - p) I/4``."""
    _check_p(p)
    phi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
    return QubitPairMatrix.from_standard(p * np.outer(phi, phi) + (1 - p) * np.eye(4) / 4)


@dataclass(frozen=True)
class BoundaryPoint:
    family: str
    p: float
    s_l: float
    eps: float


def boundary_curve(p_grid) -> list:
    """Points ``(S_L, eps)`` of both boundary families, Werner first."""
    out = []
    for family, make in (("werner", werner_state), ("mems", mems_state)):
        for p in p_grid:
            rho = make(float(p))
            out.append(BoundaryPoint(family, float(p), linear_entropy(rho), negativity(rho)))
    return out


def boundary_negativity(s_l):
    """Largest negativity any two-qubit state can have at linear entropy ``s_l``.

    Along the Werner family ``S_L = 1 - p^2`` and ``eps = (3p - 1)/2``.
    """
    s_l = np.asarray(s_l, dtype=float)
    p = np.sqrt(np.clip(1.0 - s_l, 0.0, 1.0))
    return np.maximum(0.0, (3.0 * p - 1.0) / 2.0)


def distance_to_boundary(s_l, eps, n_points: int = 4001):
    """Euclidean distance in the ``(S_L, eps)`` plane to the entangled frontier.

    The frontier is the Werner curve for ``p in [1/3, 1]``, sampled finely and
    refined with the nearest segment.
    """
    p = np.linspace(1.0 / 3.0, 1.0, n_points)
    curve = np.column_stack([1.0 - p**2, (3.0 * p - 1.0) / 2.0])
    pts = np.column_stack([np.atleast_1d(s_l), np.atleast_1d(eps)]).astype(float)
    a, b = curve[:-1], curve[1:]
    ab = b - a
    ab2 = np.sum(ab**2, axis=1)
    out = np.empty(len(pts))
    for i, x in enumerate(pts):
        t = np.clip(np.sum((x - a) * ab, axis=1) / ab2, 0.0, 1.0)
        proj = a + t[:, None] * ab
        out[i] = np.sqrt(np.min(np.sum((proj - x) ** 2, axis=1)))
    return out if np.ndim(s_l) else float(out[0])


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Symmetrized quadrature covariances of two modes, ordered ``(q1, p1, q2, p2)``."""

    V: np.ndarray

    def __post_init__(self):
        V = np.array(self.V, dtype=float)
        if V.shape != (4, 4):
            raise StateError(f"covariance matrix must be 4x4, got {V.shape}")
        if np.max(np.abs(V - V.T)) > 1e-10:
            raise StateError("covariance matrix is not symmetric")
        lam = np.linalg.eigvalsh(V + 0.5j * SYMPLECTIC_FORM)[0]
        if lam < -1e-8:
            raise StateError(f"covariance matrix violates the uncertainty principle ({lam:.3e})")
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    @property
    def A(self) -> np.ndarray:
        return self.V[:2, :2]

    @property
    def B(self) -> np.ndarray:
        return self.V[2:, 2:]

    @property
    def C(self) -> np.ndarray:
        return self.V[:2, 2:]


def _quadratures(d: int):
    # build on one extra level so products such as q^2 are exact on levels 0..d-1
    a = np.diag(np.sqrt(np.arange(1, d + 1, dtype=float)), 1)
    q = (a + a.T) / np.sqrt(2.0)
    p = -1j * (a - a.T) / np.sqrt(2.0)
    return q, p


def covariance_matrix(rho_AB: DensityOperator) -> CovarianceMatrix:
    """Covariance matrix of a two-mode state (expectations normalized by its trace)."""
    if rho_AB.spec.n_subsystems != 2:
        raise StateError(f"expected two modes, got dims {rho_AB.spec.dims}")
    dA, dB = rho_AB.spec.dims
    R = rho_AB.as_tensor()
    tr = np.einsum("abab->", R).real
    qa, pa = _quadratures(dA)
    qb, pb = _quadratures(dB)

    def local(op, d):
        return op[:d, :d]

    def single(op, which):
        # Tr(rho (op ⊗ I)) or Tr(rho (I ⊗ op))
        if which == 0:
            return np.einsum("abcb,ca->", R, op).real / tr
        return np.einsum("abac,cb->", R, op).real / tr

    def cross(x, y):
        return np.einsum("abcd,ca,db->", R, x, y, optimize=True).real / tr

    ops_a = [qa, pa]
    ops_b = [qb, pb]
    mean = [single(local(o, dA), 0) for o in ops_a] + [single(local(o, dB), 1) for o in ops_b]
    V = np.zeros((4, 4))
    for mode, ops, d in ((0, ops_a, dA), (1, ops_b, dB)):
        for i in range(2):
            for j in range(2):
                sym = local((ops[i] @ ops[j] + ops[j] @ ops[i]) / 2, d)
                V[2 * mode + i, 2 * mode + j] = single(sym, mode)
    for i in range(2):
        for j in range(2):
            V[i, 2 + j] = V[2 + j, i] = cross(local(ops_a[i], dA), local(ops_b[j], dB))
    V -= np.outer(mean, mean)
    return CovarianceMatrix(0.5 * (V + V.T))


def first_moments(rho_AB: DensityOperator) -> np.ndarray:
    """``<q1>, <p1>, <q2>, <p2>``."""
    dA, dB = rho_AB.spec.dims
    R = rho_AB.as_tensor()
    tr = np.einsum("abab->", R).real
    qa, pa = _quadratures(dA)
    qb, pb = _quadratures(dB)
    out = [np.einsum("abcb,ca->", R, o[:dA, :dA]).real / tr for o in (qa, pa)]
    out += [np.einsum("abac,cb->", R, o[:dB, :dB]).real / tr for o in (qb, pb)]
    return np.array(out)


def simon_delta(V, partial_transposed: bool = False) -> float:
    """Uncertainty function of a two-mode covariance matrix.

    ``detA detB + (1/4 - detC)^2 - Tr(AJ CJ BJ (CJ)^T) - (detA + detB)/4``,
    which is non-negative for every physical state and vanishes on the
    vacuum.  With ``partial_transposed`` the cross determinant enters as
    ``|det C|``: the mirror reflection ``p2 -> -p2`` flips the sign of
    ``det C``, and a negative result certifies entanglement (for Gaussian
    states it is also necessary).
    """
    if isinstance(V, CovarianceMatrix):
        A, B, C = V.A, V.B, V.C
    else:
        V = np.asarray(V, dtype=float)
        A, B, C = V[:2, :2], V[2:, 2:], V[:2, 2:]
    det_a, det_b, det_c = np.linalg.det(A), np.linalg.det(B), np.linalg.det(C)
    if partial_transposed:
        det_c = abs(det_c)
    At, Bt, Ct = A @ J, B @ J, C @ J
    return float(
        det_a * det_b + (0.25 - det_c) ** 2 - np.trace(At @ Ct @ Bt @ Ct.T) - (det_a + det_b) / 4.0
    )
