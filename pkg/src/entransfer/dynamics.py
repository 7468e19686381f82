"""Bi-local resonant Jaynes-Cummings evolution of qubit pairs coupled to two cavities.

Each qubit ``i`` couples to its own cavity mode through
``H = Omega (a |1><0| + a† |0><1|)`` and time is measured as ``tau = Omega t``.
Qubits always start in ``|00>``.

Three routes produce the reduced qubit-pair state and they are kept
independent on purpose:

* :func:`interact_pair` + :func:`reduced_qubit_state` evolve the full
  ``q1 ⊗ q2 ⊗ A ⊗ B`` density matrix and trace the cavities out;
* :func:`closed_form_elements` sums the series for ``A, B, C, D`` directly
  from the cavity-state coefficients;
* :func:`pair_state_from_field` / :func:`field_after_pair` act on an
  arbitrary cavity state through the conditional field operators
  ``<i|U|0>``, which is what the sequential-pair protocol runs on.

Fock truncation drops a small amount of probability from the cavity state.
Reduced qubit states put that deficit on ``|00>``, i.e. ``F = 1 - A - B - C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError, LeakageError
from .fock import DensityOperator, HilbertSpec, apply_operator, partial_trace, tensor
from .measures import negativity
from .qubits import QubitPairMatrix
from .squeezing import SqueezeParams, series_tables

TOL_LEAK = 1e-8
TOL_X = 1e-8


@dataclass(frozen=True)
class InteractionSchedule:
    """Timing of one run of the protocol, in units of ``1/Omega``.

    ``tau2`` is the second pair's interaction time (``None`` for a single
    pair), ``delta_tau`` delays qubit 2 relative to qubit 1 and
    ``kappa_tbar`` is the cavity-decay exposure between the two pairs.
    """

    tau1: float
    tau2: Optional[float] = None
    delta_tau: float = 0.0
    kappa_tbar: float = 0.0

    def __post_init__(self):
        for name in ("tau1", "tau2", "delta_tau", "kappa_tbar"):
            v = getattr(self, name)
            if v is None and name == "tau2":
                continue
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
        if self.delta_tau > self.tau1:
            raise ValueError(f"delta_tau={self.delta_tau} exceeds tau1={self.tau1}")


def jc_unitary(tau: float, n_max: int) -> np.ndarray:
    """``exp(-i H tau / Omega)`` on qubit ⊗ mode, built block by block.

    On ``{|0, n>, |1, n-1>}`` the block is ``[[cos x, -i sin x], [-i sin x, cos x]]``
    with ``x = tau sqrt(n)``.  ``|1, n_max>`` has no partner inside the
    cutoff and is left untouched.
    """
    if n_max < 1:
        raise DimensionError(f"n_max must be >= 1, got {n_max}")
    d = n_max + 1
    U = np.zeros((2 * d, 2 * d), dtype=complex)
    U[0, 0] = 1.0
    for n in range(1, d):
        g, e = n, d + n - 1  # |0, n>, |1, n-1>
        x = tau * math.sqrt(n)
        U[g, g] = U[e, e] = math.cos(x)
        U[g, e] = U[e, g] = -1j * math.sin(x)
    U[2 * d - 1, 2 * d - 1] = 1.0
    return U


def _mode_dims(rho_AB: DensityOperator):
    if rho_AB.spec.n_subsystems != 2:
        raise DimensionError(f"expected a two-mode cavity state, got dims {rho_AB.spec.dims}")
    return rho_AB.spec.dims


def boundary_population(rho_joint: DensityOperator) -> float:
    """Population of the frozen states ``|1>_i |n_max>`` for either qubit."""
    dq1, dq2, dA, dB = rho_joint.spec.dims
    diag = np.real(np.diagonal(rho_joint.matrix)).reshape(dq1, dq2, dA, dB)
    return float(diag[1, :, dA - 1, :].sum() + diag[:, 1, :, dB - 1].sum())


def interact_pair(rho_AB: DensityOperator, tau: float, tau_b: Optional[float] = None) -> DensityOperator:
    """Joint state ``q1 ⊗ q2 ⊗ A ⊗ B`` after both qubits interact with their cavity.

    Qubit 1 couples to A for ``tau`` and qubit 2 to B for ``tau_b`` (default
    ``tau``).  Raises :class:`LeakageError` if the frozen truncation-boundary
    states carry more than ``1e-8`` of population.
    """
    dA, dB = _mode_dims(rho_AB)
    tau_b = tau if tau_b is None else tau_b
    qubits = DensityOperator._trusted(HilbertSpec((2, 2)), np.diag([1.0, 0, 0, 0]).astype(complex))
    joint = tensor(qubits, rho_AB)
    joint = apply_operator(joint, jc_unitary(tau, dA - 1), (0, 2))
    joint = apply_operator(joint, jc_unitary(tau_b, dB - 1), (1, 3))
    leak = boundary_population(joint)
    if leak > TOL_LEAK:
        raise LeakageError(f"population {leak:.3e} on frozen truncation-boundary states")
    return joint


def _complete(m: np.ndarray) -> np.ndarray:
    # truncation deficit goes to |00>, index 0 in standard order
    m = m.copy()
    m[0, 0] += 1.0 - np.trace(m).real
    return m


def reduced_qubit_state(rho_joint: DensityOperator, require_x: bool = True) -> QubitPairMatrix:
    """Trace out both cavities and return the pair in reporting order."""
    if rho_joint.spec.dims[:2] != (2, 2):
        raise DimensionError(f"expected q1 ⊗ q2 ⊗ A ⊗ B, got dims {rho_joint.spec.dims}")
    m = _complete(partial_trace(rho_joint, (0, 1)).matrix)
    pair = QubitPairMatrix.from_standard(m)
    if require_x and pair.off_x_magnitude() > TOL_X:
        raise LeakageError(f"reduced state is not X-shaped (off-X {pair.off_x_magnitude():.3e})")
    return pair


def residual_field_state(rho_joint: DensityOperator) -> DensityOperator:
    """Cavity state left after the interaction (qubits traced out)."""
    return partial_trace(rho_joint, (2, 3))


def _factors(tau: float, d: int):
    """Field amplitudes of ``<0|U|0> = diag(cos)`` and ``<1|U|0> = -i sin`` shifted down."""
    x = tau * np.sqrt(np.arange(d))
    return (np.cos(x).astype(complex), -1j * np.sin(x))


def closed_form_elements(r: float, theta: float, tau1, n_max: int, tol_trunc: float = 1e-6):
    """``(A, B, C, D, F)`` of the first pair from the coefficient series.

    ``A, B, C`` weigh the cavity populations by ``sin^2/cos^2(tau sqrt(photons))``
    of each mode and ``D`` weighs the ``|n, n'> <-> |n+1, n'+1>`` coherences
    by ``sin(tau sqrt(n+1)) cos(tau sqrt(n))`` per mode.  ``tau1`` may be an
    array, in which case every element is an array of the same shape.
    """
    params = SqueezeParams(r, theta, n_max, tol_trunc)
    P, Q = series_tables(params.r, params.theta, params.n_max)
    tau = np.asarray(tau1, dtype=float)
    x = tau[..., None] * np.sqrt(np.arange(n_max + 1))
    s2, c2 = np.sin(x) ** 2, np.cos(x) ** 2
    sc = np.sin(x[..., 1:]) * np.cos(x[..., :-1])  # sin(tau sqrt(n+1)) cos(tau sqrt(n))
    Qn = Q[:-1, :-1]
    A = np.einsum("...i,ij,...j->...", s2, P, s2)
    B = np.einsum("...i,ij,...j->...", s2, P, c2)
    C = np.einsum("...i,ij,...j->...", c2, P, s2)
    D = np.einsum("...i,ij,...j->...", sc, Qn, sc)
    F = 1.0 - A - B - C
    if tau.ndim == 0:
        return float(A), float(B), float(C), float(D), float(F)
    return A, B, C, D, F


def pair_state_from_field(rho_AB: DensityOperator, tau_a: float, tau_b: Optional[float] = None) -> QubitPairMatrix:
    """Qubit pair produced by a cavity state, without forming the joint state.

    ``<ij|rho_12|kl> = Tr[(K_i ⊗ K_j) rho_AB (K_k ⊗ K_l)†]`` with
    ``K_i = <i|U|0>`` acting on the field.  ``K_0`` is diagonal and ``K_1``
    lowers the photon number by one, so every element is a sum over one
    shifted diagonal of ``rho_AB``.
    """
    dA, dB = _mode_dims(rho_AB)
    tau_b = tau_a if tau_b is None else tau_b
    fa, fb = _factors(tau_a, dA), _factors(tau_b, dB)
    R = rho_AB.as_tensor()
    m = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    na, nb = dA - max(i, k), dB - max(j, l)
                    block = np.einsum("abab->ab", R[i:i + na, j:j + nb, k:k + na, l:l + nb])
                    wa = fa[i][i:i + na] * np.conj(fa[k][k:k + na])
                    wb = fb[j][j:j + nb] * np.conj(fb[l][l:l + nb])
                    m[2 * i + j, 2 * k + l] = wa @ block @ wb
    return QubitPairMatrix.from_standard(_complete(0.5 * (m + m.conj().T)))


def field_after_pair(rho_AB: DensityOperator, tau_a: float, tau_b: Optional[float] = None) -> DensityOperator:
    """Cavity state after a fresh ``|00>`` pair interacts: ``sum_ij (K_i⊗K_j) rho (K_i⊗K_j)†``."""
    dA, dB = _mode_dims(rho_AB)
    tau_b = tau_a if tau_b is None else tau_b
    fa, fb = _factors(tau_a, dA), _factors(tau_b, dB)
    R = rho_AB.as_tensor()
    out = np.zeros_like(R, dtype=complex)
    for i in range(2):
        for j in range(2):
            na, nb = dA - i, dB - j
            wa, wb = fa[i][i:], fb[j][j:]
            w = (wa[:, None, None, None] * wb[None, :, None, None]
                 * np.conj(wa)[None, None, :, None] * np.conj(wb)[None, None, None, :])
            out[:na, :nb, :na, :nb] += w * R[i:, j:, i:, j:]
    mat = out.reshape(rho_AB.matrix.shape)
    return DensityOperator._trusted(rho_AB.spec, 0.5 * (mat + mat.conj().T), rho_AB.trace)


def apply_cavity_decay(rho_AB: DensityOperator, kappa_tbar: float) -> DensityOperator:
    """No-jump damping of both cavities, renormalized to the input trace.

    ``<pA, pB|rho|qA, qB>`` is scaled by ``exp[-kappa_tbar (pA + pB + qA + qB)]``,
    so the population of ``p`` photons in a mode decays as ``exp(-2 kappa_tbar p)``.
    """
    if not (math.isfinite(kappa_tbar) and kappa_tbar >= 0):
        raise ValueError(f"kappa_tbar must be finite and non-negative, got {kappa_tbar}")
    dA, dB = _mode_dims(rho_AB)
    if kappa_tbar == 0:
        return rho_AB
    na, nb = np.arange(dA), np.arange(dB)
    photons = (na[:, None, None, None] + nb[None, :, None, None]
               + na[None, None, :, None] + nb[None, None, None, :])
    R = rho_AB.as_tensor() * np.exp(-kappa_tbar * photons)
    mat = R.reshape(rho_AB.matrix.shape)
    mat *= rho_AB.trace / np.trace(mat).real
    return DensityOperator._trusted(rho_AB.spec, mat, rho_AB.trace)


def sequential_pair(rho_AB_after: DensityOperator, tau2: float) -> QubitPairMatrix:
    """State of a second, fresh pair (qubits 3, 4) after interacting for ``tau2``."""
    return pair_state_from_field(rho_AB_after, tau2)


def max_over_tau2(rho_AB_after: DensityOperator, tau2_grid):
    """``(tau2_star, eps_star)``: grid maximum of the second pair's negativity.

    Ties go to the smallest ``tau2``.
    """
    grid = np.asarray(tau2_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("tau2 grid is empty")
    order = np.argsort(grid, kind="stable")
    best_tau, best = float(grid[order[0]]), -1.0
    for t in grid[order]:
        e = negativity(sequential_pair(rho_AB_after, float(t)))
        if e > best:
            best_tau, best = float(t), e
    return best_tau, best


def staggered_interaction(rho_AB: DensityOperator, tau: float, delta_tau: float) -> QubitPairMatrix:
    """First pair with qubit 2 entering ``delta_tau`` after qubit 1.

    Qubit 2 idles (no evolution in the interaction picture) and then couples
    for ``tau - delta_tau``, while qubit 1 couples for the full ``tau``.
    """
    if delta_tau < 0 or delta_tau > tau:
        raise ValueError(f"need 0 <= delta_tau <= tau, got delta_tau={delta_tau}, tau={tau}")
    return pair_state_from_field(rho_AB, tau, tau - delta_tau)


def run_schedule(rho_AB: DensityOperator, schedule: InteractionSchedule):
    """First pair, the field it leaves behind (decayed), and the second pair if ``tau2`` is set."""
    s = schedule
    first = pair_state_from_field(rho_AB, s.tau1, s.tau1 - s.delta_tau)
    field = field_after_pair(rho_AB, s.tau1, s.tau1 - s.delta_tau)
    field = apply_cavity_decay(field, s.kappa_tbar)
    second = None if s.tau2 is None else sequential_pair(field, s.tau2)
    return first, field, second
