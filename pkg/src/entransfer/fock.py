"""Dense states and operators on truncated multipartite Hilbert spaces.

Subsystems are ordered left to right and a composite basis index is the
row-major flattening of the per-subsystem indices, so ``|i, j>`` on dims
``(d0, d1)`` sits at ``i * d1 + j``.  Fock levels ascend ``0 .. n_max`` and a
qubit is a two-level subsystem with ``|0>`` (ground) at index 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, StateError

TOL_NORM = 1e-9
TOL_HERM = 1e-10
TOL_TRACE = 1e-8
TOL_PSD = 1e-8


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HilbertSpec:
    """Ordered list of subsystem dimensions."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("a Hilbert space needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise DimensionError(f"subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def check_index(self, index: int) -> int:
        if not isinstance(index, (int, np.integer)) or not 0 <= index < len(self.dims):
            raise DimensionError(f"subsystem index {index!r} out of range for dims {self.dims}")
        return int(index)

    def restrict(self, keep: Sequence[int]) -> "HilbertSpec":
        return HilbertSpec(tuple(self.dims[i] for i in keep))

    def __add__(self, other: "HilbertSpec") -> "HilbertSpec":
        return HilbertSpec(self.dims + other.dims)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector.

    Truncated Fock expansions lose a little norm, so the squared norm is only
    required to lie in ``[1 - tol_norm, 1]``.
    """

    spec: HilbertSpec
    amplitudes: np.ndarray
    tol_norm: float = TOL_NORM

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amp.size != self.spec.total_dim:
            raise DimensionError(
                f"{amp.size} amplitudes for a space of dimension {self.spec.total_dim}"
            )
        norm2 = float(np.vdot(amp, amp).real)
        if not (1.0 - self.tol_norm <= norm2 <= 1.0 + 1e-12):
            raise StateError(f"squared norm {norm2!r} outside [1 - {self.tol_norm}, 1]")
        object.__setattr__(self, "amplitudes", _frozen(amp))

    @classmethod
    def basis(cls, spec: HilbertSpec, levels: Sequence[int]) -> "PureState":
        """Product basis ket ``|levels[0], levels[1], ...>``."""
        if len(levels) != spec.n_subsystems:
            raise DimensionError(f"need {spec.n_subsystems} levels, got {len(levels)}")
        for lv, d in zip(levels, spec.dims):
            if not 0 <= lv < d:
                raise DimensionError(f"level {lv} outside subsystem of dimension {d}")
        amp = np.zeros(spec.total_dim, dtype=complex)
        amp[np.ravel_multi_index(tuple(levels), spec.dims)] = 1.0
        return cls(spec, amp)

    @classmethod
    def _trusted(cls, spec, amplitudes, tol_norm=TOL_NORM):
        obj = object.__new__(cls)
        object.__setattr__(obj, "spec", spec)
        object.__setattr__(obj, "amplitudes", _frozen(np.asarray(amplitudes).ravel()))
        object.__setattr__(obj, "tol_norm", tol_norm)
        return obj

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.spec.dims)

    def projector(self) -> "DensityOperator":
        return DensityOperator._trusted(
            self.spec, np.outer(self.amplitudes, self.amplitudes.conj()), self.norm2
        )


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive semidefinite matrix with a known trace.

    ``trace`` is the value the matrix trace must match; it is 1 except for
    states built from a truncated Fock expansion, whose trace is the retained
    weight.
    """

    spec: HilbertSpec
    matrix: np.ndarray
    trace: float = 1.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.spec.total_dim
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} does not match dimension {n}")
        herm = float(np.max(np.abs(m - m.conj().T))) if n else 0.0
        if herm > TOL_HERM:
            raise StateError(f"matrix is not Hermitian (max deviation {herm:.3e})")
        tr = float(np.trace(m).real)
        if abs(tr - self.trace) > TOL_TRACE:
            raise StateError(f"trace {tr!r} differs from expected {self.trace!r}")
        lam = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if lam < -TOL_PSD:
            raise StateError(f"matrix is not positive semidefinite (min eigenvalue {lam:.3e})")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "trace", float(self.trace))

    @classmethod
    def _trusted(cls, spec, matrix, trace=1.0):
        # for outputs of invariant-preserving maps applied to validated inputs
        obj = object.__new__(cls)
        object.__setattr__(obj, "spec", spec)
        object.__setattr__(obj, "matrix", _frozen(matrix))
        object.__setattr__(obj, "trace", float(trace))
        return obj

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityOperator":
        return psi.projector()

    def as_tensor(self) -> np.ndarray:
        """Matrix reshaped to ``dims + dims`` (ket indices first)."""
        return self.matrix.reshape(self.spec.dims * 2)

    def expectation(self, op: np.ndarray) -> complex:
        """Unnormalized ``Tr(rho op)``."""
        return complex(np.sum(self.matrix * np.asarray(op).T))

    def purity(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))


State = Union[PureState, DensityOperator]


def tensor(x: State, y: State) -> State:
    """Kronecker product ``x ⊗ y``; both operands must be of the same kind."""
    spec = x.spec + y.spec
    if isinstance(x, PureState) and isinstance(y, PureState):
        return PureState._trusted(spec, np.kron(x.amplitudes, y.amplitudes),
                                  max(x.tol_norm, y.tol_norm))
    if isinstance(x, DensityOperator) and isinstance(y, DensityOperator):
        return DensityOperator._trusted(spec, np.kron(x.matrix, y.matrix), x.trace * y.trace)
    raise TypeError("tensor() needs two PureStates or two DensityOperators")


def _keep_list(spec: HilbertSpec, keep) -> list:
    if isinstance(keep, (int, np.integer)):
        keep = [keep]
    keep = sorted({spec.check_index(k) for k in keep})
    if not keep:
        raise DimensionError("keep must name at least one subsystem")
    return keep


def partial_trace(state: State, keep) -> DensityOperator:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems stay in their original order.  A :class:`PureState`
    is reduced directly from its amplitudes without forming the full
    projector.
    """
    spec = state.spec
    keep = _keep_list(spec, keep)
    drop = [i for i in range(spec.n_subsystems) if i not in keep]
    dk = int(np.prod([spec.dims[i] for i in keep]))
    new_spec = spec.restrict(keep)
    if isinstance(state, PureState):
        psi = state.as_tensor().transpose(keep + drop).reshape(dk, -1)
        return DensityOperator._trusted(new_spec, psi @ psi.conj().T, state.norm2)
    n = spec.n_subsystems
    t = state.as_tensor()
    ket = "".join(chr(97 + i) for i in range(n))
    bra = "".join(chr(97 + i) if i in drop else chr(65 + i) for i in range(n))
    out = "".join(chr(97 + i) for i in keep) + "".join(chr(65 + i) for i in keep)
    red = np.einsum(f"{ket}{bra}->{out}", t)
    return DensityOperator._trusted(new_spec, red.reshape(dk, dk), state.trace)


def partial_transpose(rho: DensityOperator, subsystem: int) -> np.ndarray:
    """Matrix of ``rho`` transposed on one subsystem only (not necessarily PSD)."""
    spec = rho.spec
    k = spec.check_index(subsystem)
    n = spec.n_subsystems
    axes = list(range(2 * n))
    axes[k], axes[n + k] = axes[n + k], axes[k]
    return rho.as_tensor().transpose(axes).reshape(rho.matrix.shape)


def permute_subsystems(rho: DensityOperator, order: Sequence[int]) -> DensityOperator:
    """Reorder subsystems so that new subsystem ``i`` is old ``order[i]``."""
    spec = rho.spec
    order = [spec.check_index(i) for i in order]
    if sorted(order) != list(range(spec.n_subsystems)):
        raise DimensionError(f"{order} is not a permutation of the subsystems")
    n = spec.n_subsystems
    t = rho.as_tensor().transpose(order + [n + i for i in order])
    new_spec = HilbertSpec(tuple(spec.dims[i] for i in order))
    return DensityOperator._trusted(new_spec, t.reshape(rho.matrix.shape), rho.trace)


def annihilation(n_max: int) -> np.ndarray:
    """Truncated ``a`` on Fock levels ``0..n_max``: ``<n-1|a|n> = sqrt(n)``."""
    if n_max < 1:
        raise DimensionError(f"n_max must be >= 1, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def creation(n_max: int) -> np.ndarray:
    return annihilation(n_max).conj().T


def number_operator(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)


def beam_splitter(theta: float, n_max: int) -> np.ndarray:
    """``exp[theta (A a† - A† a)]`` on mode A ⊗ mode a.

    The generator conserves ``N_A + N_a``, so it is exponentiated block by
    block on each total-excitation sector ``{|j, N-j>}``.  Sectors with
    ``N > n_max`` are cut by the truncation; their blocks are still
    exponentiated exactly, which keeps the result unitary.
    """
    if n_max < 1:
        raise DimensionError(f"n_max must be >= 1, got {n_max}")
    d = n_max + 1
    U = np.zeros((d * d, d * d), dtype=complex)
    for total in range(2 * n_max + 1):
        js = np.arange(max(0, total - n_max), min(total, n_max) + 1)
        idx = js * d + (total - js)
        # K|j, N-j> = sqrt(j (N-j+1)) |j-1, N-j+1> - sqrt((j+1)(N-j)) |j+1, N-j-1>
        m = len(js)
        K = np.zeros((m, m))
        for p in range(m - 1):
            j = js[p]
            amp = np.sqrt((j + 1) * (total - j))
            K[p + 1, p] = -amp
            K[p, p + 1] = amp
        U[np.ix_(idx, idx)] = expm(theta * K)
    return U


def _check_unitary_shape(spec: HilbertSpec, U: np.ndarray):
    if U.shape != (spec.total_dim, spec.total_dim):
        raise DimensionError(f"operator shape {U.shape} does not match dimension {spec.total_dim}")


def evolve(rho: DensityOperator, U: np.ndarray) -> DensityOperator:
    """``U rho U†`` for an operator on the full space."""
    U = np.asarray(U)
    _check_unitary_shape(rho.spec, U)
    return DensityOperator._trusted(rho.spec, U @ rho.matrix @ U.conj().T, rho.trace)


def _apply_to_ket_axes(t, op, targets, offset, dims):
    k = len(targets)
    tdims = [dims[i] for i in targets]
    op_t = op.reshape(tdims * 2)
    axes = [offset + i for i in targets]
    out = np.tensordot(op_t, t, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the new target axes first; move them back into place
    return np.moveaxis(out, list(range(k)), axes)


def apply_operator(state: State, op: np.ndarray, targets: Sequence[int]) -> State:
    """Apply a local operator acting on ``targets`` (in that factor order).

    For a density operator this is ``O rho O†``.  Cost scales with the local
    dimension rather than the full one.
    """
    spec = state.spec
    targets = [spec.check_index(i) for i in targets]
    if len(set(targets)) != len(targets):
        raise DimensionError(f"repeated target subsystem in {targets}")
    dloc = int(np.prod([spec.dims[i] for i in targets]))
    op = np.asarray(op)
    if op.shape != (dloc, dloc):
        raise DimensionError(f"operator shape {op.shape} does not match local dimension {dloc}")
    n = spec.n_subsystems
    if isinstance(state, PureState):
        t = _apply_to_ket_axes(state.as_tensor(), op, targets, 0, spec.dims)
        return PureState._trusted(spec, t.ravel(), state.tol_norm)
    t = _apply_to_ket_axes(state.as_tensor(), op, targets, 0, spec.dims)
    t = _apply_to_ket_axes(t, op.conj(), targets, n, spec.dims)
    return DensityOperator._trusted(spec, t.reshape(state.matrix.shape), state.trace)
