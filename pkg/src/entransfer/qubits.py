"""Two-qubit density matrices in the reporting basis order."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, StateError
from .fock import TOL_HERM, TOL_PSD, TOL_TRACE

# reporting order {|11>, |10>, |01>, |00>} <-> standard order {|00>, |01>, |10>, |11>}
_REVERSED_BASIS = np.array([3, 2, 1, 0])

# entries allowed to be nonzero in an X-shaped matrix
X_MASK = np.eye(4, dtype=bool) | np.eye(4, dtype=bool)[::-1]


@dataclass(frozen=True, eq=False)
class QubitPairMatrix:
    """4x4 two-qubit density matrix, stored in the order ``|11>, |10>, |01>, |00>``.

    The named elements follow the X-shaped form produced by bi-local
    resonant dynamics: ``A, B, C, F`` are the populations of ``|11>, |10>,
    |01>, |00>`` and ``D = -<11|rho|00>``.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise DimensionError(f"a qubit pair matrix is 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > TOL_HERM:
            raise StateError("qubit pair matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL_TRACE:
            raise StateError(f"qubit pair matrix has trace {tr!r}")
        lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lam < -TOL_PSD:
            raise StateError(f"qubit pair matrix is not PSD (min eigenvalue {lam:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_standard(cls, m) -> "QubitPairMatrix":
        m = np.asarray(m)
        p = _REVERSED_BASIS
        return cls(m[np.ix_(p, p)])

    @classmethod
    def from_elements(cls, A, B, C, D, F=None) -> "QubitPairMatrix":
        if F is None:
            F = 1.0 - A - B - C
        m = np.diag([A, B, C, F]).astype(complex)
        m[0, 3] = -D
        m[3, 0] = -np.conj(D)
        return cls(m)

    def standard(self) -> np.ndarray:
        """Same matrix in the ``|00>, |01>, |10>, |11>`` order."""
        p = _REVERSED_BASIS
        return self.matrix[np.ix_(p, p)]

    @property
    def A(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def B(self) -> float:
        return float(self.matrix[1, 1].real)

    @property
    def C(self) -> float:
        return float(self.matrix[2, 2].real)

    @property
    def F(self) -> float:
        return float(self.matrix[3, 3].real)

    @property
    def D(self) -> complex:
        d = -self.matrix[0, 3]
        return float(d.real) if abs(d.imag) < 1e-15 else complex(d)

    def elements(self):
        """``(A, B, C, D, F)``."""
        return self.A, self.B, self.C, self.D, self.F

    def off_x_magnitude(self) -> float:
        """Largest magnitude outside the diagonal and anti-diagonal."""
        return float(np.max(np.abs(self.matrix[~X_MASK])))
