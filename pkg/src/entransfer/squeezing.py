"""Two-mode squeezed source and the correlated two-cavity state it feeds.

Each cavity mode (A, B) is coupled to one arm (a, b) of a two-mode squeezed
field through a beam splitter ``exp[theta (A a† - A† a)]``.  Under that
operator a single photon in ``a`` ends up in the cavity with amplitude
``-sin(theta)``, so ``sin(theta)**2`` is the fraction of the source that is
transferred into the cavities.

The cavity state is available by two independent routes:

* :func:`prepare_cavity_state_oracle` builds the four-mode pure state,
  applies the beam-splitter unitaries and traces out the source modes;
* :func:`assemble_cavity_state_closed_form` sums the binomial coefficients
  returned by :func:`cavity_coefficient`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError, TruncationError
from .fock import DensityOperator, HilbertSpec, PureState, apply_operator, beam_splitter, partial_trace

TOL_TRUNC = 1e-6


def truncation_weight(r: float, n_max: int) -> float:
    """Squared norm ``sum_{n<=n_max} tanh(r)^(2n) / cosh(r)^2`` kept by the cutoff."""
    # closed geometric sum: 1 - tanh(r)^(2 (n_max + 1))
    return 1.0 - math.tanh(r) ** (2 * (n_max + 1))


def minimal_n_max(r: float, tol_trunc: float = TOL_TRUNC) -> int:
    """Smallest cutoff whose truncation weight is at least ``1 - tol_trunc``."""
    if r == 0:
        return 1
    t2 = math.tanh(r) ** 2
    n = max(1, math.ceil(math.log(tol_trunc) / math.log(t2)) - 1)
    while truncation_weight(r, n) < 1.0 - tol_trunc:
        n += 1
    while n > 1 and truncation_weight(r, n - 1) >= 1.0 - tol_trunc:
        n -= 1
    return n


def auto_n_max(r: float, tol_trunc: float = TOL_TRUNC, floor: int = 20) -> int:
    """Default cutoff: at least ``floor`` and enough to meet ``tol_trunc``."""
    return max(floor, minimal_n_max(r, tol_trunc))


@dataclass(frozen=True)
class SqueezeParams:
    """Source squeezing ``r``, beam-splitter angle ``theta`` and Fock cutoff.

    The constructor rejects cutoffs that discard more than ``tol_trunc`` of
    the source's probability.
    """

    r: float
    theta: float
    n_max: int
    tol_trunc: float = TOL_TRUNC

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"squeezing r must be finite and >= 0, got {self.r}")
        if not 0 <= self.theta <= math.pi / 2 + 1e-15:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))
        w = self.weight
        if w < 1.0 - self.tol_trunc:
            raise TruncationError(
                f"n_max={self.n_max} keeps weight {w:.3e} at r={self.r}; "
                f"need >= 1 - {self.tol_trunc:g} (try n_max >= {minimal_n_max(self.r, self.tol_trunc)})",
                weight=w,
                required=1.0 - self.tol_trunc,
            )

    @classmethod
    def from_mixing(cls, r, sin2_theta, n_max="auto", tol_trunc=TOL_TRUNC):
        """Build from the transferred fraction ``sin(theta)**2``."""
        if not 0 <= sin2_theta <= 1:
            raise ValueError(f"sin^2(theta) must lie in [0, 1], got {sin2_theta}")
        if n_max == "auto":
            n_max = auto_n_max(r, tol_trunc)
        return cls(r, math.asin(math.sqrt(sin2_theta)), n_max, tol_trunc)

    @property
    def sin2_theta(self) -> float:
        return math.sin(self.theta) ** 2

    @property
    def weight(self) -> float:
        return truncation_weight(self.r, self.n_max)

    @property
    def dim(self) -> int:
        return self.n_max + 1


def two_mode_squeezed(r: float, n_max: int, tol_trunc: float = TOL_TRUNC) -> PureState:
    """Truncated ``|S> = sum_n tanh(r)^n / cosh(r) |n, n>`` on mode ⊗ mode."""
    w = truncation_weight(r, n_max)
    if w < 1.0 - tol_trunc:
        raise TruncationError(f"n_max={n_max} keeps weight {w:.3e} at r={r}", w, 1.0 - tol_trunc)
    d = n_max + 1
    amp = np.zeros((d, d), dtype=complex)
    amp[np.arange(d), np.arange(d)] = np.tanh(r) ** np.arange(d) / np.cosh(r)
    return PureState(HilbertSpec((d, d)), amp.ravel(), tol_norm=max(tol_trunc, 1e-9))


def prepare_cavity_state_oracle(params: SqueezeParams) -> DensityOperator:
    """Cavity state from explicit beam-splitter unitaries and a partial trace.

    Subsystem order of the intermediate four-mode state is ``(a, b, A, B)``;
    the result is on ``(A, B)``.
    """
    d = params.dim
    source = two_mode_squeezed(params.r, params.n_max, params.tol_trunc)
    amp = np.zeros((d, d, d, d), dtype=complex)
    amp[:, :, 0, 0] = source.as_tensor()
    psi = PureState._trusted(HilbertSpec((d,) * 4), amp.ravel(), source.tol_norm)
    U = beam_splitter(params.theta, params.n_max)
    psi = apply_operator(psi, U, (2, 0))  # acts on (A, a)
    psi = apply_operator(psi, U, (3, 1))  # acts on (B, b)
    rho = partial_trace(psi, (2, 3))
    return DensityOperator._trusted(rho.spec, rho.matrix, params.weight)


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _power(base, exponent):
    # 0**0 == 1, exact zeros stay zeros
    return np.power(float(base), np.asarray(exponent, dtype=float))


def cavity_coefficient(r: float, theta: float, n: int, m: int, k: int, l: int) -> float:
    """Weight of ``|n-k><m-k| ⊗ |n-l><m-l|`` in the cavity state.

    ``n, m`` are source photon numbers of the ket and bra, ``k, l`` the photons
    left behind in source modes a and b.  The weight is
    ``tanh(r)^(n+m) / cosh(r)^2`` times, for each ``alpha in (n, m)`` and
    ``beta in (k, l)``, the binomial amplitude
    ``sqrt(C(alpha, beta)) cos(theta)^beta sin(theta)^(alpha - beta)``.
    """
    if min(n, m, k, l) < 0 or max(k, l) > min(n, m):
        raise DimensionError(f"need 0 <= k, l <= min(n, m); got n={n}, m={m}, k={k}, l={l}")
    val = _coefficient_grid(r, theta, np.array(n), np.array(m), np.array(k), np.array(l))
    return float(val)


def _coefficient_grid(r, theta, n, m, k, l):
    t, c, s = math.tanh(r), math.cos(theta), math.sin(theta)
    c = 0.0 if abs(c) < 1e-15 else c
    log_binoms = 0.5 * (_log_binom(n, k) + _log_binom(m, k) + _log_binom(n, l) + _log_binom(m, l))
    return (
        _power(t, n + m) / math.cosh(r) ** 2
        * np.exp(log_binoms)
        * _power(c, 2 * (k + l))
        * _power(s, 2 * (n + m) - 2 * (k + l))
    )


def assemble_cavity_state_closed_form(params: SqueezeParams) -> DensityOperator:
    """Cavity state as the coefficient sum over source and residual photon numbers."""
    d = params.dim
    rho = np.zeros((d, d, d, d))  # [A ket, B ket, A bra, B bra]
    n, m, k, l = np.meshgrid(*(np.arange(d),) * 4, indexing="ij")
    ok = (k <= np.minimum(n, m)) & (l <= np.minimum(n, m))
    n, m, k, l = n[ok], m[ok], k[ok], l[ok]
    vals = _coefficient_grid(params.r, params.theta, n, m, k, l)
    np.add.at(rho, (n - k, n - l, m - k, m - l), vals)
    return DensityOperator._trusted(HilbertSpec((d, d)), rho.reshape(d * d, d * d), params.weight)


@lru_cache(maxsize=64)
def series_tables(r: float, theta: float, n_max: int):
    """Cavity populations and first off-diagonal band from the coefficient series.

    Returns ``(P, Q)`` with ``P[i, j] = <i, j|rho_AB|i, j>`` and
    ``Q[i, j] = <i, j|rho_AB|i+1, j+1>``, accumulated directly from the
    ``n = m`` and ``m = n + 1`` coefficients.  Cost is ``O(n_max^3)``, so
    this works at cutoffs far beyond what a dense ``rho_AB`` allows.
    """
    d = n_max + 1
    n, k, l = np.meshgrid(np.arange(d), np.arange(d), np.arange(d), indexing="ij")
    ok = (k <= n) & (l <= n)
    n, k, l = n[ok], k[ok], l[ok]
    P = np.zeros((d, d))
    np.add.at(P, (n - k, n - l), _coefficient_grid(r, theta, n, n, k, l))
    Q = np.zeros((d, d))
    sel = n < n_max
    n, k, l = n[sel], k[sel], l[sel]
    np.add.at(Q, (n - k, n - l), _coefficient_grid(r, theta, n, n + 1, k, l))
    P.setflags(write=False)
    Q.setflags(write=False)
    return P, Q


def cavity_state(params: SqueezeParams, method: str = "closed_form") -> DensityOperator:
    """Prepared two-cavity state by the chosen route (``closed_form`` or ``oracle``)."""
    if method == "closed_form":
        return assemble_cavity_state_closed_form(params)
    if method == "oracle":
        return prepare_cavity_state_oracle(params)
    raise ValueError(f"unknown method {method!r}")
