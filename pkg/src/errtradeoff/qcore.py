"""States, observables and the fixed parameters consumed by every relation.

All matrices are dense complex numpy arrays.  Values are immutable once
constructed: the underlying arrays are copied and flagged read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    BadDimension,
    DegenerateObservable,
    DimensionMismatch,
    NonRealExpectation,
    NotDensityMatrix,
    NotHermitian,
    NotNormalized,
)

HERMITIAN_TOL = 1e-12
NORM_REJECT_TOL = 1e-6
PSD_FLOOR = -1e-10
TRACE_TOL = 1e-10
IMAG_TOL = 1e-12
DEGENERATE_TOL = 1e-10
COPLANAR_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator on a d-dimensional space."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state vector or density matrix; exactly one of the two is set."""

    dim: int
    vector: Optional[np.ndarray] = None
    density: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.vector is None) == (self.density is None):
            raise ValueError("QuantumState needs exactly one of vector/density")
        if self.vector is not None:
            object.__setattr__(self, "vector", _frozen(self.vector))
        else:
            object.__setattr__(self, "density", _frozen(self.density))

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def rho(self) -> np.ndarray:
        if self.vector is not None:
            return np.outer(self.vector, self.vector.conj())
        return np.array(self.density)

    def factor(self) -> np.ndarray:
        """Matrix L (d x rank) with rho = L L^dag.

        Expectations and norms are evaluated through L, which keeps quantities
        such as ||X L||_F accurate even when they are close to zero.
        """
        if self.vector is not None:
            return np.array(self.vector).reshape(-1, 1)
        w, v = np.linalg.eigh(self.density)
        keep = w > 0
        return v[:, keep] * np.sqrt(w[keep])


def validate_observable(raw) -> Observable:
    """Check a square matrix for Hermiticity and wrap it.

    Raises:
        BadDimension: not square, or dimension below 2.
        NotHermitian: max |M - M^dag| above 1e-12.
    """
    if isinstance(raw, Observable):
        raw = raw.matrix
    m = np.asarray(raw, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise BadDimension(f"observable must be a square matrix, got shape {m.shape}")
    if m.shape[0] < 2:
        raise BadDimension(f"observable dimension must be >= 2, got {m.shape[0]}")
    dev = float(np.max(np.abs(m - m.conj().T)))
    if dev > HERMITIAN_TOL:
        raise NotHermitian(dev)
    return Observable(dim=m.shape[0], matrix=m)


def make_state(raw) -> QuantumState:
    """Build a pure state from a vector or a mixed state from a matrix.

    Vectors whose norm is within 1e-6 of one are renormalized exactly;
    anything further off is rejected.
    """
    if isinstance(raw, QuantumState):
        return raw
    a = np.asarray(raw, dtype=complex)
    if a.ndim == 1:
        if a.size < 1:
            raise BadDimension("empty state vector")
        nrm = float(np.linalg.norm(a))
        if abs(nrm - 1.0) > NORM_REJECT_TOL:
            raise NotNormalized(f"state vector has norm {nrm:.12g}")
        return QuantumState(dim=a.size, vector=a / nrm)
    if a.ndim == 2 and a.shape[0] == a.shape[1]:
        herm = float(np.max(np.abs(a - a.conj().T)))
        if herm > HERMITIAN_TOL:
            raise NotDensityMatrix(f"density matrix not Hermitian (deviation {herm:.3e})")
        a = (a + a.conj().T) / 2
        lo = float(np.linalg.eigvalsh(a).min())
        if lo < PSD_FLOOR:
            raise NotDensityMatrix(f"density matrix has negative eigenvalue {lo:.3e}")
        tr = float(np.trace(a).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NotDensityMatrix(f"density matrix has trace {tr:.12g}")
        return QuantumState(dim=a.shape[0], density=a)
    raise BadDimension(f"state must be a vector or square matrix, got shape {a.shape}")


def _matrix(op) -> np.ndarray:
    return np.asarray(op.matrix if isinstance(op, Observable) else op, dtype=complex)


def mean_complex(op, state: QuantumState) -> complex:
    """<op> for an arbitrary (not necessarily Hermitian) operator."""
    m = _matrix(op)
    if m.shape != (state.dim, state.dim):
        raise DimensionMismatch(f"operator of shape {m.shape} vs state of dim {state.dim}")
    if state.vector is not None:
        return complex(np.vdot(state.vector, m @ state.vector))
    return complex(np.trace(m @ state.density))


def expectation(obs, state: QuantumState) -> float:
    """Real expectation value <psi|M|psi> or Tr[M rho]."""
    val = mean_complex(obs, state)
    scale = max(1.0, float(np.max(np.abs(_matrix(obs)))))
    if abs(val.imag) > IMAG_TOL * scale:
        raise NonRealExpectation(f"imaginary part {val.imag:.3e} above tolerance")
    return val.real


def std_dev(obs, state: QuantumState) -> float:
    m = _matrix(obs)
    mean = expectation(m, state)
    centred = (m - mean * np.eye(m.shape[0])) @ state.factor()
    return float(np.linalg.norm(centred))


def reduced_observable(obs, state: QuantumState) -> Observable:
    """(A - <A>) / Delta A, which has zero mean and unit spread on the state."""
    m = _matrix(obs)
    mean = expectation(m, state)
    sd = std_dev(m, state)
    if sd <= DEGENERATE_TOL:
        raise DegenerateObservable(f"standard deviation {sd:.3e} is at or below {DEGENERATE_TOL}")
    return Observable(dim=m.shape[0], matrix=(m - mean * np.eye(m.shape[0])) / sd)


@dataclass(frozen=True)
class FixedParams:
    """Quantities fixed by (A, B, state), independent of any scheme."""

    mean_a: float
    mean_b: float
    std_a: float
    std_b: float
    c_ab: float
    tilde_c: float
    corr: complex
    r: float
    phi: float
    phi_prime: float
    q: Optional[float]
    coplanar: bool

    def as_dict(self) -> dict:
        return {
            "meanA": self.mean_a,
            "meanB": self.mean_b,
            "stdA": self.std_a,
            "stdB": self.std_b,
            "cAB": self.c_ab,
            "tildeC": self.tilde_c,
            "corr": self.corr,
            "r": self.r,
            "phi": self.phi,
            "phiPrime": self.phi_prime,
            "q": self.q,
            "coplanar": self.coplanar,
        }


def fixed_params(A, B, state: QuantumState) -> FixedParams:
    a, b = _matrix(A), _matrix(B)
    if a.shape != b.shape or a.shape[0] != state.dim:
        raise DimensionMismatch(f"A {a.shape}, B {b.shape}, state dim {state.dim}")
    L = state.factor()
    eye = np.eye(state.dim)
    mean_a, mean_b = expectation(a, state), expectation(b, state)
    da = (a - mean_a * eye) @ L
    db = (b - mean_b * eye) @ L
    std_a, std_b = float(np.linalg.norm(da)), float(np.linalg.norm(db))
    for name, sd in (("A", std_a), ("B", std_b)):
        if sd <= DEGENERATE_TOL:
            raise DegenerateObservable(f"Delta {name} = {sd:.3e} on this state")
    cross = complex(np.vdot(da, db))
    c_ab = cross.imag
    corr = cross / (std_a * std_b)
    r = abs(corr)
    tilde_c = float(np.clip(corr.imag, -1.0, 1.0))
    phi = 0.0 if corr == 0 else float(np.angle(corr))
    # arcsin(C~) written as atan2: cos(phi') = sqrt(Re(corr)^2 + 1 - r^2) stays
    # accurate when |C~| is close to 1
    cpp = float(np.sqrt(corr.real**2 + max(0.0, (1.0 - r) * (1.0 + r))))
    phi_prime = float(np.arctan2(tilde_c, cpp))
    q = float(np.clip(np.cos(phi) / cpp, -1.0, 1.0)) if cpp > 1e-12 else None
    return FixedParams(
        mean_a=mean_a,
        mean_b=mean_b,
        std_a=std_a,
        std_b=std_b,
        c_ab=c_ab,
        tilde_c=tilde_c,
        corr=corr,
        r=r,
        phi=phi,
        phi_prime=phi_prime,
        q=q,
        coplanar=bool(r >= 1 - COPLANAR_TOL),
    )


def haar_random_state(dim: int, seed: int) -> QuantumState:
    if dim < 2:
        raise BadDimension(f"dimension must be >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return QuantumState(dim=dim, vector=v / np.linalg.norm(v))


def random_hermitian(dim: int, seed: int) -> Observable:
    if dim < 2:
        raise BadDimension(f"dimension must be >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Observable(dim=dim, matrix=(g + g.conj().T) / 2)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    qm, rm = np.linalg.qr(z)
    d = np.diagonal(rm)
    return qm * (d / np.abs(d))


def purify(state: QuantumState) -> QuantumState:
    """Pure state on system (x) copy whose partial trace is the given state."""
    if state.is_pure:
        return state
    w, v = np.linalg.eigh(state.density)
    w = np.clip(w, 0.0, None)
    psi = np.zeros(state.dim * state.dim, dtype=complex)
    for i in range(state.dim):
        psi += np.sqrt(w[i]) * np.kron(v[:, i], np.eye(state.dim)[i])
    return QuantumState(dim=psi.size, vector=psi / np.linalg.norm(psi))


def partial_trace_second(rho: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Trace out the second tensor factor of a (d1*d2)-dim operator."""
    return np.trace(np.asarray(rho).reshape(d1, d2, d1, d2), axis1=1, axis2=3)


ObservableLike = Union[Observable, np.ndarray]
