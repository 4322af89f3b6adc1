"""Joint-measurement schemes and their root-mean-square error statistics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DimensionMismatch, NonCommuting, NotPm1Valued, OutOfDomain
from .qcore import (
    FixedParams,
    Observable,
    QuantumState,
    _matrix,
    make_state,
    validate_observable,
)

COMMUTE_TOL = 1e-10
PM1_TOL = 1e-10

Which = Literal["A", "B"]


@dataclass(frozen=True, eq=False)
class JointScheme:
    """Commuting estimators on system (x) ancilla, with the ancilla's pure state."""

    sys_dim: int
    anc_dim: int
    ancilla: np.ndarray
    est_a: Observable
    est_b: Observable

    def __post_init__(self):
        anc = np.array(self.ancilla, dtype=complex)
        anc.setflags(write=False)
        object.__setattr__(self, "ancilla", anc)

    def commutator_norm(self) -> float:
        a, b = self.est_a.matrix, self.est_b.matrix
        return float(np.linalg.norm(a @ b - b @ a))


@dataclass(frozen=True)
class SchemeStats:
    """Error statistics of a scheme on a given state.

    The last group of fields is optional.  They hold the same information in
    a form that stays accurate near the triangle-bound edges (norms of small
    vectors rather than differences of nearly equal squares) and are filled
    in by ``scheme_stats``.
    """

    eps_a: float
    eps_b: float
    std_est_a: float
    std_est_b: float
    bias_a: float
    bias_b: float
    mean_est_a: float
    mean_est_b: float
    # Delta[est - target]: sqrt(eps^2 - bias^2) computed as a norm
    spread_a: Optional[float] = None
    spread_b: Optional[float] = None
    # ||a - x|| and ||a + x|| for the unit vectors of the centred target / estimator
    chord_minus_a: Optional[float] = None
    chord_plus_a: Optional[float] = None
    chord_minus_b: Optional[float] = None
    chord_plus_b: Optional[float] = None
    # <(est + target)^2>^(1/2); equals sqrt(4 - eps^2) for +-1-valued pairs
    sum_norm_a: Optional[float] = None
    sum_norm_b: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "epsA": self.eps_a,
            "epsB": self.eps_b,
            "stdEstA": self.std_est_a,
            "stdEstB": self.std_est_b,
            "biasA": self.bias_a,
            "biasB": self.bias_b,
            "meanEstA": self.mean_est_a,
            "meanEstB": self.mean_est_b,
        }

    def side(self, which: Which) -> dict:
        s = which.lower()
        return {
            "eps": getattr(self, f"eps_{s}"),
            "std_est": getattr(self, f"std_est_{s}"),
            "bias": getattr(self, f"bias_{s}"),
            "mean_est": getattr(self, f"mean_est_{s}"),
            "spread": getattr(self, f"spread_{s}"),
            "chord_minus": getattr(self, f"chord_minus_{s}"),
            "chord_plus": getattr(self, f"chord_plus_{s}"),
            "sum_norm": getattr(self, f"sum_norm_{s}"),
        }


def build_scheme(est_a, est_b, ancilla: Optional[QuantumState] = None) -> JointScheme:
    """Validate a commuting estimator pair and attach the ancilla state.

    Without an ancilla the estimators act on the system alone (k = 1).
    """
    ea, eb = validate_observable(est_a), validate_observable(est_b)
    if ea.dim != eb.dim:
        raise DimensionMismatch(f"estimators have dims {ea.dim} and {eb.dim}")
    if ancilla is None:
        anc = np.ones(1, dtype=complex)
    else:
        anc_state = make_state(ancilla)
        if not anc_state.is_pure:
            raise DimensionMismatch("ancilla must be a pure state")
        anc = np.array(anc_state.vector)
    k = anc.size
    if ea.dim % k:
        raise DimensionMismatch(f"estimator dim {ea.dim} not divisible by ancilla dim {k}")
    scheme = JointScheme(sys_dim=ea.dim // k, anc_dim=k, ancilla=anc, est_a=ea, est_b=eb)
    comm = scheme.commutator_norm()
    na = np.linalg.norm(ea.matrix, 2)
    nb = np.linalg.norm(eb.matrix, 2)
    if comm > COMMUTE_TOL * (na * nb + 1.0):
        raise NonCommuting(comm)
    return scheme


def _extended_factor(scheme: JointScheme, state: QuantumState) -> np.ndarray:
    if state.dim != scheme.sys_dim:
        raise DimensionMismatch(f"state dim {state.dim} vs scheme system dim {scheme.sys_dim}")
    return np.kron(state.factor(), scheme.ancilla.reshape(-1, 1))


def _lift(target, scheme: JointScheme) -> np.ndarray:
    t = _matrix(target)
    if t.shape != (scheme.sys_dim, scheme.sys_dim):
        raise DimensionMismatch(f"target of shape {t.shape} vs system dim {scheme.sys_dim}")
    return np.kron(t, np.eye(scheme.anc_dim))


def _one_side(est: np.ndarray, tgt: np.ndarray, L: np.ndarray) -> dict:
    eye = np.eye(est.shape[0])
    mean_e = float(np.vdot(L, est @ L).real)
    mean_t = float(np.vdot(L, tgt @ L).real)
    bias = mean_e - mean_t
    ce = (est - mean_e * eye) @ L
    ct = (tgt - mean_t * eye) @ L
    std_e, std_t = float(np.linalg.norm(ce)), float(np.linalg.norm(ct))
    out = {
        "eps": float(np.linalg.norm((est - tgt) @ L)),
        "std_est": std_e,
        "bias": bias,
        "mean_est": mean_e,
        "spread": float(np.linalg.norm(ce - ct)),
        "chord_minus": None,
        "chord_plus": None,
        "sum_norm": float(np.linalg.norm((est + tgt) @ L)),
    }
    if std_e > 0 and std_t > 0:
        a_hat, x_hat = ct / std_t, ce / std_e
        out["chord_minus"] = float(np.linalg.norm(a_hat - x_hat))
        out["chord_plus"] = float(np.linalg.norm(a_hat + x_hat))
    return out


def scheme_stats(scheme: JointScheme, A, B, state: QuantumState) -> SchemeStats:
    """RMS errors, estimator spreads and biases on state (x) ancilla."""
    L = _extended_factor(scheme, state)
    sa = _one_side(np.asarray(scheme.est_a.matrix), _lift(A, scheme), L)
    sb = _one_side(np.asarray(scheme.est_b.matrix), _lift(B, scheme), L)
    return SchemeStats(
        eps_a=sa["eps"],
        eps_b=sb["eps"],
        std_est_a=sa["std_est"],
        std_est_b=sb["std_est"],
        bias_a=sa["bias"],
        bias_b=sb["bias"],
        mean_est_a=sa["mean_est"],
        mean_est_b=sb["mean_est"],
        spread_a=sa["spread"],
        spread_b=sb["spread"],
        chord_minus_a=sa["chord_minus"],
        chord_plus_a=sa["chord_plus"],
        chord_minus_b=sb["chord_minus"],
        chord_plus_b=sb["chord_plus"],
        sum_norm_a=sa["sum_norm"],
        sum_norm_b=sb["sum_norm"],
    )


def consistency_identity(
    stats: SchemeStats, fixed: FixedParams, scheme: JointScheme, A, B, state: QuantumState
) -> tuple[float, float]:
    """Signed residuals of eps^2 - bias^2 = DA^2 + DAest^2 - 2 Re<(A - <A>) Aest>."""
    L = _extended_factor(scheme, state)
    res = []
    for tgt, est, s in ((A, scheme.est_a, "a"), (B, scheme.est_b, "b")):
        t = _lift(tgt, scheme)
        mean_t = getattr(fixed, f"mean_{s}")
        std_t = getattr(fixed, f"std_{s}")
        cross = float(np.vdot((t - mean_t * np.eye(t.shape[0])) @ L, np.asarray(est.matrix) @ L).real)
        eps = getattr(stats, f"eps_{s}")
        bias = getattr(stats, f"bias_{s}")
        std_e = getattr(stats, f"std_est_{s}")
        res.append((eps**2 - bias**2) - (std_t**2 + std_e**2 - 2 * cross))
    return res[0], res[1]


def variance_triangle(fixed: FixedParams, std_est: float, bias: float, which: Which = "A") -> tuple[float, float]:
    """Interval that eps^2 must lie in for the given estimator spread and bias."""
    std_t = fixed.std_a if which == "A" else fixed.std_b
    return (std_t - std_est) ** 2 + bias**2, (std_t + std_est) ** 2 + bias**2


def is_pm1_operator(obs, tol: float = PM1_TOL) -> bool:
    m = _matrix(obs)
    return float(np.max(np.abs(m @ m - np.eye(m.shape[0])))) <= tol


def pm1_bounds(fixed: FixedParams, mean_est: float, which: Which = "A", obs=None) -> tuple[float, float]:
    """Bounds on eps^2 / 2 when target and estimator are both +-1 valued.

    The raw bounds 1 - <A><Aest> -+ DA sqrt(1 - <Aest>^2) already lie in
    [0, 2] whenever <A>^2 + DA^2 = 1; the clamp only removes rounding.

    Raises:
        NotPm1Valued: the target's moments (or the operator itself, when
            given) are incompatible with a +-1 spectrum.
        OutOfDomain: |mean_est| > 1.
    """
    mean_t = fixed.mean_a if which == "A" else fixed.mean_b
    std_t = fixed.std_a if which == "A" else fixed.std_b
    if obs is not None and not is_pm1_operator(obs):
        raise NotPm1Valued(f"target {which} does not square to the identity")
    if abs(mean_t**2 + std_t**2 - 1.0) > 1e-9:
        raise NotPm1Valued(f"<{which}>^2 + D{which}^2 = {mean_t**2 + std_t**2:.12g} != 1")
    if abs(mean_est) > 1 + 1e-12:
        raise OutOfDomain(f"|<est>| = {abs(mean_est):.12g} exceeds 1")
    width = std_t * np.sqrt(max(0.0, 1 - mean_est**2))
    centre = 1 - mean_t * mean_est
    return float(np.clip(centre - width, 0.0, 2.0)), float(np.clip(centre + width, 0.0, 2.0))
