"""Bound functions and error-trade-off relations.

Every tight relation here has the common shape

    uA^2 + uB^2 + 2 sqrt(1 - C~^2) uA uB >= C~^2,

where (uA, uB) come from one of the bound functions (f, g, h, eps/DA,
f_mean, k) applied to the A and B sides separately.  The historical
relations (Ozawa, Hall, Weston, Robertson) are provided alongside for
comparison, together with the two Cauchy-Schwarz inequalities that connect
them to the tight form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import (
    InvalidVectors,
    MeanEstAtBoundary,
    NotPm1Valued,
    OutOfDomain,
    OutOfInterval,
    PreconditionViolated,
)
from .qcore import FixedParams, QuantumState, _matrix
from .scheme import JointScheme, SchemeStats, is_pm1_operator

DEFAULT_TOL = 1e-9
CLAMP_TOL = 1e-9
ZERO_SPREAD = 1e-10
PM1_MOMENT_TOL = 1e-9


class RelationKind(str, Enum):
    F = "F"
    G = "G"
    H = "H"
    PNAS = "PNAS"
    FBIS = "FBIS"
    PRL = "PRL"
    OZAWA = "OZAWA"
    HALL = "HALL"
    WESTON = "WESTON"
    ROBERTSON = "ROBERTSON"


TIGHT_KINDS = (RelationKind.F, RelationKind.G, RelationKind.H, RelationKind.PNAS, RelationKind.FBIS, RelationKind.PRL)
PM1_KINDS = (RelationKind.FBIS, RelationKind.PRL)


@dataclass(frozen=True)
class RelationVerdict:
    kind: RelationKind
    u_a: Optional[float]
    u_b: Optional[float]
    lhs: float
    rhs: float
    residual: float
    satisfied: bool
    saturated: bool
    limit: bool = False
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "uA": self.u_a,
            "uB": self.u_b,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "satisfied": self.satisfied,
            "saturated": self.saturated,
        }


# -- bound functions -------------------------------------------------------


def _sqrt_one_minus_sq(t: float) -> float:
    t = min(1.0, max(-1.0, t))
    return math.sqrt(max(0.0, (1.0 - t) * (1.0 + t)))


def f_value(std_a: float, std_est: float, bias: float, eps: float) -> float:
    """Bound function for specified estimator spread and bias.

    Raises:
        OutOfDomain: eps^2 - bias^2 outside the variance triangle (beyond 1e-9).
    """
    if std_a <= 0 or std_est <= 0:
        raise OutOfDomain("f needs strictly positive standard deviations")
    var = eps**2 - bias**2
    lo, hi = (std_a - std_est) ** 2, (std_a + std_est) ** 2
    if var < lo - CLAMP_TOL or var > hi + CLAMP_TOL:
        raise OutOfDomain(f"eps^2 - bias^2 = {var:.12g} outside [{lo:.12g}, {hi:.12g}]")
    bracket = (std_a**2 + std_est**2 - var) / (2 * std_a * std_est)
    return _sqrt_one_minus_sq(bracket)


def g_value(std_a: float, std_est: float, eps: float) -> float:
    """Bound function for specified estimator spread, bias optimized out."""
    if std_a <= 0 or std_est <= 0:
        raise OutOfDomain("g needs strictly positive standard deviations")
    if eps < abs(std_a - std_est) - CLAMP_TOL:
        raise OutOfDomain(f"eps = {eps:.12g} below floor |DA - DAest| = {abs(std_a - std_est):.12g}")
    bracket = (std_a**2 + std_est**2 - eps**2) / (2 * std_a * std_est)
    return _sqrt_one_minus_sq(max(bracket, 0.0))


def h_value(std_a: float, bias: float, eps: float) -> float:
    """Bound function for specified bias, estimator spread optimized out."""
    if std_a <= 0:
        raise OutOfDomain("h needs a strictly positive standard deviation")
    if eps < abs(bias) - 1e-12:
        raise OutOfDomain(f"eps = {eps:.12g} below |bias| = {abs(bias):.12g}")
    return math.sqrt(max(0.0, eps**2 - bias**2)) / std_a


def eps_tilde(std_a: float, eps: float) -> float:
    return eps / std_a


def f_mean_value(mean_a: float, std_a: float, mean_est: float, eps: float) -> float:
    """Bound function for +-1-valued observables with a specified estimator mean.

    Raises:
        MeanEstAtBoundary: |mean_est| = 1, where eps is pinned instead.
        OutOfDomain: eps^2/2 outside the +-1 bounds (beyond 1e-9).
    """
    if abs(mean_est) >= 1 - 1e-12:
        raise MeanEstAtBoundary(f"|<est>| = {abs(mean_est):.15g}; eps^2/2 is pinned to 1 -+ <A>")
    width = std_a * math.sqrt(1 - mean_est**2)
    half = eps**2 / 2
    centre = 1 - mean_a * mean_est
    if half < centre - width - CLAMP_TOL or half > centre + width + CLAMP_TOL:
        raise OutOfDomain(f"eps^2/2 = {half:.12g} outside [{centre - width:.12g}, {centre + width:.12g}]")
    return _sqrt_one_minus_sq((centre - half) / width)


def k_value(std_a: float, eps: float) -> float:
    """Bound function for +-1-valued observables, estimator mean optimized out."""
    if std_a <= 0:
        raise OutOfDomain("k needs a strictly positive standard deviation")
    if eps**2 > 4 + 1e-12:
        raise OutOfDomain(f"eps^2 = {eps**2:.12g} exceeds 4")
    return _sqrt_one_minus_sq(1 - eps**2 / 2) / std_a


# -- the common form and its alternative ------------------------------------


def core_lhs(u_a: float, u_b: float, tilde_c: float, cos_phi_prime: Optional[float] = None) -> float:
    """Left side of the common form.

    ``cos_phi_prime`` = sqrt(1 - C~^2) may be passed when known more
    accurately than the subtraction would give (|C~| close to 1).
    """
    s = math.sqrt(max(0.0, 1 - tilde_c**2)) if cos_phi_prime is None else cos_phi_prime
    return u_a**2 + u_b**2 + 2 * s * u_a * u_b


def core_residual(u_a: float, u_b: float, tilde_c: float, cos_phi_prime: Optional[float] = None) -> float:
    return core_lhs(u_a, u_b, tilde_c, cos_phi_prime) - tilde_c**2


def alt_form_satisfied(u_a: float, u_b: float, tilde_c: float, squared_threshold: bool = False) -> bool:
    """Alternative reading of the common form, with C~ only on the right.

    With ``squared_threshold`` the branch split sits at C~^2 instead of 1,
    which gives an equivalent condition.
    """
    split = tilde_c**2 if squared_threshold else 1.0
    norm2 = u_a**2 + u_b**2
    if norm2 >= split:
        return True
    # here both u are <= 1, so the square roots are real
    cross = u_a * math.sqrt(max(0.0, 1 - u_b**2)) + u_b * math.sqrt(max(0.0, 1 - u_a**2))
    return cross >= abs(tilde_c) - 1e-12


def saturating_u(phi_param: float, phi_prime: float, obtuse: bool = False, phi: Optional[float] = None) -> tuple[float, float]:
    """Boundary point of the common form, parametrized by an angle.

    The principal branch takes phi_param in [-|phi'|, |phi'|].  When both
    reduced vectors are parallel and cos(phi) <= 0, the original phase phi
    may instead be used with ``obtuse=True`` and phi_param in
    [|phi|, 2 pi - |phi|]; both branches trace the same curve.
    """
    if obtuse:
        ph = phi_prime if phi is None else phi
        lo, hi = abs(ph), 2 * math.pi - abs(ph)
    else:
        ph = phi_prime
        lo, hi = -abs(ph), abs(ph)
    if phi_param < lo - 1e-12 or phi_param > hi + 1e-12:
        raise OutOfInterval(f"phi_param = {phi_param:.15g} outside [{lo:.15g}, {hi:.15g}]")
    return abs(math.sin((phi_param + ph) / 2)), abs(math.sin((phi_param - ph) / 2))


# -- historical relations -----------------------------------------------------


def ozawa_residual(fixed: FixedParams, eps_a: float, eps_b: float) -> float:
    return eps_a * eps_b + fixed.std_b * eps_a + fixed.std_a * eps_b - abs(fixed.c_ab)


def ozawa_normalized_residual(u_a: float, u_b: float, tilde_c: float) -> float:
    """Ozawa's relation divided through by DA DB, in terms of eps/DA, eps/DB."""
    return u_a * u_b + u_a + u_b - abs(tilde_c)


def hall_residual(stats: SchemeStats, fixed: FixedParams) -> float:
    return stats.eps_a * stats.eps_b + stats.std_est_b * stats.eps_a + stats.std_est_a * stats.eps_b - abs(fixed.c_ab)


def weston_residual(stats: SchemeStats, fixed: FixedParams) -> float:
    return (
        (fixed.std_b + stats.std_est_b) / 2 * stats.eps_a
        + (fixed.std_a + stats.std_est_a) / 2 * stats.eps_b
        - abs(fixed.c_ab)
    )


def _cauchy_lengths(u_a, u_b, x, y, tilde_c):
    if not (0 <= u_a <= 1 + 1e-12 and 0 <= u_b <= 1 + 1e-12):
        raise PreconditionViolated(f"u values ({u_a}, {u_b}) must lie in [0, 1]")
    if x < 0 or y < 0:
        raise PreconditionViolated("X and Y must be non-negative")
    if core_residual(u_a, u_b, tilde_c) < -1e-12:
        raise PreconditionViolated("(uA, uB, C~) violates the common form")
    ca = math.sqrt(max(0.0, 1 - u_a**2))
    cb = math.sqrt(max(0.0, 1 - u_b**2))
    return math.hypot(u_a, ca - x), math.hypot(u_b, cb - y)


def cauchy3_bound(u_a: float, u_b: float, x: float, y: float, tilde_c: float) -> float:
    """Three-term inequality behind Ozawa-type relations (residual form).

    X and Y are the normalized estimator spreads DAest/DA and DBest/DB.
    """
    la, lb = _cauchy_lengths(u_a, u_b, x, y, tilde_c)
    return la * lb + y * la + x * lb - abs(tilde_c)


def cauchy4_bound(u_a: float, u_b: float, x: float, y: float, tilde_c: float) -> float:
    """Four-term inequality behind the Weston-type relation (residual form)."""
    la, lb = _cauchy_lengths(u_a, u_b, x, y, tilde_c)
    return (1 + y) / 2 * la + (1 + x) / 2 * lb - abs(tilde_c)


# -- geometric lemma -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LemmaVectors:
    a_hat: np.ndarray
    b_hat: np.ndarray
    x_hat: np.ndarray
    y_hat: np.ndarray
    chi: float = field(init=False)
    a_perp: float = field(init=False)
    b_perp: float = field(init=False)

    def __post_init__(self):
        vecs = [np.asarray(v, dtype=float).ravel() for v in (self.a_hat, self.b_hat, self.x_hat, self.y_hat)]
        n = vecs[0].size
        if any(v.size != n for v in vecs):
            raise InvalidVectors("vectors must have equal length")
        for name, v in zip("abxy", vecs):
            if abs(np.linalg.norm(v) - 1) > 1e-12:
                raise InvalidVectors(f"{name}-vector is not a unit vector (norm {np.linalg.norm(v):.15g})")
        a, b, x, y = vecs
        if abs(float(x @ y)) > 1e-12:
            raise InvalidVectors(f"x and y are not orthogonal (x.y = {float(x @ y):.3e})")
        for name, v in zip(("a_hat", "b_hat", "x_hat", "y_hat"), vecs):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "chi", float(a @ b))
        object.__setattr__(self, "a_perp", min(1.0, float(np.linalg.norm(a - (a @ x) * x))))
        object.__setattr__(self, "b_perp", min(1.0, float(np.linalg.norm(b - (b @ y) * y))))


def lemma_check(vectors: LemmaVectors) -> float:
    """Residual of the planar-geometry inequality; never below rounding."""
    return core_residual(vectors.a_perp, vectors.b_perp, vectors.chi)


def _embed(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v).ravel()
    return np.concatenate([v.real, v.imag])


def _embed_rot(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v).ravel()
    return np.concatenate([v.imag, -v.real])


def lemma_vectors_for_scheme(scheme: JointScheme, A, B, state: QuantumState) -> LemmaVectors:
    """Real unit vectors whose lemma residual reproduces the F relation.

    a, x come from the centred target and estimator for A; b, y from those
    for B, rotated by 90 degrees so that a.b = C~ and x.y = 0.
    """
    L = np.kron(state.factor(), scheme.ancilla.reshape(-1, 1))
    k = scheme.anc_dim

    def unit(op):
        m = np.asarray(op)
        eye = np.eye(m.shape[0])
        mean = float(np.vdot(L, m @ L).real)
        v = (m - mean * eye) @ L
        return v / np.linalg.norm(v)

    ta = np.kron(_matrix(A), np.eye(k))
    tb = np.kron(_matrix(B), np.eye(k))
    return LemmaVectors(
        a_hat=_embed(unit(ta)),
        b_hat=_embed_rot(unit(tb)),
        x_hat=_embed(unit(scheme.est_a.matrix)),
        y_hat=_embed_rot(unit(scheme.est_b.matrix)),
    )


# -- dispatch --------------------------------------------------------------


def _verdict(kind, u_a, u_b, fixed, tol, note="") -> RelationVerdict:
    lhs = core_lhs(u_a, u_b, fixed.tilde_c, math.cos(fixed.phi_prime))
    rhs = fixed.tilde_c**2
    res = lhs - rhs
    return RelationVerdict(kind, u_a, u_b, lhs, rhs, res, res >= -tol, abs(res) <= tol, note=note)


def _scalar_verdict(kind, lhs, rhs, tol) -> RelationVerdict:
    res = lhs - rhs
    return RelationVerdict(kind, None, None, lhs, rhs, res, res >= -tol, abs(res) <= tol)


def _box_verdict(kind, equalities: Sequence[float], slacks: Sequence[float], tol, note) -> RelationVerdict:
    """Limit constraints: some quantities pinned, others inside intervals."""
    worst_eq = max((abs(e) for e in equalities), default=0.0)
    if worst_eq > tol:
        res = -worst_eq
    elif slacks:
        res = min(slacks)
    else:
        res = -worst_eq
    sat = worst_eq <= tol and res >= -tol
    return RelationVerdict(kind, None, None, res, 0.0, res, sat, sat and abs(res) <= tol, limit=True, note=note)


def _f_side(std_t, side: dict) -> float:
    if side["chord_minus"] is not None:
        return min(1.0, side["chord_minus"] * side["chord_plus"] / 2)
    return f_value(std_t, side["std_est"], side["bias"], side["eps"])


def _g_side(std_t, side: dict) -> float:
    if side["chord_minus"] is not None:
        if side["chord_minus"] >= side["chord_plus"]:
            return 1.0
        return min(1.0, side["chord_minus"] * side["chord_plus"] / 2)
    return g_value(std_t, side["std_est"], side["eps"])


def _h_side(std_t, side: dict) -> float:
    if side["spread"] is not None:
        return side["spread"] / std_t
    return h_value(std_t, side["bias"], side["eps"])


def _k_side(std_t, side: dict) -> float:
    s = side["sum_norm"]
    eps = side["eps"]
    if s is not None and abs(eps**2 + s**2 - 4) <= 1e-9:
        return min(1.0 / std_t, eps * s / (2 * std_t))
    return k_value(std_t, eps)


def _check_pm1(fixed: FixedParams, stats: SchemeStats, targets, scheme) -> None:
    moments = {
        "A": fixed.mean_a**2 + fixed.std_a**2,
        "B": fixed.mean_b**2 + fixed.std_b**2,
        "estimator A": stats.mean_est_a**2 + stats.std_est_a**2,
        "estimator B": stats.mean_est_b**2 + stats.std_est_b**2,
    }
    for name, m2 in moments.items():
        if abs(m2 - 1) > PM1_MOMENT_TOL:
            raise NotPm1Valued(f"<{name}^2> = {m2:.12g}, not compatible with a +-1 spectrum")
    ops = []
    if targets is not None:
        ops += [("A", targets[0]), ("B", targets[1])]
    if scheme is not None:
        ops += [("estimator A", scheme.est_a), ("estimator B", scheme.est_b)]
    for name, op in ops:
        if not is_pm1_operator(op):
            raise NotPm1Valued(f"{name} does not square to the identity")


def _pm1_box(kind, fixed, stats, tol) -> RelationVerdict:
    eqs, slacks = [], []
    for s in ("a", "b"):
        mean_t = getattr(fixed, f"mean_{s}")
        std_t = getattr(fixed, f"std_{s}")
        m = getattr(stats, f"mean_est_{s}")
        half = getattr(stats, f"eps_{s}") ** 2 / 2
        if abs(m) >= 1 - 1e-12:
            eqs.append(half - (1 - math.copysign(1.0, m) * mean_t))
        else:
            width = std_t * math.sqrt(1 - m * m)
            centre = 1 - mean_t * m
            slacks += [half - (centre - width), (centre + width) - half]
    return _box_verdict(kind, eqs, slacks, tol, "estimator mean at +-1: eps^2/2 pinned")


def evaluate_relation(
    kind: RelationKind,
    fixed: FixedParams,
    stats: SchemeStats,
    tol: float = DEFAULT_TOL,
    *,
    targets=None,
    scheme: Optional[JointScheme] = None,
) -> RelationVerdict:
    """Evaluate one relation on the statistics of a scheme.

    ``targets`` (A, B) and ``scheme`` are optional; for the +-1 relations
    they enable operator-level checks on top of the moment checks.

    Raises:
        NotPm1Valued: FBIS/PRL on data incompatible with +-1 spectra.
    """
    kind = RelationKind(kind)
    sa, sb = stats.side("A"), stats.side("B")
    if kind is RelationKind.F:
        if stats.std_est_a <= ZERO_SPREAD or stats.std_est_b <= ZERO_SPREAD:
            eqs, slacks = [], []
            for std_t, side in ((fixed.std_a, sa), (fixed.std_b, sb)):
                e2 = side["eps"] ** 2
                if side["std_est"] <= ZERO_SPREAD:
                    eqs.append(e2 - (std_t**2 + side["bias"] ** 2))
                else:
                    lo = (std_t - side["std_est"]) ** 2 + side["bias"] ** 2
                    hi = (std_t + side["std_est"]) ** 2 + side["bias"] ** 2
                    slacks += [e2 - lo, hi - e2]
            return _box_verdict(kind, eqs, slacks, tol, "zero estimator spread: limit constraints")
        return _verdict(kind, _f_side(fixed.std_a, sa), _f_side(fixed.std_b, sb), fixed, tol)
    if kind is RelationKind.G:
        if stats.std_est_a <= ZERO_SPREAD:
            slacks = [sa["eps"] ** 2 - fixed.std_a**2, sb["eps"] ** 2 - (fixed.std_b - sb["std_est"]) ** 2]
            return _box_verdict(kind, [], slacks, tol, "zero estimator spread: limit constraints")
        if stats.std_est_b <= ZERO_SPREAD:
            slacks = [sa["eps"] ** 2 - (fixed.std_a - sa["std_est"]) ** 2, sb["eps"] ** 2 - fixed.std_b**2]
            return _box_verdict(kind, [], slacks, tol, "zero estimator spread: limit constraints")
        return _verdict(kind, _g_side(fixed.std_a, sa), _g_side(fixed.std_b, sb), fixed, tol)
    if kind is RelationKind.H:
        return _verdict(kind, _h_side(fixed.std_a, sa), _h_side(fixed.std_b, sb), fixed, tol)
    if kind is RelationKind.PNAS:
        return _verdict(kind, stats.eps_a / fixed.std_a, stats.eps_b / fixed.std_b, fixed, tol)
    if kind is RelationKind.FBIS:
        _check_pm1(fixed, stats, targets, scheme)
        if abs(stats.mean_est_a) >= 1 - 1e-12 or abs(stats.mean_est_b) >= 1 - 1e-12:
            return _pm1_box(kind, fixed, stats, tol)
        if sa["chord_minus"] is not None and sb["chord_minus"] is not None:
            ua, ub = _f_side(fixed.std_a, sa), _f_side(fixed.std_b, sb)
        else:
            ua = f_mean_value(fixed.mean_a, fixed.std_a, stats.mean_est_a, stats.eps_a)
            ub = f_mean_value(fixed.mean_b, fixed.std_b, stats.mean_est_b, stats.eps_b)
        return _verdict(kind, ua, ub, fixed, tol)
    if kind is RelationKind.PRL:
        _check_pm1(fixed, stats, targets, scheme)
        return _verdict(kind, _k_side(fixed.std_a, sa), _k_side(fixed.std_b, sb), fixed, tol)
    if kind is RelationKind.OZAWA:
        lhs = stats.eps_a * stats.eps_b + fixed.std_b * stats.eps_a + fixed.std_a * stats.eps_b
        return _scalar_verdict(kind, lhs, abs(fixed.c_ab), tol)
    if kind is RelationKind.HALL:
        lhs = stats.eps_a * stats.eps_b + stats.std_est_b * stats.eps_a + stats.std_est_a * stats.eps_b
        return _scalar_verdict(kind, lhs, abs(fixed.c_ab), tol)
    if kind is RelationKind.WESTON:
        lhs = (fixed.std_b + stats.std_est_b) / 2 * stats.eps_a + (fixed.std_a + stats.std_est_a) / 2 * stats.eps_b
        return _scalar_verdict(kind, lhs, abs(fixed.c_ab), tol)
    if kind is RelationKind.ROBERTSON:
        return _scalar_verdict(kind, fixed.std_a * fixed.std_b, abs(fixed.c_ab), tol)
    raise ValueError(f"unknown relation kind {kind!r}")
