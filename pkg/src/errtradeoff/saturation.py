"""Explicit commuting estimator pairs that saturate the tight relations.

Two eigenbasis families are used.  When the reduced vectors A~0|psi> and
B~0|psi> are parallel (r = 1) the span of {psi, A~0 psi, B~0 psi} is two
dimensional and a single rotation angle parametrizes the basis; otherwise
the span is three dimensional and three angles plus two complex mixing
coefficients are needed.  In both cases the eigenvalues are then chosen per
relation so that the resulting scheme lands on the boundary point
``saturating_u(phi_param, phi')``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from .errors import (
    BranchMismatch,
    MissingTarget,
    OutOfInterval,
    SingularAngle,
    TightnessNotGuaranteed,
    UnsupportedSide,
    ValidationError,
)
from .qcore import FixedParams, QuantumState, _matrix, expectation, fixed_params, reduced_observable
from .relations import DEFAULT_TOL, PM1_KINDS, TIGHT_KINDS, RelationKind, RelationVerdict, evaluate_relation
from .scheme import JointScheme, build_scheme, scheme_stats

LOWER, UPPER = "lower", "upper"
TWO_D, THREE_D = "TWO_D", "THREE_D"
ANGLE_TOL = 1e-12


def sign(x: float) -> float:
    return 1.0 if x >= 0 else -1.0


@dataclass(frozen=True)
class SaturationSpec:
    """What to saturate, where on the frontier, and with which targets."""

    kind: RelationKind
    phi_param: float
    side: str = LOWER
    std_est_a: Optional[float] = None
    std_est_b: Optional[float] = None
    bias_a: Optional[float] = None
    bias_b: Optional[float] = None
    theta: float = math.pi / 4
    thetas3: tuple = (math.pi / 4, math.pi / 4, 0.0)

    def __post_init__(self):
        kind = RelationKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in TIGHT_KINDS:
            raise ValidationError(f"{kind.value} has no saturating construction")
        side = str(self.side).lower()
        if side not in (LOWER, UPPER):
            raise ValidationError(f"side must be 'lower' or 'upper', got {self.side!r}")
        object.__setattr__(self, "side", side)
        if side == UPPER and kind in (RelationKind.G, RelationKind.H, RelationKind.PNAS):
            raise UnsupportedSide(f"{kind.value} imposes no upper bound on the errors")
        for name in ("std_est_a", "std_est_b"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValidationError(f"{name} must be non-negative")
        self.require_targets()
        c, s = math.cos(self.theta), math.sin(self.theta)
        if abs(c * s) < ANGLE_TOL:
            raise SingularAngle(f"cos(theta) sin(theta) = 0 at theta = {self.theta}")
        t1, t2, _ = self.thetas3
        if abs(math.cos(t1) * math.sin(t1) * math.cos(t2) * math.sin(t2)) < ANGLE_TOL:
            raise SingularAngle(f"cos/sin of theta1, theta2 vanish at {self.thetas3}")

    def require_targets(self) -> None:
        need = {
            RelationKind.F: ("std_est_a", "std_est_b", "bias_a", "bias_b"),
            RelationKind.G: ("std_est_a", "std_est_b"),
            RelationKind.H: ("bias_a", "bias_b"),
        }.get(self.kind, ())
        missing = [n for n in need if getattr(self, n) is None]
        if missing:
            raise MissingTarget(f"{self.kind.value} needs {', '.join(missing)}")


@dataclass(frozen=True, eq=False)
class ConstructionBasis:
    """Orthonormal eigenbasis (as matrix columns) shared by both estimators.

    ``cos_a`` and ``cos_b`` are the cosines that multiply the signed spreads
    in Re<A~0 Aest> and Re<B~0 Best>; the eigenvalue recipes only need these
    and the basis angles.
    """

    vectors: np.ndarray
    span: int
    branch: str
    phi_param: float
    cos_a: float
    cos_b: float
    theta: float = math.pi / 4
    thetas3: tuple = (math.pi / 4, math.pi / 4, 0.0)
    intermediates: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def orthonormality_error(self) -> float:
        v = self.vectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))


def _check_interval(phi_param: float, fixed: FixedParams) -> float:
    half = abs(fixed.phi_prime)
    if phi_param < -half - 1e-12 or phi_param > half + 1e-12:
        raise OutOfInterval(f"phi_param = {phi_param:.15g} outside [{-half:.15g}, {half:.15g}]")
    return min(half, max(-half, phi_param))


def _complete(span_vectors: np.ndarray, dim: int) -> np.ndarray:
    if span_vectors.shape[1] >= dim:
        return span_vectors
    extra = null_space(span_vectors.conj().T)
    return np.hstack([span_vectors, extra])


def build_basis(A, B, state: QuantumState, fixed: FixedParams, spec: SaturationSpec, branch: Optional[str] = None) -> ConstructionBasis:
    """Eigenbasis for the saturating construction at spec.phi_param.

    Raises:
        BranchMismatch: a forced branch that does not fit the state.
        OutOfInterval: phi_param outside [-|phi'|, |phi'|].
    """
    if not state.is_pure:
        raise ValidationError("saturating constructions need a pure state")
    if branch is None:
        branch = TWO_D if fixed.coplanar else THREE_D
    if branch == TWO_D and not fixed.coplanar:
        raise BranchMismatch(f"two-dimensional construction needs r = 1, got r = {fixed.r:.12g}")
    if branch == THREE_D and fixed.coplanar:
        raise BranchMismatch(f"three-dimensional construction needs r < 1, got r = {fixed.r:.12g}")
    phi_p = _check_interval(spec.phi_param, fixed)
    psi = np.array(state.vector)
    a0 = np.asarray(reduced_observable(A, state).matrix) @ psi
    b0 = np.asarray(reduced_observable(B, state).matrix) @ psi
    phi = fixed.phi

    if branch == TWO_D:
        theta = math.pi / 4 if spec.kind in PM1_KINDS else spec.theta
        c, s = math.cos(theta), math.sin(theta)
        # obtuse phase: reflect so the same phi_param interval can be used
        phi_c = phi_p if math.cos(phi) >= 0 else math.pi - phi_p
        v2 = np.exp(1j * phi / 2) * a0
        w = np.exp(1j * phi_c / 2)
        m1 = c * psi + w * s * v2
        m2 = s * psi - w * c * v2
        vecs = _complete(np.column_stack([m1, m2]), state.dim)
        return ConstructionBasis(
            vectors=vecs,
            span=2,
            branch=TWO_D,
            phi_param=phi_p,
            cos_a=math.cos((phi_c + phi) / 2),
            cos_b=math.cos((phi_c - phi) / 2),
            theta=theta,
            intermediates={"construction_angle": phi_c},
        )

    r, q = fixed.r, fixed.q
    ep, em = np.exp(1j * phi / 2), np.exp(-1j * phi / 2)
    v2 = (ep * a0 + em * b0) / math.sqrt(2 + 2 * r)
    v3 = (ep * a0 - em * b0) / math.sqrt(2 - 2 * r)
    t1, t2, t3 = spec.thetas3
    c1, s1, c2, s2, c3, s3 = math.cos(t1), math.sin(t1), math.cos(t2), math.sin(t2), math.cos(t3), math.sin(t3)
    sg = sign(math.sin(phi))
    kp, km = math.sqrt((1 + q) / 2), math.sqrt((1 - q) / 2)
    hp, hm = np.exp(1j * phi_p / 2), np.exp(-1j * phi_p / 2)
    g1 = kp * c3 * hp - 1j * sg * km * s3 * hm
    g2 = kp * s3 * hm - 1j * sg * km * c3 * hp
    m1 = c1 * psi - s1 * g1 * v2 - s1 * g2 * v3
    m2 = s1 * c2 * psi + (c1 * c2 * g1 + s2 * np.conj(g2)) * v2 + (c1 * c2 * g2 - s2 * np.conj(g1)) * v3
    m3 = s1 * s2 * psi + (c1 * s2 * g1 - c2 * np.conj(g2)) * v2 + (c1 * s2 * g2 + c2 * np.conj(g1)) * v3

    rp, rm = math.sqrt((1 + r) / 2), math.sqrt((1 - r) / 2)
    f_plus = kp * rp * math.cos((phi_p + phi) / 2) + sg * km * rm * math.sin((phi_p + phi) / 2)
    f_minus = kp * rm * math.cos((phi_p - phi) / 2) - sg * km * rp * math.sin((phi_p - phi) / 2)
    g_plus = kp * rp * math.cos((phi_p - phi) / 2) - sg * km * rm * math.sin((phi_p - phi) / 2)
    g_minus = -kp * rm * math.cos((phi_p + phi) / 2) - sg * km * rp * math.sin((phi_p + phi) / 2)
    p_a = math.cos((phi_p + fixed.phi_prime) / 2)
    p_b = math.cos((phi_p - fixed.phi_prime) / 2)
    theta_a = _extract_angle(c3 * f_plus + s3 * f_minus, s3 * f_plus - c3 * f_minus, p_a)
    theta_b = _extract_angle(c3 * g_plus + s3 * g_minus, s3 * g_plus - c3 * g_minus, p_b)

    vecs = _complete(np.column_stack([m1, m2, m3]), state.dim)
    return ConstructionBasis(
        vectors=vecs,
        span=3,
        branch=THREE_D,
        phi_param=phi_p,
        cos_a=p_a,
        cos_b=p_b,
        thetas3=tuple(spec.thetas3),
        intermediates={
            "gamma1": complex(g1),
            "gamma2": complex(g2),
            "F_plus": f_plus,
            "F_minus": f_minus,
            "G_plus": g_plus,
            "G_minus": g_minus,
            "theta_a": theta_a,
            "theta_b": theta_b,
        },
    )


def _extract_angle(x: float, y: float, scale: float) -> float:
    """Angle t with (x, y) = scale * (cos t, sin t); 0 when everything vanishes."""
    if scale == 0 or (x == 0 and y == 0):
        return 0.0
    return math.atan2(y, x) if scale > 0 else math.atan2(-y, -x)


def angle_equation_residuals(basis: ConstructionBasis) -> float:
    """Largest defect of the four equations that define theta_a and theta_b."""
    if basis.branch != THREE_D:
        return 0.0
    it = basis.intermediates
    c3, s3 = math.cos(basis.thetas3[2]), math.sin(basis.thetas3[2])
    ta, tb = it["theta_a"], it["theta_b"]
    fp, fm, gp, gm = it["F_plus"], it["F_minus"], it["G_plus"], it["G_minus"]
    return max(
        abs(c3 * fp + s3 * fm - math.cos(ta) * basis.cos_a),
        abs(s3 * fp - c3 * fm - math.sin(ta) * basis.cos_a),
        abs(c3 * gp + s3 * gm - math.cos(tb) * basis.cos_b),
        abs(s3 * gp - c3 * gm - math.sin(tb) * basis.cos_b),
    )


def _recipe(basis: ConstructionBasis, offset: float, spread: float, angle: float, fill: float) -> np.ndarray:
    """Eigenvalues offset + spread * (geometry factor), one per basis vector."""
    d = basis.vectors.shape[1]
    out = np.full(d, fill, dtype=float)
    if basis.span == 2:
        c, s = math.cos(basis.theta), math.sin(basis.theta)
        out[0] = offset + spread * s / c
        out[1] = offset - spread * c / s
        return out
    t1, t2, _ = basis.thetas3
    c1, s1, c2, s2 = math.cos(t1), math.sin(t1), math.cos(t2), math.sin(t2)
    ca, sa = math.cos(angle), math.sin(angle)
    out[0] = offset - spread * s1 * ca / c1
    out[1] = offset + spread * (c1 * c2 * ca + s2 * sa) / (s1 * c2)
    out[2] = offset + spread * (c1 * s2 * ca - c2 * sa) / (s1 * s2)
    return out


def side_taus(spec: SaturationSpec, basis: ConstructionBasis) -> tuple[float, float]:
    flip = 1.0 if spec.side == LOWER else -1.0
    return flip * sign(basis.cos_a), flip * sign(basis.cos_b)


def eigenvalues_for(
    spec: SaturationSpec,
    basis: ConstructionBasis,
    fixed: FixedParams,
    tau_a: Optional[float] = None,
    tau_b: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of both estimators on ``basis`` for the requested relation.

    tau_a / tau_b pick the error branch for F, FBIS and PRL; when omitted
    they follow spec.side.  G, H and PNAS always use the lower branch.
    """
    spec.require_targets()
    kind = spec.kind
    default_a, default_b = side_taus(spec, basis)
    angles = (basis.intermediates.get("theta_a", 0.0), basis.intermediates.get("theta_b", 0.0))
    out = []
    for i, (mean_t, std_t, cosx) in enumerate(
        ((fixed.mean_a, fixed.std_a, basis.cos_a), (fixed.mean_b, fixed.std_b, basis.cos_b))
    ):
        given = tau_a if i == 0 else tau_b
        tau = (default_a, default_b)[i] if given is None else float(given)
        if kind is RelationKind.F:
            std_e = spec.std_est_a if i == 0 else spec.std_est_b
            bias = spec.bias_a if i == 0 else spec.bias_b
            vals = _recipe(basis, mean_t + bias, tau * std_e, angles[i], mean_t)
        elif kind is RelationKind.G:
            std_e = spec.std_est_a if i == 0 else spec.std_est_b
            vals = _recipe(basis, mean_t, sign(cosx) * std_e, angles[i], mean_t)
        elif kind is RelationKind.H:
            bias = spec.bias_a if i == 0 else spec.bias_b
            vals = _recipe(basis, mean_t + bias, std_t * cosx, angles[i], mean_t)
        elif kind is RelationKind.PNAS:
            vals = _recipe(basis, mean_t, std_t * cosx, angles[i], mean_t)
        else:
            # +-1 spectra: zero estimator mean, unit spread
            if basis.span == 2:
                vals = np.full(basis.vectors.shape[1], 1.0)
                vals[0], vals[1] = tau, -tau
            else:
                raw = _recipe(basis, 0.0, tau, angles[i], 1.0)
                vals = np.where(raw >= 0, 1.0, -1.0)
        out.append(vals)
    return out[0], out[1]


def estimator_from_basis(vectors: np.ndarray, values) -> np.ndarray:
    m = (vectors * np.asarray(values, dtype=float)) @ vectors.conj().T
    return (m + m.conj().T) / 2


def saturating_scheme(
    A, B, state: QuantumState, spec: SaturationSpec, tol: float = DEFAULT_TOL
) -> tuple[JointScheme, RelationVerdict]:
    """Build a scheme on the bare system that sits on the requested boundary.

    For the +-1 relations tightness is only established for r = 1 (and, for
    PRL, zero target means); elsewhere a TightnessNotGuaranteed warning is
    emitted and the verdict is reported as computed.
    """
    fixed = fixed_params(A, B, state)
    basis = build_basis(A, B, state, fixed, spec)
    alphas, betas = eigenvalues_for(spec, basis, fixed)
    scheme = build_scheme(estimator_from_basis(basis.vectors, alphas), estimator_from_basis(basis.vectors, betas))
    stats = scheme_stats(scheme, A, B, state)
    pm1 = spec.kind in PM1_KINDS
    verdict = evaluate_relation(
        spec.kind, fixed, stats, tol, targets=(A, B) if pm1 else None, scheme=scheme if pm1 else None
    )
    if pm1:
        reasons = []
        if not fixed.coplanar:
            reasons.append("r < 1")
        if spec.kind is RelationKind.PRL and max(abs(fixed.mean_a), abs(fixed.mean_b)) > 1e-9:
            reasons.append("nonzero target means")
        if reasons:
            msg = f"{spec.kind.value} tightness not established here ({', '.join(reasons)})"
            warnings.warn(msg, TightnessNotGuaranteed, stacklevel=2)
            verdict = RelationVerdict(**{**verdict.__dict__, "note": msg})
    return scheme, verdict


def weak_values(basis, obs, state: QuantumState) -> np.ndarray:
    """Re <m_k|A|psi> / <m_k|psi> for each basis vector; <A> where the overlap vanishes."""
    vecs = basis.vectors if isinstance(basis, ConstructionBasis) else np.asarray(basis)
    psi = np.array(state.vector)
    a = _matrix(obs)
    mean = expectation(a, state)
    overlaps = vecs.conj().T @ psi
    num = vecs.conj().T @ (a @ psi)
    out = np.full(vecs.shape[1], mean, dtype=float)
    ok = np.abs(overlaps) >= 1e-12
    out[ok] = (num[ok] / overlaps[ok]).real
    return out


def optimal_eigenvalues(vectors: np.ndarray, obs, state: QuantumState) -> np.ndarray:
    """Error-minimizing eigenvalues for a fixed projective basis.

    Re Tr[P_k A rho] / Tr[P_k rho]; for pure states this is the weak value.
    """
    if state.is_pure:
        return weak_values(vectors, obs, state)
    rho = state.density
    a = _matrix(obs)
    mean = expectation(a, state)
    vecs = np.asarray(vectors)
    weight = np.einsum("ik,ij,jk->k", vecs.conj(), rho, vecs).real
    num = np.einsum("ik,ij,jk->k", vecs.conj(), a @ rho, vecs).real
    out = np.full(vecs.shape[1], mean, dtype=float)
    ok = weight >= 1e-14
    out[ok] = num[ok] / weight[ok]
    return out
