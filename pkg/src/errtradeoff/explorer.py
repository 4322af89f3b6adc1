"""Empirical frontier exploration, mixed states and the fully mixed qubit example."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DimensionMismatch, ValidationError
from .qcore import (
    SIGMA_X,
    SIGMA_Y,
    FixedParams,
    QuantumState,
    fixed_params,
    haar_unitary,
    make_state,
)
from .relations import DEFAULT_TOL, RelationKind, core_residual, evaluate_relation, saturating_u
from .saturation import SaturationSpec, estimator_from_basis, optimal_eigenvalues, saturating_scheme
from .scheme import JointScheme, build_scheme, scheme_stats

CONSTRUCTED, RANDOM_SCAN, MIXED_ENVELOPE = "CONSTRUCTED", "RANDOM_SCAN", "MIXED_ENVELOPE"

# relations every oracle sample is checked against
ORACLE_RELATIONS = (
    RelationKind.F,
    RelationKind.G,
    RelationKind.H,
    RelationKind.PNAS,
    RelationKind.OZAWA,
    RelationKind.HALL,
    RelationKind.WESTON,
)


@dataclass(frozen=True)
class FrontierPoint:
    eps_a: float
    eps_b: float
    source: str
    phi_param: Optional[float] = None
    violation: float = 0.0
    weight: Optional[float] = None


@dataclass(frozen=True)
class Decomposition:
    """rho = sum_i p_i |psi_i><psi_i| with pure components."""

    weights: tuple
    components: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        comps = tuple(make_state(c) for c in self.components)
        if len(w) != len(comps) or not w:
            raise ValidationError("weights and components must be non-empty and of equal length")
        if min(w) < 0 or abs(sum(w) - 1) > 1e-10:
            raise ValidationError(f"weights must be non-negative and sum to 1 (sum = {sum(w):.15g})")
        if any(not c.is_pure for c in comps):
            raise ValidationError("decomposition components must be pure states")
        if len({c.dim for c in comps}) != 1:
            raise DimensionMismatch("components have different dimensions")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def density(self) -> np.ndarray:
        return sum(p * c.rho() for p, c in zip(self.weights, self.components))

    def state(self) -> QuantumState:
        return make_state(self.density())


def eigen_decomposition(state: QuantumState, cutoff: float = 1e-14) -> Decomposition:
    """Spectral decomposition of a density matrix (dropping null eigenvalues)."""
    if state.is_pure:
        return Decomposition((1.0,), (state,))
    w, v = np.linalg.eigh(state.density)
    keep = w > cutoff
    w = w[keep] / w[keep].sum()
    return Decomposition(tuple(w), tuple(v[:, i] for i in np.flatnonzero(keep)))


def _violation(fixed: FixedParams, stats, tol: float) -> float:
    return min(evaluate_relation(k, fixed, stats, tol).residual for k in ORACLE_RELATIONS)


def random_scan(A, B, state: QuantumState, n_samples: int, seed: int, tol: float = DEFAULT_TOL) -> list[FrontierPoint]:
    """Oracle cloud: Haar-random eigenbases with error-minimizing eigenvalues."""
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    fixed = fixed_params(A, B, state)
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(n_samples):
        u = haar_unitary(state.dim, rng)
        scheme = build_scheme(
            estimator_from_basis(u, optimal_eigenvalues(u, A, state)),
            estimator_from_basis(u, optimal_eigenvalues(u, B, state)),
        )
        stats = scheme_stats(scheme, A, B, state)
        points.append(FrontierPoint(stats.eps_a, stats.eps_b, RANDOM_SCAN, None, _violation(fixed, stats, tol)))
    return points


def phi_grid(fixed: FixedParams, n_steps: int) -> np.ndarray:
    half = abs(fixed.phi_prime)
    return np.linspace(-half, half, n_steps)


def constructed_frontier(
    A, B, state: QuantumState, n_steps: int = 41, kind=RelationKind.PNAS, side: str = "lower", tol: float = DEFAULT_TOL, **targets
) -> list[FrontierPoint]:
    """Saturating schemes along the phi_param grid, one point each."""
    fixed = fixed_params(A, B, state)
    points = []
    for phi in phi_grid(fixed, n_steps):
        spec = SaturationSpec(kind, float(phi), side, **targets)
        scheme, verdict = saturating_scheme(A, B, state, spec, tol)
        stats = scheme_stats(scheme, A, B, state)
        points.append(FrontierPoint(stats.eps_a, stats.eps_b, CONSTRUCTED, float(phi), verdict.residual))
    return points


def frontier_coverage(oracle: Sequence[FrontierPoint], frontier: Sequence[FrontierPoint]) -> float:
    """Largest distance from a frontier point to its nearest oracle point."""
    o = np.array([[p.eps_a, p.eps_b] for p in oracle])
    f = np.array([[p.eps_a, p.eps_b] for p in frontier])
    dists = np.linalg.norm(f[:, None, :] - o[None, :, :], axis=2)
    return float(dists.min(axis=1).max())


def mixed_linearity_check(scheme: JointScheme, A, B, decomposition: Decomposition) -> tuple[float, float]:
    """|eps^2(rho) - sum_i p_i eps^2(psi_i)| for both observables."""
    if decomposition.dim != scheme.sys_dim:
        raise DimensionMismatch(f"decomposition dim {decomposition.dim} vs scheme system dim {scheme.sys_dim}")
    whole = scheme_stats(scheme, A, B, decomposition.state())
    parts = [scheme_stats(scheme, A, B, c) for c in decomposition.components]
    sa = sum(p * s.eps_a**2 for p, s in zip(decomposition.weights, parts))
    sb = sum(p * s.eps_b**2 for p, s in zip(decomposition.weights, parts))
    return abs(whole.eps_a**2 - sa), abs(whole.eps_b**2 - sb)


def pnas_frontier_squares(fixed: FixedParams, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(phi grid, eps_A^2, eps_B^2) along the saturating curve of one state."""
    grid = phi_grid(fixed, n)
    u = np.array([saturating_u(float(p), fixed.phi_prime) for p in grid])
    return grid, fixed.std_a**2 * u[:, 0] ** 2, fixed.std_b**2 * u[:, 1] ** 2


def _refined_min(fixed: FixedParams, lam: float, grid, x, y) -> tuple[float, float, float]:
    """Minimize lam*x + (1-lam)*y along the curve: grid argmin, then a local polish."""
    obj = lam * x + (1 - lam) * y
    j = int(np.argmin(obj))
    best = (float(grid[j]), float(x[j]), float(y[j]))
    if len(grid) < 3 or grid[-1] == grid[0]:
        return best

    def f(p):
        ua, ub = saturating_u(p, fixed.phi_prime)
        return lam * fixed.std_a**2 * ua**2 + (1 - lam) * fixed.std_b**2 * ub**2

    lo, hi = float(grid[max(j - 1, 0)]), float(grid[min(j + 1, len(grid) - 1)])
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    if res.fun < obj[j]:
        ua, ub = saturating_u(float(res.x), fixed.phi_prime)
        best = (float(res.x), fixed.std_a**2 * ua**2, fixed.std_b**2 * ub**2)
    return best


def mixed_strengthen(
    A, B, decomposition: Decomposition, phi_grid_size: int = 721, lambda_grid_size: int = 721
) -> list[FrontierPoint]:
    """Lower envelope of (eps_A^2, eps_B^2) implied by a decomposition of rho.

    Each pure component obeys its own tight relation and eps^2 is linear in
    rho, so the weighted sum of per-component minima of
    lam*eps_A^2 + (1-lam)*eps_B^2 lower-bounds the same objective for rho.
    The result is a necessary condition only; it is not claimed tight.
    """
    if phi_grid_size < 3:
        raise ValidationError("phi_grid_size must be >= 3")
    comps = [fixed_params(A, B, c) for c in decomposition.components]
    curves = [pnas_frontier_squares(fx, phi_grid_size) for fx in comps]
    rho_fixed = fixed_params(A, B, decomposition.state())
    points = []
    for lam in np.linspace(0.0, 1.0, lambda_grid_size):
        xa = xb = 0.0
        for p, fx, (grid, x, y) in zip(decomposition.weights, comps, curves):
            _, bx, by = _refined_min(fx, float(lam), grid, x, y)
            xa += p * bx
            xb += p * by
        ea, eb = math.sqrt(xa), math.sqrt(xb)
        # consistency with the plain relation for rho itself
        viol = core_residual(ea / rho_fixed.std_a, eb / rho_fixed.std_b, rho_fixed.tilde_c)
        points.append(FrontierPoint(ea, eb, MIXED_ENVELOPE, None, viol, float(lam)))
    return points


def support_value(points_sq: np.ndarray, lam: float) -> float:
    """min over points of lam*x + (1-lam)*y for an (n, 2) array of squared errors."""
    pts = np.asarray(points_sq)
    return float(np.min(lam * pts[:, 0] + (1 - lam) * pts[:, 1]))


def envelope_support(points: Sequence[FrontierPoint], lam: float) -> float:
    """Support value of the envelope at weight lam (its own optimum)."""
    for p in points:
        if p.weight is not None and abs(p.weight - lam) < 1e-15:
            return lam * p.eps_a**2 + (1 - lam) * p.eps_b**2
    return support_value(np.array([[p.eps_a**2, p.eps_b**2] for p in points]), lam)


# -- the fully mixed qubit ------------------------------------------------


def qubit_family_scheme(phi: float) -> JointScheme:
    """A = cos(phi) n.sigma, B = sin(phi) n.sigma with n = (cos phi, sin phi, 0)."""
    n_sigma = math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y
    return build_scheme(math.cos(phi) * n_sigma, math.sin(phi) * n_sigma)


def bell_scheme() -> JointScheme:
    """Estimators on the two-qubit space that reproduce sigma_x, sigma_y on |Phi+>."""
    s = 1 / math.sqrt(2)
    phi_p = s * np.array([1, 0, 0, 1], dtype=complex)
    psi_p = s * np.array([0, 1, 1, 0], dtype=complex)
    psi_m = s * np.array([0, 1, -1, 0], dtype=complex)

    def ket_bra(a, b):
        return np.outer(a, b.conj())

    est_a = ket_bra(phi_p, psi_p) + ket_bra(psi_p, phi_p) + ket_bra(psi_m, psi_m)
    est_b = 1j * (ket_bra(phi_p, psi_m) - ket_bra(psi_m, phi_p) + ket_bra(psi_p, psi_m) - ket_bra(psi_m, psi_p))
    return build_scheme(est_a, est_b)


def qubit_example_report(family_angles: Sequence[float] = (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2)) -> dict:
    """All quantities of the fully mixed qubit example with A = sigma_x, B = sigma_y."""
    rho = make_state(np.eye(2) / 2)
    ket0, ket1 = make_state([1, 0]), make_state([0, 1])
    fr = fixed_params(SIGMA_X, SIGMA_Y, rho)
    f0 = fixed_params(SIGMA_X, SIGMA_Y, ket0)
    f1 = fixed_params(SIGMA_X, SIGMA_Y, ket1)
    family = []
    for phi in family_angles:
        st = scheme_stats(qubit_family_scheme(phi), SIGMA_X, SIGMA_Y, rho)
        family.append(
            {
                "phi": float(phi),
                "epsA_sq": st.eps_a**2,
                "epsB_sq": st.eps_b**2,
                "sum": st.eps_a**2 + st.eps_b**2,
                "expected_epsA_sq": math.sin(phi) ** 2,
                "expected_epsB_sq": math.cos(phi) ** 2,
            }
        )
    decomposition = Decomposition((0.5, 0.5), (ket0, ket1))
    envelope = mixed_strengthen(SIGMA_X, SIGMA_Y, decomposition)
    env_dev = max(abs(p.eps_a**2 + p.eps_b**2 - 1) for p in envelope)
    bell = bell_scheme()
    phi_plus = make_state(np.array([1, 0, 0, 1]) / math.sqrt(2))
    ax, ay = np.kron(SIGMA_X, np.eye(2)), np.kron(SIGMA_Y, np.eye(2))
    bst = scheme_stats(bell, ax, ay, phi_plus)
    pnas_rho = evaluate_relation(RelationKind.PNAS, fr, scheme_stats(qubit_family_scheme(math.pi / 4), SIGMA_X, SIGMA_Y, rho))
    return {
        "A": "sigma_x",
        "B": "sigma_y",
        "DeltaA_rho": fr.std_a,
        "DeltaB_rho": fr.std_b,
        "C_AB_rho": fr.c_ab,
        "C_AB_ket0": f0.c_ab,
        "C_AB_ket1": f1.c_ab,
        "plain_relation_rho": {"tildeC": fr.tilde_c, "residual_at_family_pi_4": pnas_rho.residual, "restrictive": False},
        "strengthened_bound": "epsA^2 + epsB^2 >= 1",
        "envelope_max_deviation": env_dev,
        "envelope_points": len(envelope),
        "necessary_bound_only": True,
        "saturating_family": family,
        "purification": {
            "state": "Phi+",
            "epsA": bst.eps_a,
            "epsB": bst.eps_b,
            "commutator_norm": bell.commutator_norm(),
        },
    }
