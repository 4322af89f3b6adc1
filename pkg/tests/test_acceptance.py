"""Acceptance criteria 1-9; each prints one PASS/FAIL line.

Run under pytest (lines are echoed in the terminal summary) or directly:
``python tests/test_acceptance.py``.
"""
import math
import sys
import time
import warnings

import numpy as np

from errtradeoff.errors import TightnessNotGuaranteed
from errtradeoff.explorer import (
    Decomposition,
    constructed_frontier,
    frontier_coverage,
    mixed_strengthen,
    qubit_family_scheme,
    random_scan,
)
from errtradeoff.qcore import (
    SIGMA_X,
    SIGMA_Y,
    fixed_params,
    haar_random_state,
    haar_unitary,
    make_state,
    random_hermitian,
)
from errtradeoff.relations import (
    LemmaVectors,
    RelationKind,
    alt_form_satisfied,
    cauchy3_bound,
    cauchy4_bound,
    core_residual,
    evaluate_relation,
    hall_residual,
    lemma_check,
    ozawa_normalized_residual,
    ozawa_residual,
    weston_residual,
)
from errtradeoff.saturation import SaturationSpec, estimator_from_basis, optimal_eigenvalues, saturating_scheme
from errtradeoff.scheme import build_scheme, consistency_identity, scheme_stats, variance_triangle

RESULTS: dict[int, str] = {}
KET0, KET1 = make_state([1, 0]), make_state([0, 1])
MIXED = make_state(np.eye(2) / 2)


def report(num: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[num] = line
    print(line)
    assert ok, line


def _triple(dim, i):
    base = 7919 * dim + 31 * i
    return random_hermitian(dim, base + 1), random_hermitian(dim, base + 2), haar_random_state(dim, base + 3)


def _random_scheme(dim, rng, anc_dim):
    n = dim * anc_dim
    u = haar_unitary(n, rng)
    a = (u * rng.normal(size=n)) @ u.conj().T
    b = (u * rng.normal(size=n)) @ u.conj().T
    anc = None
    if anc_dim > 1:
        v = rng.standard_normal(anc_dim) + 1j * rng.standard_normal(anc_dim)
        anc = make_state(v / np.linalg.norm(v))
    return build_scheme((a + a.conj().T) / 2, (b + b.conj().T) / 2, anc)


def test_criterion_1_qubit_example():
    fr, f0, f1 = (fixed_params(SIGMA_X, SIGMA_Y, s) for s in (MIXED, KET0, KET1))
    errs = [abs(fr.std_a - 1), abs(fr.std_b - 1), abs(fr.c_ab), abs(f0.c_ab - 1), abs(f1.c_ab + 1)]
    report(1, max(errs) <= 1e-12, f"max deviation {max(errs):.2e} (tol 1e-12)")


def test_criterion_2_mixed_strengthening():
    env = mixed_strengthen(SIGMA_X, SIGMA_Y, Decomposition((0.5, 0.5), (KET0, KET1)), 721, 721)
    env_dev = max(abs(p.eps_a**2 + p.eps_b**2 - 1) for p in env)
    fam_dev = 0.0
    for phi in (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2):
        st = scheme_stats(qubit_family_scheme(phi), SIGMA_X, SIGMA_Y, MIXED)
        fam_dev = max(fam_dev, abs(st.eps_a**2 - math.sin(phi) ** 2), abs(st.eps_b**2 - math.cos(phi) ** 2))
    ok = len(env) == 721 and env_dev <= 1e-6 and fam_dev <= 1e-12
    report(2, ok, f"envelope dev {env_dev:.2e} (tol 1e-6) over {len(env)} weights, family dev {fam_dev:.2e} (tol 1e-12)")


def test_criterion_3_tightness_suite():
    rng = np.random.default_rng(2024)
    worst_res = worst_comm = worst_tgt = 0.0
    n = 0
    for dim in (2, 3, 4):
        for i in range(50):
            A, B, psi = _triple(dim, i)
            fx = fixed_params(A, B, psi)
            sa, sb = rng.uniform(0.2, 1.5, 2) * (fx.std_a, fx.std_b)
            ba, bb = rng.uniform(-0.3, 0.3, 2)
            f_t = dict(std_est_a=sa, std_est_b=sb, bias_a=ba, bias_b=bb)
            cases = [
                (RelationKind.F, "lower", f_t),
                (RelationKind.F, "upper", f_t),
                (RelationKind.G, "lower", dict(std_est_a=sa, std_est_b=sb)),
                (RelationKind.H, "lower", dict(bias_a=ba, bias_b=bb)),
                (RelationKind.PNAS, "lower", {}),
            ]
            for t in np.linspace(-abs(fx.phi_prime), abs(fx.phi_prime), 41):
                for kind, side, targets in cases:
                    scheme, verdict = saturating_scheme(A, B, psi, SaturationSpec(kind, float(t), side, **targets))
                    st = scheme_stats(scheme, A, B, psi)
                    worst_res = max(worst_res, abs(verdict.residual))
                    worst_comm = max(worst_comm, scheme.commutator_norm())
                    for key, val in targets.items():
                        worst_tgt = max(worst_tgt, abs(getattr(st, key) - val))
                    n += 1
    ok = worst_res <= 1e-9 and worst_comm <= 1e-10 and worst_tgt <= 1e-9
    report(3, ok, f"{n} schemes: max|res| {worst_res:.2e}, max comm {worst_comm:.2e}, max target err {worst_tgt:.2e}")


def test_criterion_4_pm1_tightness():
    worst = 0.0
    n = 0
    with warnings.catch_warnings():
        warnings.simplefilter("error", TightnessNotGuaranteed)
        for alpha in np.linspace(0, math.pi, 7):
            A = math.cos(alpha) * SIGMA_X + math.sin(alpha) * SIGMA_Y
            B = -math.sin(alpha) * SIGMA_X + math.cos(alpha) * SIGMA_Y
            for psi in (KET0, KET1):
                fx = fixed_params(A, B, psi)
                assert abs(fx.mean_a) <= 1e-12 and abs(fx.mean_b) <= 1e-12
                for kind in (RelationKind.PRL, RelationKind.FBIS):
                    for side in ("lower", "upper"):
                        for t in np.linspace(-abs(fx.phi_prime), abs(fx.phi_prime), 41):
                            _, v = saturating_scheme(A, B, psi, SaturationSpec(kind, float(t), side))
                            worst = max(worst, abs(v.residual))
                            n += 1
    report(4, worst <= 1e-9, f"{n} PRL/FBIS schemes on both sides: max|res| {worst:.2e} (tol 1e-9)")


def test_criterion_5_implication_chain():
    rng = np.random.default_rng(55)
    worst = math.inf
    n = 0
    while n < 10_000:
        ua, ub = rng.uniform(0, 1, 2)
        c = rng.uniform(-1, 1)
        if core_residual(ua, ub, c) < 0:
            continue
        x, y = rng.uniform(0, 1.5, 2)
        worst = min(worst, ozawa_normalized_residual(ua, ub, c), cauchy3_bound(ua, ub, x, y, c), cauchy4_bound(ua, ub, x, y, c))
        n += 1
    schemes = 0
    for dim in (2, 3, 4):
        for i in range(5):
            A, B, psi = _triple(dim, 100 + i)
            fx = fixed_params(A, B, psi)
            for _ in range(200):
                u = haar_unitary(dim, rng)
                s = build_scheme(
                    estimator_from_basis(u, optimal_eigenvalues(u, A, psi)),
                    estimator_from_basis(u, optimal_eigenvalues(u, B, psi)),
                )
                st = scheme_stats(s, A, B, psi)
                if evaluate_relation(RelationKind.PNAS, fx, st).residual >= 0:
                    worst = min(worst, ozawa_residual(fx, st.eps_a, st.eps_b))
                if evaluate_relation(RelationKind.G, fx, st).residual >= 0:
                    worst = min(worst, hall_residual(st, fx), weston_residual(st, fx))
                schemes += 1
    report(5, worst >= -1e-10, f"{n} tuples + {schemes} oracle schemes: min residual {worst:.2e} (floor -1e-10)")


def test_criterion_6_alternative_form():
    grid = np.linspace(0, 1.5, 200)
    mismatches = 0
    for c in np.linspace(-1, 1, 21):
        for ua in grid:
            for ub in grid:
                ref = core_residual(ua, ub, c) >= 0
                mismatches += ref != alt_form_satisfied(ua, ub, c)
                mismatches += ref != alt_form_satisfied(ua, ub, c, squared_threshold=True)
    report(6, mismatches == 0, f"{mismatches} mismatches on 200x200x21 grid, both variants")


def test_criterion_7_identities_and_lemma():
    rng = np.random.default_rng(77)
    worst_id = 0.0
    outside = 0
    for dim in (2, 3, 4):
        for i in range(1000):
            A, B, psi = _triple(dim, i % 50)
            fx = fixed_params(A, B, psi)
            s = _random_scheme(dim, rng, 1 + i % 3)
            st = scheme_stats(s, A, B, psi)
            worst_id = max(worst_id, *map(abs, consistency_identity(st, fx, s, A, B, psi)))
            for which, eps, sd, bias in (("A", st.eps_a, st.std_est_a, st.bias_a), ("B", st.eps_b, st.std_est_b, st.bias_b)):
                lo, hi = variance_triangle(fx, sd, bias, which)
                outside += not (lo - 1e-10 <= eps**2 <= hi + 1e-10)
    worst_lemma = math.inf
    for _ in range(10_000):
        a, b = (v / np.linalg.norm(v) for v in rng.standard_normal((2, 6)))
        q, _ = np.linalg.qr(rng.standard_normal((6, 2)))
        worst_lemma = min(worst_lemma, lemma_check(LemmaVectors(a, b, q[:, 0], q[:, 1])))
    ok = worst_id <= 1e-9 and outside == 0 and worst_lemma >= -1e-10
    report(7, ok, f"identity max {worst_id:.2e}, {outside} triangle violations, lemma min {worst_lemma:.2e}")


def test_criterion_8_weak_values():
    worst_id = 0.0
    cases = failures = 0
    for dim in (2, 3, 4):
        for i in range(10):
            A, B, psi = _triple(dim, 200 + i)
            fx = fixed_params(A, B, psi)
            for t in np.linspace(-abs(fx.phi_prime), abs(fx.phi_prime), 9):
                s, _ = saturating_scheme(A, B, psi, SaturationSpec(RelationKind.PNAS, float(t)))
                st = scheme_stats(s, A, B, psi)
                worst_id = max(worst_id, abs(st.std_est_a**2 - (fx.std_a**2 - st.eps_a**2)))
                w, v = np.linalg.eigh(s.est_a.matrix)
                overlaps = np.abs(v.conj().T @ psi.vector)
                for k in np.flatnonzero(overlaps >= 1e-6):
                    for delta in (0.01, -0.01):
                        bumped = w.copy()
                        bumped[k] += delta
                        est = (v * bumped) @ v.conj().T
                        pert = scheme_stats(build_scheme(est, est), A, A, psi)
                        cases += 1
                        failures += not pert.eps_a**2 > st.eps_a**2
    ok = worst_id <= 1e-10 and failures == 0
    report(8, ok, f"spread identity max {worst_id:.2e}; {failures}/{cases} perturbations failed to increase eps^2")


def test_criterion_9_oracle_consistency():
    triples = [(SIGMA_X, SIGMA_Y, KET0)] + [_triple(2, 300 + i) for i in range(3)]
    worst_violation = math.inf
    worst_cov = 0.0
    for j, (A, B, psi) in enumerate(triples):
        cloud = random_scan(A, B, psi, 2000, j)
        worst_violation = min(worst_violation, min(p.violation for p in cloud))
        worst_cov = max(worst_cov, frontier_coverage(cloud, constructed_frontier(A, B, psi, 41)))
    ok = worst_violation >= -1e-9 and worst_cov <= 0.02
    report(9, ok, f"min violation {worst_violation:.2e} (floor -1e-9), frontier distance {worst_cov:.4f} (tol 0.02)")


if __name__ == "__main__":
    status = 0
    for name, fn in sorted((n, f) for n, f in globals().items() if n.startswith("test_criterion_")):
        t0 = time.perf_counter()
        try:
            fn()
        except AssertionError:
            status = 1
        print(f"    ({time.perf_counter() - t0:.1f}s)")
    sys.exit(status)
