"""Command-line frontend.

Exit status: 0 on success, 1 when ``verify`` finds a residual above tol,
2 for unreadable or invalid input.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as tio
from .errors import TightnessNotGuaranteed, TradeoffError, ValidationError
from .explorer import Decomposition, eigen_decomposition, mixed_strengthen, phi_grid, qubit_example_report, random_scan
from .qcore import SIGMA_X, SIGMA_Y, fixed_params, haar_random_state, make_state, random_hermitian
from .relations import DEFAULT_TOL, PM1_KINDS, RelationKind, evaluate_relation
from .saturation import LOWER, UPPER, SaturationSpec, saturating_scheme
from .scheme import scheme_stats

SUBCOMMANDS = ("analyze", "frontier", "verify", "scan", "mixed", "qubit-example")
TARGET_KEYS = {"stdEstA": "std_est_a", "stdEstB": "std_est_b", "biasA": "bias_a", "biasB": "bias_b"}


@dataclass
class RunConfig:
    subcommand: str
    input: Optional[str] = None
    output: Optional[str] = None
    bounds_output: Optional[str] = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    samples: Optional[int] = None
    phi_steps: Optional[int] = None
    lambda_steps: int = 721
    side: str = LOWER
    relations: list = field(default_factory=list)

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ValidationError(f"unknown subcommand {self.subcommand!r}")
        if not self.tol > 0:
            raise ValidationError("tol must be > 0")
        if self.input is not None and not Path(self.input).is_file():
            raise ValidationError(f"input file {self.input} does not exist")
        for name in ("samples", "phi_steps"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValidationError(f"{name.replace('_', '-')} must be >= 1")


def bundled(name: str) -> Path:
    """Path of a bundled example input."""
    return Path(str(resources.files("errtradeoff") / "data" / name))


def _needs_input(cfg: RunConfig) -> dict:
    if cfg.input is None:
        raise ValidationError(f"{cfg.subcommand} requires --input")
    return tio.load_problem(cfg.input)


def _targets(raw: dict) -> dict:
    unknown = set(raw) - set(TARGET_KEYS)
    if unknown:
        raise ValidationError(f"unknown target keys {sorted(unknown)}")
    return {TARGET_KEYS[k]: v for k, v in raw.items()}


# -- subcommands ------------------------------------------------------------


def cmd_analyze(cfg: RunConfig) -> int:
    prob = _needs_input(cfg)
    if "scheme" not in prob:
        raise ValidationError(f"{cfg.input}: analyze needs a 'scheme'")
    A, B, state, scheme = prob["A"], prob["B"], prob["state"], prob["scheme"]
    fixed = fixed_params(A, B, state)
    stats = scheme_stats(scheme, A, B, state)
    kinds = [RelationKind(k.upper()) for k in cfg.relations] or list(RelationKind)
    verdicts = {}
    for k in kinds:
        try:
            v = evaluate_relation(k, fixed, stats, cfg.tol, targets=(A, B), scheme=scheme)
            verdicts[k.value] = v.as_dict()
        except TradeoffError as exc:
            if k not in PM1_KINDS:
                raise
            verdicts[k.value] = {"error": type(exc).__name__, "message": str(exc)}
    doc = {
        "fixed": fixed.as_dict(),
        "stats": stats.as_dict(),
        "commutatorNorm": scheme.commutator_norm(),
        "verdicts": verdicts,
    }
    tio.write_text(cfg.output, tio.dumps(doc))
    return 0


def _bounds_row(fixed, stats):
    """Smallest epsB each historical relation allows at this epsA."""
    ea, c = stats.eps_a, abs(fixed.c_ab)
    ozawa = max(0.0, (c - fixed.std_b * ea) / (ea + fixed.std_a))
    hall_den = ea + stats.std_est_a
    hall = max(0.0, (c - stats.std_est_b * ea) / hall_den) if hall_den > 0 else (0.0 if c <= 0 else math.inf)
    wd = (fixed.std_a + stats.std_est_a) / 2
    weston = max(0.0, (c - (fixed.std_b + stats.std_est_b) / 2 * ea) / wd)
    return [ea, ozawa, hall, weston]


def cmd_frontier(cfg: RunConfig) -> int:
    prob = _needs_input(cfg)
    A, B, state = prob["A"], prob["B"], prob["state"]
    kind = RelationKind((cfg.relations or ["PNAS"])[0].upper())
    targets = _targets(prob["targets"])
    fixed = fixed_params(A, B, state)
    rows, bounds = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TightnessNotGuaranteed)
        for phi in phi_grid(fixed, cfg.phi_steps or 41):
            spec = SaturationSpec(kind, float(phi), cfg.side, **targets)
            scheme, verdict = saturating_scheme(A, B, state, spec, cfg.tol)
            stats = scheme_stats(scheme, A, B, state)
            rows.append([float(phi), verdict.u_a, verdict.u_b, stats.eps_a, stats.eps_b, verdict.residual])
            bounds.append(_bounds_row(fixed, stats))
    tio.write_text(cfg.output, tio.csv_text(["phi_param", "uA", "uB", "epsA", "epsB", "residual"], rows))
    bpath = cfg.bounds_output
    if bpath is None and cfg.output not in (None, "-"):
        out = Path(cfg.output)
        bpath = str(out.with_name(out.stem + ".bounds.csv"))
    if bpath is not None:
        tio.write_text(bpath, tio.csv_text(["epsA", "ozawa_epsB", "hall_epsB", "weston_epsB"], bounds))
    return 0


def verification_cases(samples: int = 3, seed: int = 0):
    """Deterministic (label, A, B, state, kind, side, targets) matrix."""
    rng = np.random.default_rng(seed)
    for d in (2, 3, 4):
        for i in range(samples):
            base = 1000 * d + 10 * i + seed
            state = haar_random_state(d, base)
            A, B = random_hermitian(d, base + 1), random_hermitian(d, base + 2)
            fx = fixed_params(A, B, state)
            sa, sb = rng.uniform(0.2, 1.5, 2) * (fx.std_a, fx.std_b)
            ba, bb = rng.uniform(-0.3, 0.3, 2)
            label = f"d{d}s{i}"
            f_t = {"std_est_a": sa, "std_est_b": sb, "bias_a": ba, "bias_b": bb}
            yield label, A, B, state, RelationKind.F, LOWER, f_t
            yield label, A, B, state, RelationKind.F, UPPER, f_t
            yield label, A, B, state, RelationKind.G, LOWER, {"std_est_a": sa, "std_est_b": sb}
            yield label, A, B, state, RelationKind.H, LOWER, {"bias_a": ba, "bias_b": bb}
            yield label, A, B, state, RelationKind.PNAS, LOWER, {}
    # +-1 targets with zero means on qubits: rotated (sigma_x, sigma_y) pairs
    for j, alpha in enumerate((0.0, 0.7, 2.1)):
        A = math.cos(alpha) * SIGMA_X + math.sin(alpha) * SIGMA_Y
        B = -math.sin(alpha) * SIGMA_X + math.cos(alpha) * SIGMA_Y
        for st_label, vec in (("0", [1, 0]), ("1", [0, 1])):
            state = make_state(vec)
            for kind in PM1_KINDS:
                for side in (LOWER, UPPER):
                    yield f"pm1r{j}k{st_label}", A, B, state, kind, side, {}


def _target_error(stats, targets: dict) -> float:
    errs = [abs(getattr(stats, k) - v) for k, v in targets.items()]
    return max(errs, default=0.0)


def cmd_verify(cfg: RunConfig) -> int:
    rows = []
    failed = False
    cases = verification_cases(cfg.samples or 3, cfg.seed)
    if cfg.input is not None:
        prob = tio.load_problem(cfg.input)
        kinds = [RelationKind(k.upper()) for k in cfg.relations] or [RelationKind.PNAS]
        cases = [
            ("input", prob["A"], prob["B"], prob["state"], k, cfg.side, _targets(prob["targets"])) for k in kinds
        ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TightnessNotGuaranteed)
        for label, A, B, state, kind, side, targets in cases:
            fixed = fixed_params(A, B, state)
            for phi in phi_grid(fixed, cfg.phi_steps or 41):
                spec = SaturationSpec(kind, float(phi), side, **targets)
                scheme, verdict = saturating_scheme(A, B, state, spec, cfg.tol)
                stats = scheme_stats(scheme, A, B, state)
                comm = scheme.commutator_norm()
                terr = _target_error(stats, targets)
                ok = abs(verdict.residual) <= cfg.tol and comm <= 1e-10 and terr <= cfg.tol
                failed |= not ok
                rows.append(
                    [f"{kind.value}:{label}", float(phi), side, stats.eps_a, stats.eps_b, verdict.residual, comm, terr]
                )
    header = ["kind", "phi_param", "side", "epsA", "epsB", "residual", "comm_norm", "max_target_err"]
    tio.write_text(cfg.output, tio.csv_text(header, rows))
    if failed:
        print(f"verification failed: some residual exceeds tol = {cfg.tol:g}", file=sys.stderr)
        return 1
    return 0


def _cloud_rows(points):
    return [[p.source, p.phi_param, p.eps_a, p.eps_b, p.violation] for p in points]


CLOUD_HEADER = ["source", "phi_param", "epsA", "epsB", "violation"]


def cmd_scan(cfg: RunConfig) -> int:
    prob = _needs_input(cfg)
    pts = random_scan(prob["A"], prob["B"], prob["state"], cfg.samples or 2000, cfg.seed, cfg.tol)
    tio.write_text(cfg.output, tio.csv_text(CLOUD_HEADER, _cloud_rows(pts)))
    return 0


def cmd_mixed(cfg: RunConfig) -> int:
    prob = _needs_input(cfg)
    if "decomposition" in prob:
        dec = Decomposition(*prob["decomposition"])
        if np.max(np.abs(dec.density() - prob["state"].rho())) > 1e-10:
            raise ValidationError(f"{cfg.input}: decomposition does not reconstruct the state")
    else:
        dec = eigen_decomposition(prob["state"])
    pts = mixed_strengthen(prob["A"], prob["B"], dec, cfg.phi_steps or 721, cfg.lambda_steps)
    tio.write_text(cfg.output, tio.csv_text(CLOUD_HEADER, _cloud_rows(pts)))
    return 0


def cmd_qubit_example(cfg: RunConfig) -> int:
    tio.write_text(cfg.output, tio.dumps(qubit_example_report()))
    return 0


DISPATCH = {
    "analyze": cmd_analyze,
    "frontier": cmd_frontier,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "mixed": cmd_mixed,
    "qubit-example": cmd_qubit_example,
}


def run(cfg: RunConfig) -> int:
    cfg.validate()
    return DISPATCH[cfg.subcommand](cfg)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="errtradeoff", description="Error-trade-off relations for joint measurements")
    sub = p.add_subparsers(dest="subcommand", required=True)
    helps = {
        "analyze": "fixed parameters, scheme statistics and every relation verdict (JSON)",
        "frontier": "saturating schemes along the frontier (CSV) plus historical bound curves",
        "verify": "run the saturation test matrix; exit 1 if any residual exceeds tol",
        "scan": "random-basis oracle cloud (CSV)",
        "mixed": "decomposition-based lower envelope for a mixed state (CSV)",
        "qubit-example": "report for the fully mixed qubit with sigma_x, sigma_y (JSON)",
    }
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--input", help="problem JSON (A, B, state, optional scheme/targets/decomposition)")
        sp.add_argument("--output", help="output path (default stdout)")
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--phi-steps", type=int)
        sp.add_argument("--side", choices=(LOWER, UPPER), default=LOWER)
        sp.add_argument("--relation", action="append", default=[], help="relation kind; repeatable or comma-separated")
        if name == "frontier":
            sp.add_argument("--bounds-output", help="CSV for the Ozawa/Hall/Weston curves")
        if name == "mixed":
            sp.add_argument("--lambda-steps", type=int, default=721)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rel = [r for item in args.relation for r in item.split(",") if r]
    cfg = RunConfig(
        subcommand=args.subcommand,
        input=args.input,
        output=args.output,
        bounds_output=getattr(args, "bounds_output", None),
        tol=args.tol,
        seed=args.seed,
        samples=args.samples,
        phi_steps=args.phi_steps,
        lambda_steps=getattr(args, "lambda_steps", 721),
        side=args.side,
        relations=rel,
    )
    try:
        return run(cfg)
    except TradeoffError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # e.g. an unknown relation name
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
