"""Command-line interface: ``metradeoff {curve,verify,mc,optimize}``.

Exit codes: 0 success, 1 failed check or statistical deviation, 2 usage or
I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from metradeoff import choi, fidelity, haar, instrument, linalg

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MC_SIGMAS = 4.0
P_GRID = [round(0.1 * k, 10) for k in range(11)]


@dataclass
class RunConfig:
    dim: int = 2
    points: int = 101
    samples: int = 20000
    seed: int | None = None
    p: float = 0.5
    a: float = 0.5
    out: str | None = None
    format: str = "csv"
    jobs: int = 1


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)


def curve_text(cfg: RunConfig) -> str:
    points = fidelity.tradeoff_curve(cfg.dim, cfg.points)
    if cfg.format == "json":
        rows = [dict(zip("a b F G I D".split(), p.as_row())) for p in points]
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["a", "b", "F", "G", "I", "D"])
    for p in points:
        writer.writerow([_fmt(x) for x in p.as_row()])
    return buf.getvalue()


def cmd_curve(cfg: RunConfig) -> int:
    _emit(curve_text(cfg), cfg.out)
    return EXIT_OK


def cmd_mc(cfg: RunConfig) -> tuple[int, dict]:
    params = instrument.OptimalParams.from_a(cfg.a, cfg.dim)
    instr = instrument.optimal_discrete_instrument(params)
    F, G = fidelity.mc_fidelities(instr, cfg.samples, haar.SeededStream(cfg.seed), jobs=cfg.jobs)
    F0 = fidelity.closed_form_F(cfg.a, cfg.dim)
    G0 = fidelity.closed_form_G(cfg.a, cfg.dim)
    report = {
        "dim": cfg.dim,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "a": params.a,
        "b": params.b,
        "F_closed": F0,
        "G_closed": G0,
        "F_mc": F.value,
        "F_stderr": F.stderr,
        "G_mc": G.value,
        "G_stderr": G.stderr,
        "sigmas_F": F.sigmas(F0),
        "sigmas_G": G.sigmas(G0),
    }
    ok = F.within(F0, MC_SIGMAS) and G.within(G0, MC_SIGMAS)
    return (EXIT_OK if ok else EXIT_FAIL), report


def cmd_optimize(cfg: RunConfig) -> tuple[int, dict]:
    opt = choi.optimize(cfg.p, cfg.dim)
    pt = opt.point
    gf, _ = fidelity.tradeoff_residuals(pt.F, pt.G, cfg.dim)
    report = {
        "dim": cfg.dim,
        "p": cfg.p,
        "x": opt.chi.x,
        "y": opt.chi.y,
        "a": pt.a,
        "b": pt.b,
        "F": pt.F,
        "G": pt.G,
        "I": pt.I,
        "D": pt.D,
        "eigenvalue": opt.eigenvalue,
        "form_residual": opt.residual,
        "gf_residual": gf,
    }
    return EXIT_OK, report


def _identity_residuals(d: int, rng: np.random.Generator, trials: int = 50) -> dict[str, float]:
    def rand():
        return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))

    kron_err = tr1_err = tr2_err = 0.0
    for _ in range(trials):
        A, B, C = rand(), rand(), rand()
        lhs = linalg.kron(A, B) @ linalg.vectorize(C)
        rhs = linalg.vectorize(A @ C @ B.T)
        kron_err = max(kron_err, np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
        M = linalg.ket_bra(linalg.vectorize(A), linalg.vectorize(B))
        scale = np.max(np.abs(M))
        tr1_err = max(tr1_err, np.max(np.abs(linalg.partial_trace(M, (d, d), [1]) - A.T @ B.conj())) / scale)
        tr2_err = max(tr2_err, np.max(np.abs(linalg.partial_trace(M, (d, d), [2]) - A @ B.conj().T)) / scale)
    return {"kron_vec": float(kron_err), "trace_1": float(tr1_err), "trace_2": float(tr2_err)}


def _tp_error_from_kraus(A: np.ndarray, d: int) -> float:
    # Tr_34 |A>><<A| = A A^dagger; then trace subsystem 1
    red = linalg.partial_trace(A @ A.conj().T, (d, d), [1])
    return float(np.max(np.abs(red - d * np.eye(d))))


def cmd_verify(cfg: RunConfig) -> tuple[int, dict]:
    d = cfg.dim
    rng = np.random.default_rng(cfg.seed)
    report: dict = {"dim": d, "seed": cfg.seed, "samples": cfg.samples}
    passed: list[bool] = []

    def check(name: str, value: float, ok: bool) -> None:
        report[f"{name}_residual"] = float(value)
        report[f"{name}_pass"] = bool(ok)
        passed.append(bool(ok))

    for name, err in _identity_residuals(d, rng).items():
        check(f"identity_{name}", err, err < 1e-12)

    stream = haar.SeededStream(cfg.seed, 0)
    X = np.zeros((d, d), dtype=complex)
    X[0, 0] = 1
    mean, se = haar.mc_average(lambda U: U @ X @ U.conj().T, d, cfg.samples, stream, jobs=cfg.jobs)
    err = float(np.max(np.abs(mean - haar.twirl_U(X))))
    check("twirl_irreducible", err, err <= 3 * se)

    Y = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
    Y = Y @ Y.conj().T / (d * d)

    def uu(U):
        W = np.kron(U, U.conj())
        return W @ Y @ W.conj().T

    mean, se = haar.mc_average(uu, d, cfg.samples, haar.SeededStream(cfg.seed, 1), jobs=cfg.jobs)
    err = float(np.max(np.abs(mean - haar.twirl_UUconj(Y, d))))
    check("twirl_reducible", err, err <= 3 * se)

    comp = pos = 0.0
    for a in np.linspace(0, 1, 11):
        instr = instrument.optimal_discrete_instrument(instrument.OptimalParams.from_a(float(a), d))
        comp = max(comp, instr.completeness_error())
        pos = max(pos, max(-np.linalg.eigvalsh(P)[0] for P in instr.povm()))
    check("povm_completeness", comp, comp <= 1e-10)
    check("povm_positivity", max(pos, 0.0), pos <= 1e-10)

    if d <= choi.DENSE_MAX_DIM:
        RF, RG = choi.build_RF(d), choi.build_RG(d)
        for name, R in (("RF", RF), ("RG", RG)):
            check(f"{name}_trace", abs(R.trace() - 1), abs(R.trace() - 1) < 1e-12)
            check(f"{name}_positivity", max(-R.min_eig(), 0.0), R.min_eig() > -1e-10)

    form = gf_max = tp = 0.0
    for p in P_GRID:
        opt = choi.optimize(p, d)
        form = max(form, opt.residual)
        gf_max = max(gf_max, abs(fidelity.gf_residual(opt.point.F, opt.point.G, d)))
        A, _, _ = choi.chi_to_kraus(opt.chi)
        tp = max(tp, _tp_error_from_kraus(A, d))
    check("eigenvector_form", form, form < 1e-8)
    check("optimizer_gf", gf_max, gf_max < 1e-8)
    check("tp_condition", tp, tp < 1e-9)

    gf_max = quad_max = 0.0
    for pt in fidelity.tradeoff_curve(d, cfg.points):
        gf, quad = fidelity.tradeoff_residuals(pt.F, pt.G, d)
        gf_max = max(gf_max, abs(gf))
        quad_max = max(quad_max, abs(quad))
    check("curve_gf", gf_max, gf_max < 1e-10)
    check("curve_quadratic", quad_max, quad_max < 1e-10)

    report["all_pass"] = all(passed)
    return (EXIT_OK if all(passed) else EXIT_FAIL), report


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=2, help="subsystem dimension d")
    common.add_argument("--points", type=int, default=101, help="sweep points")
    common.add_argument("--samples", type=int, default=20000, help="Haar samples")
    common.add_argument("--seed", type=int, help="RNG seed (required by verify and mc)")
    common.add_argument("--p", type=float, default=0.5, help="weight of G in the objective")
    common.add_argument("--a", type=float, default=0.5, help="instrument parameter a")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for Monte Carlo")

    parser = argparse.ArgumentParser(
        prog="metradeoff",
        description="Information-disturbance tradeoff for maximally entangled states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("curve", parents=[common], help="optimal tradeoff curve as CSV/JSON")
    sub.add_parser("verify", parents=[common], help="run the numerical self-checks")
    sub.add_parser("mc", parents=[common], help="Monte-Carlo vs closed-form fidelities")
    sub.add_parser("optimize", parents=[common], help="solve the eigenproblem for weight p")
    return parser


def _validate(cfg: RunConfig, command: str) -> str | None:
    if cfg.dim < 2:
        return "--dim must be at least 2"
    if cfg.points < 2:
        return "--points must be at least 2"
    if cfg.samples < 100:
        return "--samples must be at least 100"
    if not 0.0 <= cfg.p <= 1.0:
        return "--p must lie in [0, 1]"
    if not 0.0 <= cfg.a <= 1.0:
        return "--a must lie in [0, 1]"
    if cfg.jobs < 1:
        return "--jobs must be positive"
    if command in ("verify", "mc") and cfg.seed is None:
        return f"{command} requires --seed"
    return None


COMMANDS: dict[str, Callable[[RunConfig], tuple[int, dict]]] = {
    "verify": cmd_verify,
    "mc": cmd_mc,
    "optimize": cmd_optimize,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = args.command
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k != "command"})
    problem = _validate(cfg, command)
    if problem:
        parser.print_usage(sys.stderr)
        print(f"metradeoff {command}: error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if command == "curve":
            return cmd_curve(cfg)
        code, report = COMMANDS[command](cfg)
        _emit(json.dumps(report, indent=1) + "\n", cfg.out)
        return code
    except OSError as exc:
        print(f"metradeoff {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
