"""Batch front door: read symbol documents, run checks, emit a report.

Reports are deterministic line-oriented text with a stable field order:
identical configuration and seed produce byte-identical output, so golden
files diff cleanly.  Every failing verdict carries the witness needed to
reproduce it in-library.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (FactorizationError, InconclusiveTruncationError,
                     NotToeplitzProductError, PreconditionError,
                     WindowExhaustedError)
from .fileio import read_symbol
from .report import VerificationReport
from .symbol import (LaurentSymbol, is_inner, is_partial_isometry_ae, multiply)
from .trunc import analytic_product_operator, toeplitz_matrix
from .verify import (check_hyponormal, check_isometry, check_normal,
                     check_partial_isometry, check_range_doubly_commuting,
                     check_range_shift_invariant, check_toeplitz, check_unitary)
from .product import (coeff_condition, decompose, decomposition_to_operator,
                      point_condition, scalar_disjoint_check)
from .factor import factor_partial_isometry

ENV_DEGREE = "POLYTOEP_DEGREE"
DEFAULT_DEGREE = 8
DEFAULT_TOL = 1e-9
DEFAULT_SAMPLES = 50
DEFAULT_SEED = 0


@dataclass
class JobConfig:
    subcommand: str
    inputs: list[str]
    degree: int = DEFAULT_DEGREE
    tol: float = DEFAULT_TOL
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    out: str | None = None

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


def _fmt(x: float) -> str:
    return f"{x:.12e}"


def _fmt_window(w) -> str:
    return "-" if w is None else ",".join(str(c) for c in w)


def _clean(text: str | None) -> str:
    if not text:
        return "-"
    return text.replace(" ", "")


@dataclass
class ReportBuilder:
    lines: list[str] = field(default_factory=list)
    passed: int = 0
    failed: int = 0
    errors: int = 0
    skipped: int = 0

    def header(self, config: JobConfig) -> None:
        self.lines.append(f"# polytoep report v{__version__}")
        self.lines.append(
            f"config subcommand={config.subcommand} degree={config.degree} "
            f"tol={_fmt(config.tol)} samples={config.samples} seed={config.seed} "
            f"inputs={','.join(config.inputs) if config.inputs else '-'}")

    def check(self, rep: VerificationReport) -> None:
        verdict = "pass" if rep.verdict else "fail"
        self.lines.append(
            f"check name={rep.name} verdict={verdict} residual={_fmt(rep.residual)} "
            f"window={_fmt_window(rep.window)} tol={_fmt(rep.tol)} "
            f"witness={_clean(rep.witness)}")
        if rep.verdict:
            self.passed += 1
        else:
            self.failed += 1

    def result(self, name: str, verdict: bool, residual: float, tol: float,
               window=None, witness: str | None = None) -> None:
        self.check(VerificationReport(name, verdict, residual, tol, window,
                                      None if verdict else (witness or "none")))

    def error(self, name: str, exc: Exception) -> None:
        self.lines.append(
            f"check name={name} verdict=error residual=- window=- tol=- "
            f"witness={_clean(str(exc))}")
        self.errors += 1

    def skip(self, name: str, reason: str) -> None:
        self.lines.append(
            f"check name={name} verdict=skip residual=- window=- tol=- "
            f"witness={_clean(reason)}")
        self.skipped += 1

    def note(self, line: str) -> None:
        self.lines.append(line)

    def render(self) -> str:
        body = list(self.lines)
        body.append(
            f"summary checks={self.passed + self.failed} passed={self.passed} "
            f"failed={self.failed} errors={self.errors} skipped={self.skipped}")
        return "\n".join(body) + "\n"

    @property
    def all_green(self) -> bool:
        return self.failed == 0 and self.errors == 0


_GATED = (WindowExhaustedError, PreconditionError, InconclusiveTruncationError,
          FactorizationError)


def _run_check_toeplitz(config: JobConfig, rb: ReportBuilder) -> None:
    phi = read_symbol(config.inputs[0])
    op = toeplitz_matrix(phi, config.degree)
    rb.check(check_toeplitz(op, config.tol))


def _run_check_product(config: JobConfig, rb: ReportBuilder) -> None:
    gamma = read_symbol(config.inputs[0])
    psi = read_symbol(config.inputs[1])
    cc = coeff_condition(gamma, psi)
    witness = "-"
    if cc.witnesses:
        i, l, m, norm = cc.witnesses[0]
        witness = f"i={i},l={l},m={m},norm={norm:.3e}"
    rb.result("coeff_condition", cc.holds, cc.max_violation, cc.tol,
              witness=witness)
    pc = point_condition(gamma, psi, sample_count=config.samples,
                         seed=config.seed)
    rb.result("point_condition", pc.holds, pc.max_residual, pc.tol,
              witness=f"samples={pc.sample_count}")
    prod = analytic_product_operator(gamma, psi, config.degree)
    rb.check(check_toeplitz(prod, config.tol))
    if gamma.dim_out == 1 and gamma.dim_in == 1:
        sd = scalar_disjoint_check(gamma, psi)
        rb.result("scalar_disjoint_variables", sd.holds, 0.0 if sd.holds else 1.0,
                  config.tol,
                  witness=f"shared={sorted(sd.left_vars & sd.right_vars)}")


def _run_decompose(config: JobConfig, rb: ReportBuilder) -> None:
    gamma = read_symbol(config.inputs[0])
    psi = read_symbol(config.inputs[1])
    try:
        dec = decompose(gamma, psi)
    except NotToeplitzProductError as exc:
        rb.error("decompose", exc)
        for i, l, m, norm in exc.witnesses[:8]:
            rb.note(f"violation i={i} l={','.join(map(str, l))} "
                    f"m={','.join(map(str, m))} norm={_fmt(norm)}")
        return
    for idx, term in enumerate(dec.terms):
        a = ",".join(str(v) for v in sorted(term.A)) or "-"
        b = ",".join(str(v) for v in sorted(term.B)) or "-"
        rb.note(f"term index={idx} sign={term.sign:+d} A={a} B={b}")
    rb.note(f"formula {dec.render()}")
    recon = decomposition_to_operator(dec, gamma, psi, config.degree)
    target = analytic_product_operator(gamma, psi, config.degree)
    from .trunc import compare_on_window
    rb.check(compare_on_window(recon, target, config.tol,
                               name="decomposition_reconstruction"))


def _run_classify(config: JobConfig, rb: ReportBuilder) -> None:
    phi = read_symbol(config.inputs[0])
    if phi.is_analytic:
        cert = is_inner(phi)
        rb.result("inner_symbol", cert.verdict, cert.residual, cert.tol,
                  witness=f"worst_index={cert.worst_index}")
    else:
        rb.skip("inner_symbol", "symbol_not_analytic")
    pi_sym = is_partial_isometry_ae(phi, sample_count=config.samples,
                                    seed=config.seed)
    rb.result("partial_isometry_symbol", pi_sym.verdict, pi_sym.residual_exact,
              pi_sym.tol, witness=f"sampled={_fmt(pi_sym.residual_sampled)}")
    op = toeplitz_matrix(phi, config.degree)
    for name, fn in (("toeplitz", check_toeplitz),
                     ("isometry", check_isometry),
                     ("unitary", check_unitary),
                     ("partial_isometry", check_partial_isometry)):
        try:
            rb.check(fn(op, config.tol))
        except _GATED as exc:
            rb.error(name, exc)
    if phi.dim_out == phi.dim_in:
        try:
            rb.check(check_hyponormal(op))
        except _GATED as exc:
            rb.error("hyponormal", exc)
        try:
            rb.check(check_normal(op, config.tol))
        except _GATED as exc:
            rb.error("normal", exc)
    else:
        rb.skip("hyponormal", "fiber_not_square")
        rb.skip("normal", "fiber_not_square")


def _run_factor(config: JobConfig, rb: ReportBuilder) -> None:
    phi = read_symbol(config.inputs[0])
    op = toeplitz_matrix(phi, config.degree)
    try:
        rb.check(check_partial_isometry(op, config.tol))
        rb.check(check_range_shift_invariant(op, config.tol))
        if phi.n >= 2:
            rb.check(check_range_doubly_commuting(op, config.tol))
        fac = factor_partial_isometry(op, config.tol)
    except _GATED as exc:
        rb.error("factorization", exc)
        return
    rb.note(f"factor rank={fac.gamma.dim_in} "
            f"gamma_terms={len(fac.gamma.terms)} psi_terms={len(fac.psi.terms)}")
    rb.result("factor_reconstruction", fac.residual <= config.tol,
              fac.residual, config.tol)
    rb.result("range_projection_left", fac.range_residual_left <= config.tol,
              fac.range_residual_left, config.tol)
    rb.result("range_projection_right", fac.range_residual_right <= config.tol,
              fac.range_residual_right, config.tol)
    gcert = is_inner(fac.gamma)
    rb.result("inner_left_factor", gcert.verdict, gcert.residual, gcert.tol)
    pcert = is_inner(fac.psi)
    rb.result("inner_right_factor", pcert.verdict, pcert.residual, pcert.tol)
    rb.result("product_condition", fac.product_condition_holds,
              0.0 if fac.product_condition_holds else 1.0, config.tol,
              witness="coefficient_condition_violated")


def _selftest_symbols() -> dict[str, LaurentSymbol]:
    nilpotent = LaurentSymbol(1, 2, 2, {(1,): np.array([[0, 1], [0, 0]])})
    boundary_pi = LaurentSymbol(1, 2, 2, {
        (0,): np.array([[0.0, np.sqrt(3.0) / 2.0], [0.0, 0.0]]),
        (1,): np.array([[0.5, 0.0], [0.0, 0.0]]),
    })
    z1 = LaurentSymbol.monomial(2, (1, 0), [[1.0]])
    z2 = LaurentSymbol.monomial(2, (0, 1), [[1.0]])
    return {"nilpotent": nilpotent, "boundary": boundary_pi, "z1": z1, "z2": z2}


def _run_selftest(config: JobConfig, rb: ReportBuilder) -> None:
    syms = _selftest_symbols()
    D = config.degree

    def expect(name: str, actual: bool, expected: bool, residual: float,
               tol: float) -> None:
        rb.result(name, actual == expected, residual, tol,
                  witness=f"expected={expected},actual={actual}")

    theta = syms["nilpotent"]
    cert = is_inner(theta)
    expect("nilpotent_not_inner", cert.verdict, False, cert.residual, cert.tol)
    t_theta = toeplitz_matrix(theta, D)
    pi = check_partial_isometry(t_theta, config.tol)
    expect("nilpotent_partial_isometry", pi.verdict, True, pi.residual, pi.tol)
    iso = check_isometry(t_theta, config.tol)
    expect("nilpotent_not_isometry", iso.verdict, False, iso.residual, iso.tol)

    phi = syms["boundary"]
    ae = is_partial_isometry_ae(phi, sample_count=config.samples,
                                seed=config.seed)
    expect("boundary_symbol_partial_isometry", ae.verdict, True,
           ae.residual_exact, ae.tol)
    t_phi = toeplitz_matrix(phi, D)
    pi2 = check_partial_isometry(t_phi, config.tol)
    expect("boundary_operator_not_partial_isometry", pi2.verdict, False,
           pi2.residual, pi2.tol)

    z1, z2 = syms["z1"], syms["z2"]
    cc = coeff_condition(z1, z2)
    expect("disjoint_scalars_coeff", cc.holds, True, cc.max_violation, cc.tol)
    prod_op = analytic_product_operator(z1, z2, D)
    tp = check_toeplitz(prod_op, config.tol)
    expect("disjoint_scalars_toeplitz", tp.verdict, True, tp.residual, tp.tol)
    target = toeplitz_matrix(multiply(z1, z2.adjoint()), D)
    from .trunc import compare_on_window
    cmp_rep = compare_on_window(prod_op, target, config.tol,
                                name="disjoint_scalars_symbol")
    rb.check(cmp_rep)

    scalar_one = LaurentSymbol.constant([[1.0]], 1)
    z = LaurentSymbol.monomial(1, (1,), [[1.0]])
    dec = decompose(z, scalar_one)
    shape = sorted((t.sign, tuple(sorted(t.A)), tuple(sorted(t.B)))
                   for t in dec.terms)
    expected_shape = sorted([(1, (), (1,)), (1, (1,), ()), (-1, (1,), (1,))])
    rb.result("single_variable_decomposition", shape == expected_shape,
              0.0 if shape == expected_shape else 1.0, config.tol,
              witness=f"terms={shape}")

    fac = factor_partial_isometry(t_theta, config.tol)
    recovered = multiply(fac.gamma, fac.psi.adjoint())
    rb.result("nilpotent_factor_roundtrip",
              recovered.distance(theta) <= config.tol,
              recovered.distance(theta), config.tol)


_HANDLERS = {
    "check-toeplitz": (_run_check_toeplitz, 1),
    "check-product": (_run_check_product, 2),
    "decompose": (_run_decompose, 2),
    "classify": (_run_classify, 1),
    "factor": (_run_factor, 1),
    "selftest": (_run_selftest, 0),
}


def run(config: JobConfig) -> tuple[int, str]:
    """Execute one job; returns (exit_status, report_text)."""
    handler, arity = _HANDLERS[config.subcommand]
    if len(config.inputs) != arity:
        raise ValueError(
            f"{config.subcommand} needs {arity} input path(s), "
            f"got {len(config.inputs)}")
    rb = ReportBuilder()
    rb.header(config)
    handler(config, rb)
    text = rb.render()
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return (0 if rb.all_green else 1), text


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polytoep",
        description="Toeplitz operators with matrix symbols on the polydisc: "
                    "checks, product decompositions and inner factorizations")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    specs = {
        "check-toeplitz": ("run the shift-compression Toeplitz check on a "
                           "symbol-built operator", ["symbol"]),
        "check-product": ("triple verdict (coefficient, point, truncation) "
                          "for a product pair", ["gamma", "psi"]),
        "decompose": ("emit the signed elementary decomposition and its "
                      "reconstruction residual", ["gamma", "psi"]),
        "classify": ("isometry/unitary/partial-isometry/hyponormal/normal "
                     "battery", ["symbol"]),
        "factor": ("partial-isometry factorization with gauge-invariant "
                   "residuals", ["symbol"]),
        "selftest": ("built-in example suite with expected verdicts", []),
    }
    env_degree = int(os.environ.get(ENV_DEGREE, DEFAULT_DEGREE))
    for name, (help_text, positionals) in specs.items():
        sp = sub.add_parser(name, help=help_text)
        for pos in positionals:
            sp.add_argument(pos, help=f"{pos} symbol document (JSON)")
        sp.add_argument("-D", "--degree", type=int, default=env_degree,
                        help=f"per-variable degree cap (default {env_degree}, "
                             f"env {ENV_DEGREE})")
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help=f"verdict tolerance (default {DEFAULT_TOL})")
        sp.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                        help=f"sample count for pointwise checks "
                             f"(default {DEFAULT_SAMPLES})")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"random seed (default {DEFAULT_SEED})")
        sp.add_argument("--out", default=None,
                        help="also write the report to this path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    inputs = [getattr(args, name) for name in ("symbol", "gamma", "psi")
              if hasattr(args, name)]
    try:
        config = JobConfig(args.subcommand, inputs, args.degree, args.tol,
                           args.samples, args.seed, args.out)
        status, text = run(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
