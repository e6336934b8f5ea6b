"""Command-line front end.

Subcommands: ``solve`` (SDP pipeline), ``epm`` (equal-probability
measurement analysis), ``gu`` / ``cgu`` (closed-form symmetric
pipelines), ``group-verify`` (group axiom check) and ``simulate``
(Monte-Carlo validation of a measurement). Reports print as text by
default; ``--json`` emits the full structured document.

Exit codes: 0 success, 2 validation or input error, 3 solver
non-convergence, 4 certificate verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import epm as epm_mod
from . import symmetry as sym_mod
from .ensemble import (
    Measurement,
    StateEnsemble,
    detection_probability,
    inconclusive_probability,
    load_ensemble,
    measurement_from_probs,
    reciprocal_states,
)
from .errors import ValidationError
from .formats import decode_matrix, encode_matrix, encode_real_vector, read_document
from .simulate import simulate
from .solver import (
    OPERATOR_TOL,
    SCALAR_TOL,
    SolveReport,
    SolveStatus,
    SolverOptions,
    VerificationReport,
    build_sdp,
    solve,
    verify_certificate,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_CERTIFICATE = 4


def _solver_options(args) -> SolverOptions:
    return SolverOptions(
        tol_gap=args.tol_gap, tol_feas=args.tol_feas, max_iters=args.max_iters
    )


def _tolerances(opts: SolverOptions) -> dict:
    return {
        "tol_gap": opts.tol_gap,
        "tol_feas": opts.tol_feas,
        "max_iters": opts.max_iters,
        "operator_tol": OPERATOR_TOL,
        "scalar_tol": SCALAR_TOL,
    }


def _input_summary(ensemble: StateEnsemble) -> dict:
    return {
        "r": ensemble.r,
        "m": ensemble.m,
        "priors": encode_real_vector(ensemble.priors),
    }


def _measurement_doc(ensemble: StateEnsemble, measurement: Measurement) -> dict:
    return {
        "p": encode_real_vector(measurement.probs),
        "detection_probability": detection_probability(ensemble, measurement),
        "inconclusive_probability": inconclusive_probability(ensemble, measurement),
        "operators": [encode_matrix(op) for op in measurement.operators],
        "inconclusive_operator": encode_matrix(measurement.inconclusive),
    }


def _solve_doc(report: SolveReport) -> dict:
    return {
        "p": encode_real_vector(report.p),
        "X": encode_matrix(report.certificate.X),
        "z": encode_real_vector(report.certificate.z),
        "primal_value": report.primal_value,
        "dual_value": report.dual_value,
        "gap": report.gap,
        "relative_gap": report.relative_gap,
        "iterations": report.iterations,
        "status": report.status.value,
        "residuals": report.residuals,
    }


def _verification_doc(ver: VerificationReport) -> dict:
    return {
        "passed": ver.passed,
        "residuals": ver.residuals,
        "tolerances": ver.tolerances,
        "checks": ver.checks,
        "trace_products": encode_real_vector(ver.detail["trace_products"]),
    }


def _print_report(doc: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(doc, indent=2))
        return
    summary = doc["input"]
    print(f"ensemble: r={summary['r']} m={summary['m']}")
    print("priors:   " + " ".join(f"{x:.6f}" for x in summary["priors"]))
    print(f"pipeline: {doc['pipeline']}")
    if "solve" in doc:
        s = doc["solve"]
        print(f"status:   {s['status']} ({s['iterations']} iterations)")
        print("p:        " + " ".join(f"{x:.6f}" for x in s["p"]))
        print(f"gap:      {s['gap']:.3e} (relative {s['relative_gap']:.3e})")
    if "epm" in doc:
        a = doc["epm"]
        print(f"epm p:    {a['p']:.6f} (multiplicity s={a['s']}, distinct q={a['q']})")
        for name, test in a["tests"].items():
            if "error" in test:
                print(f"  {name}: {test['error']}")
            else:
                extra = ""
                if test.get("residual") is not None:
                    extra = f" (residual {test['residual']:.3e})"
                print(f"  {name}: {test['verdict']}{extra}")
    if "symmetry" in doc:
        y = doc["symmetry"]
        print(f"verdict:  {y['verdict']}")
        print(f"epm p:    {y['p']:.10f}")
    if "measurement" in doc:
        meas = doc["measurement"]
        label = "P_D:     "
        if "symmetry" in doc and "solve" in doc:
            # The measurement is the closed-form EPM; the embedded solve is
            # the SDP fallback with its own (possibly better) optimum.
            label = "epm P_D: "
        print(f"{label} {meas['detection_probability']:.6f} "
              f"(inconclusive {meas['inconclusive_probability']:.6f})")
    if "verification" in doc:
        v = doc["verification"]
        worst = max(v["residuals"].values())
        print(f"certificate: {'pass' if v['passed'] else 'FAIL'} "
              f"(worst residual {worst:.3e})")
        if not v["passed"]:
            bad = [k for k, ok in v["checks"].items() if not ok]
            print("  failing checks: " + ", ".join(bad))
    if "make_priors" in doc:
        mp = doc["make_priors"]
        print("generated priors: " + " ".join(f"{x:.6f}" for x in mp["priors"]))
        print(f"  epm verified under generated priors: {mp['verified']}")
    if "simulation" in doc:
        sim = doc["simulation"]
        print(f"simulation: {sim['n_trials']} trials, seed {sim['seed']}")
        print(f"  empirical P_D: {sim['empirical_detection_probability']:.6f}")
        print(f"  misidentifications: {sim['misidentifications']}")
    if "group" in doc:
        rep = doc["group"]
        print(f"group axioms: {'pass' if rep['passed'] else 'FAIL'}")
        for key in ("unitarity", "identity", "closure", "inverses"):
            print(f"  {key}: {rep[key]:.3e}")


def cmd_solve(args) -> int:
    opts = _solver_options(args)
    ensemble = load_ensemble(args.file)
    recips = reciprocal_states(ensemble)
    report = solve(build_sdp(ensemble, recips), opts)
    doc = {
        "input": _input_summary(ensemble),
        "pipeline": "sdp",
        "tolerances": _tolerances(opts),
        "solve": _solve_doc(report),
    }
    exit_code = EXIT_OK
    if report.status is not SolveStatus.OPTIMAL:
        exit_code = EXIT_SOLVER
    else:
        measurement = measurement_from_probs(recips, report.p)
        ver = verify_certificate(ensemble, recips, report.p, report.certificate)
        doc["measurement"] = _measurement_doc(ensemble, measurement)
        doc["verification"] = _verification_doc(ver)
        if not ver.passed:
            exit_code = EXIT_CERTIFICATE
    _print_report(doc, args.json)
    return exit_code


def _epm_tests_doc(ensemble, recips, lp) -> dict:
    tests: dict[str, dict] = {}
    try:
        exact = epm_mod.epm_test_nondegenerate(ensemble, recips)
        tests["exact"] = {
            "verdict": exact.verdict.value,
            "residual": exact.residual,
            "last_row": encode_real_vector(exact.last_row),
        }
    except ValidationError as exc:
        tests["exact"] = {"error": str(exc)}
    tests["lp"] = {"verdict": lp.verdict.value, "residual": lp.residual}
    if lp.b is not None:
        tests["lp"]["b"] = encode_real_vector(lp.b)
    spectral = epm_mod.epm_test_spectral(ensemble, recips)
    tests["spectral"] = {"verdict": spectral.verdict.value, "residual": spectral.residual}
    if spectral.a_t is not None:
        tests["spectral"]["a_t"] = encode_real_vector(spectral.a_t)
    return tests


def cmd_epm(args) -> int:
    if args.gu:
        spec = sym_mod.load_symmetry_spec(args.file)
        ensemble = sym_mod.expand(spec)
    else:
        ensemble = load_ensemble(args.file)
    recips = reciprocal_states(ensemble)
    analysis = epm_mod.epm_analysis(recips)
    measurement = epm_mod.compute_epm(ensemble, recips)
    lp = epm_mod.epm_test_lp(ensemble, recips)
    tests = _epm_tests_doc(ensemble, recips, lp)
    doc = {
        "input": _input_summary(ensemble),
        "pipeline": "epm",
        "tolerances": {
            "exact_test_tol": epm_mod.EXACT_TEST_TOL,
            "lp_feasibility_tol": epm_mod.LP_FEASIBILITY_TOL,
            "spectral_rtol": epm_mod.SPECTRAL_RTOL,
            "operator_tol": OPERATOR_TOL,
            "scalar_tol": SCALAR_TOL,
        },
        "epm": {
            "p": analysis.p,
            "s": analysis.s,
            "q": analysis.q,
            "distinct_values": encode_real_vector(analysis.distinct_values),
            "multiplicities": [int(x) for x in analysis.multiplicities],
            "last_row": encode_real_vector(analysis.last_rows[0]),
            "priors": encode_real_vector(ensemble.priors),
            "tests": tests,
        },
        "measurement": _measurement_doc(ensemble, measurement),
    }
    exit_code = EXIT_OK
    if lp.b is not None:
        cert = epm_mod.epm_certificate(recips, lp.b)
        ver = verify_certificate(ensemble, recips, measurement.probs, cert)
        doc["verification"] = _verification_doc(ver)
        if not ver.passed:
            exit_code = EXIT_CERTIFICATE
    if args.make_priors is not None:
        try:
            b = np.array([float(x) for x in args.make_priors.split(",")])
        except ValueError as exc:
            raise ValidationError(f"--make-priors expects comma-separated numbers: {exc}")
        priors = epm_mod.priors_for_epm(recips, b)
        generated = StateEnsemble(ensemble.states, priors)
        gen_recips = reciprocal_states(generated)
        gen_meas = epm_mod.compute_epm(generated, gen_recips)
        gen_cert = epm_mod.epm_certificate(gen_recips, b)
        gen_ver = verify_certificate(generated, gen_recips, gen_meas.probs, gen_cert)
        doc["make_priors"] = {
            "b": encode_real_vector(b),
            "priors": encode_real_vector(priors),
            "verified": gen_ver.passed,
        }
    _print_report(doc, args.json)
    return exit_code


def _symmetric_doc(sol: sym_mod.SymmetricSolution) -> dict:
    doc = {
        "verdict": sol.verdict.value,
        "p": sol.p,
        "reciprocal_generators": encode_matrix(sol.reciprocal_generators),
    }
    if sol.optimality.a_t is not None:
        doc["a_t"] = encode_real_vector(sol.optimality.a_t)
    if sol.phase is not None:
        doc["phase"] = {
            "theta": [list(map(float, row)) for row in sol.phase.theta],
            "residual": sol.phase.residual,
            "commutes": sol.phase.commutes,
            "phase_free": sol.phase.phase_free,
        }
    return doc


def _run_symmetric(args, kind: str) -> int:
    spec = sym_mod.load_symmetry_spec(args.file)
    if kind == "gu":
        sol = sym_mod.solve_gu(spec)
    else:
        sol = sym_mod.solve_cgu(spec)
    recips = reciprocal_states(sol.ensemble)
    doc = {
        "input": _input_summary(sol.ensemble),
        "pipeline": kind,
        "tolerances": {"operator_tol": OPERATOR_TOL, "scalar_tol": SCALAR_TOL},
        "symmetry": _symmetric_doc(sol),
        "measurement": _measurement_doc(sol.ensemble, sol.measurement),
    }
    exit_code = EXIT_OK
    if sol.certificate is not None:
        ver = verify_certificate(sol.ensemble, recips, sol.measurement.probs, sol.certificate)
        doc["verification"] = _verification_doc(ver)
        if sol.verdict is epm_mod.EpmVerdict.OPTIMAL and not ver.passed:
            exit_code = EXIT_CERTIFICATE
    if sol.verdict is not epm_mod.EpmVerdict.OPTIMAL:
        # Sufficient conditions are silent; fall back to the SDP solver.
        opts = _solver_options(args)
        report = solve(build_sdp(sol.ensemble, recips), opts)
        doc["solve"] = _solve_doc(report)
        if report.status is not SolveStatus.OPTIMAL:
            exit_code = EXIT_SOLVER
    _print_report(doc, args.json)
    return exit_code


def cmd_group_verify(args) -> int:
    doc_in = read_document(args.file)
    if "group" not in doc_in or not isinstance(doc_in["group"], list):
        raise ValidationError("document needs a 'group' field listing matrices")
    mats = [
        decode_matrix(mat, where=f"group[{i}]") for i, mat in enumerate(doc_in["group"])
    ]
    group = sym_mod.UnitaryGroup(np.array(mats))
    report = sym_mod.verify_group(group)
    doc = {
        "input": {"order": group.order, "dim": group.dim},
        "pipeline": "group-verify",
        "group": dataclasses.asdict(report),
    }
    doc["input"]["r"] = group.dim
    doc["input"]["m"] = group.order
    doc["input"]["priors"] = []
    _print_report(doc, args.json)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_simulate(args) -> int:
    opts = _solver_options(args)
    doc: dict = {"pipeline": args.pipeline, "tolerances": _tolerances(opts)}
    exit_code = EXIT_OK
    if args.pipeline in ("gu", "cgu"):
        spec = sym_mod.load_symmetry_spec(args.file)
        sol = sym_mod.solve_gu(spec) if args.pipeline == "gu" else sym_mod.solve_cgu(spec)
        ensemble, measurement = sol.ensemble, sol.measurement
        doc["symmetry"] = _symmetric_doc(sol)
    else:
        ensemble = load_ensemble(args.file)
        recips = reciprocal_states(ensemble)
        if args.pipeline == "sdp":
            report = solve(build_sdp(ensemble, recips), opts)
            if report.status is not SolveStatus.OPTIMAL:
                doc["input"] = _input_summary(ensemble)
                doc["solve"] = _solve_doc(report)
                _print_report(doc, args.json)
                return EXIT_SOLVER
            ver = verify_certificate(ensemble, recips, report.p, report.certificate)
            doc["solve"] = _solve_doc(report)
            doc["verification"] = _verification_doc(ver)
            if not ver.passed:
                doc["input"] = _input_summary(ensemble)
                _print_report(doc, args.json)
                return EXIT_CERTIFICATE
            measurement = measurement_from_probs(recips, report.p)
        else:
            measurement = epm_mod.compute_epm(ensemble, recips)
    doc["input"] = _input_summary(ensemble)
    doc["measurement"] = _measurement_doc(ensemble, measurement)
    result = simulate(ensemble, measurement, args.trials, args.seed)
    doc["simulation"] = {
        "n_trials": result.n_trials,
        "seed": result.seed,
        "counts": [[int(x) for x in row] for row in result.counts],
        "empirical_detection_probability": result.empirical_detection_probability,
        "detection_frequency": encode_real_vector(result.detection_frequency),
        "misidentifications": result.misidentifications,
    }
    _print_report(doc, args.json)
    return exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uqsd",
        description="Optimal unambiguous discrimination of pure quantum states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solver_flags = argparse.ArgumentParser(add_help=False)
    solver_flags.add_argument("--tol-gap", type=float, default=1e-8,
                              help="relative duality gap tolerance (default 1e-8)")
    solver_flags.add_argument("--tol-feas", type=float, default=1e-9,
                              help="feasibility residual tolerance (default 1e-9)")
    solver_flags.add_argument("--max-iters", type=int, default=100,
                              help="iteration cap (default 100)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("file", help="input document (JSON)")

    p_solve = sub.add_parser("solve", parents=[common, solver_flags],
                             help="solve the discrimination SDP and verify the certificate")
    p_solve.set_defaults(func=cmd_solve)

    p_epm = sub.add_parser("epm", parents=[common],
                           help="equal-probability measurement analysis")
    p_epm.add_argument("--gu", action="store_true",
                       help="input is a symmetry spec; analyze its expansion")
    p_epm.add_argument("--make-priors", metavar="B1,B2,...",
                       help="generate priors that make the EPM optimal from these weights")
    p_epm.set_defaults(func=cmd_epm)

    p_gu = sub.add_parser("gu", parents=[common, solver_flags],
                          help="closed-form pipeline for a single-generator symmetric set")
    p_gu.set_defaults(func=lambda a: _run_symmetric(a, "gu"))

    p_cgu = sub.add_parser("cgu", parents=[common, solver_flags],
                           help="closed-form pipeline for a multi-generator symmetric set")
    p_cgu.set_defaults(func=lambda a: _run_symmetric(a, "cgu"))

    p_gv = sub.add_parser("group-verify", parents=[common],
                          help="check the group axioms of a symmetry spec")
    p_gv.set_defaults(func=cmd_group_verify)

    p_sim = sub.add_parser("simulate", parents=[common, solver_flags],
                           help="Monte-Carlo validation of a measurement")
    p_sim.add_argument("--pipeline", choices=["sdp", "epm", "gu", "cgu"], default="sdp")
    p_sim.add_argument("--trials", type=int, default=100_000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
