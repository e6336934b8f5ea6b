"""End-to-end tour of the bundled example inputs.

Runs the SDP pipeline on the three-state ensemble with uniform and
weighted priors, the closed-form pipeline on the four-state symmetric
set and the compound two-group set, and a Monte-Carlo validation of each
optimal measurement. Install the package first (pip install -e .), then:

    python scripts/run_examples.py
"""

from pathlib import Path

import numpy as np

from uqsd import (
    build_sdp,
    compute_epm,
    detection_probability,
    epm_certificate,
    epm_test_lp,
    epm_test_nondegenerate,
    load_ensemble,
    load_symmetry_spec,
    measurement_from_probs,
    reciprocal_states,
    simulate,
    solve,
    solve_cgu,
    solve_gu,
    verify_certificate,
)

DATA = Path(__file__).resolve().parent.parent / "data"


def banner(title: str) -> None:
    print("\n" + "=" * 64)
    print(title)
    print("=" * 64)


def sdp_pipeline(path: Path) -> None:
    banner(f"SDP pipeline: {path.name}")
    ensemble = load_ensemble(path)
    recips = reciprocal_states(ensemble)
    report = solve(build_sdp(ensemble, recips))
    print(f"status     : {report.status.value} in {report.iterations} iterations")
    print(f"p          : {np.round(report.p, 6)}")
    print(f"P_D        : {-report.primal_value:.6f}")
    ver = verify_certificate(ensemble, recips, report.p, report.certificate)
    print(f"certificate: {'pass' if ver.passed else 'FAIL'} "
          f"(worst residual {max(ver.residuals.values()):.2e})")
    meas = measurement_from_probs(recips, report.p)
    sim = simulate(ensemble, meas, 200_000, seed=1)
    print(f"simulation : empirical P_D {sim.empirical_detection_probability:.5f}, "
          f"misidentifications {sim.misidentifications}")


def epm_pipeline(path: Path) -> None:
    banner(f"EPM analysis: {path.name}")
    ensemble = load_ensemble(path)
    recips = reciprocal_states(ensemble)
    meas = compute_epm(ensemble, recips)
    exact = epm_test_nondegenerate(ensemble, recips)
    print(f"common p   : {meas.probs[0]:.6f}")
    print(f"exact test : {exact.verdict.value} "
          f"(last-row residual {exact.residual:.2e})")
    lp = epm_test_lp(ensemble, recips)
    if lp.b is not None:
        cert = epm_certificate(recips, lp.b)
        ver = verify_certificate(ensemble, recips, meas.probs, cert)
        print(f"certificate: {'pass' if ver.passed else 'FAIL'}")
    print(f"P_D        : {detection_probability(ensemble, meas):.6f}")


def symmetric_pipeline(path: Path, compound: bool) -> None:
    banner(f"{'Compound ' if compound else ''}symmetric pipeline: {path.name}")
    spec = load_symmetry_spec(path)
    sol = solve_cgu(spec) if compound else solve_gu(spec)
    print(f"states     : {sol.ensemble.m} in dimension {sol.ensemble.r}")
    print(f"verdict    : {sol.verdict.value}")
    print(f"common p   : {sol.p:.10f}")
    gens = np.round(sol.reciprocal_generators.T, 6)
    print(f"reciprocal generators (rows): {gens}")
    recips = reciprocal_states(sol.ensemble)
    ver = verify_certificate(sol.ensemble, recips, sol.measurement.probs, sol.certificate)
    print(f"certificate: {'pass' if ver.passed else 'FAIL'}")
    sim = simulate(sol.ensemble, sol.measurement, 200_000, seed=2)
    print(f"simulation : per-state frequencies {np.round(sim.detection_frequency, 4)}")


def main() -> None:
    sdp_pipeline(DATA / "three_states.json")
    epm_pipeline(DATA / "three_states_weighted.json")
    symmetric_pipeline(DATA / "sign_group_gu.json", compound=False)
    symmetric_pipeline(DATA / "pauli_pair_cgu.json", compound=True)


if __name__ == "__main__":
    main()
