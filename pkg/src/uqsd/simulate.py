"""Monte-Carlo simulation of unambiguous measurements.

Draws preparation indices from the priors and measurement outcomes from
the Born probabilities of the supplied measurement. For a valid
unambiguous measurement the off-diagonal outcome probabilities vanish up
to numerical noise; they are checked against that bound and clipped to
zero, so a simulation can never register a misidentification.

Randomness comes from a counter-based 64-bit generator (Philox-4x64)
seeded explicitly, so runs reproduce across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import Measurement, StateEnsemble
from .errors import ValidationError

UNAMBIGUITY_TOL = 1e-8


@dataclass(frozen=True)
class SimulationResult:
    """Outcome counts per prepared state; column 0 is the inconclusive outcome."""

    counts: np.ndarray
    n_trials: int
    seed: int

    @property
    def state_counts(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def detection_frequency(self) -> np.ndarray:
        """Empirical conditional detection frequency per state."""
        m = self.counts.shape[0]
        totals = np.maximum(self.state_counts, 1)
        return self.counts[np.arange(m), np.arange(m) + 1] / totals

    @property
    def empirical_detection_probability(self) -> float:
        m = self.counts.shape[0]
        return float(self.counts[np.arange(m), np.arange(m) + 1].sum() / self.n_trials)

    @property
    def misidentifications(self) -> int:
        """Conclusive outcomes pointing at the wrong state (always zero)."""
        m = self.counts.shape[0]
        conclusive = self.counts[:, 1:]
        return int(conclusive.sum() - np.trace(conclusive))


def outcome_probabilities(ensemble: StateEnsemble, measurement: Measurement) -> np.ndarray:
    """Born outcome table, rows indexed by prepared state.

    Column 0 is the inconclusive outcome; column k is detection as state
    k. Rejects measurements whose conclusive operators are inconsistent
    with the ensemble (nonzero cross terms beyond tolerance), then clips
    the cross terms to exactly zero so each row is an exact distribution.
    """
    if (measurement.r, measurement.m) != (ensemble.r, ensemble.m):
        raise ValidationError("measurement does not match the ensemble dimensions")
    m = ensemble.m
    born = np.einsum(
        "ri,krs,si->ik", ensemble.states.conj(), measurement.operators, ensemble.states
    ).real
    off_diag = born - np.diag(np.diag(born))
    worst = float(np.max(np.abs(off_diag))) if m > 1 else 0.0
    if worst > UNAMBIGUITY_TOL:
        raise ValidationError(
            f"measurement is not unambiguous for this ensemble: cross-detection "
            f"probability {worst:.3e} exceeds {UNAMBIGUITY_TOL:g}"
        )
    diag = np.clip(np.diag(born), 0.0, 1.0)
    table = np.zeros((m, m + 1))
    table[:, 0] = 1.0 - diag
    table[np.arange(m), np.arange(m) + 1] = diag
    return table


def simulate(
    ensemble: StateEnsemble,
    measurement: Measurement,
    n_trials: int,
    seed: int,
) -> SimulationResult:
    """Simulate ``n_trials`` preparations and measurements."""
    if n_trials < 1:
        raise ValidationError("n_trials must be at least 1")
    table = outcome_probabilities(ensemble, measurement)
    m = ensemble.m
    rng = np.random.Generator(np.random.Philox(seed))
    priors = ensemble.priors / ensemble.priors.sum()
    states = rng.choice(m, size=n_trials, p=priors)
    detected = rng.random(n_trials) < table[states, states + 1]
    outcomes = np.where(detected, states + 1, 0)
    counts = np.zeros((m, m + 1), dtype=np.int64)
    np.add.at(counts, (states, outcomes), 1)
    return SimulationResult(counts=counts, n_trials=n_trials, seed=seed)


__all__ = ["SimulationResult", "outcome_probabilities", "simulate"]
