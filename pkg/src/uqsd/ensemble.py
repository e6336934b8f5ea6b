"""State ensembles, reciprocal (dual basis) states, and unambiguous measurements.

An ensemble is an r x m complex matrix whose columns are unit-norm state
vectors, with strictly positive prior probabilities. Unambiguous
discrimination is possible exactly when the states are linearly
independent; the reciprocal states are then the dual basis of the state
family inside its span, satisfying ``<recip_i | state_k> = delta_ik``, and
every conclusive measurement operator is a scaled outer product of a
reciprocal state. The inconclusive operator is whatever remains of the
identity.

All containers are immutable value types; operations are pure functions,
so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import LinearDependenceError, ValidationError
from .formats import decode_vector, read_document

UNIT_NORM_TOL = 1e-9
RENORMALIZE_TOL = 1e-6
INDEPENDENCE_RTOL = 1e-10
PRIOR_SUM_TOL = 1e-9
BIORTHOGONALITY_TOL = 1e-8
PSD_EIG_FLOOR = -1e-8
PROB_TOL = 1e-10


def _frozen_array(a: np.ndarray, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateEnsemble:
    """Unit-norm state columns plus prior probabilities.

    Attributes
    ----------
    states : (r, m) complex ndarray, column i is the i-th state vector.
    priors : (m,) float ndarray, strictly positive, summing to one.
    """

    states: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        priors = np.asarray(self.priors, dtype=float).ravel()
        if not np.all(np.isfinite(states)):
            raise ValidationError("states contain non-finite entries")
        if not np.all(np.isfinite(priors)):
            raise ValidationError("priors contain non-finite entries")
        r, m = states.shape
        if m < 1:
            raise ValidationError("ensemble must contain at least one state")
        if m > r:
            raise LinearDependenceError(
                f"{m} states in dimension {r} cannot be linearly independent; "
                "unambiguous discrimination is impossible"
            )
        norms = np.linalg.norm(states, axis=0)
        if np.max(np.abs(norms - 1.0)) > UNIT_NORM_TOL:
            raise ValidationError(
                f"state columns must have unit norm within {UNIT_NORM_TOL:g} "
                f"(worst deviation {np.max(np.abs(norms - 1.0)):.3e})"
            )
        if priors.shape != (m,):
            raise ValidationError(f"expected {m} priors, got {priors.shape[0]}")
        if np.min(priors) <= 0.0:
            raise ValidationError("priors must be strictly positive")
        if abs(priors.sum() - 1.0) > PRIOR_SUM_TOL:
            raise ValidationError(
                f"priors must sum to 1 within {PRIOR_SUM_TOL:g} (sum={priors.sum()!r})"
            )
        sv = np.linalg.svd(states, compute_uv=False)
        if sv[-1] <= INDEPENDENCE_RTOL * sv[0]:
            raise LinearDependenceError(
                "states are linearly dependent (singular value ratio "
                f"{sv[-1] / sv[0]:.3e}); unambiguous discrimination is impossible"
            )
        object.__setattr__(self, "states", _frozen_array(states, complex))
        object.__setattr__(self, "priors", _frozen_array(priors, float))

    @property
    def r(self) -> int:
        return self.states.shape[0]

    @property
    def m(self) -> int:
        return self.states.shape[1]


@dataclass(frozen=True)
class ReciprocalSet:
    """Reciprocal states of an ensemble with cached SVD factors.

    ``reciprocals`` holds the dual-basis vectors as columns. ``u``,
    ``sigma``, ``vh`` are the SVD factors of the state matrix (``u`` is the
    full r x r unitary, ``sigma`` the m positive singular values in
    descending order, ``vh`` the m x m matrix V*). ``gram_pinv`` is the
    pseudo-inverse of the frame operator (sum of state outer products),
    inverted on the span of the states.
    """

    reciprocals: np.ndarray
    u: np.ndarray
    sigma: np.ndarray
    vh: np.ndarray
    gram_pinv: np.ndarray

    def __post_init__(self):
        for name, dtype in (
            ("reciprocals", complex),
            ("u", complex),
            ("sigma", float),
            ("vh", complex),
            ("gram_pinv", complex),
        ):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), dtype))

    @property
    def r(self) -> int:
        return self.reciprocals.shape[0]

    @property
    def m(self) -> int:
        return self.reciprocals.shape[1]


@dataclass(frozen=True)
class Measurement:
    """Detection probabilities and the measurement operators they induce.

    ``operators[i]`` is the rank-one conclusive operator for state i;
    ``inconclusive`` completes the set to the identity.
    """

    probs: np.ndarray
    operators: np.ndarray
    inconclusive: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen_array(self.probs, float))
        object.__setattr__(self, "operators", _frozen_array(self.operators, complex))
        object.__setattr__(self, "inconclusive", _frozen_array(self.inconclusive, complex))

    @property
    def r(self) -> int:
        return self.operators.shape[1]

    @property
    def m(self) -> int:
        return self.operators.shape[0]


def load_ensemble(source: str | Path | Mapping[str, Any]) -> StateEnsemble:
    """Load and validate an ensemble document.

    The document is a mapping (or a path to a JSON file) with fields
    ``r``, ``m``, ``states`` (m columns of r ``[re, im]`` pairs) and
    optional ``priors`` (defaults to uniform). Columns whose norm is off
    by at most ``RENORMALIZE_TOL`` are renormalized; larger deviations are
    rejected as modeling errors.
    """
    doc = read_document(source)
    for key in ("r", "m", "states"):
        if key not in doc:
            raise ValidationError(f"ensemble document is missing field {key!r}")
    try:
        r = int(doc["r"])
        m = int(doc["m"])
    except (TypeError, ValueError) as exc:
        raise ValidationError("fields 'r' and 'm' must be integers") from exc
    cols = doc["states"]
    if not isinstance(cols, list) or len(cols) != m:
        raise ValidationError(f"'states' must list exactly m={m} columns")
    states = np.zeros((r, m), dtype=complex)
    for i, col in enumerate(cols):
        v = decode_vector(col, where=f"states[{i}]")
        if v.shape[0] != r:
            raise ValidationError(f"states[{i}] has {v.shape[0]} entries, expected r={r}")
        states[:, i] = v
    norms = np.linalg.norm(states, axis=0)
    if np.min(norms) == 0.0 or np.max(np.abs(norms - 1.0)) > RENORMALIZE_TOL:
        raise ValidationError(
            f"state columns must be unit norm within {RENORMALIZE_TOL:g}; "
            f"worst deviation {np.max(np.abs(norms - 1.0)):.3e}"
        )
    states = states / norms
    if doc.get("priors") is None:
        priors = np.full(m, 1.0 / m)
    else:
        priors = np.asarray(doc["priors"], dtype=float).ravel()
        if priors.shape[0] != m:
            raise ValidationError(f"'priors' must list exactly m={m} probabilities")
    return StateEnsemble(states, priors)


def dump_ensemble(ensemble: StateEnsemble) -> dict[str, Any]:
    """Serialize an ensemble back to its document form."""
    from .formats import encode_real_vector, encode_vector

    return {
        "r": ensemble.r,
        "m": ensemble.m,
        "states": [encode_vector(ensemble.states[:, i]) for i in range(ensemble.m)],
        "priors": encode_real_vector(ensemble.priors),
    }


def reciprocal_states(ensemble: StateEnsemble) -> ReciprocalSet:
    """Compute the dual basis of the ensemble and cache its SVD.

    The reciprocals are evaluated through the SVD, ``U pinv(S)* V*``,
    which is better conditioned than forming the Gram inverse directly.
    """
    u, sigma, vh = np.linalg.svd(ensemble.states, full_matrices=True)
    if sigma[-1] <= INDEPENDENCE_RTOL * sigma[0]:
        raise LinearDependenceError("numerical rank deficiency detected during SVD")
    m = ensemble.m
    um = u[:, :m]
    reciprocals = (um / sigma) @ vh
    gram_pinv = (um / sigma**2) @ um.conj().T
    rs = ReciprocalSet(reciprocals=reciprocals, u=u, sigma=sigma, vh=vh, gram_pinv=gram_pinv)
    residual = np.max(np.abs(reciprocals.conj().T @ ensemble.states - np.eye(m)))
    if residual > BIORTHOGONALITY_TOL:
        raise ValidationError(
            f"reciprocal states violate biorthogonality (residual {residual:.3e})"
        )
    return rs


def gram_operators(recips: ReciprocalSet) -> np.ndarray:
    """Rank-one operators, the outer product of each reciprocal state."""
    c = recips.reciprocals
    return np.einsum("ri,si->irs", c, c.conj())


def measurement_from_probs(recips: ReciprocalSet, probs: np.ndarray) -> Measurement:
    """Build the measurement with the given detection probabilities.

    Raises if any probability is outside [0, 1] or if the conclusive
    operators overshoot the identity (inconclusive operator not PSD).
    """
    p = np.asarray(probs, dtype=float).ravel()
    if p.shape[0] != recips.m:
        raise ValidationError(f"expected {recips.m} probabilities, got {p.shape[0]}")
    if np.min(p) < -PROB_TOL or np.max(p) > 1.0 + PROB_TOL:
        raise ValidationError(
            f"detection probabilities must lie in [0, 1]; got range "
            f"[{p.min():.3e}, {p.max():.3e}]"
        )
    p = np.clip(p, 0.0, 1.0)
    ops = p[:, None, None] * gram_operators(recips)
    inconclusive = np.eye(recips.r, dtype=complex) - ops.sum(axis=0)
    inconclusive = (inconclusive + inconclusive.conj().T) / 2
    lo = np.linalg.eigvalsh(inconclusive)[0]
    if lo < PSD_EIG_FLOOR:
        raise ValidationError(
            f"inconclusive operator is not positive semidefinite "
            f"(smallest eigenvalue {lo:.3e}); probabilities are infeasible"
        )
    return Measurement(probs=p, operators=ops, inconclusive=inconclusive)


def detection_probability(ensemble: StateEnsemble, measurement: Measurement) -> float:
    """Total probability of a correct detection, the prior-weighted sum of p_i."""
    if (measurement.r, measurement.m) != (ensemble.r, ensemble.m):
        raise ValidationError(
            f"measurement shape ({measurement.r}, {measurement.m}) does not match "
            f"ensemble ({ensemble.r}, {ensemble.m})"
        )
    return float(ensemble.priors @ measurement.probs)


def inconclusive_probability(ensemble: StateEnsemble, measurement: Measurement) -> float:
    """Total probability of the inconclusive outcome, 1 - P_D."""
    return 1.0 - detection_probability(ensemble, measurement)
