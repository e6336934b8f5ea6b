"""Semidefinite programming for optimal unambiguous discrimination.

The discrimination problem is

    minimize    <c|p>           with c_i = -eta_i
    subject to  sum_i p_i Q_i <= I_r,   p_i >= 0,

a linear objective over the block cone made of one r x r positive
semidefinite slack ``I - sum_i p_i Q_i`` and the m nonnegative scalars
``p_i``. Its dual maximizes ``-Tr(X)`` over Hermitian PSD ``X`` and slacks
``z_i >= 0`` with ``Tr(Q_i X) - z_i = eta_i``. A primal-dual pair with zero
gap and vanishing complementary products certifies global optimality.

``solve`` is a feasible-start primal-dual path-following interior-point
method with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
Both cone blocks are handled natively in complex Hermitian arithmetic.
Because every Q_i is rank one, the Newton step reduces to an m x m
positive definite system built from ``B = C* W^{-1} C`` where C stacks the
reciprocal states, so one iteration costs O(r^3 + m r^2 + m^3).

``solve_inequality_lp`` is the same engine restricted to scalar blocks
(an inequality-form LP); it backs the feasibility tests of the ``epm``
module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .ensemble import ReciprocalSet, StateEnsemble, gram_operators
from .errors import ValidationError

OPERATOR_TOL = 1e-6
SCALAR_TOL = 1e-7

# Complementarity targets enforced at status Optimal; iteration continues
# past the gap tolerance until the slack products also meet them.
SLACK_OPERATOR_TARGET = 5e-7
SLACK_SCALAR_TARGET = 5e-9


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class SolverOptions:
    """Interior-point controls: gap and feasibility tolerances, iteration cap."""

    tol_gap: float = 1e-8
    tol_feas: float = 1e-9
    max_iters: int = 100
    step_fraction: float = 0.99

    def __post_init__(self):
        if not (0.0 < self.tol_gap < 1.0):
            raise ValidationError("tol_gap must lie in (0, 1)")
        if not (0.0 < self.tol_feas < 1.0):
            raise ValidationError("tol_feas must lie in (0, 1)")
        if not (1 <= self.max_iters <= 100_000):
            raise ValidationError("max_iters must lie in [1, 100000]")
        if not (0.5 <= self.step_fraction < 1.0):
            raise ValidationError("step_fraction must lie in [0.5, 1)")


@dataclass(frozen=True)
class SdpProblem:
    """Cost vector plus the data defining the block constraint F(p) >= 0.

    ``F(p)`` is block diagonal: the r x r block ``I - sum_i p_i Q_i``
    followed by the m scalar blocks ``p_i``, with Q_i the rank-one outer
    products of the ``reciprocals`` columns.
    """

    cost: np.ndarray
    reciprocals: np.ndarray

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float).ravel()
        recips = np.asarray(self.reciprocals, dtype=complex)
        if recips.ndim != 2 or cost.shape[0] != recips.shape[1]:
            raise ValidationError("cost length must match the number of reciprocal columns")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "reciprocals", recips)

    @property
    def r(self) -> int:
        return self.reciprocals.shape[0]

    @property
    def m(self) -> int:
        return self.reciprocals.shape[1]

    def f_matrix(self, p: np.ndarray) -> np.ndarray:
        """Evaluate the full (r+m) x (r+m) block-diagonal constraint matrix."""
        p = np.asarray(p, dtype=float).ravel()
        if p.shape[0] != self.m:
            raise ValidationError(f"expected {self.m} coordinates, got {p.shape[0]}")
        c = self.reciprocals
        out = np.zeros((self.r + self.m, self.r + self.m), dtype=complex)
        block = np.eye(self.r, dtype=complex) - (c * p) @ c.conj().T
        out[: self.r, : self.r] = (block + block.conj().T) / 2
        out[self.r :, self.r :] = np.diag(p.astype(complex))
        return out


@dataclass(frozen=True)
class DualCertificate:
    """Dual witness: Hermitian PSD matrix X and nonnegative slack vector z."""

    X: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", np.asarray(self.X, dtype=complex))
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float).ravel())


@dataclass(frozen=True)
class IterateTrace:
    iteration: int
    primal_value: float
    dual_value: float
    gap: float
    mu: float


@dataclass(frozen=True)
class SolveReport:
    p: np.ndarray
    certificate: DualCertificate
    primal_value: float
    dual_value: float
    gap: float
    relative_gap: float
    iterations: int
    status: SolveStatus
    residuals: dict[str, float]
    trace: tuple[IterateTrace, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class VerificationReport:
    """Residuals of every optimality condition plus per-check verdicts."""

    residuals: dict[str, float]
    tolerances: dict[str, float]
    checks: dict[str, bool]
    passed: bool
    detail: dict[str, Any] = field(default_factory=dict)


def build_sdp(ensemble: StateEnsemble, recips: ReciprocalSet) -> SdpProblem:
    """Assemble the discrimination problem for an ensemble."""
    if (recips.r, recips.m) != (ensemble.r, ensemble.m):
        raise ValidationError("reciprocal set does not match the ensemble dimensions")
    return SdpProblem(cost=-ensemble.priors, reciprocals=recips.reciprocals)


def _apply(c: np.ndarray, p: np.ndarray) -> np.ndarray:
    """sum_i p_i Q_i for the rank-one family defined by the columns of c."""
    out = (c * p) @ c.conj().T
    return (out + out.conj().T) / 2


def _apply_adjoint(c: np.ndarray, x_mat: np.ndarray) -> np.ndarray:
    """Vector of Tr(Q_i X)."""
    return np.einsum("ri,rs,si->i", c.conj(), x_mat, c).real


def _max_step_psd(chol_lower: np.ndarray, direction: np.ndarray) -> float:
    """Largest a with M + a*D psd, given the Cholesky factor of M."""
    y = solve_triangular(chol_lower, direction, lower=True)
    y = solve_triangular(chol_lower, y.conj().T, lower=True)
    w_min = np.linalg.eigvalsh((y + y.conj().T) / 2)[0]
    return np.inf if w_min >= 0.0 else 1.0 / (-w_min)


def _max_step_vec(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0.0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _clip_psd(x_mat: np.ndarray) -> np.ndarray:
    w, vecs = np.linalg.eigh((x_mat + x_mat.conj().T) / 2)
    w = np.maximum(w, 0.0)
    return (vecs * w) @ vecs.conj().T


def _hermitian_basis(k: int) -> np.ndarray:
    """Orthonormal real basis of k x k Hermitian matrices, shape (k*k, k, k)."""
    basis = np.zeros((k * k, k, k), dtype=complex)
    idx = 0
    for a in range(k):
        basis[idx, a, a] = 1.0
        idx += 1
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for a in range(k):
        for b in range(a + 1, k):
            basis[idx, a, b] = inv_sqrt2
            basis[idx, b, a] = inv_sqrt2
            idx += 1
            basis[idx, a, b] = 1j * inv_sqrt2
            basis[idx, b, a] = -1j * inv_sqrt2
            idx += 1
    return basis


def _refine_certificate(
    c: np.ndarray,
    p: np.ndarray,
    x_mat: np.ndarray,
    eta: np.ndarray,
    gap: float,
) -> DualCertificate | None:
    """Re-fit the dual certificate on the active face of the slack operator.

    Complementary slackness forces the optimal X onto the eigenspace of
    ``sum p_i Q_i`` at eigenvalue one. The final iterate carries O(mu)
    cross terms into the inactive subspace, which inflate the product
    ``X (I - sum p_i Q_i)`` far beyond the gap. Restricting X to the
    near-active face and solving the trace equalities (z_i = 0 wherever
    p_i > 0) by least squares removes those terms while preserving the
    dual objective of the iterate.
    """
    r = c.shape[0]
    s0 = np.eye(r, dtype=complex) - _apply(c, p)
    w, vecs = np.linalg.eigh(s0)
    tau = np.sqrt(max(gap, 1e-16))
    face = w <= tau
    k = int(np.count_nonzero(face))
    if k == 0 or k == r:
        return None
    v_face = vecs[:, face]

    active = p > max(1e-7, tau)
    proj = v_face.conj().T @ c
    rows = []
    rhs = []
    basis = _hermitian_basis(k)
    for i in np.nonzero(active)[0]:
        g_i = np.outer(proj[:, i], proj[:, i].conj())
        rows.append(np.einsum("kab,ba->k", basis, g_i).real)
        rhs.append(eta[i])
    # Preserve the iterate's dual objective so the refined gap stays at the
    # converged level.
    trace_row = np.einsum("kaa->k", basis).real
    weight = 1e4
    rows.append(weight * trace_row)
    rhs.append(weight * float(np.trace(x_mat).real))
    anchor = v_face.conj().T @ x_mat @ v_face
    y0 = np.einsum("kab,ba->k", basis, anchor).real

    a_ls = np.array(rows)
    b_ls = np.array(rhs) - a_ls @ y0
    delta, *_ = np.linalg.lstsq(a_ls, b_ls, rcond=None)
    y_mat = np.tensordot(y0 + delta, basis, axes=(0, 0))
    y_mat = _clip_psd(y_mat)
    x_ref = v_face @ y_mat @ v_face.conj().T
    x_ref = (x_ref + x_ref.conj().T) / 2
    z_ref = np.maximum(_apply_adjoint(c, x_ref) - eta, 0.0)
    return DualCertificate(X=x_ref, z=z_ref)


def _kkt_polish(
    c: np.ndarray,
    p: np.ndarray,
    x_mat: np.ndarray,
    eta: np.ndarray,
    gap: float,
) -> tuple[np.ndarray, DualCertificate] | None:
    """Gauss-Newton refinement of the full optimality system.

    Applies when the dual optimal face is one dimensional: unknowns are the
    active probabilities, the certificate weight ``a`` and the face vector
    ``v``, solving ``(I - sum p_i Q_i) v = 0`` together with the trace
    equalities ``a |<q_i|v>|^2 = eta_i`` on the active set. Quadratic local
    convergence wipes out the O(sqrt(gap)) support misalignment that the
    interior-point iterates carry. Returns None when the face is not
    one dimensional or the iteration leaves the cone.
    """
    r, m = c.shape
    s0 = np.eye(r, dtype=complex) - _apply(c, p)
    w, vecs = np.linalg.eigh(s0)
    tau = np.sqrt(max(gap, 1e-16))
    if not (w[0] <= tau and (r == 1 or w[1] > tau)):
        return None
    v = vecs[:, 0]
    active = np.nonzero(p > max(1e-7, tau))[0]
    if active.size == 0:
        return None
    q_act = c[:, active]
    p_act = p[active].copy()

    overlaps = np.abs(q_act.conj().T @ v) ** 2
    denom = float(overlaps @ overlaps)
    if denom <= 0.0:
        return None
    a_val = float(overlaps @ eta[active] / denom)
    n_act = active.size

    def residual(p_a, a, vec):
        r1 = vec - (q_act * p_a) @ (q_act.conj().T @ vec)
        r2 = a * np.abs(q_act.conj().T @ vec) ** 2 - eta[active]
        r3 = float((vec.conj() @ vec).real) - 1.0
        r4 = float(np.imag(v.conj() @ vec))
        return np.concatenate([r1.real, r1.imag, r2, [r3], [r4]])

    res = residual(p_act, a_val, v)
    best = (np.linalg.norm(res), p_act.copy(), a_val, v.copy())
    for _ in range(12):
        if np.linalg.norm(res) <= 1e-13:
            break
        wv = q_act.conj().T @ v
        s0_act = np.eye(r, dtype=complex) - (q_act * p_act) @ q_act.conj().T
        jac = np.zeros((2 * r + n_act + 2, n_act + 1 + 2 * r))
        dp_block = -q_act * wv[None, :]
        jac[:r, :n_act] = dp_block.real
        jac[r : 2 * r, :n_act] = dp_block.imag
        jac[:r, n_act + 1 : n_act + 1 + r] = s0_act.real
        jac[:r, n_act + 1 + r :] = -s0_act.imag
        jac[r : 2 * r, n_act + 1 : n_act + 1 + r] = s0_act.imag
        jac[r : 2 * r, n_act + 1 + r :] = s0_act.real
        rows2 = slice(2 * r, 2 * r + n_act)
        jac[rows2, n_act] = np.abs(wv) ** 2
        rho = wv.conj()[:, None] * q_act.conj().T
        jac[rows2, n_act + 1 : n_act + 1 + r] = 2 * a_val * rho.real
        jac[rows2, n_act + 1 + r :] = -2 * a_val * rho.imag
        jac[2 * r + n_act, n_act + 1 : n_act + 1 + r] = 2 * v.real
        jac[2 * r + n_act, n_act + 1 + r :] = 2 * v.imag
        jac[2 * r + n_act + 1, n_act + 1 : n_act + 1 + r] = -v.imag
        jac[2 * r + n_act + 1, n_act + 1 + r :] = v.real

        du, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        p_act = p_act + du[:n_act]
        a_val = a_val + du[n_act]
        v = v + du[n_act + 1 : n_act + 1 + r] + 1j * du[n_act + 1 + r :]
        if np.min(p_act) <= 0.0 or a_val <= 0.0:
            return None
        res = residual(p_act, a_val, v)
        if np.linalg.norm(res) < best[0]:
            best = (np.linalg.norm(res), p_act.copy(), a_val, v.copy())

    _, p_act, a_val, v = best
    v = v / np.linalg.norm(v)
    p_new = np.zeros(m)
    p_new[active] = p_act
    if np.max(p_new) > 1.0 + 1e-9:
        return None
    x_new = a_val * np.outer(v, v.conj())
    z_new = np.maximum(_apply_adjoint(c, x_new) - eta, 0.0)
    return p_new, DualCertificate(X=x_new, z=z_new)


def _certificate_score(
    c: np.ndarray,
    p: np.ndarray,
    cert: DualCertificate,
    eta: np.ndarray,
) -> tuple[float, dict[str, float]]:
    """Residuals of a certificate, scored relative to the verify tolerances."""
    r = c.shape[0]
    q_sum = _apply(c, p)
    residuals = {
        "primal_nonneg": float(max(0.0, -np.min(p))),
        "primal_operator": float(max(0.0, np.linalg.eigvalsh(q_sum)[-1] - 1.0)),
        "dual_equality": float(np.max(np.abs(_apply_adjoint(c, cert.X) - cert.z - eta))),
        "slack_operator": float(np.linalg.norm(cert.X @ (np.eye(r) - q_sum))),
        "slack_scalar": float(np.max(np.abs(cert.z * p))),
    }
    scale = {
        "primal_nonneg": SCALAR_TOL,
        "primal_operator": OPERATOR_TOL,
        "dual_equality": SCALAR_TOL,
        "slack_operator": OPERATOR_TOL,
        "slack_scalar": SCALAR_TOL,
    }
    gap = abs(float(-eta @ p) - float(-np.trace(cert.X).real))
    score = max(residuals[k] / scale[k] for k in residuals)
    score = max(score, gap / (SCALAR_TOL * (1.0 + abs(eta @ p))))
    return score, residuals


def solve(problem: SdpProblem, options: SolverOptions | None = None) -> SolveReport:
    """Solve the discrimination SDP to guaranteed global optimality.

    Returns the optimal detection probabilities together with a dual
    certificate read from the final iterate (cone-projected so that the
    certificate is exactly PSD / nonnegative). The ``trace`` records the
    objective pair at every iterate; all iterates are primal and dual
    feasible by construction, so every traced gap is nonnegative.
    """
    opts = options or SolverOptions()
    c = problem.reciprocals
    r, m = c.shape
    eta = -problem.cost
    if np.min(eta) <= 0.0:
        raise ValidationError("cost must be the negated vector of positive priors")
    eye_r = np.eye(r, dtype=complex)
    norms2 = np.einsum("ri,ri->i", c.conj(), c).real
    top_sv = np.linalg.svd(c, compute_uv=False)[0]

    # Strictly feasible start: p halfway inside the operator constraint,
    # X a multiple of the identity large enough that every z_i > 0.
    p = np.full(m, 0.5 / top_sv**2)
    x_mat = (2.0 * eta.max() / norms2.min()) * eye_r

    nu = r + m
    status = SolveStatus.MAX_ITERATIONS
    trace: list[IterateTrace] = []
    iterations = 0
    snapshot = None
    prev_gap = np.inf
    stalled = 0

    s0 = eye_r - _apply(c, p)
    z = _apply_adjoint(c, x_mat) - eta

    for it in range(opts.max_iters + 1):
        gap = float(np.vdot(x_mat, s0).real + p @ z)
        primal = float(problem.cost @ p)
        dual = float(-np.trace(x_mat).real)
        mu = gap / nu
        rel_gap = gap / (1.0 + abs(primal))
        dual_eq_res = float(np.max(np.abs(_apply_adjoint(c, x_mat) - z - eta)))
        trace.append(IterateTrace(it, primal, dual, gap, mu))
        iterations = it
        if rel_gap <= opts.tol_gap and dual_eq_res <= opts.tol_feas:
            # Gap and feasibility are converged. Keep polishing until the
            # complementarity products also meet the report contract,
            # retaining the best converged iterate seen so far.
            slack_op = float(np.linalg.norm(x_mat @ s0))
            slack_sc = float(np.max(np.abs(z * p)))
            score = max(slack_op / SLACK_OPERATOR_TARGET, slack_sc / SLACK_SCALAR_TARGET)
            if snapshot is None or score < snapshot[0]:
                snapshot = (score, p.copy(), x_mat.copy(), z.copy(), it)
            if score <= 1.0:
                break
            stalled = stalled + 1 if gap > 0.7 * prev_gap else 0
            if stalled >= 3:
                break
        if it == opts.max_iters:
            status = SolveStatus.MAX_ITERATIONS
            break
        prev_gap = gap

        try:
            chol_s = np.linalg.cholesky(s0)
            chol_x = np.linalg.cholesky(x_mat)
        except np.linalg.LinAlgError:
            status = SolveStatus.NUMERICAL_FAILURE
            break

        # Nesterov-Todd scaling: T satisfies T* X T = T^{-1} S T^{-*} = diag(lam).
        _, lam, vh_nt = np.linalg.svd(chol_x.conj().T @ chol_s)
        inv_chol_s = solve_triangular(chol_s, eye_r, lower=True)
        t_inv = (np.sqrt(lam)[:, None]) * (vh_nt @ inv_chol_s)
        t_nt = (chol_s @ vh_nt.conj().T) / np.sqrt(lam)[None, :]
        w_inv = t_inv.conj().T @ t_inv
        lam_sum = lam[:, None] + lam[None, :]

        b_mat = c.conj().T @ w_inv @ c
        schur = np.abs(b_mat) ** 2 + np.diag(z / p)
        try:
            schur_chol = cho_factor((schur + schur.T) / 2)
        except np.linalg.LinAlgError:
            status = SolveStatus.NUMERICAL_FAILURE
            break

        def newton(k_mat: np.ndarray, rc: np.ndarray):
            rhs = rc / p - _apply_adjoint(c, k_mat)
            dp = cho_solve(schur_chol, rhs)
            # One round of iterative refinement; the Schur system grows
            # ill-conditioned as the complementarity products vanish.
            dp += cho_solve(schur_chol, rhs - schur @ dp)
            ds = -_apply(c, dp)
            dx = k_mat - w_inv @ ds @ w_inv
            dx = (dx + dx.conj().T) / 2
            dz = _apply_adjoint(c, dx)
            return dp, ds, dx, dz

        # Predictor: in the scaled space the affine right-hand side -lam^2
        # maps back to -X, so no Sylvester-type solve is needed.
        dp_a, ds_a, dx_a, dz_a = newton(-x_mat, -p * z)
        ap = min(1.0, _max_step_psd(chol_s, ds_a), _max_step_vec(p, dp_a))
        ad = min(1.0, _max_step_psd(chol_x, dx_a), _max_step_vec(z, dz_a))
        gap_aff = float(
            np.vdot(x_mat + ad * dx_a, s0 + ap * ds_a).real + (p + ap * dp_a) @ (z + ad * dz_a)
        )
        sigma = min(1.0, max(0.0, gap_aff / gap)) ** 3

        # Corrector: second-order term evaluated in the scaled space.
        ds_sc = t_inv @ ds_a @ t_inv.conj().T
        dx_sc = t_nt.conj().T @ dx_a @ t_nt
        cross = (ds_sc @ dx_sc + dx_sc @ ds_sc) / 2
        resid = -cross
        resid[np.diag_indices(r)] += sigma * mu - lam**2
        k_mat = t_inv.conj().T @ ((2.0 * resid / lam_sum) @ t_inv)
        k_mat = (k_mat + k_mat.conj().T) / 2
        rc = sigma * mu - p * z - dp_a * dz_a

        dp, ds, dx, dz = newton(k_mat, rc)
        frac = opts.step_fraction
        ap = min(1.0, frac * min(_max_step_psd(chol_s, ds), _max_step_vec(p, dp)))
        ad = min(1.0, frac * min(_max_step_psd(chol_x, dx), _max_step_vec(z, dz)))

        p = p + ap * dp
        x_mat = x_mat + ad * dx
        x_mat = (x_mat + x_mat.conj().T) / 2
        s0 = eye_r - _apply(c, p)
        z = _apply_adjoint(c, x_mat) - eta

    if snapshot is not None:
        # The mandated stopping criteria were met; report the converged
        # iterate with the smallest complementarity score.
        _, p, x_mat, z, iterations = snapshot
        status = SolveStatus.OPTIMAL

    # Certificate from the final dual iterate: cone-projected, then improved
    # by face restriction and by a Gauss-Newton polish of the optimality
    # system; the candidate with the smallest verified residuals wins.
    certificate = DualCertificate(X=_clip_psd(x_mat), z=np.maximum(z, 0.0))
    score, residuals = _certificate_score(c, p, certificate, eta)
    if status is SolveStatus.OPTIMAL:
        gap_now = float(np.vdot(x_mat, eye_r - _apply(c, p)).real + p @ z)
        refined = _refine_certificate(c, p, x_mat, eta, gap_now)
        if refined is not None:
            ref_score, ref_residuals = _certificate_score(c, p, refined, eta)
            if ref_score < score:
                certificate, residuals, score = refined, ref_residuals, ref_score
        polished = _kkt_polish(c, p, x_mat, eta, gap_now)
        if polished is not None:
            pol_score, pol_residuals = _certificate_score(c, polished[0], polished[1], eta)
            if pol_score < score:
                p, certificate = polished
                residuals, score = pol_residuals, pol_score

    primal = float(problem.cost @ p)
    dual = float(-np.trace(certificate.X).real)
    gap = primal - dual
    return SolveReport(
        p=p,
        certificate=certificate,
        primal_value=primal,
        dual_value=dual,
        gap=gap,
        relative_gap=gap / (1.0 + abs(primal)),
        iterations=iterations,
        status=status,
        residuals=residuals,
        trace=tuple(trace),
    )


def verify_certificate(
    ensemble: StateEnsemble,
    recips: ReciprocalSet,
    p: np.ndarray,
    certificate: DualCertificate,
    operator_tol: float = OPERATOR_TOL,
    scalar_tol: float = SCALAR_TOL,
) -> VerificationReport:
    """Check every optimality condition for a candidate solution.

    The conditions are primal feasibility (p >= 0 and the conclusive
    operators below the identity), dual feasibility (X psd, z >= 0, the
    trace equalities), the two complementary slackness products, and a
    vanishing duality gap. Verification always returns a report; it never
    raises on a failing candidate.
    """
    p = np.asarray(p, dtype=float).ravel()
    c = recips.reciprocals
    if p.shape[0] != ensemble.m or certificate.X.shape != (ensemble.r, ensemble.r):
        raise ValidationError("certificate or probability vector shape mismatch")
    if certificate.z.shape[0] != ensemble.m:
        raise ValidationError("dual slack vector has the wrong length")

    q_sum = _apply(c, p)
    traces = _apply_adjoint(c, certificate.X)
    primal_val = float(-ensemble.priors @ p)
    dual_val = float(-np.trace(certificate.X).real)
    residuals = {
        "primal_nonneg": float(max(0.0, -np.min(p))),
        "primal_operator": float(max(0.0, np.linalg.eigvalsh(q_sum)[-1] - 1.0)),
        "dual_psd": float(max(0.0, -np.linalg.eigvalsh(certificate.X)[0])),
        "dual_nonneg": float(max(0.0, -np.min(certificate.z))),
        "dual_equality": float(np.max(np.abs(traces - certificate.z - ensemble.priors))),
        "slack_operator": float(
            np.linalg.norm(certificate.X @ (np.eye(ensemble.r) - q_sum))
        ),
        "slack_scalar": float(np.max(np.abs(certificate.z * p))),
        "gap": abs(primal_val - dual_val) / (1.0 + abs(primal_val)),
    }
    tolerances = {
        "primal_nonneg": scalar_tol,
        "primal_operator": operator_tol,
        "dual_psd": operator_tol,
        "dual_nonneg": scalar_tol,
        "dual_equality": scalar_tol,
        "slack_operator": operator_tol,
        "slack_scalar": scalar_tol,
        "gap": scalar_tol,
    }
    checks = {k: residuals[k] <= tolerances[k] for k in residuals}
    detail = {
        "trace_products": traces,
        "primal_value": primal_val,
        "dual_value": dual_val,
    }
    return VerificationReport(
        residuals=residuals,
        tolerances=tolerances,
        checks=checks,
        passed=all(checks.values()),
        detail=detail,
    )


def weak_duality_gap(
    problem: SdpProblem, p: np.ndarray, certificate: DualCertificate
) -> float:
    """Objective difference P(p) - D(X) for a feasible primal-dual pair.

    Both inputs are checked for feasibility first; an infeasible pair is
    flagged with a :class:`ValidationError`. For feasible pairs the value
    equals Tr(F(p) Z) with Z the block-diagonal dual variable, hence it is
    nonnegative.
    """
    p = np.asarray(p, dtype=float).ravel()
    c = problem.reciprocals
    eta = -problem.cost
    if np.min(p) < -1e-9:
        raise ValidationError("primal point infeasible: negative probability")
    if np.linalg.eigvalsh(_apply(c, p))[-1] > 1.0 + 1e-8:
        raise ValidationError("primal point infeasible: operators exceed the identity")
    if np.linalg.eigvalsh(certificate.X)[0] < -1e-8:
        raise ValidationError("dual point infeasible: X is not positive semidefinite")
    if np.min(certificate.z) < -1e-10:
        raise ValidationError("dual point infeasible: negative slack")
    eq_res = np.max(np.abs(_apply_adjoint(c, certificate.X) - certificate.z - eta))
    if eq_res > 1e-7:
        raise ValidationError(
            f"dual point infeasible: trace equalities violated by {eq_res:.3e}"
        )
    return float(problem.cost @ p + np.trace(certificate.X).real)


@dataclass(frozen=True)
class LpReport:
    x: np.ndarray
    slack: np.ndarray
    dual: np.ndarray
    objective: float
    gap: float
    iterations: int
    status: SolveStatus


def solve_inequality_lp(
    cost: np.ndarray,
    g_mat: np.ndarray,
    h: np.ndarray,
    x0: np.ndarray,
    z0: np.ndarray,
    options: SolverOptions | None = None,
) -> LpReport:
    """Minimize ``cost @ x`` subject to ``g_mat @ x <= h``.

    Scalar-block instance of the interior-point engine. Strictly feasible
    primal and dual starting points must be supplied: ``h - g_mat @ x0 > 0``
    and ``z0 > 0`` with ``g_mat.T @ z0 = -cost``.
    """
    opts = options or SolverOptions()
    cost = np.asarray(cost, dtype=float).ravel()
    g_mat = np.asarray(g_mat, dtype=float)
    h = np.asarray(h, dtype=float).ravel()
    x = np.asarray(x0, dtype=float).ravel().copy()
    z = np.asarray(z0, dtype=float).ravel().copy()
    n, d = g_mat.shape

    s = h - g_mat @ x
    if np.min(s) <= 0.0 or np.min(z) <= 0.0:
        raise ValidationError("starting point is not strictly feasible")
    if np.max(np.abs(g_mat.T @ z + cost)) > 1e-8 * (1.0 + np.abs(cost).max()):
        raise ValidationError("dual start does not satisfy the equality constraints")

    status = SolveStatus.MAX_ITERATIONS
    iterations = 0
    for it in range(opts.max_iters + 1):
        s = h - g_mat @ x
        gap = float(s @ z)
        obj = float(cost @ x)
        iterations = it
        if gap / (1.0 + abs(obj)) <= opts.tol_gap:
            status = SolveStatus.OPTIMAL
            break
        if it == opts.max_iters:
            break
        mu = gap / n
        rd = -cost - g_mat.T @ z

        normal = g_mat.T @ (g_mat * (z / s)[:, None])
        try:
            normal_chol = cho_factor((normal + normal.T) / 2)
        except np.linalg.LinAlgError:
            status = SolveStatus.NUMERICAL_FAILURE
            break

        def newton(rc: np.ndarray):
            dx = cho_solve(normal_chol, rd - g_mat.T @ (rc / s))
            ds = -g_mat @ dx
            dz = (rc - z * ds) / s
            return dx, ds, dz

        dx_a, ds_a, dz_a = newton(-s * z)
        ap = min(1.0, _max_step_vec(s, ds_a))
        ad = min(1.0, _max_step_vec(z, dz_a))
        gap_aff = float((s + ap * ds_a) @ (z + ad * dz_a))
        sigma = min(1.0, max(0.0, gap_aff / gap)) ** 3

        dx, ds, dz = newton(sigma * mu - s * z - ds_a * dz_a)
        ap = min(1.0, opts.step_fraction * _max_step_vec(s, ds))
        ad = min(1.0, opts.step_fraction * _max_step_vec(z, dz))
        x = x + ap * dx
        z = z + ad * dz

    s = h - g_mat @ x
    return LpReport(
        x=x,
        slack=s,
        dual=z,
        objective=float(cost @ x),
        gap=float(s @ z),
        iterations=iterations,
        status=status,
    )


__all__ = [
    "SolveStatus",
    "SolverOptions",
    "SdpProblem",
    "DualCertificate",
    "IterateTrace",
    "SolveReport",
    "VerificationReport",
    "LpReport",
    "build_sdp",
    "solve",
    "verify_certificate",
    "weak_duality_gap",
    "solve_inequality_lp",
    "gram_operators",
]
