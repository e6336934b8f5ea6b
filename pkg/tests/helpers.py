"""Shared builders for test ensembles and groups."""

from __future__ import annotations

import numpy as np

from uqsd import StateEnsemble, UnitaryGroup


def three_state_matrix() -> np.ndarray:
    return np.column_stack(
        [
            np.array([1, 1, 1]) / np.sqrt(3),
            np.array([1, 1, 0]) / np.sqrt(2),
            np.array([0, 1, 1]) / np.sqrt(2),
        ]
    ).astype(complex)


def sign_group_elements() -> np.ndarray:
    u1 = np.eye(4)
    u2 = np.diag([1.0, -1.0, 1.0, -1.0])
    u3 = np.diag([1.0, 1.0, -1.0, -1.0])
    return np.array([u1, u2, u3, u2 @ u3], dtype=complex)


def sign_group_generator() -> np.ndarray:
    return np.array([2.0, 2.0, 1.0, 3.0]) / (3.0 * np.sqrt(2.0))


def random_ensemble(rng, r: int, m: int, min_prior: float = 0.2) -> StateEnsemble:
    """Generic ensemble: random complex unit columns, bounded-away priors."""
    while True:
        states = rng.normal(size=(r, m)) + 1j * rng.normal(size=(r, m))
        states /= np.linalg.norm(states, axis=0)
        sv = np.linalg.svd(states, compute_uv=False)
        if sv[-1] > 1e-3 * sv[0]:
            break
    priors = rng.uniform(min_prior, 1.0, m)
    priors /= priors.sum()
    return StateEnsemble(states, priors)


def haar_unitary(rng, n: int) -> np.ndarray:
    q, r_ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diagonal(r_) / np.abs(np.diagonal(r_)))


def cyclic_shift(m: int) -> np.ndarray:
    return np.roll(np.eye(m), 1, axis=0).astype(complex)


def cyclic_profile_ensemble(dft_mags, rng, priors=None) -> StateEnsemble:
    """Orbit of a generator under the cyclic shift, with prescribed spectrum.

    The frame-operator eigenvalues are m |c_k|^2 where c is the DFT of the
    generator, so degenerate smallest singular values can be constructed
    exactly while every column stays unit norm.
    """
    mags = np.asarray(dft_mags, dtype=float)
    m = mags.shape[0]
    coeffs = mags * np.exp(2j * np.pi * rng.random(m))
    coeffs /= np.linalg.norm(coeffs)
    fourier = np.fft.fft(np.eye(m)) / np.sqrt(m)
    gen = fourier.conj().T @ coeffs
    shift = cyclic_shift(m)
    cols = [gen]
    for _ in range(m - 1):
        cols.append(shift @ cols[-1])
    states = np.column_stack(cols)
    pri = np.full(m, 1.0 / m) if priors is None else np.asarray(priors, dtype=float)
    return StateEnsemble(states, pri)


def random_gu_group(rng, kind: str, size: int, dim: int) -> UnitaryGroup:
    """Small unitary groups for orbit tests: plain or conjugated cyclic, signs."""
    if kind == "cyclic":
        base = cyclic_shift(size)
        if dim > size:
            pad = np.eye(dim, dtype=complex)
            pad[:size, :size] = base
            base = pad
        return UnitaryGroup.cyclic(base, order=size)
    if kind == "conjugated":
        base = cyclic_shift(size)
        if dim > size:
            pad = np.eye(dim, dtype=complex)
            pad[:size, :size] = base
            base = pad
        w = haar_unitary(rng, dim)
        # Conjugate exact permutation powers; powering the conjugated
        # matrix directly would accumulate rounding past group tolerances.
        powers = [np.linalg.matrix_power(base, j) for j in range(size)]
        return UnitaryGroup(np.array([w @ pj @ w.conj().T for pj in powers]))
    if kind == "signs":
        # Walsh-function sign masks: closed under products and, with every
        # pattern index present among the coordinates, generic orbits stay
        # linearly independent. Requires a power-of-two size <= dim.
        if size & (size - 1):
            raise ValueError("sign groups need a power-of-two size")
        patterns = np.concatenate(
            [np.arange(size), rng.integers(0, size, dim - size)]
        )
        rng.shuffle(patterns)
        masks = [
            np.array([(-1.0) ** bin(k & int(c)).count("1") for c in patterns])
            for k in range(size)
        ]
        return UnitaryGroup(np.array([np.diag(mk).astype(complex) for mk in masks]))
    raise ValueError(kind)


def gu_generator_with_full_orbit(rng, group: UnitaryGroup) -> np.ndarray:
    """Unit generator whose orbit under the group is linearly independent."""
    for _ in range(200):
        gen = rng.normal(size=group.dim) + 1j * rng.normal(size=group.dim)
        gen /= np.linalg.norm(gen)
        orbit = np.column_stack([u @ gen for u in group.elements])
        sv = np.linalg.svd(orbit, compute_uv=False)
        if sv[-1] > 1e-6 * sv[0]:
            return gen
    raise RuntimeError("could not find an independent orbit")
