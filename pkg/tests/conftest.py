"""Shared battery generators for the matrix-side tests."""

import numpy as np
import pytest

from orbitlab.operators import MatrixOperator


def random_power_bounded(rng, dim=10, norm_tag="euclidean", max_cond=20.0,
                         include_one=True, max_uni=3):
    """Random power-bounded matrix with a semisimple unimodular part.

    Eigenvalues: one or more unimodular values (phases bounded away from
    each other), the rest strictly inside the disk with moduli in
    [0.3, 0.9]; conjugated by a conditioned random basis.  ``max_uni``
    caps the unimodular count (each extra irrational rotation adds a
    torus dimension, which slows packing saturation at fixed horizons).
    """
    n_uni = int(rng.integers(1, max_uni + 1))
    phases = []
    while len(phases) < n_uni:
        cand = rng.uniform(-np.pi, np.pi)
        if all(abs(cand - p) > 0.3 for p in phases):
            phases.append(cand)
    if include_one:
        phases[0] = 0.0
    uni = np.exp(1j * np.array(phases))
    n_int = dim - n_uni
    moduli = rng.uniform(0.3, 0.9, size=n_int)
    args = rng.uniform(-np.pi, np.pi, size=n_int)
    interior = moduli * np.exp(1j * args)
    eigs = np.concatenate([uni, interior])
    while True:
        v = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        if np.linalg.cond(v) <= max_cond:
            break
    a = v @ np.diag(eigs) @ np.linalg.inv(v)
    return MatrixOperator(a, norm_tag), eigs, v


def random_contraction(rng, dim=10, norm_tag="euclidean"):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return MatrixOperator(g / np.linalg.norm(g, 2), norm_tag)


def commuting_matrix_family(rng, dim=8, m=2, norm_tag="euclidean"):
    """Commuting generators as polynomials of one random matrix, scaled
    to unit operator norm."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    g = g / np.linalg.norm(g, 2)
    gens = []
    eye = np.eye(dim, dtype=np.complex128)
    for _ in range(m):
        coeffs = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        t = coeffs[0] * eye + coeffs[1] * g + coeffs[2] * (g @ g)
        t = t / np.linalg.norm(t, 2)
        gens.append(MatrixOperator(t, norm_tag))
    return gens


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
