"""Orbit clouds and packing/covering compactness diagnostics.

An orbit cloud is a finite, labelled slice of an operator orbit together
with a certified metric.  Packing numbers of greedily built separated
sets make "relatively compact" versus "not relatively compact" a
measurable distinction at finite horizons: saturating packing numbers
are evidence of total boundedness, linearly growing ones certify
separated infinite families.

Certification convention: a pair counts as separated (distance > eps)
only when a certified lower bound on the distance exceeds eps; when the
distance cannot be resolved away from eps at the metric tolerance the
conservative answer "not separated" is used.  Verdicts are explicitly
heuristic evidence with stated thresholds, not proofs; the acceptance
suite pairs them with closed-form oracles.

Greedy nets scan points in label order (seeded from the first point,
ties broken by smallest label), so prefix clouds give prefix nets and
one pass yields the whole horizon curve.  Distances are cached; clouds
over isometric diagonal operators additionally key the cache by the
exponent difference, which collapses the O(h^2) pair table to O(h)
distinct computations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .operators import DiagonalOperator, MatrixOperator, OperatorWord, power_apply
from .seqspace import (FiniteVector, NormResult, SeqVector, lin_comb,
                       norm_exceeds, sup_norm)

__all__ = [
    "OrbitCloud",
    "CompactnessReport",
    "orbit",
    "difference_orbit",
    "orbit_family",
    "packing_number",
    "covering_estimate",
    "cloud_diagnostic",
    "compactness_diagnostic",
    "difference_compactness_diagnostic",
]

GROWTH_FACTOR = 1.1  # >= 10% growth per horizon step counts as growing


class OrbitCloud:
    """Labelled orbit points with a certified, cached metric.

    ``labels`` are ints (cyclic orbits) or exponent tuples (semigroup
    orbits).  ``diff_vector(l1, l2)`` must return the difference vector
    of the two labelled points; ``diff_key`` maps a label pair to a
    cache key and enables translation-invariant sharing.
    """

    def __init__(self, labels, vector_of, diff_vector, tol: float,
                 diff_key=None, description: str = ""):
        self.labels = list(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("orbit labels must be unique")
        self._vector_of = vector_of
        self._diff_vector = diff_vector
        self._diff_key = diff_key or (lambda a, b: (a, b) if a <= b else (b, a))
        self.tol = float(tol)
        self.description = description
        self._values: dict = {}
        self._decisions: dict = {}

    def __len__(self):
        return len(self.labels)

    @property
    def points(self):
        """Labelled vector handles (built lazily)."""
        return [(lbl, self._vector_of(lbl)) for lbl in self.labels]

    def vector(self, label):
        return self._vector_of(label)

    def distance(self, l1, l2) -> NormResult:
        """Certified distance between two labelled points."""
        key = self._diff_key(l1, l2)
        hit = self._values.get(key)
        if hit is None:
            d = self._diff_vector(l1, l2)
            if isinstance(d, FiniteVector):
                hit = NormResult(d.norm(), 0.0)
            else:
                hit = sup_norm(d, self.tol)
            self._values[key] = hit
        return hit

    def separated(self, l1, l2, eps: float) -> bool:
        """Certified decision ``distance(l1, l2) > eps``."""
        key = (self._diff_key(l1, l2), eps)
        hit = self._decisions.get(key)
        if hit is None:
            d = self._diff_vector(l1, l2)
            if isinstance(d, FiniteVector):
                hit = d.norm() > eps
            else:
                hit = norm_exceeds(d, eps, self.tol)
            self._decisions[key] = hit
        return hit


def _diag_orbit_cloud(op: DiagonalOperator, x: SeqVector, horizon: int,
                      tol: float, description: str) -> OrbitCloud:
    vectors: dict[int, SeqVector] = {}

    def vector_of(n):
        if n not in vectors:
            vectors[n] = power_apply(op, n, x)
        return vectors[n]

    def diff_vector(n, m):
        # isometry: ||T^n x - T^m x|| = ||T^d x - x|| with d = |n - m|
        return lin_comb([1.0, -1.0], [vector_of(abs(n - m)), x])

    return OrbitCloud(range(1, horizon + 1), vector_of, diff_vector, tol,
                      diff_key=lambda a, b: abs(a - b), description=description)


def _matrix_orbit_cloud(op: MatrixOperator, x: FiniteVector, horizon: int,
                        tol: float, description: str) -> OrbitCloud:
    vecs = [None] * (horizon + 1)
    cur = x.coords
    for n in range(1, horizon + 1):
        cur = op.entries @ cur
        vecs[n] = FiniteVector(cur, x.norm_tag)

    def vector_of(n):
        return vecs[n]

    def diff_vector(n, m):
        return FiniteVector(vecs[n].coords - vecs[m].coords, x.norm_tag)

    return OrbitCloud(range(1, horizon + 1), vector_of, diff_vector, tol,
                      description=description)


def orbit(op, x, horizon: int, tol: float = 1e-8) -> OrbitCloud:
    """Cloud of the points ``T^1 x .. T^horizon x`` with exponent labels."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if isinstance(op, DiagonalOperator):
        return _diag_orbit_cloud(op, x, horizon, tol, "orbit")
    if isinstance(op, MatrixOperator):
        return _matrix_orbit_cloud(op, x, horizon, tol, "orbit")
    raise TypeError(f"unsupported operator type {type(op).__name__}")


def difference_orbit(op, x, horizon: int, tol: float = 1e-8) -> OrbitCloud:
    """Cloud of ``T^n (I - T) x`` for ``1 <= n <= horizon``."""
    if isinstance(op, DiagonalOperator):
        y = lin_comb([1.0, -1.0], [x, op.apply(x)])
    elif isinstance(op, MatrixOperator):
        y = FiniteVector(x.coords - op.entries @ x.coords, x.norm_tag)
    else:
        raise TypeError(f"unsupported operator type {type(op).__name__}")
    return orbit(op, y, horizon, tol)


def _graded_lex_words(m: int, max_total_degree: int):
    """All nonzero multi-indices of length m with total degree <= bound,
    in graded lexicographic order."""

    def compositions(total, slots):
        if slots == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, slots - 1):
                yield (first,) + rest

    for deg in range(1, max_total_degree + 1):
        yield from compositions(deg, m)


def orbit_family(family, x, max_total_degree: int, tol: float = 1e-8) -> OrbitCloud:
    """Finitely generated orbit ``{word(x)}`` over a commuting family.

    Words are enumerated in graded lexicographic order up to the given
    total degree.  For diagonal families the metric cache is keyed by
    the normalised exponent difference.
    """
    gens = family.generators
    m = len(gens)
    labels = [OperatorWord(w) for w in _graded_lex_words(m, max_total_degree)]
    if isinstance(gens[0], DiagonalOperator):
        vectors: dict[OperatorWord, SeqVector] = {}

        def vector_of(word):
            if word not in vectors:
                out = x
                for g, e in zip(gens, word.exponents):
                    if e:
                        out = power_apply(g, e, out)
                vectors[word] = out
            return vectors[word]

        def norm_key(a: OperatorWord, b: OperatorWord):
            da = tuple(max(ea - eb, 0) for ea, eb in zip(a.exponents, b.exponents))
            db = tuple(max(eb - ea, 0) for ea, eb in zip(a.exponents, b.exponents))
            return (da, db) if da <= db else (db, da)

        def diff_vector(a, b):
            da, db = norm_key(a, b)
            u = vector_of(OperatorWord(da))
            v = vector_of(OperatorWord(db))
            return lin_comb([1.0, -1.0], [u, v])

        return OrbitCloud(labels, vector_of, diff_vector, tol, diff_key=norm_key,
                          description="family orbit")

    vectors = {}

    def vector_of(word):
        if word not in vectors:
            out = x
            for g, e in zip(gens, word.exponents):
                if e:
                    out = power_apply(g, e, out)
            vectors[word] = out
        return vectors[word]

    def diff_vector(a, b):
        return FiniteVector(vector_of(a).coords - vector_of(b).coords, x.norm_tag)

    return OrbitCloud(labels, vector_of, diff_vector, tol, description="family orbit")


def _greedy_counts(cloud: OrbitCloud, eps: float, checkpoints: Sequence[int]) -> list[int]:
    """Sizes of the greedy certified eps-separated net at each prefix length."""
    marks = {int(c) for c in checkpoints}
    if max(marks) > len(cloud):
        raise ValueError("checkpoint beyond cloud horizon")
    net: list = []
    counts: dict[int, int] = {}
    for i, lbl in enumerate(cloud.labels, start=1):
        if all(cloud.separated(lbl, member, eps) for member in net):
            net.append(lbl)
        if i in marks:
            counts[i] = len(net)
    return [counts[c] for c in sorted(marks)]


def _check_eps(cloud: OrbitCloud, eps: float):
    if eps <= 4 * cloud.tol:
        raise ValueError(f"epsilon {eps:g} must exceed 4 * metric tolerance {cloud.tol:g}")


def packing_number(cloud: OrbitCloud, epsilon: float, tol: float | None = None) -> int:
    """Size of the greedy maximal certified eps-separated subset.

    Greedy over label order: a point joins the net only if its distance
    to every current member is certified > eps.
    """
    if tol is not None and epsilon <= 4 * tol:
        raise ValueError(f"epsilon {epsilon:g} must exceed 4 * tol {tol:g}")
    _check_eps(cloud, epsilon)
    return _greedy_counts(cloud, epsilon, [len(cloud)])[0]


def covering_estimate(cloud: OrbitCloud, epsilon: float, tol: float | None = None) -> int:
    """Greedy eps-net size.

    The greedy maximal separated set doubles as an eps-cover: every
    rejected point failed certified separation from some member, hence
    lies within eps (up to the metric tolerance) of the net.  The
    estimate therefore satisfies
    ``packing(2 eps) <= covering(eps) <= packing(eps)``.
    """
    return packing_number(cloud, epsilon, tol)


@dataclass
class CompactnessReport:
    """Packing/covering table over epsilons and horizons with a verdict."""

    epsilons: tuple[float, ...]
    horizons: tuple[int, ...]
    packing: np.ndarray            # shape (len(epsilons), len(horizons))
    covering: np.ndarray
    verdict: str                   # saturating | growing | inconclusive
    growth_stats: dict = field(default_factory=dict)
    description: str = ""

    def to_json_dict(self) -> dict:
        return {
            "description": self.description,
            "epsilons": list(self.epsilons),
            "horizons": list(self.horizons),
            "packing": self.packing.tolist(),
            "covering": self.covering.tolist(),
            "verdict": self.verdict,
            "growth_stats": {str(k): v for k, v in self.growth_stats.items()},
        }

    def csv_rows(self) -> list[tuple]:
        rows = [("horizon", "epsilon", "packing", "covering")]
        for i, eps in enumerate(self.epsilons):
            for j, h in enumerate(self.horizons):
                rows.append((h, eps, int(self.packing[i, j]), int(self.covering[i, j])))
        return rows


def _verdict(packing: np.ndarray) -> tuple[str, dict]:
    stats = {}
    n_eps, n_h = packing.shape
    ratios = packing[:, 1:] / np.maximum(packing[:, :-1], 1)
    for i in range(n_eps):
        stats[i] = [float(r) for r in ratios[i]]
    saturating = bool(np.all(packing[:, -1] == packing[:, -2])
                      and np.all(packing[:, -2] == packing[:, -3]))
    if saturating:
        return "saturating", stats
    growing = bool(np.any(np.all(ratios >= GROWTH_FACTOR, axis=1)))
    if growing:
        return "growing", stats
    return "inconclusive", stats


def cloud_diagnostic(cloud: OrbitCloud, epsilons: Sequence[float],
                     horizons: Sequence[int]) -> CompactnessReport:
    """Packing table of an existing cloud plus the saturation verdict.

    ``horizons`` must be strictly increasing with at least 3 entries.
    Verdict "saturating" means every epsilon row is constant across the
    last two horizon steps; "growing" means some row grows monotonically
    by at least 10% per step; anything else is "inconclusive".
    """
    horizons = [int(h) for h in horizons]
    if len(horizons) < 3 or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be strictly increasing with >= 3 entries")
    if max(horizons) > len(cloud):
        raise ValueError("largest horizon exceeds the cloud size")
    epsilons = [float(e) for e in epsilons]
    for eps in epsilons:
        _check_eps(cloud, eps)
    pack = np.empty((len(epsilons), len(horizons)), dtype=np.int64)
    for i, eps in enumerate(epsilons):
        pack[i] = _greedy_counts(cloud, eps, horizons)
    verdict, stats = _verdict(pack)
    return CompactnessReport(tuple(epsilons), tuple(horizons), pack, pack.copy(),
                             verdict, stats, cloud_description(cloud))


def cloud_description(cloud: OrbitCloud) -> str:
    return getattr(cloud, "description", "")


def compactness_diagnostic(op, x, epsilons: Sequence[float], horizons: Sequence[int],
                           tol: float = 1e-8) -> CompactnessReport:
    """Orbit compactness diagnostic of ``{T^n x}`` up to ``max(horizons)``."""
    cloud = orbit(op, x, max(int(h) for h in horizons), tol)
    rep = cloud_diagnostic(cloud, epsilons, horizons)
    rep.description = "orbit"
    return rep


def difference_compactness_diagnostic(op, x, epsilons: Sequence[float],
                                      horizons: Sequence[int],
                                      tol: float = 1e-8) -> CompactnessReport:
    """Diagnostic of the difference orbit ``{T^n (I - T) x}``."""
    cloud = difference_orbit(op, x, max(int(h) for h in horizons), tol)
    rep = cloud_diagnostic(cloud, epsilons, horizons)
    rep.description = "difference orbit"
    return rep
