"""Concrete operator classes and the telescoping expansion.

Two operator worlds are implemented: unimodular diagonal multiplication
operators on c/c0 (stored as angle oracles so powers never drift off the
unit circle) and dense complex matrices as the desk-scale model of a
reflexive space.  Formal words over an ordered list of commuting
generators support the expansion of ``I - prod T_j^{k_j}`` into a sum of
``word * (I - T_j)`` factors.

The displayed inner sum of that expansion runs over ``l = 0 .. k_j - 1``:
``I - T^k = sum_{l<k} T^l (I - T)``.  This is the identity the statement
needs (the variant starting at ``l = 1`` equals ``T (I - T^k)`` instead)
and it is what ``telescope_expand`` implements and the exact-algebra
tests verify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (DimensionMismatchError, EmptyWordError, SpaceTagError,
                     UnreachableToleranceError)
from .seqspace import (FiniteVector, SeqVector, TailCertificate, lin_comb,
                       sup_norm)

__all__ = [
    "DiagonalSymbol",
    "DiagonalOperator",
    "MatrixOperator",
    "OperatorWord",
    "CommutingFamily",
    "harmonic_symbol",
    "root_perturbed_symbol",
    "constant_symbol",
    "apply",
    "power_apply",
    "telescope_expand",
    "word_apply",
    "word_matrix",
    "commutation_defect",
    "power_bound_estimate",
    "PowerBoundEstimate",
    "make_commuting_family",
    "read_matrix_file",
    "write_matrix_file",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DiagonalSymbol:
    """Unimodular symbol ``a_k = exp(i * angle(k))`` stored as angles.

    ``tail`` certifies ``|a_k - a_limit| <= bound(K)`` for ``k > K``.
    ``unit_fixed_indices`` lists the k with ``a_k == 1`` exactly when the
    constructing family knows them (None means unknown), and
    ``limit_attained`` records whether some ``a_k`` equals the limit
    value; symbolic verdicts refuse to guess when these are unknown.
    """

    angle: Callable[[np.ndarray], np.ndarray]
    limit_angle: float
    tail: TailCertificate
    kind: str = "custom"
    params: tuple = ()
    unit_fixed_indices: tuple[int, ...] | None = None
    limit_attained: bool | None = None

    def angles(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=np.int64)
        return np.asarray(self.angle(ks), dtype=np.float64)

    def values(self, ks) -> np.ndarray:
        return np.exp(1j * self.angles(ks))

    @property
    def limit_value(self) -> complex:
        return complex(np.exp(1j * self.limit_angle))

    def power(self, n: int) -> "DiagonalSymbol":
        """Symbol of the n-th power, computed by angle multiplication.

        Valid for negative n as well (the inverse symbol).  Uses
        ``|a^n - b^n| <= |n| |a - b|`` for the tail certificate.
        """
        n = int(n)
        if n == 0:
            return constant_symbol(0.0)
        base = self.angle

        def angle(ks, _n=n, _base=base):
            return np.mod(_n * np.asarray(_base(ks), dtype=np.float64), _TWO_PI)

        return DiagonalSymbol(
            angle,
            float(np.mod(n * self.limit_angle, _TWO_PI)),
            TailCertificate(abs(n) * self.tail.constant, self.tail.exponent),
            kind="custom",
            params=("power", self.kind, self.params, n),
        )

    def inverse(self) -> "DiagonalSymbol":
        return self.power(-1)


def harmonic_symbol(rate: float = 1.0) -> DiagonalSymbol:
    """Angles ``theta_k = pi / k**rate``; the symbol tends to 1 and never
    equals it."""
    if rate <= 0:
        raise ValueError("rate must be positive")

    def angle(ks, _p=rate):
        return math.pi / np.asarray(ks, dtype=np.float64) ** _p

    # |e^{i theta} - 1| = 2|sin(theta/2)| <= pi / k**rate
    return DiagonalSymbol(angle, 0.0, TailCertificate(math.pi, rate),
                          kind="harmonic", params=(rate,),
                          unit_fixed_indices=(), limit_attained=False)


def root_perturbed_symbol(m: int, rate: float = 1.0) -> DiagonalSymbol:
    """Angles ``theta_k = 2 pi / m + pi / k**rate``.

    The symbol converges to the m-th root of unity ``exp(2 pi i / m)``
    and never equals it.  For m = 2 the single index k = 1 has
    ``a_1 = 1`` (angle 2 pi); for m >= 3 no a_k is 1.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    if rate <= 0:
        raise ValueError("rate must be positive")
    base = _TWO_PI / m

    def angle(ks, _b=base, _p=rate):
        return _b + math.pi / np.asarray(ks, dtype=np.float64) ** _p

    fixed: tuple[int, ...] = ()
    if m == 2 and rate > 0:
        fixed = (1,)  # pi + pi = 2 pi
    return DiagonalSymbol(angle, base, TailCertificate(math.pi, rate),
                          kind="root_perturbed", params=(m, rate),
                          unit_fixed_indices=fixed, limit_attained=False)


def constant_symbol(angle_value: float) -> DiagonalSymbol:
    """Constant symbol ``a_k = exp(i * angle_value)`` (a plain rotation)."""
    a = float(np.mod(angle_value, _TWO_PI))

    def angle(ks, _a=a):
        return np.full(np.shape(ks), _a, dtype=np.float64)

    # a_k == 1 for every k iff the angle is 0; verdict logic branches on
    # kind == "constant" rather than enumerating indices
    return DiagonalSymbol(angle, a, TailCertificate.zero(),
                          kind="constant", params=(a,),
                          unit_fixed_indices=None,
                          limit_attained=True)


@dataclass(frozen=True)
class DiagonalOperator:
    """Multiplication operator ``(T x)_k = a_k x_k`` on c or c0.

    An exact isometry for the sup-norm, invertible with inverse symbol
    ``-theta_k``.
    """

    symbol: DiagonalSymbol
    space_tag: str = "c"

    def __post_init__(self):
        if self.space_tag not in ("c", "c0"):
            raise SpaceTagError(f"unknown space tag {self.space_tag!r}")

    def apply(self, v: SeqVector) -> SeqVector:
        if self.space_tag == "c0" and v.space_tag != "c0":
            raise SpaceTagError("operator on c0 cannot act on a general c vector")
        sym = self.symbol
        lim_val = sym.limit_value

        def coord(ks, _v=v, _sym=sym):
            return _sym.values(ks) * _v.coords(ks)

        # |a_k x_k - a_oo x_oo| <= |x_k - x_oo| + |x_oo| |a_k - a_oo|
        tail = TailCertificate.combine([(1.0, v.tail), (abs(v.limit), sym.tail)])
        return SeqVector(coord, lim_val * v.limit, tail, v.space_tag)

    def power(self, n: int) -> "DiagonalOperator":
        return DiagonalOperator(self.symbol.power(n), self.space_tag)

    def inverse(self) -> "DiagonalOperator":
        return DiagonalOperator(self.symbol.inverse(), self.space_tag)

    def operator_norm(self) -> float:
        return 1.0


@dataclass(frozen=True)
class MatrixOperator:
    """Dense complex N x N matrix acting on FiniteVector."""

    entries: np.ndarray
    norm_tag: str = "euclidean"

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise DimensionMismatchError(f"matrix must be square, got shape {arr.shape}")
        if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
            raise ValueError("matrix entries must be finite")
        if self.norm_tag not in ("sup", "euclidean"):
            raise ValueError(f"unknown norm tag {self.norm_tag!r}")
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def apply(self, v: FiniteVector) -> FiniteVector:
        if v.dim != self.dim:
            raise DimensionMismatchError(f"operator dim {self.dim} vs vector dim {v.dim}")
        if v.norm_tag != self.norm_tag:
            raise SpaceTagError(f"norm tags differ: {self.norm_tag} vs {v.norm_tag}")
        return FiniteVector(self.entries @ v.coords, v.norm_tag)

    def power(self, n: int) -> "MatrixOperator":
        if n < 0:
            return MatrixOperator(np.linalg.matrix_power(np.linalg.inv(self.entries), -n),
                                  self.norm_tag)
        return MatrixOperator(np.linalg.matrix_power(self.entries, n), self.norm_tag)

    def operator_norm(self) -> float:
        return matrix_norm(self.entries, self.norm_tag)

    def adjoint(self) -> "MatrixOperator":
        return MatrixOperator(self.entries.conj().T, self.norm_tag)

    def identity_like(self) -> "MatrixOperator":
        return MatrixOperator(np.eye(self.dim, dtype=np.complex128), self.norm_tag)


def matrix_norm(a: np.ndarray, norm_tag: str) -> float:
    """Induced operator norm of a matrix acting on (C^N, sup) or (C^N, l2)."""
    if norm_tag == "sup":
        return float(np.max(np.sum(np.abs(a), axis=1)))
    return float(np.linalg.norm(a, 2))


def apply(op, v):
    """Apply an operator to a compatible vector."""
    return op.apply(v)


def power_apply(op, n: int, v):
    """Apply the n-th power, n >= 0.

    Diagonal operators compute the power symbol by angle multiplication
    (never by repeated complex products); matrices use binary
    exponentiation.
    """
    if n < 0:
        raise ValueError("power_apply needs n >= 0")
    if n == 0:
        return v
    return op.power(n).apply(v)


@dataclass(frozen=True, order=True)
class OperatorWord:
    """Formal product ``prod_j T_j^{exponents[j]}`` over an ordered
    generator list.  Orderable so label pairs can serve as cache keys."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if any(e < 0 for e in self.exponents):
            raise ValueError("word exponents must be nonnegative")
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))

    @property
    def total_degree(self) -> int:
        return sum(self.exponents)

    def is_identity(self) -> bool:
        return self.total_degree == 0


def telescope_expand(exponents: Sequence[int]) -> list[tuple[OperatorWord, int]]:
    """Expansion of ``I - prod_j T_j^{k_j}`` over difference factors.

    Returns pairs ``(word, j)`` such that

        I - prod_j T_j^{k_j}  =  sum over pairs of  word * (I - T_j),

    with ``word = prod_{i<j} T_i^{k_i} * T_j^l`` for ``l = 0 .. k_j - 1``.
    The list has length ``sum k_j``.  Generator indices are 1-based.
    """
    ks = [int(k) for k in exponents]
    if any(k < 0 for k in ks):
        raise ValueError("exponents must be nonnegative")
    if sum(ks) == 0:
        raise EmptyWordError("telescoping the empty word (all exponents zero)")
    out: list[tuple[OperatorWord, int]] = []
    m = len(ks)
    for j in range(m):
        if ks[j] == 0:
            continue
        prefix = list(ks[:j]) + [0] * (m - j)
        for l in range(ks[j]):
            word = prefix.copy()
            word[j] = l
            out.append((OperatorWord(tuple(word)), j + 1))
    return out


def word_apply(word: OperatorWord, generators: Sequence, v):
    """Apply a formal word to a vector, generator by generator."""
    if len(word.exponents) != len(generators):
        raise DimensionMismatchError("word length does not match generator count")
    out = v
    for gen, e in zip(generators, word.exponents):
        if e:
            out = power_apply(gen, e, out)
    return out


def word_matrix(word: OperatorWord, generators: Sequence[MatrixOperator]) -> np.ndarray:
    """Dense matrix of a formal word over matrix generators."""
    if len(word.exponents) != len(generators):
        raise DimensionMismatchError("word length does not match generator count")
    n = generators[0].dim
    out = np.eye(n, dtype=np.complex128)
    for gen, e in zip(generators, word.exponents):
        if e:
            out = out @ np.linalg.matrix_power(gen.entries, e)
    return out


_FEASIBLE_SCAN = 1 << 22


def _vector_norm(v, tol: float) -> float:
    if isinstance(v, FiniteVector):
        return v.norm()
    try:
        value, err = sup_norm(v, tol)
    except UnreachableToleranceError:
        # an exact cancellation can leave a pessimistic certificate; report
        # the coarsest certifiable upper bound instead of failing
        coarse = max(tol, float(v.tail.bound(_FEASIBLE_SCAN)))
        value, err = sup_norm(v, coarse)
    return value + err


def _vector_sub(u, v):
    if isinstance(u, FiniteVector):
        return FiniteVector(u.coords - v.coords, u.norm_tag)
    return lin_comb([1.0, -1.0], [u, v])


def commutation_defect(generators: Sequence, probes: Sequence, tol: float = 1e-9) -> float:
    """Max over generator pairs and probes of ``||T_i T_j x - T_j T_i x||``."""
    if not probes:
        raise ValueError("at least one probe vector is required")
    worst = 0.0
    for i in range(len(generators)):
        for j in range(i + 1, len(generators)):
            for x in probes:
                a = generators[i].apply(generators[j].apply(x))
                b = generators[j].apply(generators[i].apply(x))
                worst = max(worst, _vector_norm(_vector_sub(a, b), tol))
    return worst


@dataclass(frozen=True)
class PowerBoundEstimate:
    sup_estimate: float
    power_bounded_flag: bool
    probe_infs: tuple[float, ...]
    horizon: int


def power_bound_estimate(op, horizon: int, probes: Sequence = (),
                         tol: float = 1e-9) -> PowerBoundEstimate:
    """Estimate ``sup_{n<=horizon} ||T^n||`` and per-probe ``inf ||T^n x||``.

    Diagonal operators are exact isometries, so the sup is exactly 1 and
    each probe inf equals ``||x||``.  For matrices the flag compares the
    first and second half of the norm curve; still-growing curves are
    flagged not power-bounded (a heuristic, the spectral certification
    in the ergodic module is the certified test).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if isinstance(op, DiagonalOperator):
        infs = tuple(sup_norm(x, tol).value for x in probes)
        return PowerBoundEstimate(1.0, True, infs, horizon)

    norms = np.empty(horizon)
    p = op.entries.copy()
    probe_vals = [np.empty(horizon) for _ in probes]
    for n in range(horizon):
        if n:
            p = op.entries @ p
        norms[n] = matrix_norm(p, op.norm_tag)
        for i, x in enumerate(probes):
            probe_vals[i][n] = FiniteVector(p @ x.coords, x.norm_tag).norm()
    half = horizon // 2
    if half >= 1:
        flag = bool(norms[half:].max() <= norms[:half].max() * (1 + 1e-9) + 1e-12)
    else:
        flag = bool(norms.max() <= op.operator_norm() * (1 + 1e-9))
    infs = tuple(float(vals.min()) for vals in probe_vals)
    return PowerBoundEstimate(float(norms.max()), flag, infs, horizon)


@dataclass(frozen=True)
class CommutingFamily:
    """Ordered commuting generators with a semigroup norm bound.

    ``bound_M`` estimates ``sup_{S in semigroup} ||S|| + 1``; for
    diagonal isometries this is exactly 2.
    """

    generators: tuple
    bound_M: float
    commutation_defect_value: float

    def __post_init__(self):
        if self.bound_M < 1:
            raise ValueError("bound_M must be >= 1")


def make_commuting_family(generators: Sequence, probes: Sequence = (),
                          tol: float = 1e-8, horizon: int = 64) -> CommutingFamily:
    """Validate commutation on probes and estimate the semigroup bound."""
    gens = tuple(generators)
    if not gens:
        raise ValueError("family needs at least one generator")
    kinds = {type(g) for g in gens}
    if len(kinds) > 1:
        raise SpaceTagError("generators must be all diagonal or all matrix")
    if isinstance(gens[0], DiagonalOperator):
        # multiplication operators commute coordinatewise by construction
        defect = 0.0
        bound = 2.0
    else:
        if not probes:
            dim = gens[0].dim
            probes = [FiniteVector(np.eye(dim, dtype=np.complex128)[:, i], gens[0].norm_tag)
                      for i in range(dim)]
        defect = commutation_defect(gens, probes, tol)
        # submultiplicative bound over all words from per-generator power sups
        bound = 1.0
        for g in gens:
            bound *= power_bound_estimate(g, horizon).sup_estimate
        bound += 1.0
    if defect > tol:
        raise ValueError(f"commutation defect {defect:g} exceeds tolerance {tol:g}")
    return CommutingFamily(gens, float(bound), float(defect))


# ---------------------------------------------------------------------------
# Plain-text matrix file format: optional '#' comments, a header line with N,
# then N rows of N whitespace-separated "re,im" pairs.

def write_matrix_file(path, op: MatrixOperator) -> None:
    lines = [str(op.dim)]
    for row in op.entries:
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix_file(path, norm_tag: str = "euclidean") -> MatrixOperator:
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    try:
        n = int(rows[0])
    except ValueError as exc:
        raise ValueError(f"{path}: header must be the dimension N") from exc
    if len(rows) != n + 1:
        raise ValueError(f"{path}: expected {n} rows after the header, got {len(rows) - 1}")
    data = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(rows[1:]):
        parts = row.split()
        if len(parts) != n:
            raise ValueError(f"{path}: row {i + 1} has {len(parts)} entries, expected {n}")
        for j, tok in enumerate(parts):
            re_s, _, im_s = tok.partition(",")
            if not _:
                raise ValueError(f"{path}: entry {tok!r} is not a re,im pair")
            data[i, j] = complex(float(re_s), float(im_s))
    return MatrixOperator(data, norm_tag)
