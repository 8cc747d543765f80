"""Certified vectors in the sequence spaces c and c0, plus finite vectors.

A vector in c is represented by a coordinate oracle (vectorised over the
index), its limit, and a tail certificate bounding |x_k - limit| by a
closed-form power law.  Sup-norms are computed to a guaranteed tolerance
by scanning an explicit head of the sequence and bounding the tail with
the certificate; every norm result carries the error bound actually
achieved rather than pretending exactness.

Coordinate oracles must be pure and deterministic: orbit diagnostics
cache distances keyed by labels and rely on re-evaluation giving
identical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import SpaceTagError, UnreachableToleranceError

__all__ = [
    "TailCertificate",
    "SeqVector",
    "FiniteVector",
    "NormResult",
    "sup_norm",
    "norm_exceeds",
    "lin_comb",
    "distance",
    "constant_one",
    "zero_vector",
    "basis_vector",
    "from_prefix",
    "validate_certificate",
]

# Hard cap on coordinate evaluations in a single certified norm; beyond
# this the certificate is considered too weak for the requested tolerance.
MAX_SUP_TERMS = 1 << 27

_FIRST_BLOCK = 64
_MAX_BLOCK = 1 << 20


def _require_finite(z: complex, what: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{what} must be finite, got {z!r}")
    return z


@dataclass(frozen=True)
class TailCertificate:
    """Closed-form tail bound ``bound(K) = constant * K**(-exponent)``.

    The certificate promises ``|x_k - limit| <= bound(K)`` for every
    ``k > K``.  A positive exponent makes every tolerance reachable; a
    nonpositive exponent is allowed at construction (it can still be a
    true bound) but norm computations will refuse tolerances below the
    constant.
    """

    constant: float
    exponent: float

    def __post_init__(self):
        if not math.isfinite(self.constant) or self.constant < 0:
            raise ValueError(f"certificate constant must be finite and >= 0, got {self.constant}")
        if not math.isfinite(self.exponent):
            raise ValueError("certificate exponent must be finite")

    def bound(self, k):
        """Tail bound after index ``k`` (scalar or array)."""
        if self.constant == 0.0:
            return np.zeros_like(np.asarray(k, dtype=float)) if np.ndim(k) else 0.0
        return self.constant * np.asarray(k, dtype=float) ** (-self.exponent)

    def first_index_below(self, tol: float) -> int | None:
        """Smallest K with bound(K) <= tol, or None if unreachable."""
        if self.constant <= tol:
            return 1
        if self.exponent <= 0:
            return None
        k = math.ceil((self.constant / tol) ** (1.0 / self.exponent))
        return max(1, k)

    @staticmethod
    def zero() -> "TailCertificate":
        return TailCertificate(0.0, 1.0)

    @staticmethod
    def combine(parts: Sequence[tuple[float, "TailCertificate"]]) -> "TailCertificate":
        """Triangle-inequality combination of weighted certificates.

        ``bound(K) = sum_i w_i * const_i * K**(-e)`` with ``e`` the
        weakest (smallest) exponent among the terms that actually
        contribute; terms with ``w_i * const_i == 0`` are ignored so a
        zero vector does not degrade the exponent.
        """
        consts = [w * c.constant for w, c in parts]
        exps = [c.exponent for (w, c), wc in zip(parts, consts) if wc > 0.0]
        total = float(sum(c for c in consts))
        if not exps or total == 0.0:
            return TailCertificate.zero()
        return TailCertificate(total, min(exps))


@dataclass(frozen=True)
class SeqVector:
    """Element of c or c0 given by a vectorised coordinate oracle.

    ``coord`` maps an int64 array of indices (all >= 1) to a complex128
    array of the same shape.  ``space_tag`` is ``"c"`` or ``"c0"``; the
    latter forces ``limit == 0``.
    """

    coord: Callable[[np.ndarray], np.ndarray]
    limit: complex
    tail: TailCertificate
    space_tag: str = "c"

    def __post_init__(self):
        if self.space_tag not in ("c", "c0"):
            raise SpaceTagError(f"unknown space tag {self.space_tag!r}")
        lim = _require_finite(self.limit, "limit")
        object.__setattr__(self, "limit", lim)
        if self.space_tag == "c0" and lim != 0:
            raise SpaceTagError("c0 vectors must have limit 0")

    def coords(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=np.int64)
        if ks.size and ks.min() < 1:
            raise IndexError("sequence indices start at 1")
        return np.asarray(self.coord(ks), dtype=np.complex128)

    def coord_scalar(self, k: int) -> complex:
        return complex(self.coords(np.array([k]))[0])

    def prefix(self, n: int) -> np.ndarray:
        """First ``n`` coordinates as a complex array."""
        return self.coords(np.arange(1, n + 1))

    def in_c0(self) -> bool:
        """Whether the vector lies in c0 (zero limit), whatever its tag."""
        return self.limit == 0

    def as_c0(self) -> "SeqVector":
        if self.limit != 0:
            raise SpaceTagError("cannot retag a vector with nonzero limit as c0")
        return SeqVector(self.coord, 0.0, self.tail, "c0")


class NormResult(NamedTuple):
    value: float
    error_bound: float


def _merged_tags(tags: Sequence[str]) -> str:
    tagset = set(tags)
    if len(tagset) > 1:
        raise SpaceTagError(f"mixed space tags {sorted(tagset)}")
    return tags[0]


def sup_norm(v: SeqVector, tol: float, *, max_terms: int = MAX_SUP_TERMS) -> NormResult:
    """Certified sup-norm of a sequence vector.

    Scans coordinates in geometrically growing blocks.  After scanning
    up to index K the norm is bracketed by

        max(head_max, |limit|)  <=  ||v||  <=  max(head_max, |limit| + bound(K))

    and the scan stops as soon as the bracket width is <= tol (which
    includes the exact case head_max >= |limit| + bound(K)).  The
    returned ``value`` is the lower bracket end, so
    ``|value - ||v||| <= error_bound <= tol``.

    Raises UnreachableToleranceError when the certificate cannot close
    the bracket within ``max_terms`` coordinate evaluations.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lim = abs(v.limit)
    head_max = 0.0
    k = 1
    block = _FIRST_BLOCK
    while True:
        hi = min(k + block - 1, max_terms)
        ks = np.arange(k, hi + 1, dtype=np.int64)
        vals = np.abs(v.coords(ks))
        if vals.size:
            head_max = max(head_max, float(vals.max()))
        b = float(v.tail.bound(hi))
        lower = max(head_max, lim)
        upper = max(head_max, lim + b)
        if upper - lower <= tol:
            return NormResult(lower, upper - lower)
        if hi >= max_terms:
            raise UnreachableToleranceError(
                f"certificate (constant={v.tail.constant:g}, exponent={v.tail.exponent:g}) "
                f"cannot certify tolerance {tol:g} within {max_terms} coordinates"
            )
        k = hi + 1
        block = min(block * 2, _MAX_BLOCK)


def norm_exceeds(v: SeqVector, threshold: float, tol: float,
                 *, max_terms: int = MAX_SUP_TERMS) -> bool:
    """Certified decision ``||v|| > threshold``.

    Equivalent to ``value - error_bound > threshold`` for a sup_norm at
    tolerance ``tol``, but exits as soon as either side is certain: a
    head coordinate above the threshold proves exceedance immediately,
    and an upper bracket at or below it proves the opposite.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lim = abs(v.limit)
    if lim > threshold:
        return True
    head_max = 0.0
    k = 1
    block = _FIRST_BLOCK
    while True:
        hi = min(k + block - 1, max_terms)
        ks = np.arange(k, hi + 1, dtype=np.int64)
        vals = np.abs(v.coords(ks))
        if vals.size:
            head_max = max(head_max, float(vals.max()))
        if head_max > threshold:
            return True
        b = float(v.tail.bound(hi))
        upper = max(head_max, lim + b)
        if upper <= threshold:
            return False
        lower = max(head_max, lim)
        if upper - lower <= tol:
            # bracket is tight but still straddles: lower <= threshold here,
            # so the conservative (sound) answer is "not exceeded"
            return False
        if hi >= max_terms:
            raise UnreachableToleranceError(
                f"cannot decide ||v|| > {threshold:g} at tolerance {tol:g} "
                f"within {max_terms} coordinates"
            )
        k = hi + 1
        block = min(block * 2, _MAX_BLOCK)


def lin_comb(coeffs: Sequence[complex], vectors: Sequence[SeqVector]) -> SeqVector:
    """Pointwise linear combination ``sum_i coeffs[i] * vectors[i]``.

    The tail certificate is the triangle-inequality combination of the
    input certificates with the weakest contributing exponent.
    """
    if not coeffs or len(coeffs) != len(vectors):
        raise ValueError("coeffs and vectors must be nonempty lists of equal length")
    cs = [_require_finite(c, "coefficient") for c in coeffs]
    tag = _merged_tags([v.space_tag for v in vectors])
    vs = list(vectors)

    def coord(ks, _cs=cs, _vs=vs):
        out = np.zeros(np.shape(ks), dtype=np.complex128)
        for c, v in zip(_cs, _vs):
            if c != 0:
                out = out + c * v.coords(ks)
        return out

    limit = sum(c * v.limit for c, v in zip(cs, vs))
    tail = TailCertificate.combine([(abs(c), v.tail) for c, v in zip(cs, vs)])
    return SeqVector(coord, limit, tail, tag)


def distance(u: SeqVector, v: SeqVector, tol: float) -> NormResult:
    """Certified sup-norm distance ``||u - v||``."""
    return sup_norm(lin_comb([1.0, -1.0], [u, v]), tol)


@dataclass(frozen=True)
class FiniteVector:
    """Finite coordinate vector for the matrix model.

    ``norm_tag`` selects the norm the ambient space carries: ``"sup"``
    for the max-modulus norm, ``"euclidean"`` for the 2-norm.
    """

    coords: np.ndarray
    norm_tag: str = "euclidean"

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=np.complex128)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("FiniteVector needs a 1-d array of length >= 1")
        if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
            raise ValueError("FiniteVector coordinates must be finite")
        if self.norm_tag not in ("sup", "euclidean"):
            raise ValueError(f"unknown norm tag {self.norm_tag!r}")
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return self.coords.size

    def norm(self) -> float:
        if self.norm_tag == "sup":
            return float(np.max(np.abs(self.coords)))
        return float(np.linalg.norm(self.coords))


# ---------------------------------------------------------------------------
# Constructors

def constant_one(space_tag: str = "c") -> SeqVector:
    """The constant-one sequence (limit 1, exact certificate)."""
    return SeqVector(lambda ks: np.ones(np.shape(ks), dtype=np.complex128),
                     1.0, TailCertificate.zero(), space_tag)


def zero_vector(space_tag: str = "c") -> SeqVector:
    return SeqVector(lambda ks: np.zeros(np.shape(ks), dtype=np.complex128),
                     0.0, TailCertificate.zero(), space_tag)


def basis_vector(index: int, space_tag: str = "c0") -> SeqVector:
    """Standard basis vector e_index (a c0 element)."""
    if index < 1:
        raise IndexError("basis index starts at 1")

    def coord(ks, _i=index):
        return np.where(np.asarray(ks) == _i, 1.0 + 0.0j, 0.0 + 0.0j)

    return SeqVector(coord, 0.0, TailCertificate.zero(), space_tag)


def from_prefix(prefix: Sequence[complex], limit: complex,
                tail: TailCertificate | None = None, space_tag: str = "c") -> SeqVector:
    """Vector equal to ``prefix`` on its first indices and ``limit`` beyond.

    With the default exact certificate this is the generic way to build
    eventually-constant test vectors.
    """
    arr = np.asarray(list(prefix), dtype=np.complex128)
    lim = complex(limit)

    def coord(ks, _arr=arr, _lim=lim):
        ks = np.asarray(ks, dtype=np.int64)
        out = np.full(ks.shape, _lim, dtype=np.complex128)
        mask = ks <= _arr.size
        out[mask] = _arr[ks[mask] - 1]
        return out

    if tail is None:
        tail = TailCertificate.zero()
    return SeqVector(coord, lim, tail, space_tag)


def validate_certificate(v: SeqVector, after: int = 16, samples: int = 10_000,
                         rng: np.random.Generator | None = None) -> float:
    """Sampled soundness check of a tail certificate.

    Draws ``samples`` indices k > ``after`` (log-uniformly up to 1e6)
    and returns the worst slack ``|x_k - limit| - bound(after)``; a
    sound certificate keeps this <= 0 up to rounding.
    """
    rng = rng or np.random.default_rng(0)
    ks = np.unique((10 ** rng.uniform(np.log10(after + 1), 6, size=samples)).astype(np.int64))
    ks = ks[ks > after]
    if ks.size == 0:
        return 0.0
    devs = np.abs(v.coords(ks) - v.limit)
    return float(np.max(devs - v.tail.bound(after)))
