"""Counterexample operators, the c0-witness ladder extractor, and the
unconditional-partial-sum ladder test.

The witness extractor executes, at a finite exponent horizon, the
inductive construction that turns a non-compact orbit with compact
difference orbits into a ladder of vectors whose partial sums are
unconditionally bounded yet bounded away from zero; such a ladder is a
quantitative c0-containment certificate.  The construction is honest
about finiteness: when no exponent pair within the horizon meets the
current smallness threshold the extractor stops and reports the partial
ladder instead of relaxing the threshold.

Selection rules (all deterministic):
  * the separated exponent family is the greedy certified separated
    subset of the orbit, scanned from exponent 1 upward;
  * ``delta`` is the certified minimal pairwise orbit separation over
    that subset (the quantity bounding the ladder norms from below);
  * at step m+1 candidate pairs are scanned by increasing exponent
    difference, and a pair is accepted only if its action on every
    logged product-difference vector is certified below
    ``1 / (2^{m+1} M)``; logged products run over all subsets of the
    previously chosen pairs, including the empty product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (CertificateError, HorizonExhaustedError,
                     NotApplicableError, UnreachableToleranceError)
from .jdlg import diagonal_jdlg
from .operators import (DiagonalOperator, harmonic_symbol, power_apply,
                        root_perturbed_symbol, constant_symbol)
from .orbits import (compactness_diagnostic, difference_compactness_diagnostic,
                     orbit)
from .seqspace import (SeqVector, basis_vector, constant_one, from_prefix,
                       lin_comb, norm_exceeds, sup_norm)

__all__ = [
    "SymbolFamily",
    "WitnessAudit",
    "BpReport",
    "limit_one_operator",
    "root_limit_operator",
    "one_minus_symbol_vector",
    "c0_witness",
    "bp_test",
    "operator_from_spec",
    "probe_from_spec",
    "write_certificate",
    "verify_certificate",
    "CERTIFICATE_FORMAT",
]

CERTIFICATE_FORMAT = "c0-ladder-certificate"
CERTIFICATE_VERSION = 1
_PREFIX_CHECK_LEN = 32
_MAX_PRODUCT_LOG = 4096


@dataclass(frozen=True)
class SymbolFamily:
    """Catalogued unimodular symbol family.

    ``harmonic``: angles pi / k**rate, limit 1.
    ``root_perturbed``: angles 2 pi / m + pi / k**rate, limit the m-th
    root of unity.  Both families never attain their limit value.
    """

    kind: str
    m: int = 1
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "root_perturbed", "custom"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.m < 1:
            raise ValueError("root order m must be >= 1")
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def build_operator(self, space_tag: str = "c") -> DiagonalOperator:
        if self.kind == "harmonic":
            return DiagonalOperator(harmonic_symbol(self.rate), space_tag)
        if self.kind == "root_perturbed":
            return DiagonalOperator(root_perturbed_symbol(self.m, self.rate), space_tag)
        raise ValueError("custom families carry no constructor")


def limit_one_operator(family: SymbolFamily) -> DiagonalOperator:
    """Invertible isometry whose symbol tends to 1 without attaining it.

    Requires a family with root order 1.  The returned operator has no
    fixed coordinates, and every difference ``(I - T^n) x`` has limit
    coordinate 0, so difference orbits live in c0.
    """
    if family.m != 1:
        raise ValueError("this constructor needs m = 1; use root_limit_operator for m >= 2")
    if family.kind == "custom":
        raise ValueError("custom families are not catalogued")
    op = DiagonalOperator(harmonic_symbol(family.rate), "c")
    sym = op.symbol
    assert sym.limit_value == 1 and sym.unit_fixed_indices == ()
    # spot isometry check on a basis direction
    e1 = basis_vector(1, "c0")
    val, err = sup_norm(op.apply(e1), 1e-12)
    assert abs(val - 1.0) <= err + 1e-12
    return op


def root_limit_operator(family: SymbolFamily) -> DiagonalOperator:
    """Isometry whose symbol tends to a primitive root of unity of order
    m >= 2.

    ``(I - T^m) x`` has limit coordinate 0 while ``1 - (a_k)`` keeps the
    nonzero limit ``1 - xi``, which is the source of the compactness
    asymmetry between rg(I - T^m) and rg(I - T).
    """
    if family.m < 2:
        raise ValueError("this constructor needs m >= 2; use limit_one_operator for m = 1")
    if family.kind == "custom":
        raise ValueError("custom families are not catalogued")
    op = DiagonalOperator(root_perturbed_symbol(family.m, family.rate), "c")
    xi = op.symbol.limit_value
    assert abs(xi ** family.m - 1) < 1e-12 and abs(xi - 1) > 1e-9
    return op


def one_minus_symbol_vector(op: DiagonalOperator) -> SeqVector:
    """The vector ``1 - (a_k)`` = (I - T) applied to the constant-one
    sequence; its limit coordinate is ``1 - a_limit``."""
    one = constant_one("c")
    return lin_comb([1.0, -1.0], [one, op.apply(one)])


# ---------------------------------------------------------------------------
# Witness extraction

@dataclass(frozen=True)
class WitnessAudit:
    """Record of the witness construction.

    ``delta`` is the certified orbit separation, ``bound_m`` the
    semigroup bound sup ||S|| + 1, ``ladder`` the extracted vectors with
    their certified norms, ``selection_log`` the chosen exponent pairs
    (s, t), and ``subset_sums`` the sampled partial-sum statistics with
    the bound ``1 + 2 M ||x||`` they are audited against.
    """

    delta: float
    bound_m: float
    probe_norm: float
    ladder: tuple[SeqVector, ...]
    ladder_norms: tuple[float, ...]
    selection_log: tuple[tuple[int, int], ...]
    thresholds: tuple[float, ...]
    subset_sums: tuple[dict, ...]
    subset_bound: float
    subset_bound_ok: bool
    norms_ok: bool
    requested_count: int
    achieved_count: int
    horizon: int
    exhausted: bool
    notes: str = ""

    def to_json_dict(self) -> dict:
        return {
            "delta": self.delta,
            "bound_m": self.bound_m,
            "probe_norm": self.probe_norm,
            "ladder_norms": list(self.ladder_norms),
            "selection_log": [list(p) for p in self.selection_log],
            "thresholds": list(self.thresholds),
            "subset_sums": [dict(s) for s in self.subset_sums],
            "subset_bound": self.subset_bound,
            "subset_bound_ok": self.subset_bound_ok,
            "norms_ok": self.norms_ok,
            "requested_count": self.requested_count,
            "achieved_count": self.achieved_count,
            "horizon": self.horizon,
            "exhausted": self.exhausted,
            "notes": self.notes,
        }


def _ladder_vector(op: DiagonalOperator, x: SeqVector, d: int) -> SeqVector:
    # T_m^{-1} P (T_m x - S_m x) with P acting as the identity on the
    # differences reduces, for the isometric diagonal case, to x - T^d x
    return lin_comb([1.0, -1.0], [x, power_apply(op, d, x)])


def _certified_below(v: SeqVector, threshold: float, tol: float) -> bool:
    """Certified ``||v|| <= threshold`` (conservative on failure)."""
    try:
        if norm_exceeds(v, threshold, tol):
            return False
        val, err = sup_norm(v, tol)
        return val + err <= threshold
    except UnreachableToleranceError:
        return False


def c0_witness(op: DiagonalOperator, x: SeqVector, count: int, horizon: int,
               tol: float = 1e-6, *, subset_samples: int = 200, seed: int = 2026,
               diag_horizons: Sequence[int] = (100, 200, 400),
               family_size: int | None = None,
               separation_eps: float | None = None) -> WitnessAudit:
    """Extract a c0-witness ladder from a non-compact orbit.

    Preconditions (checked): the splitting projection acts as the
    identity on the almost periodic part for this symbol family, the
    difference-orbit diagnostic saturates, and the orbit diagnostic of
    ``x`` grows at the separation scale (default: the probe norm;
    override ``separation_eps`` for probes whose orbit separates at a
    finer scale).  Violations raise NotApplicableError.

    The inductive selection scans exponent pairs by increasing
    difference and accepts a pair only when its action on every logged
    subset product is certified below ``1 / (2^{m+1} M)``.  If the scan
    exhausts the horizon before ``count`` entries are built, a
    HorizonExhaustedError carrying the partial audit is raised.
    """
    if count < 1 or horizon < 2:
        raise ValueError("need count >= 1 and horizon >= 2")
    jrep = diagonal_jdlg(op, cross_check=False)
    if not jrep.p_is_identity_on_aap:
        raise NotApplicableError("splitting projection is not certified as the "
                                 "identity on the almost periodic part")

    x_norm, x_err = sup_norm(x, min(tol, 1e-8))
    if x_norm + x_err == 0.0:
        raise NotApplicableError("zero probe vector")
    eps_orbit = separation_eps if separation_eps is not None else x_norm
    if eps_orbit <= 0:
        raise ValueError("separation_eps must be positive")

    orbit_rep = compactness_diagnostic(op, x, [eps_orbit], diag_horizons,
                                       tol=min(tol, eps_orbit / 100, 1e-8))
    if orbit_rep.verdict != "growing":
        raise NotApplicableError(
            f"orbit diagnostic verdict is {orbit_rep.verdict!r}; the witness "
            "construction needs a certified non-compact orbit")

    diff_probe = lin_comb([1.0, -1.0], [x, op.apply(x)])
    dn, _ = sup_norm(diff_probe, min(tol, 1e-8))
    if dn > 0:
        eps_diff = 1.25 * dn
        diff_rep = difference_compactness_diagnostic(
            op, x, [eps_diff], diag_horizons, tol=min(tol, eps_diff / 100, 1e-8))
        if diff_rep.verdict != "saturating":
            raise NotApplicableError(
                f"difference-orbit diagnostic verdict is {diff_rep.verdict!r}; "
                "compact differences are a precondition")

    bound_m = op.operator_norm() + 1.0  # isometry: sup over the semigroup is 1

    # separated exponent family: greedy certified eps_orbit-separated subset
    cap = family_size or max(4 * count, 16)
    cloud = orbit(op, x, horizon, tol=min(tol, 1e-8))
    members: list[int] = []
    for n_exp in cloud.labels:
        if all(cloud.separated(n_exp, m, eps_orbit) for m in members):
            members.append(n_exp)
            if len(members) >= cap:
                break
    if len(members) < 2:
        raise NotApplicableError("fewer than two separated orbit points found")
    delta = math.inf
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            val, err = cloud.distance(members[i], members[j])
            delta = min(delta, val - err)
    delta = max(delta, 0.0)

    subset_bound = 1.0 + 2.0 * bound_m * x_norm
    ladder: list[SeqVector] = []
    norms: list[float] = []
    log: list[tuple[int, int]] = []
    thresholds: list[float] = []
    # logged product differences as exponent pairs (A, B): (T^A - T^B) x
    products: set[tuple[int, int]] = {(0, 0)}
    used_ds: set[int] = set()
    exhausted = False

    for step in range(count):
        tau = 1.0 / (2.0 ** (step + 1) * bound_m)
        thresholds.append(tau)
        prod_vecs = [
            lin_comb([1.0, -1.0],
                     [power_apply(op, a_exp, x), power_apply(op, b_exp, x)])
            for (a_exp, b_exp) in sorted(products) if a_exp != b_exp
        ]
        found = None
        for d in range(1, horizon):
            if d in used_ds:
                continue
            t_exp, s_exp = 1, 1 + d
            if s_exp > horizon:
                break
            if not cloud.separated(s_exp, t_exp, eps_orbit):
                continue
            ok = True
            for prod_vec in prod_vecs:
                test_vec = lin_comb([1.0, -1.0],
                                    [power_apply(op, s_exp, prod_vec),
                                     power_apply(op, t_exp, prod_vec)])
                if not _certified_below(test_vec, tau, min(tol, tau / 8)):
                    ok = False
                    break
            if ok:
                found = (s_exp, t_exp)
                break
        if found is None:
            exhausted = True
            thresholds.pop()
            break
        s_exp, t_exp = found
        d = s_exp - t_exp
        used_ds.add(d)
        log.append((s_exp, t_exp))
        entry = _ladder_vector(op, x, d)
        val, err = sup_norm(entry, min(tol, 1e-8))
        ladder.append(entry)
        norms.append(val)
        if len(products) * 2 > _MAX_PRODUCT_LOG:
            raise ValueError("product log would exceed its cap; lower count")
        products |= {(a_exp + s_exp, b_exp + t_exp) for (a_exp, b_exp) in products}

    achieved = len(ladder)
    norms_ok = all(v >= delta / bound_m - tol for v in norms)

    # sampled unconditional partial sums
    rng = np.random.default_rng(seed)
    sums: list[dict] = []
    bound_ok = True
    if achieved >= 1:
        for _ in range(subset_samples):
            size = int(rng.integers(1, achieved + 1))
            subset = sorted(rng.choice(achieved, size=size, replace=False).tolist())
            total = lin_comb([1.0] * len(subset), [ladder[j] for j in subset])
            val, err = sup_norm(total, min(tol, 1e-8))
            sums.append({"subset": subset, "value": val + err})
            if val + err > subset_bound + tol:
                bound_ok = False

    notes = ("series of ladder entries cannot converge: norms are bounded "
             f"below by delta/M = {delta / bound_m:g}") if achieved else ""
    audit = WitnessAudit(
        delta=float(delta), bound_m=float(bound_m), probe_norm=float(x_norm),
        ladder=tuple(ladder), ladder_norms=tuple(norms),
        selection_log=tuple(log), thresholds=tuple(thresholds),
        subset_sums=tuple(sums), subset_bound=float(subset_bound),
        subset_bound_ok=bound_ok, norms_ok=norms_ok,
        requested_count=count, achieved_count=achieved, horizon=horizon,
        exhausted=exhausted, notes=notes,
    )
    if exhausted:
        raise HorizonExhaustedError(
            f"pair selection exhausted the exponent horizon {horizon} after "
            f"{achieved} of {count} ladder entries (next threshold "
            f"{1.0 / (2.0 ** (achieved + 1) * bound_m):g})", audit=audit)
    return audit


# ---------------------------------------------------------------------------
# Ladder statistics

@dataclass(frozen=True)
class BpReport:
    """Sampled unconditional-boundedness statistics of a vector series."""

    unconditional_bound: float
    cauchy_defect: float
    first_partial: float
    ladder_detected: bool
    samples: int

    def to_json_dict(self) -> dict:
        return {
            "unconditional_bound": self.unconditional_bound,
            "cauchy_defect": self.cauchy_defect,
            "first_partial": self.first_partial,
            "ladder_detected": self.ladder_detected,
            "samples": self.samples,
        }


def bp_test(vectors: Sequence[SeqVector], subset_samples: int = 200,
            tol: float = 1e-6, seed: int = 2026) -> BpReport:
    """Detect a c0-style ladder by sampling finite partial sums.

    ``unconditional_bound`` is the largest sampled subset-sum norm,
    ``cauchy_defect`` the smallest single-entry norm.  A ladder is
    detected when the bound stays below 10x the first partial sum while
    the defect stays above ``tol`` (bounded sums, nonconvergent series).
    """
    if len(vectors) < 2:
        raise ValueError("bp_test needs at least two vectors")
    if subset_samples < 100:
        raise ValueError("subset_samples must be >= 100")
    rng = np.random.default_rng(seed)
    n = len(vectors)
    first_val, first_err = sup_norm(vectors[0], min(tol, 1e-8))
    first_partial = first_val + first_err
    worst = 0.0
    defect = math.inf
    for v in vectors:
        val, err = sup_norm(v, min(tol, 1e-8))
        defect = min(defect, val - err)
    for _ in range(subset_samples):
        size = int(rng.integers(1, n + 1))
        subset = sorted(rng.choice(n, size=size, replace=False).tolist())
        total = lin_comb([1.0] * len(subset), [vectors[j] for j in subset])
        val, err = sup_norm(total, min(tol, 1e-8))
        worst = max(worst, val + err)
    detected = bool(worst < 10.0 * first_partial and defect > tol)
    return BpReport(float(worst), float(defect), float(first_partial),
                    detected, subset_samples)


# ---------------------------------------------------------------------------
# Certificates: versioned header, reconstruction spec, prefix integrity data

def operator_from_spec(spec: dict) -> DiagonalOperator:
    kind = spec.get("kind")
    space = spec.get("space", "c")
    if kind == "harmonic":
        return DiagonalOperator(harmonic_symbol(float(spec.get("rate", 1.0))), space)
    if kind == "root_perturbed":
        return DiagonalOperator(
            root_perturbed_symbol(int(spec["m"]), float(spec.get("rate", 1.0))), space)
    if kind == "constant":
        return DiagonalOperator(constant_symbol(float(spec["angle"])), space)
    raise CertificateError(f"unknown operator kind {kind!r}")


def probe_from_spec(spec: dict) -> SeqVector:
    kind = spec.get("kind")
    if kind == "one":
        return constant_one("c")
    if kind == "basis":
        return basis_vector(int(spec["index"]))
    if kind == "prefix":
        values = [complex(re, im) for re, im in spec["values"]]
        lim = complex(*spec.get("limit", [0.0, 0.0]))
        return from_prefix(values, lim)
    raise CertificateError(f"unknown probe kind {kind!r}")


def write_certificate(path, audit: WitnessAudit, operator_spec: dict,
                      probe_spec: dict) -> None:
    """Write a compact re-verifiable certificate of a witness ladder."""
    op = operator_from_spec(operator_spec)
    x = probe_from_spec(probe_spec)
    entries = []
    for (s_exp, t_exp) in audit.selection_log:
        v = _ladder_vector(op, x, s_exp - t_exp)
        pre = v.prefix(_PREFIX_CHECK_LEN)
        entries.append({
            "prefix": [[float(z.real), float(z.imag)] for z in pre],
            "limit": [float(v.limit.real), float(v.limit.imag)],
            "tail": {"constant": v.tail.constant, "exponent": v.tail.exponent},
        })
    doc = {
        "format": CERTIFICATE_FORMAT,
        "version": CERTIFICATE_VERSION,
        "operator": operator_spec,
        "probe": probe_spec,
        "delta": audit.delta,
        "bound_m": audit.bound_m,
        "probe_norm": audit.probe_norm,
        "subset_bound": audit.subset_bound,
        "pairs": [list(p) for p in audit.selection_log],
        "ladder_norms": list(audit.ladder_norms),
        "prefix_check": {"length": _PREFIX_CHECK_LEN, "entries": entries},
        "exhausted": audit.exhausted,
        "requested_count": audit.requested_count,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def verify_certificate(path, subset_samples: int = 200, tol: float = 1e-6,
                       seed: int = 2026) -> dict:
    """Rebuild the ladder from a certificate and re-run the ladder test.

    Checks the stored coordinate prefixes against the reconstruction
    before trusting the pairs; returns a report dict with the integrity
    flag and the BpReport (ladders of length < 2 skip the test).
    """
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != CERTIFICATE_FORMAT:
        raise CertificateError(f"not a {CERTIFICATE_FORMAT} file")
    if int(doc.get("version", -1)) != CERTIFICATE_VERSION:
        raise CertificateError(f"unsupported certificate version {doc.get('version')}")
    op = operator_from_spec(doc["operator"])
    x = probe_from_spec(doc["probe"])
    pairs = [tuple(int(v) for v in p) for p in doc["pairs"]]
    ladder = [_ladder_vector(op, x, s - t) for (s, t) in pairs]
    if len(doc["prefix_check"]["entries"]) != len(pairs):
        raise CertificateError("prefix data does not cover every ladder entry")
    plen = int(doc["prefix_check"]["length"])
    prefix_ok = True
    for v, stored in zip(ladder, doc["prefix_check"]["entries"]):
        got = v.prefix(plen)
        want = np.array([complex(re, im) for re, im in stored["prefix"]])
        lim = complex(*stored["limit"])
        if (got.size != want.size or np.max(np.abs(got - want)) > 1e-12
                or abs(v.limit - lim) > 1e-12):
            prefix_ok = False
    if not prefix_ok:
        raise CertificateError("certificate prefixes do not match the reconstruction")
    report: dict = {"prefix_ok": prefix_ok, "pairs": len(pairs)}
    if len(ladder) >= 2:
        bp = bp_test(ladder, subset_samples=subset_samples, tol=tol, seed=seed)
        report["bp"] = bp.to_json_dict()
        report["ladder_detected"] = bp.ladder_detected
    else:
        norms = [sup_norm(v, 1e-8).value for v in ladder]
        report["ladder_norms"] = norms
        report["ladder_detected"] = False
        report["note"] = "ladder too short for the partial-sum test"
    return report
