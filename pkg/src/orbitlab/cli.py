"""Deterministic command-line front end.

Subcommands:
  demo               run a bundled scenario end-to-end and write its report
  run                execute a run described by an INI config file
  verify-certificate re-run the ladder test on a witness certificate

Reports are JSON with sorted keys; two runs with the same config and
seed are byte-identical.  Wall-clock timings go to a separate sidecar
file so they never perturb the main report.  Exit codes: 0 success,
1 assertion failure, 2 usage/config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import gallery, jdlg
from .ergodic import (diagonal_mean_ergodic_verdict, decomposition_check,
                      mean_ergodic_projection)
from .errors import (CertificateError, ConfigError, HorizonExhaustedError,
                     OrbitLabError)
from .gallery import SymbolFamily, c0_witness, limit_one_operator, \
    one_minus_symbol_vector, root_limit_operator
from .jdlg import half_sum, jdlg_split, ktz_check, spectrum_report
from .operators import (DiagonalOperator, MatrixOperator, constant_symbol,
                        harmonic_symbol, read_matrix_file, root_perturbed_symbol)
from .orbits import (cloud_diagnostic, compactness_diagnostic,
                     difference_compactness_diagnostic, orbit)
from .seqspace import (FiniteVector, basis_vector, constant_one, from_prefix,
                       lin_comb, sup_norm)

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2
EXIT_IO = 3


# ---------------------------------------------------------------------------
# Atomic writers

def _write_text_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".orbitlab-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path: str, doc: dict) -> None:
    _write_text_atomic(path, json.dumps(doc, indent=2, sort_keys=True,
                                        allow_nan=False) + "\n")


def write_csv_atomic(path: str, rows) -> None:
    lines = [",".join(str(c) for c in row) for row in rows]
    _write_text_atomic(path, "\n".join(lines) + "\n")


def _assertion(name: str, passed: bool, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _report(kind: str, name: str, seed: int, tol: float, config: dict,
            results: dict, assertions: list) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "name": name,
        "seed": seed,
        "tol": tol,
        "config": config,
        "results": results,
        "assertions": assertions,
    }


# ---------------------------------------------------------------------------
# Demos

def _demo_limit_one(seed: int, tol: float):
    op = limit_one_operator(SymbolFamily("harmonic"))
    one = constant_one("c")
    horizons = [100, 200, 400]
    grow = compactness_diagnostic(op, one, [1.0], horizons, tol=1e-8)
    probe = lin_comb([1.0, -1.0], [one, op.apply(one)])
    sat = cloud_diagnostic(orbit(op, probe, 400, tol=1e-8), [1.0], horizons)
    verdict = diagonal_mean_ergodic_verdict(op)
    assertions = [
        _assertion("orbit_of_one_grows", grow.verdict == "growing", grow.verdict),
        _assertion("orbit_packing_equals_horizon",
                   bool(np.array_equal(grow.packing[0], horizons)),
                   str(grow.packing[0].tolist())),
        _assertion("c0_probe_saturates", sat.verdict == "saturating", sat.verdict),
        _assertion("not_mean_ergodic_on_c", not verdict.is_mean_ergodic,
                   verdict.reason),
    ]
    results = {
        "orbit_diagnostic": grow.to_json_dict(),
        "c0_probe_diagnostic": sat.to_json_dict(),
        "mean_ergodic_verdict": {
            "is_mean_ergodic": verdict.is_mean_ergodic,
            "reason": verdict.reason,
            "evidence": verdict.evidence,
        },
    }
    tables = {"orbit": grow.csv_rows(), "c0_probe": sat.csv_rows()}
    return results, assertions, tables


def _demo_root_limit(seed: int, tol: float):
    op = root_limit_operator(SymbolFamily("root_perturbed", m=2))
    one = constant_one("c")
    horizons = [100, 200, 400]
    y_sq = lin_comb([1.0, -1.0], [one, op.power(2).apply(one)])
    ns, _ = sup_norm(y_sq, 1e-9)
    sat = cloud_diagnostic(orbit(op, y_sq, 400, tol=1e-8), [1.25 * ns], horizons)
    y = one_minus_symbol_vector(op)
    grow = cloud_diagnostic(orbit(op, y, 400, tol=1e-8), [1.0], horizons)
    assertions = [
        _assertion("difference_square_probe_saturates", sat.verdict == "saturating",
                   sat.verdict),
        _assertion("one_minus_symbol_grows", grow.verdict == "growing", grow.verdict),
        _assertion("one_minus_symbol_limit_coordinate",
                   abs(y.limit - 2.0) < 1e-12, repr(y.limit)),
    ]
    results = {
        "square_difference_diagnostic": sat.to_json_dict(),
        "one_minus_symbol_diagnostic": grow.to_json_dict(),
        "one_minus_symbol_limit": [y.limit.real, y.limit.imag],
    }
    tables = {"square_difference": sat.csv_rows(), "one_minus_symbol": grow.csv_rows()}
    return results, assertions, tables


def _demo_witness(seed: int, tol: float, out_dir: str):
    op = limit_one_operator(SymbolFamily("harmonic"))
    one = constant_one("c")
    count, horizon = 20, 10_000
    try:
        audit = c0_witness(op, one, count, horizon, tol=1e-6, seed=seed)
    except HorizonExhaustedError as exc:
        audit = exc.audit
    operator_spec = {"kind": "harmonic", "rate": 1.0, "space": "c"}
    probe_spec = {"kind": "one"}
    cert_path = os.path.join(out_dir, "witness.certificate.json")
    gallery.write_certificate(cert_path, audit, operator_spec, probe_spec)
    assertions = [
        _assertion("ladder_norms_at_least_delta_over_m", audit.norms_ok,
                   str(list(audit.ladder_norms))),
        _assertion("subset_sums_within_proof_bound", audit.subset_bound_ok,
                   f"bound {audit.subset_bound}"),
        _assertion("separation_delta_is_two", abs(audit.delta - 2.0) <= 1e-9,
                   f"delta {audit.delta}"),
        _assertion("semigroup_bound_is_two", abs(audit.bound_m - 2.0) <= 1e-12,
                   f"M {audit.bound_m}"),
        _assertion("certificate_written", os.path.exists(cert_path), cert_path),
    ]
    results = {
        "audit": audit.to_json_dict(),
        "certificate_path": os.path.basename(cert_path),
    }
    return results, assertions, {}


def _demo_ktz(seed: int, tol: float):
    op = MatrixOperator(np.diag([1.0, 0.9]).astype(np.complex128), "euclidean")
    horizon = 200
    rep = ktz_check(op, horizon=horizon, tol=1e-9)
    ns = np.arange(1, horizon + 1)
    expected = 0.1 * 0.9 ** ns
    max_dev = float(np.max(np.abs(rep.decay_curve - expected)))
    p = rep.limit_projection.entries
    proj_dev = float(np.max(np.abs(p - np.diag([1.0, 0.0]))))
    assertions = [
        _assertion("decay_curve_matches_closed_form", max_dev <= 1e-12, f"{max_dev:.3e}"),
        _assertion("limit_projection_is_diag_1_0", proj_dev <= 1e-9, f"{proj_dev:.3e}"),
        _assertion("ktz_passed", rep.passed, f"limit defect {rep.limit_defect:.3e}"),
    ]
    results = {
        "decay_final": float(rep.decay_curve[-1]),
        "limit_defect": rep.limit_defect,
        "passed": rep.passed,
    }
    rows = [("n", "decay", "expected")]
    rows += [(int(n), float(d), float(e)) for n, d, e in zip(ns, rep.decay_curve, expected)]
    return results, assertions, {"decay": rows}


def _demo_halfsum(seed: int, tol: float):
    rng = np.random.default_rng(seed)
    checked = 0
    worst_interior = 0.0
    assertions = []
    eig_rows = [("matrix", "re", "im", "abs")]
    for i in range(10):
        g = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
        t = MatrixOperator(g / np.linalg.norm(g, 2), "euclidean")
        res = half_sum(t, tol=1e-9)
        for lam in res.spectrum.eigenvalues:
            ok = abs(lam) < 1 - 1e-12 or abs(lam - 1) <= 1e-9
            checked += 1
            if abs(lam - 1) > 1e-9:
                worst_interior = max(worst_interior, abs(lam))
            if not ok:
                assertions.append(_assertion(f"eigenvalue_outside_contract_{i}",
                                             False, repr(lam)))
            eig_rows.append((i, lam.real, lam.imag, abs(lam)))
    res_id = half_sum(MatrixOperator(np.eye(3, dtype=np.complex128), "euclidean"))
    res_neg = half_sum(MatrixOperator(-np.eye(3, dtype=np.complex128), "euclidean"))
    assertions = [
        _assertion("all_halfsum_eigenvalues_in_contract", not assertions,
                   f"{checked} eigenvalues, worst interior |lambda| {worst_interior:.6f}"),
        _assertion("identity_maps_to_identity",
                   all(abs(l - 1) < 1e-12 for l in res_id.spectrum.eigenvalues), ""),
        _assertion("negation_maps_to_zero",
                   all(abs(l) < 1e-12 for l in res_neg.spectrum.eigenvalues), ""),
    ] + assertions
    results = {"eigenvalues_checked": checked, "worst_interior_modulus": worst_interior}
    return results, assertions, {"eigenvalues": eig_rows}


DEMO_NAMES = ("example33", "example43", "witness", "ktz", "halfsum")


def cmd_demo(name: str, seed: int, tol: float, out_dir: str,
             formats: tuple[str, ...] = ("json", "csv")) -> int:
    if name not in DEMO_NAMES:
        print(f"error: unknown demo {name!r}; choose from {', '.join(DEMO_NAMES)}",
              file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    if name == "example33":
        results, assertions, tables = _demo_limit_one(seed, tol)
    elif name == "example43":
        results, assertions, tables = _demo_root_limit(seed, tol)
    elif name == "witness":
        results, assertions, tables = _demo_witness(seed, tol, out_dir)
    elif name == "ktz":
        results, assertions, tables = _demo_ktz(seed, tol)
    else:
        results, assertions, tables = _demo_halfsum(seed, tol)
    elapsed = time.perf_counter() - t0

    config = {"demo": name, "seed": seed, "tol": tol}
    report = _report("demo", name, seed, tol, config, results, assertions)
    report["tables"] = sorted(f"{name}.{t}.csv" for t in tables)
    if "json" in formats:
        write_json_atomic(os.path.join(out_dir, f"{name}.json"), report)
    if "csv" in formats:
        for tname, rows in tables.items():
            write_csv_atomic(os.path.join(out_dir, f"{name}.{tname}.csv"), rows)
    write_json_atomic(os.path.join(out_dir, f"{name}.timing.json"),
                      {"wall_seconds": elapsed})
    failed = [a["name"] for a in assertions if not a["passed"]]
    for a in assertions:
        status = "ok" if a["passed"] else "FAIL"
        print(f"[{status}] {name}.{a['name']} {a['detail']}".rstrip())
    return EXIT_ASSERTION if failed else EXIT_OK


# ---------------------------------------------------------------------------
# Config-driven runs

def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _parse_ints(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(",", " ").split()]


def _parse_complex_pair(tok: str) -> complex:
    re_s, sep, im_s = tok.partition(",")
    if not sep:
        raise ConfigError(f"complex entries are 're,im' pairs, got {tok!r}")
    return complex(float(re_s), float(im_s))


def load_config(path: str) -> dict:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(path)
    cfg: dict = {section: dict(cp[section]) for section in cp.sections()}
    if "operator" not in cfg or "diagnostic" not in cfg:
        raise ConfigError("config needs [operator] and [diagnostic] sections")
    run = cfg.setdefault("run", {})
    run.setdefault("seed", "2026")
    run.setdefault("tol", "1e-8")
    run.setdefault("name", os.path.splitext(os.path.basename(path))[0])
    try:
        int(run["seed"])
        if float(run["tol"]) <= 0:
            raise ValueError
    except ValueError as exc:
        raise ConfigError("run.seed must be an int and run.tol a positive float") from exc
    return cfg


def _operator_from_config(cfg: dict, base_dir: str):
    sec = cfg["operator"]
    kind = sec.get("kind")
    space = sec.get("space", "c")
    if kind == "harmonic":
        return DiagonalOperator(harmonic_symbol(float(sec.get("rate", 1.0))), space)
    if kind == "root_perturbed":
        return DiagonalOperator(
            root_perturbed_symbol(int(sec.get("m", 2)),
                                  float(sec.get("rate", 1.0))), space)
    if kind == "constant":
        return DiagonalOperator(constant_symbol(float(sec.get("angle", 0.0))), space)
    if kind == "matrix":
        path = sec.get("path")
        if not path:
            raise ConfigError("matrix operators need operator.path")
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        return read_matrix_file(full, sec.get("norm", "euclidean"))
    raise ConfigError(f"unknown operator kind {kind!r}")


def _probe_from_config(cfg: dict, op) -> object:
    sec = cfg.get("probe", {"kind": "one"})
    kind = sec.get("kind", "one")
    if isinstance(op, MatrixOperator):
        if kind == "basis":
            i = int(sec.get("index", 1))
            e = np.zeros(op.dim, dtype=np.complex128)
            e[i - 1] = 1.0
            return FiniteVector(e, op.norm_tag)
        if kind == "prefix":
            vals = [_parse_complex_pair(tok) for tok in sec["values"].split()]
            if len(vals) != op.dim:
                raise ConfigError(f"probe has {len(vals)} entries, operator dim {op.dim}")
            return FiniteVector(np.array(vals), op.norm_tag)
        return FiniteVector(np.ones(op.dim, dtype=np.complex128), op.norm_tag)
    if kind == "one":
        return constant_one("c")
    if kind == "basis":
        return basis_vector(int(sec.get("index", 1)))
    if kind == "prefix":
        vals = [_parse_complex_pair(tok) for tok in sec["values"].split()]
        lim = _parse_complex_pair(sec.get("limit", "0,0"))
        return from_prefix(vals, lim)
    raise ConfigError(f"unknown probe kind {kind!r}")


def _run_diagnostic(cfg: dict, op, probe, seed: int, tol: float):
    sec = cfg["diagnostic"]
    which = sec.get("op")
    results: dict = {}
    assertions: list = []
    tables: dict = {}
    if which in ("compactness", "difference-compactness"):
        epsilons = _parse_floats(sec.get("epsilons", "1.0"))
        horizons = _parse_ints(sec.get("horizons", "100 200 400"))
        if len(horizons) < 3 or any(b <= a for a, b in zip(horizons, horizons[1:])):
            raise ConfigError("horizons must be strictly increasing with >= 3 entries")
        fn = compactness_diagnostic if which == "compactness" \
            else difference_compactness_diagnostic
        rep = fn(op, probe, epsilons, horizons, tol=tol)
        results["diagnostic"] = rep.to_json_dict()
        tables["diagnostic"] = rep.csv_rows()
        mono_h = bool(np.all(np.diff(rep.packing, axis=1) >= 0))
        mono_e = bool(np.all(np.diff(rep.packing, axis=0) <= 0)) \
            if len(epsilons) > 1 and epsilons == sorted(epsilons) else True
        assertions.append(_assertion("packing_monotone_in_horizon", mono_h, ""))
        assertions.append(_assertion("packing_monotone_in_epsilon", mono_e, ""))
    elif which == "mean-ergodic":
        if isinstance(op, DiagonalOperator):
            v = diagonal_mean_ergodic_verdict(op)
            results["verdict"] = {"is_mean_ergodic": v.is_mean_ergodic,
                                  "reason": v.reason, "evidence": v.evidence}
        else:
            dec = mean_ergodic_projection(op, tol)
            parts = decomposition_check(op, probe, tol)
            results["projection_residual"] = dec.residual
            results["cesaro_constant"] = dec.cesaro_constant
            results["decomposition_residual"] = parts.residual
            assertions.append(_assertion("projection_residual_small",
                                         dec.residual <= tol * 10, f"{dec.residual:.3e}"))
    elif which == "jdlg":
        if isinstance(op, DiagonalOperator):
            rep = jdlg.diagonal_jdlg(op)
            results["diagonal_jdlg"] = {
                "aap_space": rep.aap_space,
                "rev_equals_aap": rep.rev_equals_aap,
                "p_is_identity_on_aap": rep.p_is_identity_on_aap,
                "cross_check": rep.cross_check,
            }
        else:
            split = jdlg_split(op, tol)
            results["jdlg"] = {
                "rev_dim": len(split.rev_basis),
                "aws_dim": len(split.aws_basis),
                "aws_spectral_radius": split.aws_spectral_radius,
                "rev_power_bound": split.rev_power_bound,
                "residual": split.residual,
            }
            assertions.append(_assertion("split_residual_small",
                                         split.residual <= tol * 10,
                                         f"{split.residual:.3e}"))
    elif which == "ktz":
        horizon = int(sec.get("horizon", 200))
        rep = ktz_check(op, horizon=horizon, tol=float(sec.get("ktz_tol", 1e-9)))
        results["ktz"] = {"passed": rep.passed, "limit_defect": rep.limit_defect,
                          "decay_final": float(rep.decay_curve[-1])}
        rows = [("n", "decay")]
        rows += [(n + 1, float(d)) for n, d in enumerate(rep.decay_curve)]
        tables["decay"] = rows
        assertions.append(_assertion("ktz_passed", rep.passed, ""))
    elif which == "halfsum":
        res = half_sum(op, tol=max(tol, 1e-9))
        results["spectrum"] = res.spectrum.to_json_dict()
        ok = all(abs(l) < 1 - 1e-12 or abs(l - 1) <= 1e-9
                 for l in res.spectrum.eigenvalues)
        assertions.append(_assertion("halfsum_peripheral_in_one", ok, ""))
    elif which == "spectrum":
        results["spectrum"] = spectrum_report(op).to_json_dict()
    elif which == "witness":
        count = int(sec.get("count", 20))
        horizon = int(sec.get("horizon", 10_000))
        try:
            audit = c0_witness(op, probe, count, horizon, tol=max(tol, 1e-8), seed=seed)
        except HorizonExhaustedError as exc:
            audit = exc.audit
        results["audit"] = audit.to_json_dict()
        assertions.append(_assertion("ladder_norms_ok", audit.norms_ok, ""))
        assertions.append(_assertion("subset_sums_ok", audit.subset_bound_ok, ""))
    else:
        raise ConfigError(f"unknown diagnostic op {which!r}")
    return results, assertions, tables


def cmd_run(config_path: str, out_dir: str | None, seed_override: int | None,
            tol_override: float | None,
            formats: tuple[str, ...] = ("json", "csv")) -> int:
    try:
        cfg = load_config(config_path)
    except FileNotFoundError:
        print(f"error: config file not found: {config_path}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run = cfg["run"]
    seed = seed_override if seed_override is not None else int(run["seed"])
    tol = tol_override if tol_override is not None else float(run["tol"])
    name = run["name"]
    out = out_dir or run.get("out", "out")
    base_dir = os.path.dirname(os.path.abspath(config_path))
    t0 = time.perf_counter()
    try:
        op = _operator_from_config(cfg, base_dir)
        probe = _probe_from_config(cfg, op)
        results, assertions, tables = _run_diagnostic(cfg, op, probe, seed, tol)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OrbitLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    elapsed = time.perf_counter() - t0
    config_echo = {s: dict(v) for s, v in cfg.items()}
    report = _report("run", name, seed, tol, config_echo, results, assertions)
    report["tables"] = sorted(f"{name}.{t}.csv" for t in tables)
    os.makedirs(out, exist_ok=True)
    if "json" in formats:
        write_json_atomic(os.path.join(out, f"{name}.json"), report)
    if "csv" in formats:
        for tname, rows in tables.items():
            write_csv_atomic(os.path.join(out, f"{name}.{tname}.csv"), rows)
    write_json_atomic(os.path.join(out, f"{name}.timing.json"),
                      {"wall_seconds": elapsed})
    failed = [a["name"] for a in assertions if not a["passed"]]
    for a in assertions:
        status = "ok" if a["passed"] else "FAIL"
        print(f"[{status}] {name}.{a['name']} {a['detail']}".rstrip())
    return EXIT_ASSERTION if failed else EXIT_OK


def cmd_verify_certificate(path: str, out_dir: str | None) -> int:
    try:
        report = gallery.verify_certificate(path)
    except FileNotFoundError:
        print(f"error: certificate not found: {path}", file=sys.stderr)
        return EXIT_IO
    except (CertificateError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out_dir:
        write_json_atomic(os.path.join(out_dir, "certificate.verify.json"), report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orbitlab",
                                description="orbit compactness laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("demo", help="run a bundled scenario")
    d.add_argument("name", help=f"one of: {', '.join(DEMO_NAMES)}")
    d.add_argument("--seed", type=int, default=2026)
    d.add_argument("--tol", type=float, default=1e-8)
    d.add_argument("--out-dir", default="out")
    d.add_argument("--json", action="store_true", help="write only the JSON report")
    d.add_argument("--csv", action="store_true", help="write only the CSV tables")

    r = sub.add_parser("run", help="execute an INI config")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--tol", type=float, default=None)
    r.add_argument("--out-dir", default=None)
    r.add_argument("--json", action="store_true", help="write only the JSON report")
    r.add_argument("--csv", action="store_true", help="write only the CSV tables")

    v = sub.add_parser("verify-certificate", help="re-verify a witness certificate")
    v.add_argument("path")
    v.add_argument("--out-dir", default=None)
    return p


def _formats(args) -> tuple[str, ...]:
    if args.json and not args.csv:
        return ("json",)
    if args.csv and not args.json:
        return ("csv",)
    return ("json", "csv")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "demo":
        if args.tol <= 0:
            print("error: --tol must be positive", file=sys.stderr)
            return EXIT_USAGE
        return cmd_demo(args.name, args.seed, args.tol, args.out_dir, _formats(args))
    if args.command == "run":
        return cmd_run(args.config, args.out_dir, args.seed, args.tol, _formats(args))
    return cmd_verify_certificate(args.path, args.out_dir)


if __name__ == "__main__":
    sys.exit(main())
