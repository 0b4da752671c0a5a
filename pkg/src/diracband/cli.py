"""Command line front end.

Subcommands wrap the library's sweeps and checks, read a strict JSON config
(--config), and emit byte-deterministic artifacts: JSON reports with sorted
keys and CSV tables with 17-significant-digit floats.  Without --out the
JSON report goes to stdout; CSV side tables are written only under --out.

Exit codes: 0 when the run's checks pass, 2 when the run completed but some
empirical check failed (reports are still written), 1 for usage or config
errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import config as cfg
from .bands import band_sweep, nonconstancy_report
from .fields import averaged_potential, condition_value
from .gauge import EtaSpec, bessel_kernel_constant, build_frame, \
    default_kernel_constant, gauge_bound_check
from .lattice import find_gamma
from .util import orthonormal_complement, unit
from .verify import condition_chain_pipeline, verify_thomas_bound, \
    verify_weighted_split, weighted_floor

import json


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2,
                      ensure_ascii=True, allow_nan=False) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


class _Artifacts:
    """Collects named outputs; flushed to --out or (JSON only) to stdout."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.items: list[tuple[str, str]] = []

    def add(self, name: str, text: str) -> None:
        self.items.append((name, text))

    def flush(self) -> None:
        if self.out_dir is None:
            for name, text in self.items:
                if name.endswith(".json"):
                    sys.stdout.write(text)
            return
        os.makedirs(self.out_dir, exist_ok=True)
        for name, text in self.items:
            path = os.path.join(self.out_dir, name)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)


# ---------------------------------------------------------------------------
# command runners: parsed config + flags -> (exit code, artifacts)
# ---------------------------------------------------------------------------

def _run_bands(parsed, args, art: _Artifacts) -> int:
    cutoff = args.cutoff if args.cutoff is not None else parsed["cutoff"]
    sheet = band_sweep(parsed["lattice"], parsed["rep"], parsed["pot"],
                       parsed["k0"], parsed["e"], parsed["xi_range"],
                       parsed["samples"], cutoff, threads=args.threads)
    window = parsed["energy_window"]
    if window is None:
        half = sheet.free_band_max() / 2.0
        window = (-half, half)
    report = nonconstancy_report(sheet, window, parsed["threshold"])

    header = ["xi"] + [f"E_{j + 1}" for j in range(sheet.band_count)]
    rows = [[sheet.xis[i]] + list(sheet.energies[i])
            for i in range(len(sheet.xis))]
    art.add("bands.csv", _csv(header, rows))
    art.add("bands.json", _dumps({"command": "bands", **report}))
    return 2 if report["suspect_flat_bands"] else 0


def _run_check_condition(parsed, args, art: _Artifacts) -> int:
    seed = args.seed if args.seed is not None else parsed["seed"]
    cv = condition_value(parsed["A"], parsed["gamma"], parsed["measure"],
                         sphere_samples=parsed["sphere_samples"],
                         scan_grid=parsed["scan_grid"],
                         refine_grid=parsed["refine_grid"],
                         rng=np.random.default_rng(seed))
    report = {"command": "check-condition",
              "gamma": list(parsed["gamma"]),
              "measure": parsed["measure"].to_dict(),
              "passes": cv.holds, **cv.to_dict()}
    art.add("check-condition.json", _dumps(report))
    return 0 if cv.holds else 2


def _run_find_gamma(parsed, args, art: _Artifacts) -> int:
    if parsed["mode"] == "search":
        cert = find_gamma(parsed["lattice"], parsed["measure"], parsed["h"],
                          parsed["R0"], parsed["window"])
        report = {"command": "find-gamma", "mode": "search", **cert.to_dict()}
        art.add("find-gamma.json", _dumps(report))
        return 0
    seed = args.seed if args.seed is not None else parsed["seed"]
    result = condition_chain_pipeline(
        parsed["A"], parsed["q"], parsed["h"], parsed["h1"],
        parsed["R0_list"], et_samples=parsed["et_samples"],
        grid_per_axis=parsed["grid_per_axis"],
        search_window=parsed["window"], seed=seed)
    report = {"command": "find-gamma", "mode": "pipeline", **result}
    art.add("find-gamma.json", _dumps(report))
    return 0 if result["chain_ok"] else 2


def _run_verify_thomas(parsed, args, art: _Artifacts) -> int:
    seed = args.seed if args.seed is not None else parsed["seed"]
    cutoff = args.cutoff if args.cutoff is not None else parsed["cutoff"]
    report = verify_thomas_bound(
        parsed["lattice"], parsed["rep"], parsed["pot"], parsed["gamma"],
        parsed["measure"], parsed["theta"], kappas=parsed["kappas"],
        k_points_per_axis=parsed["k_points_per_axis"], cutoff=cutoff,
        refine_factor=parsed["refine_factor"],
        probe_count=parsed["probe_count"], seed=seed,
        sphere_samples=parsed["sphere_samples"], threads=args.threads)
    art.add("verify-thomas.json",
            _dumps({"command": "verify-thomas", **report.to_dict()}))
    art.add("margins.csv",
            _csv(["k_index", "kappa", "sigma_min", "bound", "margin"],
                 [[r["k_index"], r["kappa"], r["sigma_min"], r["bound"],
                   r["margin"]] for r in report.margin_rows()]))
    return 0 if report.holds else 2


def _run_verify_weighted(parsed, args, art: _Artifacts) -> int:
    cutoff = args.cutoff if args.cutoff is not None else parsed["cutoff"]
    if parsed["mode"] == "split":
        report = verify_weighted_split(
            parsed["lattice"], parsed["rep"], parsed["pot"], parsed["gamma"],
            parsed["measure"], parsed["delta"], parsed["beta"],
            parsed["kappas"], k_points_per_axis=parsed["k_points_per_axis"],
            cutoff=cutoff, sphere_samples=parsed["sphere_samples"],
            threads=args.threads)
        art.add("verify-weighted.json",
                _dumps({"command": "verify-weighted", "mode": "split",
                        **report.to_dict()}))
        return 0 if report.holds else 2
    result = weighted_floor(
        parsed["lattice"], parsed["rep"], parsed["pot"], parsed["gamma"],
        parsed["kappas"], k_points_per_axis=parsed["k_points_per_axis"],
        cutoff=cutoff, threads=args.threads)
    passes = result["ratio_min"] >= result["perturbation_floor"] - 1e-12
    result["passes"] = bool(passes)
    art.add("verify-weighted.json",
            _dumps({"command": "verify-weighted", "mode": "floor", **result}))
    return 0 if passes else 2


def _run_gauge_bound(parsed, args, art: _Artifacts) -> int:
    lattice = parsed["lattice"]
    gvec = lattice.point(np.asarray(parsed["gamma"], dtype=np.int64))
    e = unit(gvec)
    et = parsed["et"]
    if et is None:
        et = orthonormal_complement(e)[0]
    frame = build_frame(gvec, et)
    At = averaged_potential(parsed["A"], parsed["gamma"], parsed["measure"],
                            frame.et)
    result = gauge_bound_check(parsed["A"], At, frame, parsed["measure"],
                          parsed["gamma"], parsed["measure"].h,
                          default_kernel_constant(),
                          grid_per_axis=parsed["grid_per_axis"])
    report = {"command": "gauge-bound", "gamma": list(parsed["gamma"]),
              "et": [float(c) for c in et],
              "measure": parsed["measure"].to_dict(), **result}
    art.add("gauge_bound.json", _dumps(report))
    return 0 if result["ok"] else 2


def _run_kernel_constant(parsed, args, art: _Artifacts) -> int:
    eta = EtaSpec(parsed["tau_lo"], parsed["tau_hi"])
    result = bessel_kernel_constant(eta, sample_step=parsed["sample_step"],
                                    radial_tol=parsed["radial_tol"],
                                    cross_check=parsed["cross_check"])
    report = result.to_dict()
    passes = True
    if parsed["cross_check"]:
        passes = report["cross_residual"] <= 1e-4
    report = {"command": "kernel-constant", "passes": bool(passes), **report}
    art.add("kernel-constant.json", _dumps(report))
    return 0 if passes else 2


_RUNNERS = {
    "bands": _run_bands,
    "check-condition": _run_check_condition,
    "find-gamma": _run_find_gamma,
    "verify-thomas": _run_verify_thomas,
    "verify-weighted": _run_verify_weighted,
    "gauge-bound": _run_gauge_bound,
    "kernel-constant": _run_kernel_constant,
}

_HELP = {
    "bands": "sweep fiber eigenvalues along a quasimomentum line",
    "check-condition": "bracket the averaged-field smallness value",
    "find-gamma": "search period directions (or run the decay pipeline)",
    "verify-thomas": "scan shifted fibers against the damped lower bound",
    "verify-weighted": "weighted singular-value floors on the critical face",
    "gauge-bound": "gauge-pair sup-norm bound check at one frame",
    "kernel-constant": "compute the oscillatory-kernel constant",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; here 2 means a failed check."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="diracband",
        description="Spectral checks for periodic Dirac operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        sp = sub.add_parser(name, help=_HELP[name])
        sp.add_argument("--config", required=name != "kernel-constant",
                        help="path to the JSON config")
        sp.add_argument("--out", default=None,
                        help="directory for artifacts (default: JSON to stdout)")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed for randomized probes (overrides config)")
        sp.add_argument("--threads", type=int, default=1,
                        help="worker threads for grid sweeps")
        if name in ("bands", "verify-thomas", "verify-weighted"):
            sp.add_argument("--cutoff", type=float, default=None,
                            help="mode-window radius (overrides config)")
        else:
            sp.set_defaults(cutoff=None)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    if args.cutoff is not None and args.cutoff <= 0:
        parser.error("--cutoff must be positive")
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be nonnegative")

    try:
        raw = cfg.load_file(args.config) if args.config else {}
        parsed = cfg.PARSERS[args.command](raw)
    except cfg.ConfigError as exc:
        print(f"config error at {exc.path}: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1

    art = _Artifacts(args.out)
    try:
        code = _RUNNERS[args.command](parsed, args, art)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    art.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
