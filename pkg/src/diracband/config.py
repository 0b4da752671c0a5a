"""Strict JSON configuration layer for the command line front end.

Configs are plain JSON.  Complex numbers are written as [re, im]; lattice
basis entries may be exact rationals written as strings "p/q".  Unknown
keys are rejected, every numeric parameter is range-checked at load, and
all errors carry RFC 6901 JSON-pointer paths to the offending node.

`canonical_dumps` re-emits a parsed config with sorted keys and fixed
layout, so emit -> reload -> emit is byte-identical.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .clifford import CliffordRep, build_clifford
from .fields import FourierField, MeasureSpec, PotentialSet, zero_field
from .lattice import Lattice, SphereMeasure


class ConfigError(ValueError):
    """Validation failure; `path` is a JSON pointer into the config."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path if path else "/"
        self.message = message
        super().__init__(f"{self.path}: {message}")


def _escape(token: str) -> str:
    return token.replace("~", "~0").replace("/", "~1")


def _join(path: str, token) -> str:
    return f"{path}/{_escape(str(token))}"


# ---------------------------------------------------------------------------
# raw JSON handling
# ---------------------------------------------------------------------------

def _reject_duplicates(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ConfigError("", f"duplicate key '{key}'")
        seen[key] = value
    return seen


def _reject_constant(name):
    raise ConfigError("", f"non-finite literal '{name}' is not allowed")


def loads(text: str) -> dict:
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates,
                         parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be an object")
    return raw


def load_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def canonical_dumps(raw) -> str:
    """Stable re-emission: sorted keys, two-space indent, trailing newline."""
    return json.dumps(raw, sort_keys=True, indent=2, ensure_ascii=True,
                      allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# scalar parsers
# ---------------------------------------------------------------------------

def _object(node, path, required=(), optional=()):
    if not isinstance(node, dict):
        raise ConfigError(path, "expected an object")
    allowed = set(required) | set(optional)
    for key in node:
        if key not in allowed:
            raise ConfigError(_join(path, key), "unknown key")
    for key in required:
        if key not in node:
            raise ConfigError(path, f"missing required key '{key}'")
    return node


def _list(node, path, length=None, min_length=None):
    if not isinstance(node, list):
        raise ConfigError(path, "expected an array")
    if length is not None and len(node) != length:
        raise ConfigError(path, f"expected exactly {length} entries")
    if min_length is not None and len(node) < min_length:
        raise ConfigError(path, f"expected at least {min_length} entries")
    return node


def _number(node, path, *, gt=None, ge=None, lt=None, le=None) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(path, "expected a number")
    x = float(node)
    if not math.isfinite(x):
        raise ConfigError(path, "expected a finite number")
    if gt is not None and not x > gt:
        raise ConfigError(path, f"must be > {gt}")
    if ge is not None and not x >= ge:
        raise ConfigError(path, f"must be >= {ge}")
    if lt is not None and not x < lt:
        raise ConfigError(path, f"must be < {lt}")
    if le is not None and not x <= le:
        raise ConfigError(path, f"must be <= {le}")
    return x


def _integer(node, path, *, ge=None, le=None) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise ConfigError(path, "expected an integer")
    if ge is not None and node < ge:
        raise ConfigError(path, f"must be >= {ge}")
    if le is not None and node > le:
        raise ConfigError(path, f"must be <= {le}")
    return int(node)


def _boolean(node, path) -> bool:
    if not isinstance(node, bool):
        raise ConfigError(path, "expected true or false")
    return node


def _string(node, path, choices=None) -> str:
    if not isinstance(node, str):
        raise ConfigError(path, "expected a string")
    if choices is not None and node not in choices:
        raise ConfigError(path, f"expected one of {sorted(choices)}")
    return node


def _rational(node, path) -> float:
    """Number, or an exact rational written 'p/q'."""
    if isinstance(node, str):
        try:
            return float(Fraction(node))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(path, f"invalid rational: {exc}") from exc
    return _number(node, path)


def _complex_entry(node, path) -> complex:
    """Number, or a two-element array [re, im]."""
    if isinstance(node, list):
        _list(node, path, length=2)
        return complex(_number(node[0], _join(path, 0)),
                       _number(node[1], _join(path, 1)))
    return complex(_number(node, path))


def _int_tuple(node, path, length) -> tuple:
    _list(node, path, length=length)
    return tuple(_integer(v, _join(path, i)) for i, v in enumerate(node))


def _float_vector(node, path, length) -> np.ndarray:
    _list(node, path, length=length)
    return np.array([_number(v, _join(path, i)) for i, v in enumerate(node)])


# ---------------------------------------------------------------------------
# domain builders
# ---------------------------------------------------------------------------

def build_lattice(node, path) -> Lattice:
    node = _object(node, path, optional=("cubic", "basis"))
    if ("cubic" in node) == ("basis" in node):
        raise ConfigError(path, "give exactly one of 'cubic' or 'basis'")
    if "cubic" in node:
        n = _integer(node["cubic"], _join(path, "cubic"), ge=2, le=8)
        return Lattice.cubic(n)
    rows = _list(node["basis"], _join(path, "basis"), min_length=2)
    n = len(rows)
    if n > 8:
        raise ConfigError(_join(path, "basis"), "at most 8 rows supported")
    basis = np.zeros((n, n))
    for i, row in enumerate(rows):
        rpath = _join(_join(path, "basis"), i)
        _list(row, rpath, length=n)
        for j, entry in enumerate(row):
            basis[i, j] = _rational(entry, _join(rpath, j))
    try:
        return Lattice(basis)
    except ValueError as exc:
        raise ConfigError(_join(path, "basis"), str(exc)) from exc


def build_measure(node, path) -> MeasureSpec:
    node = _object(node, path, required=("kind",), optional=("h", "h1"))
    kind = _string(node["kind"], _join(path, "kind"), choices={"dirac", "plateau"})
    if kind == "dirac":
        if "h1" in node:
            raise ConfigError(_join(path, "h1"), "dirac measure takes no h1")
        if "h" in node:
            return MeasureSpec.dirac(_number(node["h"], _join(path, "h"), gt=0.0))
        return MeasureSpec.dirac()
    for key in ("h", "h1"):
        if key not in node:
            raise ConfigError(path, f"plateau measure needs '{key}'")
    h = _number(node["h"], _join(path, "h"), gt=0.0)
    h1 = _number(node["h1"], _join(path, "h1"), gt=h)
    return MeasureSpec.plateau(h, h1)


def _vector_field(node, path, lattice: Lattice) -> FourierField:
    node = _object(node, path, required=("modes",), optional=("real",))
    real = _boolean(node.get("real", False), _join(path, "real"))
    entries = _list(node["modes"], _join(path, "modes"))
    coeffs: dict = {}
    for i, entry in enumerate(entries):
        epath = _join(_join(path, "modes"), i)
        entry = _object(entry, epath, required=("coeffs", "value"))
        key = _int_tuple(entry["coeffs"], _join(epath, "coeffs"), lattice.n)
        if key in coeffs:
            raise ConfigError(_join(epath, "coeffs"), "duplicate mode")
        vpath = _join(epath, "value")
        _list(entry["value"], vpath, length=lattice.n)
        coeffs[key] = [_complex_entry(v, _join(vpath, j))
                       for j, v in enumerate(entry["value"])]
    try:
        return FourierField(lattice, "vector", coeffs, real=real)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _matrix_value(node, path, entry, epath, rep: CliffordRep, scalar_base):
    """One matrix coefficient: explicit M x M rows, or scalar * base matrix."""
    has_value = "value" in entry
    has_scalar = "scalar" in entry
    if has_value == has_scalar:
        raise ConfigError(epath, "give exactly one of 'value' or 'scalar'")
    if has_scalar:
        return _complex_entry(entry["scalar"], _join(epath, "scalar")) * scalar_base
    M = rep.M
    vpath = _join(epath, "value")
    rows = _list(entry["value"], vpath, length=M)
    mat = np.zeros((M, M), dtype=complex)
    for i, row in enumerate(rows):
        rpath = _join(vpath, i)
        _list(row, rpath, length=M)
        for j, cell in enumerate(row):
            mat[i, j] = _complex_entry(cell, _join(rpath, j))
    return mat


def _matrix_field(node, path, lattice: Lattice, rep: CliffordRep,
                  scalar_base: np.ndarray) -> FourierField:
    node = _object(node, path, required=("modes",), optional=("hermitian",))
    hermitian = _boolean(node.get("hermitian", False), _join(path, "hermitian"))
    entries = _list(node["modes"], _join(path, "modes"))
    coeffs: dict = {}
    for i, entry in enumerate(entries):
        epath = _join(_join(path, "modes"), i)
        entry = _object(entry, epath, required=("coeffs",),
                        optional=("value", "scalar"))
        key = _int_tuple(entry["coeffs"], _join(epath, "coeffs"), lattice.n)
        if key in coeffs:
            raise ConfigError(_join(epath, "coeffs"), "duplicate mode")
        coeffs[key] = _matrix_value(node, path, entry, epath, rep, scalar_base)
    try:
        return FourierField(lattice, "matrix", coeffs, hermitian=hermitian,
                            dim=rep.M)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def build_potential(node, path, lattice: Lattice, rep: CliffordRep
                    ) -> PotentialSet:
    """Potential block; a missing block or missing parts mean zero.

    V0 'scalar' entries multiply the identity; V1 'scalar' entries multiply
    the extra involution (the mass direction), which anticommutes with the
    first n generators.
    """
    if node is None:
        return PotentialSet.zero(lattice, rep)
    node = _object(node, path, optional=("A", "V0", "V1"))
    A = (_vector_field(node["A"], _join(path, "A"), lattice)
         if "A" in node else zero_field(lattice, "vector"))
    eye = np.eye(rep.M, dtype=complex)
    mass = rep.alphas[rep.n]
    V0 = (_matrix_field(node["V0"], _join(path, "V0"), lattice, rep, eye)
          if "V0" in node else zero_field(lattice, "matrix", dim=rep.M))
    V1 = (_matrix_field(node["V1"], _join(path, "V1"), lattice, rep, mass)
          if "V1" in node else zero_field(lattice, "matrix", dim=rep.M))
    try:
        return PotentialSet(A, V0, V1, rep)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _gamma(node, path, lattice: Lattice) -> tuple:
    gc = _int_tuple(node, path, lattice.n)
    if not any(gc):
        raise ConfigError(path, "gamma must be nonzero")
    return gc


def build_sphere_measure(node, path, lattice: Lattice) -> SphereMeasure:
    entries = _list(node, path)
    points, weights = [], []
    for i, entry in enumerate(entries):
        epath = _join(path, i)
        entry = _object(entry, epath, required=("point", "weight"))
        p = _float_vector(entry["point"], _join(epath, "point"), lattice.n)
        norm = float(np.linalg.norm(p))
        if norm == 0.0:
            raise ConfigError(_join(epath, "point"), "atom direction must be nonzero")
        points.append(p / norm)
        weights.append(_number(entry["weight"], _join(epath, "weight"), ge=0.0))
    if not points:
        return SphereMeasure(points=np.zeros((0, lattice.n)), weights=np.zeros(0))
    return SphereMeasure(points=np.array(points), weights=np.array(weights))


# ---------------------------------------------------------------------------
# per-command validators
# ---------------------------------------------------------------------------

def _common(raw, extra_required, extra_optional=()):
    required = ("lattice",) + tuple(extra_required)
    optional = ("seed",) + tuple(extra_optional)
    _object(raw, "", required=required, optional=optional)
    lattice = build_lattice(raw["lattice"], "/lattice")
    seed = _integer(raw.get("seed", 0), "/seed", ge=0)
    return lattice, seed


def parse_bands(raw) -> dict:
    lattice, seed = _common(raw, ("bands",), ("potential",))
    rep = build_clifford(lattice.n)
    pot = build_potential(raw.get("potential"), "/potential", lattice, rep)
    node = _object(raw["bands"], "/bands",
                   required=("k0", "direction", "xi_range", "samples", "cutoff"),
                   optional=("energy_window", "threshold"))
    k0 = _float_vector(node["k0"], "/bands/k0", lattice.n)
    e = _float_vector(node["direction"], "/bands/direction", lattice.n)
    norm = float(np.linalg.norm(e))
    if norm == 0.0:
        raise ConfigError("/bands/direction", "direction must be nonzero")
    xi = _list(node["xi_range"], "/bands/xi_range", length=2)
    a = _number(xi[0], "/bands/xi_range/0")
    b = _number(xi[1], "/bands/xi_range/1", gt=a)
    window = None
    if "energy_window" in node:
        win = _list(node["energy_window"], "/bands/energy_window", length=2)
        lo = _number(win[0], "/bands/energy_window/0")
        hi = _number(win[1], "/bands/energy_window/1", gt=lo)
        window = (lo, hi)
    return {
        "lattice": lattice, "rep": rep, "pot": pot, "seed": seed,
        "k0": k0, "e": e / norm, "xi_range": (a, b),
        "samples": _integer(node["samples"], "/bands/samples", ge=2, le=100000),
        "cutoff": _number(node["cutoff"], "/bands/cutoff", gt=0.0),
        "energy_window": window,
        "threshold": _number(node.get("threshold", 1e-6), "/bands/threshold",
                             gt=0.0),
    }


def parse_check_condition(raw) -> dict:
    lattice, seed = _common(raw, ("measure", "condition"), ("potential",))
    rep = build_clifford(lattice.n)
    pot = build_potential(raw.get("potential"), "/potential", lattice, rep)
    measure = build_measure(raw["measure"], "/measure")
    node = _object(raw["condition"], "/condition", required=("gamma",),
                   optional=("sphere_samples", "scan_grid", "refine_grid"))
    return {
        "lattice": lattice, "seed": seed, "A": pot.A, "measure": measure,
        "gamma": _gamma(node["gamma"], "/condition/gamma", lattice),
        "sphere_samples": _integer(node.get("sphere_samples", 4096),
                                   "/condition/sphere_samples", ge=8, le=10 ** 7),
        "scan_grid": _integer(node.get("scan_grid", 16),
                              "/condition/scan_grid", ge=2, le=256),
        "refine_grid": _integer(node.get("refine_grid", 48),
                                "/condition/refine_grid", ge=2, le=512),
    }


def parse_find_gamma(raw) -> dict:
    _object(raw, "", required=("lattice",),
            optional=("seed", "search", "pipeline", "potential"))
    lattice = build_lattice(raw["lattice"], "/lattice")
    seed = _integer(raw.get("seed", 0), "/seed", ge=0)
    if ("search" in raw) == ("pipeline" in raw):
        raise ConfigError("", "give exactly one of 'search' or 'pipeline'")

    if "search" in raw:
        if "potential" in raw:
            raise ConfigError("/potential", "unused in atom-search mode")
        node = _object(raw["search"], "/search", required=("atoms", "h", "R0"),
                       optional=("window",))
        window = (_number(node["window"], "/search/window", gt=0.0)
                  if "window" in node else None)
        return {
            "mode": "search", "lattice": lattice, "seed": seed,
            "measure": build_sphere_measure(node["atoms"], "/search/atoms",
                                            lattice),
            "h": _number(node["h"], "/search/h", gt=0.0),
            "R0": _number(node["R0"], "/search/R0", gt=0.0),
            "window": window,
        }

    rep = build_clifford(lattice.n)
    pot = build_potential(raw.get("potential"), "/potential", lattice, rep)
    node = _object(raw["pipeline"], "/pipeline",
                   required=("q", "h", "h1", "R0_list"),
                   optional=("et_samples", "grid_per_axis", "window"))
    h = _number(node["h"], "/pipeline/h", gt=0.0)
    r0s = _list(node["R0_list"], "/pipeline/R0_list", min_length=1)
    window = (_number(node["window"], "/pipeline/window", gt=0.0)
              if "window" in node else None)
    return {
        "mode": "pipeline", "lattice": lattice, "seed": seed, "A": pot.A,
        "q": _number(node["q"], "/pipeline/q", gt=0.0),
        "h": h,
        "h1": _number(node["h1"], "/pipeline/h1", gt=h),
        "R0_list": [_number(v, _join("/pipeline/R0_list", i), gt=0.0)
                    for i, v in enumerate(r0s)],
        "et_samples": _integer(node.get("et_samples", 16),
                               "/pipeline/et_samples", ge=1, le=4096),
        "grid_per_axis": _integer(node.get("grid_per_axis", 32),
                                  "/pipeline/grid_per_axis", ge=3, le=257),
        "window": window,
    }


def parse_verify_thomas(raw) -> dict:
    lattice, seed = _common(raw, ("measure", "thomas"), ("potential",))
    rep = build_clifford(lattice.n)
    pot = build_potential(raw.get("potential"), "/potential", lattice, rep)
    measure = build_measure(raw["measure"], "/measure")
    node = _object(raw["thomas"], "/thomas", required=("gamma", "theta"),
                   optional=("kappas", "k_points_per_axis", "cutoff",
                             "refine_factor", "probe_count", "sphere_samples"))
    kappas = None
    if "kappas" in node:
        vals = _list(node["kappas"], "/thomas/kappas", min_length=1)
        kappas = [_number(v, _join("/thomas/kappas", i), gt=0.0)
                  for i, v in enumerate(vals)]
        if sorted(kappas) != kappas:
            raise ConfigError("/thomas/kappas", "must be increasing")
    return {
        "lattice": lattice, "rep": rep, "pot": pot, "measure": measure,
        "seed": seed,
        "gamma": _gamma(node["gamma"], "/thomas/gamma", lattice),
        "theta": _number(node["theta"], "/thomas/theta", gt=0.0, lt=1.0),
        "kappas": kappas,
        "k_points_per_axis": _integer(node.get("k_points_per_axis", 5),
                                      "/thomas/k_points_per_axis", ge=1, le=64),
        "cutoff": (_number(node["cutoff"], "/thomas/cutoff", gt=0.0)
                   if "cutoff" in node else None),
        "refine_factor": (_number(node["refine_factor"], "/thomas/refine_factor",
                                  gt=1.0) if "refine_factor" in node else None),
        "probe_count": _integer(node.get("probe_count", 0),
                                "/thomas/probe_count", ge=0, le=10 ** 6),
        "sphere_samples": _integer(node.get("sphere_samples", 4096),
                                   "/thomas/sphere_samples", ge=8, le=10 ** 7),
    }


def parse_verify_weighted(raw) -> dict:
    _object(raw, "", required=("lattice", "weighted"),
            optional=("seed", "measure", "potential"))
    lattice = build_lattice(raw["lattice"], "/lattice")
    seed = _integer(raw.get("seed", 0), "/seed", ge=0)
    rep = build_clifford(lattice.n)
    pot = build_potential(raw.get("potential"), "/potential", lattice, rep)
    node = _object(raw["weighted"], "/weighted",
                   required=("mode", "gamma", "kappas"),
                   optional=("delta", "beta", "k_points_per_axis", "cutoff",
                             "sphere_samples"))
    mode = _string(node["mode"], "/weighted/mode", choices={"split", "floor"})
    vals = _list(node["kappas"], "/weighted/kappas", min_length=1)
    kappas = [_number(v, _join("/weighted/kappas", i), gt=0.0)
              for i, v in enumerate(vals)]
    out = {
        "mode": mode, "lattice": lattice, "rep": rep, "pot": pot, "seed": seed,
        "gamma": _gamma(node["gamma"], "/weighted/gamma", lattice),
        "kappas": kappas,
        "k_points_per_axis": _integer(node.get("k_points_per_axis", 3),
                                      "/weighted/k_points_per_axis", ge=1, le=64),
        "cutoff": (_number(node["cutoff"], "/weighted/cutoff", gt=0.0)
                   if "cutoff" in node else None),
    }
    if mode == "floor":
        for key in ("delta", "beta"):
            if key in node:
                raise ConfigError(_join("/weighted", key),
                                  "only used in split mode")
        if "measure" in raw:
            raise ConfigError("/measure", "only used in split mode")
        return out
    if "measure" not in raw:
        raise ConfigError("", "split mode needs a 'measure' block")
    for key in ("delta", "beta"):
        if key not in node:
            raise ConfigError("/weighted", f"split mode needs '{key}'")
    out["measure"] = build_measure(raw["measure"], "/measure")
    out["delta"] = _number(node["delta"], "/weighted/delta", gt=0.0, lt=1.0)
    out["beta"] = _number(node["beta"], "/weighted/beta", gt=0.0)
    if not all(k > out["beta"] for k in kappas):
        raise ConfigError("/weighted/kappas", "every kappa must exceed beta")
    out["sphere_samples"] = _integer(node.get("sphere_samples", 4096),
                                     "/weighted/sphere_samples", ge=8, le=10 ** 7)
    return out


def parse_gauge_bound(raw) -> dict:
    lattice, seed = _common(raw, ("measure", "gauge"), ("potential",))
    rep = build_clifford(lattice.n)
    pot = build_potential(raw.get("potential"), "/potential", lattice, rep)
    measure = build_measure(raw["measure"], "/measure")
    node = _object(raw["gauge"], "/gauge", required=("gamma",),
                   optional=("et", "grid_per_axis"))
    et = None
    if "et" in node:
        v = _float_vector(node["et"], "/gauge/et", lattice.n)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ConfigError("/gauge/et", "direction must be nonzero")
        et = v / norm
    return {
        "lattice": lattice, "seed": seed, "A": pot.A, "measure": measure,
        "gamma": _gamma(node["gamma"], "/gauge/gamma", lattice),
        "et": et,
        "grid_per_axis": (_integer(node["grid_per_axis"],
                                   "/gauge/grid_per_axis", ge=3, le=257)
                          if "grid_per_axis" in node else None),
    }


def parse_kernel_constant(raw) -> dict:
    _object(raw, "", optional=("seed", "kernel"))
    seed = _integer(raw.get("seed", 0), "/seed", ge=0)
    node = _object(raw.get("kernel", {}), "/kernel",
                   optional=("tau_lo", "tau_hi", "sample_step", "radial_tol",
                             "cross_check"))
    tau_lo = _number(node.get("tau_lo", math.pi), "/kernel/tau_lo", gt=0.0)
    tau_hi = _number(node.get("tau_hi", 2.0 * math.pi), "/kernel/tau_hi",
                     gt=tau_lo, le=2.0 * math.pi)
    return {
        "seed": seed, "tau_lo": tau_lo, "tau_hi": tau_hi,
        "sample_step": _number(node.get("sample_step", 0.01),
                               "/kernel/sample_step", gt=0.0, le=1.0),
        "radial_tol": _number(node.get("radial_tol", 1e-7),
                              "/kernel/radial_tol", gt=0.0, le=1e-2),
        "cross_check": _boolean(node.get("cross_check", True),
                                "/kernel/cross_check"),
    }


PARSERS = {
    "bands": parse_bands,
    "check-condition": parse_check_condition,
    "find-gamma": parse_find_gamma,
    "verify-thomas": parse_verify_thomas,
    "verify-weighted": parse_verify_weighted,
    "gauge-bound": parse_gauge_bound,
    "kernel-constant": parse_kernel_constant,
}
