"""Command line runner: one subcommand per invocation, deterministic artifacts.

Every artifact starts with a header carrying the tool version, the seed and
the full validated configuration, and is written through a temporary file
and an atomic rename.  Exit codes: 0 success, 2 failed check or invalid
configuration, 3 numerical failure.  Failures print one JSON record on
stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from ._util import atomic_write_text, fmt, header_lines, seeded_rng

SUBCOMMANDS = ("simulate", "gauge-check", "norms", "classify", "kernels", "fixpoint", "divisors", "probe")
EXIT_OK, EXIT_CHECK, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    def __init__(self, parameter: str, message: str):
        super().__init__(f"{parameter}: {message}")
        self.parameter = parameter


class CheckFailed(AssertionError):
    def __init__(self, message: str, record: dict | None = None):
        super().__init__(message)
        self.record = record or {}


@dataclass
class RunConfig:
    """All knobs of a run; defaults are the documented ones."""

    subcommand: str = "simulate"
    n_max: int = 64
    dt: float = 1e-3
    T: float = 1.0
    p0: float = 3.0
    delta: float = 0.05
    A: float = 1.0
    seed: int = 0
    out: str = "out"
    multiplier: str = "unit"
    lam_extent: float = 200.0
    lam_spacing: float = 1.0
    # simulate / gauge-check
    preset: str = "plane-wave"
    wave_a: float = 0.5
    wave_k: int = 1
    amplitude: float = 0.1
    samples: int = 10
    # norms
    field: str = ""
    # classify
    K: int = 64
    # kernels
    kernel_delta: float = 10.0
    # fixpoint
    epsilon: float = 1e-3
    tol: float = 1e-12
    # divisors
    N_values: str = "128,256,512,1024"
    queries: int = 100
    # probe
    estimate: str = "trilinear"
    p_values: str = "2,3,4"
    n_values: str = "16,32,64"

    def echo(self) -> dict:
        return asdict(self)


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _coerce(name: str, raw):
    typ = _FIELDS[name].type
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        return str(raw)
    except (TypeError, ValueError):
        raise ConfigError(name, f"cannot read {raw!r} as {typ}") from None


def read_config_file(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(key, "unknown configuration key")
        out[key] = _coerce(key, value)
    return out


def _int_list(name: str, text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(name, f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise ConfigError(name, "empty list")
    return vals


def _float_list(name: str, text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(name, f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(name, "empty list")
    return vals


def validate(cfg: RunConfig) -> RunConfig:
    """Check every parameter before any computation; errors name the parameter."""
    from .norms import ladder

    if cfg.subcommand not in SUBCOMMANDS:
        raise ConfigError("subcommand", f"must be one of {', '.join(SUBCOMMANDS)}")
    if cfg.n_max < 1:
        raise ConfigError("n_max", "must be >= 1")
    if not cfg.dt > 0:
        raise ConfigError("dt", "must be > 0")
    if not cfg.T > 0:
        raise ConfigError("T", "must be > 0")
    try:
        ladder(cfg.p0, cfg.delta, cfg.A)
    except ValueError as e:
        msg = str(e)
        name = "delta" if msg.startswith("delta") or "theta" in msg else ("A" if msg.startswith("A") else "p0")
        raise ConfigError(name, msg) from None
    if not (cfg.lam_extent > 0 and cfg.lam_spacing > 0):
        raise ConfigError("lam_extent", "lambda grid extent and spacing must be > 0")
    if cfg.preset not in ("plane-wave", "random"):
        raise ConfigError("preset", "must be plane-wave or random")
    if cfg.samples < 1:
        raise ConfigError("samples", "must be >= 1")
    if cfg.K < 1:
        raise ConfigError("K", "must be >= 1")
    if cfg.kernel_delta == 0:
        raise ConfigError("kernel_delta", "must be non-zero")
    if not cfg.epsilon > 0:
        raise ConfigError("epsilon", "must be > 0")
    if cfg.subcommand == "fixpoint" and not cfg.T <= 1:
        raise ConfigError("T", "fixpoint needs 0 < T <= 1")
    if cfg.estimate not in ("trilinear", "EY_N", "EY_L"):
        raise ConfigError("estimate", "must be trilinear, EY_N or EY_L")
    if any(N < 1 for N in _int_list("N_values", cfg.N_values)):
        raise ConfigError("N_values", "scales must be >= 1")
    if any(n < 1 for n in _int_list("n_values", cfg.n_values)):
        raise ConfigError("n_values", "n_max values must be >= 1")
    if any(not p >= 2 for p in _float_list("p_values", cfg.p_values)):
        raise ConfigError("p_values", "p must be >= 2")
    if cfg.multiplier != "unit" and not Path(cfg.multiplier).is_file():
        raise ConfigError("multiplier", f"no such file {cfg.multiplier!r}")
    if cfg.field and not Path(cfg.field).is_file():
        raise ConfigError("field", f"no such file {cfg.field!r}")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dnls-lab", description=__doc__.split("\n\n")[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--n-max", dest="n_max", type=int)
    ap.add_argument("--dt", type=float)
    ap.add_argument("--T", dest="T", type=float)
    ap.add_argument("--p0", type=float)
    ap.add_argument("--delta", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out")
    ap.add_argument("--multiplier", help="'unit' or a multiplier table file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="any other configuration key (repeatable)")
    return ap


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Defaults, then the config file, then flags (flags win)."""
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config))
    for item in args.set:
        if "=" not in item:
            raise ConfigError(item, "expected KEY=VALUE")
        k, v = (s.strip() for s in item.split("=", 1))
        k = k.replace("-", "_")
        if k not in _FIELDS:
            raise ConfigError(k, "unknown configuration key")
        values[k] = _coerce(k, v)
    for k in ("n_max", "dt", "T", "p0", "delta", "seed", "out", "multiplier"):
        v = getattr(args, k)
        if v is not None:
            values[k] = v
    values["subcommand"] = args.subcommand
    return validate(RunConfig(**values))


# --------------------------------------------------------------------------
# subcommands


def _write(cfg: RunConfig, name: str, kind: str, body_lines: list[str]) -> str:
    text = "\n".join(header_lines(cfg.echo(), cfg.seed, kind) + body_lines) + "\n"
    path = atomic_write_text(Path(cfg.out) / name, text)
    return str(path)


def _lad(cfg: RunConfig):
    from .norms import ladder

    return ladder(cfg.p0, cfg.delta, cfg.A)


def _multiplier(cfg: RunConfig):
    from .interactions import load_multiplier, unit_multiplier

    return unit_multiplier(3) if cfg.multiplier == "unit" else load_multiplier(cfg.multiplier, 3)


def cmd_simulate(cfg: RunConfig) -> dict:
    from .solver import IntegratorConfig, exact_plane_wave, integrate_dnls, mass, smooth_random_field, time_series_csv

    icfg = IntegratorConfig(n_max=cfg.n_max, dt=cfg.dt, T=cfg.T)
    if cfg.preset == "plane-wave":
        if abs(cfg.wave_k) > cfg.n_max:
            raise ConfigError("wave_k", "must satisfy |wave_k| <= n_max")
        u0 = exact_plane_wave(cfg.wave_a, cfg.wave_k, 0.0, cfg.n_max)
    else:
        u0 = smooth_random_field(cfg.n_max, cfg.amplitude, cfg.seed, "cli/simulate")
    sol = integrate_dnls(u0, icfg)
    rows = time_series_csv(sol, cfg.p0)
    rec = {"slices": int(sol.nt)}
    if cfg.preset == "plane-wave":
        err = max(float(np.max(np.abs(sol.modes[i] - exact_plane_wave(cfg.wave_a, cfg.wave_k, t, cfg.n_max).modes)))
                  for i, t in enumerate(sol.times))
        rec["max_error"] = err
        rec["path"] = _write(cfg, "simulate.csv", "simulate", rows + [f"# max_error={fmt(err)}"])
        if not err <= 1e-6:
            raise CheckFailed(f"plane-wave error {err:.3g} exceeds 1e-6", rec)
    else:
        m = mass(sol.modes)
        drift = float(np.max(np.abs(m - m[0])) / m[0])
        rec["mass_drift"] = drift
        rec["path"] = _write(cfg, "simulate.csv", "simulate", rows + [f"# mass_drift={fmt(drift)}"])
        if not drift <= 1e-8:
            raise CheckFailed(f"mass drift {drift:.3g} exceeds 1e-8", rec)
    return rec


def cmd_gauge_check(cfg: RunConfig) -> dict:
    from .gauge import gauge_forward, gauge_inverse
    from .solver import IntegratorConfig, integrate_dnls, mass, smooth_random_field

    icfg = IntegratorConfig(n_max=cfg.n_max, dt=cfg.dt, T=cfg.T)
    rows = ["sample,roundtrip,l2_deviation,mass_drift"]
    worst = 0.0
    for j in range(cfg.samples):
        u0 = smooth_random_field(cfg.n_max, cfg.amplitude, cfg.seed, f"cli/gauge/{j}")
        u = integrate_dnls(u0, icfg)
        v = gauge_forward(u)
        back = gauge_inverse(v)
        n_u = np.sqrt(mass(u.modes))
        rt = float(np.max(np.sqrt(mass(back.modes - u.modes)) / n_u))
        l2 = float(np.max(np.abs(np.sqrt(mass(v.modes)) - n_u) / n_u))
        m = mass(u.modes)
        drift = float(np.max(np.abs(m - m[0])) / m[0])
        rows.append(f"{j},{fmt(rt)},{fmt(l2)},{fmt(drift)}")
        worst = max(worst, rt, l2)
    rec = {"worst": worst, "path": _write(cfg, "gauge_check.csv", "gauge-check", rows)}
    if not worst <= 1e-10:
        raise CheckFailed(f"gauge round trip / L2 deviation {worst:.3g} exceeds 1e-10", rec)
    return rec


def cmd_norms(cfg: RunConfig) -> dict:
    from .norms import fl_norm, named_space, norm_record, scaling_index, xsb_norm
    from .profiles import PHI
    from .solver import smooth_random_field
    from .spectral_core import LambdaGrid, free_evolution, load_field, time_grid, twist

    if cfg.field:
        f = load_field(Path(cfg.field).read_text(encoding="utf-8"))
    else:
        f = smooth_random_field(cfg.n_max, cfg.amplitude, cfg.seed, "cli/norms")
    lad = _lad(cfg)
    times = time_grid(-2.0, 2.0, min(cfg.dt, 2.0**-8))
    F = free_evolution(f, times).time_multiply(PHI(times))
    # the cutoff has support of length 4, so the spacing must not exceed pi / 4
    spacing = min(cfg.lam_spacing, np.pi / 4)
    grid = LambdaGrid(-cfg.lam_extent, cfg.lam_extent, spacing)
    tw = twist(F, grid)
    lines = [norm_record("H^1/2_p0", named_space("Y0", lad), fl_norm(f, 0.5, lad.p0),
                         {"scaling_index": scaling_index(0.5, lad.p0)})]
    vals = {}
    for name in ("Y0", "Y1", "Z0", "Z1"):
        spec = named_space(name, lad)
        vals[name] = xsb_norm(tw, spec)
        lines.append(norm_record(name, spec, vals[name], {"lam_extent": cfg.lam_extent,
                                                          "lam_spacing": spacing, "cutoff": "phi"}))
    return {"norms": vals, "path": _write(cfg, "norms.jsonl", "norms", lines)}


def cmd_classify(cfg: RunConfig) -> dict:
    from .interactions import verify_prop23

    rep = verify_prop23(cfg.K)
    rows = ["item,count,value,witness"]
    for r in rep.rows():
        rows.append(",".join(json.dumps(x) if isinstance(x, (tuple, list)) else
                             (fmt(x) if isinstance(x, float) else str(x)) for x in r))
    rows.append(f"overlaps,{rep.overlaps},,")
    rows.append(f"unclassified,{rep.unclassified},,")
    rows.append(f"delta_mismatch,{rep.delta_mismatch},,")
    violations = sum(len(v) for v in rep.violations.values())
    rec = {"K": cfg.K, "triples": rep.triples, "violations": violations,
           "path": _write(cfg, "classify.csv", "classify", rows)}
    if not rep.ok:
        raise CheckFailed("class partition or properties violated", rec)
    return rec


def cmd_kernels(cfg: RunConfig) -> dict:
    from .duhamel import fit_bounds, kernel_parts, kernel_table_text

    names = ("K", "Y", "Y_simple", "X", "X0", "Xplus")
    fits = fit_bounds(names, cfg.kernel_delta, extent=cfg.lam_extent, spacing=cfg.lam_spacing)
    rows = ["name,delta,constant,constant_refined,variation,stable"]
    for f in fits.values():
        rows.append(f"{f.name},{fmt(f.delta)},{fmt(f.constant)},{fmt(f.constant_refined)},"
                    f"{fmt(f.variation)},{int(f.stable)}")
    lam = np.arange(-20.0, 20.0 + 1e-9, 1.0)
    parts = kernel_parts(lam, lam, cfg.kernel_delta)
    table = kernel_table_text(parts, "K").rstrip("\n").split("\n")
    rec = {"paths": [_write(cfg, "kernel_bounds.csv", "kernels", rows),
                     _write(cfg, "kernel_K.txt", "kernel-table", table)],
           "unstable": [f.name for f in fits.values() if not f.stable]}
    if rec["unstable"]:
        raise CheckFailed("fitted kernel constants vary by 2x or more under grid doubling", rec)
    return rec


def cmd_fixpoint(cfg: RunConfig) -> dict:
    from .paracontrolled import log_text, manifold_membership, picard_solve_w
    from .solver import smooth_random_field

    lad = _lad(cfg)
    M3 = _multiplier(cfg)
    v0 = smooth_random_field(cfg.n_max, cfg.epsilon, cfg.seed, "cli/fixpoint")
    pair = picard_solve_w(v0, lad, T=min(cfg.T, 1.0), tol=cfg.tol, M3=M3)
    mem = manifold_membership(pair.v, tol=cfg.tol, M=M3, lad=lad)
    diff = float(np.max(np.abs(mem.w.modes - pair.w.modes))) if mem.w is not None else math.inf
    rows = log_text(pair.log).rstrip("\n").split("\n")
    rows.append(f"# converged={int(pair.converged)} residual={fmt(pair.residual)} "
                f"membership={int(mem.is_member)} w_recovery={fmt(diff)} "
                f"structural_only={int(pair.structural_only)}")
    rec = {"converged": pair.converged, "residual": pair.residual, "member": mem.is_member,
           "w_recovery": diff, "path": _write(cfg, "fixpoint_log.csv", "fixpoint", rows)}
    if not pair.converged:
        raise CheckFailed("outer iteration did not reach the tolerance", rec)
    return rec


def cmd_divisors(cfg: RunConfig) -> dict:
    from .number_theory import (EisensteinInt, check_identities, count_system_solutions,
                                divisors_in_ball, growth_fit, max_count_ensemble, naive_divisors_in_ball)

    rng = seeded_rng(cfg.seed, "cli/divisors")
    mismatches = 0
    rows = ["ring,k,q,rho,count,naive_count"]
    for _ in range(cfg.queries):
        k = int(rng.integers(1, 10**5)) * int(rng.choice([-1, 1]))
        q = int(rng.integers(-200, 201))
        rho = int(rng.integers(1, 400))
        fast = sorted(divisors_in_ball("Z", k, q, rho))
        slow = sorted(naive_divisors_in_ball("Z", k, q, rho))
        mismatches += fast != slow
        rows.append(f"Z,{k},{q},{rho},{len(fast)},{len(slow)}")
    for _ in range(max(1, cfg.queries // 10)):
        while True:
            a, b = (int(x) for x in rng.integers(-60, 61, 2))
            k = EisensteinInt(a, b)
            if 0 < k.norm() <= 10**4:
                break
        q = EisensteinInt(*(int(x) for x in rng.integers(-20, 21, 2)))
        rho = int(rng.integers(1, 60))
        fast = sorted(divisors_in_ball("Zomega", k, q, rho))
        slow = sorted(naive_divisors_in_ball("Zomega", k, q, rho))
        mismatches += fast != slow
        rows.append(f"Zomega,\"{k}\",\"{q}\",{rho},{len(fast)},{len(slow)}")
    Ns = _int_list("N_values", cfg.N_values)
    sys_rows, counts, ident_fail = [], [], 0
    for N in Ns:
        best, spec = max_count_ensemble(N, (1, 1, -1), 8, rng)
        counts.append((N, max(best, 1)))
        sys_rows.append((spec, best))
        _, wit = count_system_solutions(spec)
        res = check_identities(spec, wit)
        ident_fail += res["a"][1] + res["b"][1] + res["c"][1]
        # all-plus pattern exercises the Eisenstein factorisation
        _, spec_c = max_count_ensemble(N, (1, 1, 1), 2, rng)
        _, w2 = count_system_solutions(spec_c)
        ident_fail += check_identities(spec_c, w2)["c"][1]
    slope = growth_fit(counts) if len(counts) >= 4 else math.nan
    from .number_theory import systems_csv_rows

    rec = {"mismatches": int(mismatches), "identity_failures": int(ident_fail), "slope": slope,
           "paths": [_write(cfg, "divisor_queries.csv", "divisors", rows),
                     _write(cfg, "systems.csv", "systems",
                            systems_csv_rows(sys_rows) + [f"# growth_slope={fmt(slope)}"])]}
    if mismatches or ident_fail:
        raise CheckFailed("divisor oracle mismatch or identity failure", rec)
    return rec


def cmd_probe(cfg: RunConfig) -> dict:
    from .probes import ey_bound_probe, trilinear_probe

    lad = _lad(cfg)
    ns = _int_list("n_values", cfg.n_values)
    if cfg.estimate == "trilinear":
        rep = trilinear_probe(_float_list("p_values", cfg.p_values), ns, cfg.samples, cfg.seed, lad)
        gated = [p for p in rep.slopes if p < 4]
    else:
        rep = ey_bound_probe(cfg.estimate[-1], ns, cfg.samples, cfg.seed, lad)
        gated = list(rep.slopes)
    body = rep.csv().rstrip("\n").split("\n")
    body.append("# constants are lower bounds for the operator norms (max over the declared ensemble)")
    growth = {fmt(p): rep.growth(p) for p in gated}
    rec = {"slopes": {fmt(p): s for p, s in rep.slopes.items()}, "growth": growth,
           "path": _write(cfg, f"probe_{cfg.estimate}.csv", "probe", body)}
    if any(g > 2.0 for gs in growth.values() for g in gs):
        raise CheckFailed("empirical constant more than doubled under n_max doubling", rec)
    return rec


COMMANDS = {
    "simulate": cmd_simulate,
    "gauge-check": cmd_gauge_check,
    "norms": cmd_norms,
    "classify": cmd_classify,
    "kernels": cmd_kernels,
    "fixpoint": cmd_fixpoint,
    "divisors": cmd_divisors,
    "probe": cmd_probe,
}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _error(kind: str, code: int, message: str, **extra) -> int:
    rec = {"status": "error", "kind": kind, "exit_code": code, "message": message}
    rec.update(_jsonable(extra))
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return code


def run(cfg: RunConfig) -> int:
    try:
        rec = COMMANDS[cfg.subcommand](cfg)
    except ConfigError as e:
        return _error("config", EXIT_CHECK, str(e), parameter=e.parameter)
    except CheckFailed as e:
        return _error("check", EXIT_CHECK, str(e), record=e.record)
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        return _error("numeric", EXIT_NUMERIC, str(e), type=type(e).__name__)
    except ValueError as e:
        # module preconditions that only surface once data exists
        return _error("precondition", EXIT_CHECK, str(e), type=type(e).__name__)
    print(json.dumps({"status": "ok", "subcommand": cfg.subcommand, **_jsonable(rec)}, sort_keys=True))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as e:
        return _error("config", EXIT_CHECK, str(e), parameter=e.parameter)
    except OSError as e:
        return _error("config", EXIT_CHECK, str(e), parameter="config")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
