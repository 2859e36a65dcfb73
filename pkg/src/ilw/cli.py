"""Command-line driver: ``ilw wave|speed-scan|stability|evolve|verify-all``.

Options may also come from a flat ``key = value`` file given with
``--config``; explicit flags win over the file.  Exit codes: 0 when every
assertion passes, 1 on an assertion or numerical failure, 2 on invalid input.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time

import numpy as np

from . import acceptance
from . import evolve as ev
from . import krein as kr
from . import linop as lo
from . import wave as wv
from .errors import (AdmissibilityError, BlowUpError, DomainError, ILWError, RootNotFoundError,
                     ShapeError, WindowError)
from .svg import line_plot

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "L": math.pi,
    "delta": 1.0,
    "k": 0.5,
    "k_range": None,
    "N": 256,
    "dt": None,          # command specific, see _dt_default
    "t_end": None,
    "eps": 1e-3,
    "mode": 2,
    "record_every": None,
    "M": 40,
    "out": "ilw-output",
    "json": False,
    "criteria": None,
}
# per-command defaults for the time-stepping options
EVOLVE_DT, EVOLVE_T = acceptance.CONSERVATION_DT, acceptance.CONSERVATION_T

KEY_ALIASES = {"t-end": "t_end", "k-range": "k_range", "record-every": "record_every"}


class InputError(Exception):
    pass


# -- formatting -----------------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits, the CSV/JSON float format."""
    return format(float(x), ".17g")


def _json_value(v, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        import json
        return json.dumps(v)
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        items = [_json_value(x, indent, level + 1) for x in v]
        return "[\n" + ",\n".join(pad + s for s in items) + "\n" + end + "]"
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{_json_value(str(k), indent, level + 1)}: {_json_value(v[k], indent, level + 1)}"
                 for k in sorted(v)]
        return "{\n" + ",\n".join(pad + s for s in items) + "\n" + end + "}"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, 17-digit floats, non-finite floats as null."""
    return _json_value(obj, indent, 0) + "\n"


def write_csv(path: str, header: list[str], rows, comments: dict | None = None):
    with open(path, "w", newline="") as fh:
        for key in sorted(comments or {}):
            fh.write(f"# {key}={fmt(comments[key])}\r\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


class Report:
    """Collects inputs, outputs and assertions of one command."""

    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.outputs: dict = {}
        self.assertions: list[dict] = []
        self._t0 = time.perf_counter()

    def check(self, name: str, passed: bool, value, tolerance):
        self.assertions.append({"name": name, "pass": bool(passed), "value": value,
                                "tolerance": tolerance})

    @property
    def passed(self) -> bool:
        return all(a["pass"] for a in self.assertions)

    def as_dict(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "outputs": self.outputs,
                "assertions": self.assertions,
                "wall_ms": round(1000.0 * (time.perf_counter() - self._t0), 3)}


# -- configuration ----------------------------------------------------------------

def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config file: {exc}") from exc
    for i, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{i}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = KEY_ALIASES.get(key, key.replace("-", "_"))
        if key not in DEFAULTS or key == "json":
            raise InputError(f"{path}:{i}: unknown key {key!r}")
        out[key] = val
    return out


_CASTS = {"L": float, "delta": float, "k": float, "N": int, "dt": float, "t_end": float,
          "eps": float, "mode": int, "record_every": int, "M": int}


def _cast(key, val):
    if val is None or key not in _CASTS:
        return val
    try:
        return _CASTS[key](val)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid value for {key}: {val!r}") from exc


def parse_k_range(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise InputError(f"--k-range expects a:b:n, got {text!r}") from exc
    if n < 1 or not (a <= b):
        raise InputError(f"bad k-range {text!r}")
    return np.linspace(a, b, n)


def resolve(args: argparse.Namespace) -> dict:
    """defaults < config file < flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    for key in list(cfg):
        cfg[key] = _cast(key, cfg[key])
    if isinstance(cfg["json"], str):
        cfg["json"] = cfg["json"].lower() in ("1", "true", "yes")
    if not (cfg["L"] > 0 and math.isfinite(cfg["L"])):
        raise InputError("L must be positive")
    if not (cfg["delta"] > 0 and math.isfinite(cfg["delta"])):
        raise InputError("delta must be positive")
    if cfg["N"] < 8 or cfg["N"] % 2:
        raise InputError("N must be an even integer >= 8")
    return cfg


def _inputs(cfg, keys):
    return {k: cfg[k] for k in keys}


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


# -- commands ---------------------------------------------------------------------

def cmd_wave(cfg) -> Report:
    L, d, k, N = cfg["L"], cfg["delta"], cfg["k"], cfg["N"]
    rep = Report("wave", _inputs(cfg, ["L", "delta", "k", "N"]))
    pr = wv.make_profile(L, d, k, N)
    p = pr.params
    x = pr.grid.x
    ell = pr.samples
    fou = wv.fourier_samples(p, x)
    diff = np.abs(ell - fou)
    k1 = wv.admissible_kmax(L, d)
    meta = {"c": p.c, "A": p.A, "a": p.a, "sigma": p.sigma, "k1": k1}
    rep.outputs.update(meta)
    res = wv.residual_travkdv(p, N)
    rep.outputs["residual"] = res
    rep.outputs["max_abs_diff"] = float(diff.max())
    rep.outputs["trough_index"] = int(np.argmin(ell))
    rep.check("elliptic vs Fourier max abs diff", diff.max() < 1e-9, float(diff.max()), 1e-9)
    rep.check("traveling-wave residual", res < 1e-8, res, 1e-8)
    even = float(np.max(np.abs(ell - lo.reflect(ell))))
    rep.check("profile even", even < 1e-12, even, 1e-12)
    rep.check("trough at L/2", int(np.argmin(ell)) == N // 2, int(np.argmin(ell)), N // 2)
    out = _ensure_dir(cfg["out"])
    write_csv(os.path.join(out, "wave.csv"), ["x", "phi_elliptic", "phi_fourier", "abs_diff"],
              zip(x, ell, fou, diff), comments=meta)
    with open(os.path.join(out, "wave.svg"), "w") as fh:
        fh.write(line_plot([("phi (elliptic)", x, ell)],
                           title=f"wave profile, L={L:.5g}, delta={d:.5g}, k={k:.5g}",
                           xlabel="x", ylabel="phi"))
    return rep


def _scan_grid(cfg) -> np.ndarray:
    k1 = wv.admissible_kmax(cfg["L"], cfg["delta"])
    ks = parse_k_range(cfg["k_range"]) if cfg["k_range"] else np.linspace(0.01, k1 - 0.01, 50)
    if ks[0] < 1e-4 or ks[-1] > k1 - 1e-4:
        raise InputError(f"k-range must lie inside [1e-4, k1 - 1e-4] = [1e-4, {k1 - 1e-4:.9f}]")
    return ks


def cmd_speed_scan(cfg) -> Report:
    L, d = cfg["L"], cfg["delta"]
    ks = _scan_grid(cfg)
    rep = Report("speed-scan", dict(_inputs(cfg, ["L", "delta"]), k_range=[ks[0], ks[-1], ks.size]))
    rows = []
    for k in ks:
        p = wv.wave_params(L, d, float(k))
        rows.append([k, p.c, wv.dc_dk(L, d, float(k)), wv.norm_squared_series(p), wv.dN_dk(p),
                     p.a, -float(wv.profile_elliptic(0.5 * L, p)),
                     2 * math.pi / L * wv.admissibility_ratio(L, d, float(k))])
    arr = np.array(rows)
    k1 = wv.admissible_kmax(L, d)
    try:
        k0 = wv.speed_root_k0(L, d)
    except RootNotFoundError:
        k0 = None
    rep.outputs.update({"k0": k0, "k1": k1, "n_rows": len(rows)})
    rep.check("c'(k) > 0 on all rows", bool(np.all(arr[:, 2] > 0)), float(arr[:, 2].min()), 0.0)
    rep.check("N'(k) > 0 on all rows", bool(np.all(arr[:, 4] > 0)), float(arr[:, 4].min()), 0.0)
    margin = arr[:, 5] - arr[:, 6]
    rep.check("a(k) > -phi(L/2) on all rows", bool(np.all(margin > 0)), float(margin.min()), 0.0)
    margin_v = arr[:, 5] - arr[:, 7]
    rep.check("a(k) > (2 pi/L) v on all rows", bool(np.all(margin_v > 0)), float(margin_v.min()), 0.0)
    out = _ensure_dir(cfg["out"])
    write_csv(os.path.join(out, "speed_scan.csv"),
              ["k", "c", "dc_dk", "N", "dN_dk", "a", "minus_phi_half_period"],
              (r[:7] for r in rows))
    with open(os.path.join(out, "speed_scan.svg"), "w") as fh:
        fh.write(line_plot([("c(k)", arr[:, 0], arr[:, 1]), ("a(k)", arr[:, 0], arr[:, 5]),
                            ("-phi(L/2)", arr[:, 0], arr[:, 6])],
                           title="speed and Galilean shift", xlabel="k"))
    return rep


def cmd_stability(cfg) -> Report:
    L, d, k, N, M = cfg["L"], cfg["delta"], cfg["k"], cfg["N"], cfg["M"]
    rep = Report("stability", _inputs(cfg, ["L", "delta", "k", "N", "M"]))
    pr = wv.make_profile(L, d, k, N)
    p = pr.params
    spec = lo.spectrum_report(pr, N)
    rep.outputs["spectrum"] = {"lowest_eigenvalues": spec.eigenvalues[:6], "n_neg": spec.n_neg,
                               "n_zero": spec.n_zero, "kernel_residual": spec.kernel_residual,
                               "kernel_alignment": spec.kernel_alignment, "gap": spec.gap,
                               "truncation_drift": spec.truncation_drift, "tol": spec.tol,
                               "negative_parity": spec.negative_parity,
                               "zero_parity": spec.zero_parity}
    rep.check("one negative eigenvalue", spec.n_neg == 1, spec.n_neg, 1)
    rep.check("one-dimensional kernel", spec.n_zero == 1, spec.n_zero, 1)
    rep.check("kernel residual", spec.kernel_residual < 1e-6, spec.kernel_residual, 1e-6)
    try:
        sh = lo.galilean_shift(pr)
        rep.outputs["galilean"] = {"a": sh.a, "sigma": sh.sigma, "residual": sh.residual,
                                   "min_refined": sh.min_refined}
        rep.check("shifted wave positive", True, sh.min_refined, 0.0)
        rep.check("shifted equation residual", sh.residual < 1e-8, sh.residual, 1e-8)
        pf = lo.pf2_check_profile(pr, M)
        rep.outputs["pf2"] = {"window": M, "min_minor": pf.min_minor,
                              "min_strict_minor": pf.min_strict_minor,
                              "violations": pf.n_violations}
        rep.check("PF(2) minors", pf.passed, pf.n_violations, 0)
    except lo.PF2PreconditionError as exc:
        rep.check(f"shifted wave positive ({exc})", False, math.nan, 0.0)
    kre = kr.krein_report(pr, N)
    e = kre.extras
    rep.outputs["krein"] = {"I_direct": kre.I_direct, "I_closed": kre.I_closed, "D": kre.D,
                            "D_closed": e["D_closed"], "detD_direct": kre.detD_direct,
                            "detD_closed": kre.detD_closed, "n_L": kre.n_L, "n_I": kre.n_I,
                            "n_D": kre.n_D, "K_Ham": kre.K_Ham, "p3_closed": kre.p3_value,
                            "p3_direct": e["p3_direct"], "verdict": kre.verdict.value,
                            "reasons": list(kre.reasons), "dN_dc": e["dN_dc"], "c": p.c}
    standing = abs(p.c) < kr.C_ZERO
    rep.outputs["inconclusive_standing_wave"] = standing
    rep.check("I > 0", kre.I_direct > 0, kre.I_direct, 0.0)
    rep.check("det D < 0", kre.detD_direct < 0, kre.detD_direct, 0.0)
    rel_I = abs(kre.I_direct - kre.I_closed) / abs(kre.I_closed)
    rep.check("I direct vs closed (rel)", rel_I < 1e-5, rel_I, 1e-5)
    rel_D = abs(kre.detD_direct - kre.detD_closed) / abs(kre.detD_closed)
    rep.check("det D direct vs closed (rel)", rel_D < 1e-4, rel_D, 1e-4)
    rep.check("P3 < 0", e["p3_direct"] < 0, e["p3_direct"], 0.0)
    if not standing:
        rep.check("K_Ham = 0", kre.K_Ham == 0, kre.K_Ham, 0)
        rep.check("verdict LinearlyStable", kre.verdict == kr.Verdict.STABLE,
                  kre.verdict.value, kr.Verdict.STABLE.value)
    out = _ensure_dir(cfg["out"])
    with open(os.path.join(out, "stability.json"), "w") as fh:
        fh.write(dumps(rep.as_dict()))
    return rep


def cmd_evolve(cfg) -> Report:
    L, d, k, N = cfg["L"], cfg["delta"], cfg["k"], cfg["N"]
    dt = cfg["dt"] if cfg["dt"] is not None else EVOLVE_DT
    T = cfg["t_end"] if cfg["t_end"] is not None else EVOLVE_T
    every = cfg["record_every"] or max(1, int(round(0.1 / dt)))
    eps = cfg["eps"]
    inputs = dict(_inputs(cfg, ["L", "delta", "k", "N", "eps", "mode"]), dt=dt, t_end=T,
                  record_every=every)
    rep = Report("evolve", inputs)
    pr = wv.make_profile(L, d, k, N)
    config = ev.SimConfig(pr.grid, d, dt, T, record_every=every)
    config.n_steps  # validates t_end / dt
    out = _ensure_dir(cfg["out"])
    try:
        r = ev.stability_experiment(pr, ev.Perturbation(eps, cfg["mode"]), config)
    except BlowUpError as exc:
        last = exc.last_state
        if last is not None:
            write_csv(os.path.join(out, "evolve_last_state.csv"), ["x", "u"],
                      zip(last.field.grid.x, last.field.samples), comments={"t": last.t})
        raise
    write_csv(os.path.join(out, "evolve.csv"), ["t", "rho_W", "E_minus1", "E_0", "E_1", "M_k"],
              zip(r.t, r.rho_W, r.E_minus1, r.E_0, r.E_1, r.M_k))
    with open(os.path.join(out, "evolve.svg"), "w") as fh:
        fh.write(line_plot([("rho_W", r.t, r.rho_W)], title="orbit distance", xlabel="t"))
    rep.outputs.update({"sup_rho_W": r.sup_rho, "drift_E0": r.drift_E0, "drift_E1": r.drift_E1,
                        "drift_E_minus1": r.drift_Em1, "drift_M_k": r.drift_Mk,
                        "n_records": int(r.t.size)})
    bound = 10 * eps if eps > 0 else 1e-6
    rep.check("sup rho_W", r.sup_rho <= bound, r.sup_rho, bound)
    rep.check("E_0 relative drift", r.drift_E0 < 1e-8, r.drift_E0, 1e-8)
    rep.check("E_1 relative drift", r.drift_E1 < 1e-8, r.drift_E1, 1e-8)
    rep.check("E_-1 absolute drift", r.drift_Em1 < 1e-12, r.drift_Em1, 1e-12)
    rep.check("M_k relative drift", r.drift_Mk < 1e-8, r.drift_Mk, 1e-8)
    return rep


def cmd_verify_all(cfg) -> Report:
    rep = Report("verify-all", {"criteria": cfg["criteria"] or "all"})
    wanted = None
    if cfg["criteria"]:
        try:
            wanted = {int(s) for s in str(cfg["criteria"]).split(",")}
        except ValueError as exc:
            raise InputError("--criteria expects a comma-separated list of numbers") from exc
        if not wanted <= {c[0] for c in acceptance.CRITERIA}:
            raise InputError("unknown criterion number")
    quiet = cfg["json"]
    for num, title, fn in acceptance.CRITERIA:
        if wanted is not None and num not in wanted:
            continue
        checks = fn()
        ok = all(c.passed for c in checks)
        if not quiet:
            print(f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {title}")
        for c in checks:
            rep.check(f"{num}: {c.name}", c.passed, c.value, c.tolerance)
            if not quiet:
                print("        " + c.line())
    out = _ensure_dir(cfg["out"])
    with open(os.path.join(out, "verify_all.json"), "w") as fh:
        fh.write(dumps(rep.as_dict()))
    return rep


COMMANDS = {"wave": cmd_wave, "speed-scan": cmd_speed_scan, "stability": cmd_stability,
            "evolve": cmd_evolve, "verify-all": cmd_verify_all}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ilw", description="Periodic traveling waves of the ILW equation.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "wave": "profile by both routes (CSV, SVG)",
        "speed-scan": "c, c', N, N', a, -phi(L/2) over a k-range (CSV, SVG)",
        "stability": "spectrum, PF(2), Krein index and verdict (JSON)",
        "evolve": "perturbed-wave evolution, orbit distance, invariants (CSV, SVG)",
        "verify-all": "run the acceptance checks",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--L", type=float, help="period (default pi)")
        p.add_argument("--delta", type=float, help="depth parameter (default 1)")
        p.add_argument("--k", type=float, help="elliptic modulus (default 0.5)")
        p.add_argument("--k-range", dest="k_range", help="a:b:n for speed-scan "
                       "(default 50 points on [0.01, k1 - 0.01])")
        p.add_argument("--N", type=int, help="grid size (default 256)")
        p.add_argument("--dt", type=float, help=f"time step for evolve (default {EVOLVE_DT:g})")
        p.add_argument("--t-end", dest="t_end", type=float,
                       help=f"final time for evolve (default {EVOLVE_T:g})")
        p.add_argument("--eps", type=float, help="perturbation amplitude for evolve (default 1e-3)")
        p.add_argument("--mode", type=int, help="perturbation mode, eps cos(2 pi mode x / L) (default 2)")
        p.add_argument("--record-every", dest="record_every", type=int,
                       help="steps between records (default: every 0.1 time units)")
        p.add_argument("--M", type=int, help="PF(2) window (default 40)")
        p.add_argument("--criteria", help="verify-all: comma-separated criterion numbers")
        p.add_argument("--out", help="output directory (default ./ilw-output)")
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = resolve(args)
        rep = COMMANDS[args.command](cfg)
    except (InputError, AdmissibilityError, DomainError, ShapeError, WindowError) as exc:
        print(f"ilw {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BlowUpError, ILWError, ArithmeticError) as exc:
        print(f"ilw {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    data = rep.as_dict()
    if cfg["json"]:
        sys.stdout.write(dumps(data))
    else:
        for a in rep.assertions:
            status = "PASS" if a["pass"] else "FAIL"
            print(f"{status}  {a['name']}: value={a['value']!s} tolerance={a['tolerance']!s}")
        print(f"{args.command}: {'all assertions passed' if rep.passed else 'FAILED'} "
              f"({data['wall_ms']:.0f} ms)")
    if args.command in ("wave", "speed-scan", "evolve"):
        with open(os.path.join(cfg["out"], args.command.replace("-", "_") + ".json"), "w") as fh:
            fh.write(dumps(data))
    if not rep.passed:
        failed = [a["name"] for a in rep.assertions if not a["pass"]]
        print(f"ilw {args.command}: failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
