"""Command-line entry point.

Every command reads one JSON config (``--config``) describing a graph, its
couplings and a time grid, and writes CSV or JSON to ``--out`` (stdout when
omitted). Exit codes: 0 success, 1 validation failure or bad input,
2 theorem-precondition failure under ``--strict``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import report
from .bounds import BoundError, BoundReport, OutsideValidity, evaluate_bounds, verify_power_support
from .couplings import AlgebraicDecay, build_couplings, derived_scales, spectral_norms
from .dynamics import (
    KINDS,
    SeriesRangeError,
    kernels,
    kernels_series,
    kernels_spectral,
    propagator,
    symplectic_form,
)
from .experiments import KGConfig, kg_lightcone_scan, ordered_map, tightness_sweep
from .graph import UNREACHABLE, build_graph, dimension_profile
from .weyl import (
    WeylDescriptor,
    surface_inputs,
    weyl_bound_pairwise,
    weyl_bound_surface,
    weyl_commutator_norm_exact,
    weyl_phase,
)
COMMANDS = ("kernels", "bounds", "weyl", "kg-scan", "tightness", "verify")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    config: dict
    out: str | None
    format: str
    tol: float
    jobs: int
    strict: bool
    seed: int | None


def parse_times(spec) -> list[float]:
    if spec is None:
        return [0.0]
    if isinstance(spec, dict):
        start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    return [float(t) for t in spec]


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _instance(cfg: dict):
    if "graph" not in cfg or "couplings" not in cfg:
        raise UsageError("config needs 'graph' and 'couplings'")
    g = build_graph(cfg["graph"])
    cp = build_couplings(g, cfg["couplings"])
    return g, cp


def _theorems(cfg: dict, cp) -> list[str]:
    if "theorems" in cfg:
        return list(cfg["theorems"])
    if isinstance(cp.locality, AlgebraicDecay):
        return ["T5"]
    return ["T1", "T2", "T3", "T4"] if cp.p_is_identity else ["T1", "T2"]


def _write(rc: RunConfig, text: str):
    if rc.out:
        Path(rc.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- commands --------------------------------------------------------------

def cmd_kernels(rc: RunConfig) -> int:
    _, cp = _instance(rc.config)
    times = parse_times(rc.config.get("times"))
    ks = ordered_map(lambda t: kernels(cp, t, rc.tol), times, rc.jobs)
    if rc.format == "json":
        _write(rc, "[" + ",\n".join(report.kernels_json(k).strip() for k in ks) + "]\n")
        return 0
    rows = []
    for k in ks:
        _, kr = report.table_of(k)
        rows.extend((k.t,) + r for r in kr)
    _write(rc, report.render_csv(("t", "i", "j", "kind", "value"), rows))
    return 0


def _bounds_report(rc: RunConfig) -> BoundReport:
    _, cp = _instance(rc.config)
    times = parse_times(rc.config.get("times"))
    return tightness_sweep(
        cp, times, _theorems(rc.config, cp), dimension=rc.config.get("dimension"),
        tol=rc.tol, jobs=rc.jobs, scale=float(rc.config.get("bound_scale", 1.0)),
    )


def _emit(rc: RunConfig, obj, extra: dict | None = None):
    cols, rows = report.table_of(obj)
    if rc.format == "csv":
        _write(rc, report.render_csv(cols, rows))
    else:
        _write(rc, report.render_json(cols, rows, extra))


_CONE_REASONS = ("outside the cone", "cone form needs d > 0", "pp cone form degenerates")


def hypothesis_failures(rep: BoundReport) -> list:
    """Rows whose bound is missing for a reason other than cone membership."""
    return [r for r in rep.rows if r.reason and not r.reason.startswith(_CONE_REASONS)]


def _strict_check(rc: RunConfig, rep: BoundReport) -> int:
    if rc.strict:
        bad = hypothesis_failures(rep)
        if bad:
            r = bad[0]
            print(f"precondition failed ({len(bad)} rows), first: {r.theorem} {r.kind} "
                  f"i={r.i} j={r.j}: {r.reason}", file=sys.stderr)
            return 2
    return 0


def cmd_bounds(rc: RunConfig) -> int:
    rep = _bounds_report(rc)
    _emit(rc, rep)
    return _strict_check(rc, rep)


def cmd_tightness(rc: RunConfig) -> int:
    rep = _bounds_report(rc)
    summary = rep.summary()
    _emit(rc, rep, summary if rc.format == "json" else None)
    print(" ".join(f"{k}={report.fmt(v)}" for k, v in summary.items()), file=sys.stderr)
    for r in rep.violations[:10]:
        print(f"VIOLATION {r.theorem} {r.kind} i={r.i} j={r.j} t={report.fmt(r.t)} "
              f"exact={report.fmt(r.exact)} bound={report.fmt(r.bound)}", file=sys.stderr)
    code = _strict_check(rc, rep)
    return code or (1 if rep.violations else 0)


def _weyl_scenarios(cfg: dict):
    out = []
    for sc in cfg.get("weyl", []):
        out.append((WeylDescriptor(sc["support"], sc["xi"]), WeylDescriptor(sc["support_prime"], sc["xi_prime"])))
    if not out:
        raise UsageError("config has no 'weyl' scenarios")
    return out


def _weyl_rows(cp, scenarios, t, dimension, tol):
    g = cp.graph
    k = kernels(cp, t, tol)
    scales = derived_scales(cp, t)
    dp = dimension_profile(g, dimension)
    rows = []
    for idx, (w, w2) in enumerate(scenarios):
        phi = weyl_phase(w, w2, k)
        exact = weyl_commutator_norm_exact(phi)
        pair = weyl_bound_pairwise(w, w2, k)
        inp = surface_inputs(g, w, w2, dp, cp.R)
        try:
            surf = weyl_bound_surface(inp, scales, w.norm, w2.norm)
        except OutsideValidity:
            surf = math.inf
        slack = w.norm * w2.norm * len(w.support) * len(w2.support) * 4 * k.certified_error
        rows.append((idx, t, scales.tau, inp.dist, phi, exact, pair, surf, slack))
    return rows


WEYL_COLUMNS = ("scenario", "t", "tau", "dist", "phase", "exact", "pairwise", "surface", "slack")


def cmd_weyl(rc: RunConfig) -> int:
    _, cp = _instance(rc.config)
    scen = _weyl_scenarios(rc.config)
    times = parse_times(rc.config.get("times"))
    dim = int(rc.config.get("dimension", 1))
    blocks = ordered_map(lambda t: _weyl_rows(cp, scen, t, dim, rc.tol), times, rc.jobs)
    rows = [r for b in blocks for r in b]
    _emit(rc, (WEYL_COLUMNS, rows))
    return 0


def kg_config_from(cfg: dict) -> tuple[KGConfig, tuple[int, ...]]:
    kg = cfg.get("kg", cfg)
    Ns = kg.get("N", [8, 16, 32, 64])
    Ns = tuple(int(n) for n in (Ns if isinstance(Ns, list) else [Ns]))
    base = dict(D=int(kg.get("D", 1)), N=Ns[0], m=float(kg.get("m", 0.0)), x=Fraction(str(kg.get("x", "1/4"))))
    if "t_grid" in kg:
        base["t_grid"] = tuple(parse_times(kg["t_grid"]))
    return KGConfig(**base), Ns


def cmd_kg_scan(rc: RunConfig) -> int:
    cfg, Ns = kg_config_from(rc.config)
    table = kg_lightcone_scan(cfg, Ns, jobs=rc.jobs)
    _emit(rc, table)
    return 0


# --- verify ----------------------------------------------------------------

def _status(name: str, ok: bool | None, worst: float | None = None, note: str = "") -> tuple[str, bool | None]:
    label = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
    line = f"{label} {name}"
    if worst is not None:
        line += f" worst={report.fmt(float(worst))}"
    if note:
        line += f" ({note})"
    print(line)
    return name, ok


def verify(cfg: dict, tol: float = 1e-10, jobs: int = 1) -> bool:
    """Run the invariant suite on the configured instance; True when nothing fails."""
    g, cp = _instance(cfg)
    times = parse_times(cfg.get("times"))
    results = []
    n = g.n

    d = g.dist
    finite = np.where(d >= UNREACHABLE, UNREACHABLE, d)
    tri = True
    if n <= 64:
        tri = bool((finite[:, None, :] <= finite[:, :, None] + finite[None, :, :]).all())
    results.append(_status("graph-metric", bool((d == d.T).all() and (np.diag(d) == 0).all() and tri)))

    sym = bool(np.array_equal(cp.X, cp.X.T) and np.array_equal(cp.P, cp.P.T))
    results.append(_status("couplings-symmetric", sym))

    if cp.R is not None:
        ok = verify_power_support(g, cp.X, cp.R, 6) and verify_power_support(g, cp.P, cp.R, 6)
        results.append(_status("power-support", ok))
    else:
        results.append(_status("power-support", None, note="no finite range"))

    k0 = kernels(cp, 0.0, tol)
    eye = np.eye(n)
    dev0 = max(
        float(np.abs(k0.cxx).max()), float(np.abs(k0.cpp).max()),
        float(np.abs(k0.cxp + eye).max()), float(np.abs(k0.cpx - eye).max()),
    )
    results.append(_status("kernels-at-zero", dev0 <= max(k0.certified_error, 1e-14), dev0))

    norms = spectral_norms(cp)

    def per_time(t):
        out = {}
        try:
            k = kernels(cp, t, tol)
        except SeriesRangeError as exc:
            return {"error": str(exc)}
        out["k"] = k
        tau = norms.tau_rate * abs(t)
        if cp.p_is_identity and tau <= 30:
            try:
                ks = kernels_series(cp, t, tol=max(tol, 1e-9), norms=norms)
                ksp = kernels_spectral(cp, t)
                diff = max(float(np.abs(ks.matrix(kd) - ksp.matrix(kd)).max()) for kd in KINDS)
                out["dual"] = (diff, max(1e-10, ks.certified_error + ksp.certified_error))
            except SeriesRangeError as exc:
                out["dual_skip"] = str(exc)
        else:
            out["dual_skip"] = "P != 1" if not cp.p_is_identity else f"tau={tau:.3g} beyond series range"
        try:
            km = kernels(cp, -t, tol)
            err = k.certified_error + km.certified_error
            par = max(
                float(np.abs(km.cxx + k.cxx).max()), float(np.abs(km.cpp + k.cpp).max()),
                float(np.abs(km.cxp - k.cxp).max()), float(np.abs(km.cpx - k.cpx).max()),
            )
            out["parity"] = (par, err)
        except SeriesRangeError:
            pass
        S = propagator(k)
        sig = symplectic_form(n)
        scale = max(1.0, float(np.linalg.norm(S, 2)) ** 2)
        out["symplectic"] = (float(np.abs(S @ sig @ S.T - sig).max()) / scale, 1e-9)
        try:
            kh = kernels(cp, t / 2, tol)
            Sh = propagator(kh)
            out["group"] = (float(np.abs(Sh @ Sh - S).max()) / scale, 1e-9)
        except SeriesRangeError:
            pass
        return out

    cells = ordered_map(per_time, times, jobs)
    for key, name in (("dual", "dual-method"), ("parity", "parity"), ("symplectic", "symplectic"), ("group", "group-law")):
        vals = [c[key] for c in cells if key in c]
        skips = [c.get("dual_skip") or c.get("error") for c in cells if key not in c]
        if not vals:
            results.append(_status(name, None, note=skips[0] if skips and skips[0] else "not applicable"))
            continue
        ok = all(v <= lim for v, lim in vals)
        note = f"{len(skips)} time(s) skipped" if skips else ""
        results.append(_status(name, ok, max(v for v, _ in vals), note))

    theorems = _theorems(cfg, cp)
    dp = dimension_profile(g, int(cfg["dimension"])) if "dimension" in cfg else None
    scale_b = float(cfg.get("bound_scale", 1.0))
    rep = BoundReport()
    for c in cells:
        if "k" not in c:
            continue
        try:
            sc = derived_scales(cp, c["k"].t, norms) if cp.R is not None else None
            rep.extend(evaluate_bounds(cp, c["k"], sc, theorems, dp=dp, scale=scale_b))
        except BoundError as exc:
            results.append(_status("dominance", None, note=str(exc)))
            break
    else:
        viol = rep.violations
        applicable = [r for r in rep.rows if math.isfinite(r.bound)]
        worst = min((r.margin for r in applicable), default=math.inf)
        results.append(_status("dominance", not viol, worst, f"{len(applicable)} applicable rows"))
        for r in viol[:5]:
            print(f"  violation {r.theorem} {r.kind} i={r.i} j={r.j} t={report.fmt(r.t)} "
                  f"exact={report.fmt(r.exact)} bound={report.fmt(r.bound)}")

    if cfg.get("weyl") and cp.R is not None:
        scen = _weyl_scenarios(cfg)
        worst_ok = True
        worst = math.inf
        for t in times:
            try:
                rows = _weyl_rows(cp, scen, t, int(cfg.get("dimension", 1)), tol)
            except SeriesRangeError:
                continue
            for (_, _, _, _, _, exact, pair, surf, slack) in rows:
                ok = exact <= pair + slack and pair <= surf + slack
                worst_ok &= ok
                worst = min(worst, pair + slack - exact)
        results.append(_status("weyl-three-level", worst_ok, worst))

    return all(ok is not False for _, ok in results)


def cmd_verify(rc: RunConfig) -> int:
    return 0 if verify(rc.config, rc.tol, rc.jobs) else 1


HANDLERS = {
    "kernels": cmd_kernels, "bounds": cmd_bounds, "weyl": cmd_weyl,
    "kg-scan": cmd_kg_scan, "tightness": cmd_tightness, "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="harmonic-lr", description="Lieb-Robinson bound checks for harmonic lattices")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--out")
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        s.add_argument("--tol", type=float, default=1e-10)
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--strict", action="store_true")
        s.add_argument("--seed", type=int)
    return p


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    if args.tol <= 0 or args.jobs < 1:
        print("error: --tol must be positive and --jobs at least 1", file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.setdefault("seed", args.seed)
            if isinstance(cfg.get("couplings"), dict):
                cfg["couplings"].setdefault("seed", args.seed)
        rc = RunConfig(args.command, cfg, args.out, args.format, args.tol, args.jobs, args.strict, args.seed)
        return HANDLERS[args.command](rc)
    except (UsageError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (BoundError, SeriesRangeError)) and args.strict:
            print(f"precondition failed: {exc}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
