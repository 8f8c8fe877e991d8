"""Command-line front end: ``gl2lfun <subcommand> [--config FILE] [flags] [--out PATH]``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage errors."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# subcommand -> {key: (type, default, help)}
_PARAMS: dict[str, dict[str, tuple[type, object, str]]] = {
    "coeffs": {
        "n_max": (int, 100000, "coefficient table size"),
    },
    "delta": {
        "n": (int, 0, "shift n"),
        "Q": (float, 4.0, "modulus bound Q"),
        "tol": (float, 1e-10, "tolerance"),
    },
    "voronoi": {
        "a": (int, 1, "additive twist numerator"),
        "q": (int, 1, "modulus"),
        "N": (float, 50.0, "scale of g(y) = V(y/N)"),
        "sigma": (float, -0.5, "contour abscissa"),
        "reading": (str, "corrected", "gamma-ratio reading (corrected or printed)"),
        "tol": (float, 1e-5, "relative tolerance"),
    },
    "afe": {
        "t": (float, 20.0, "height t"),
        "X": (float, 1.0, "AFE balance parameter"),
        "G_scale": (float, 2.0, "G(u) = exp((u/G_scale)^2)"),
    },
    "scan": {
        "t_min": (float, 10.0, "first t"),
        "t_max": (float, 500.0, "last t"),
        "step": (float, 2.0, "t step"),
        "alpha_max": (float, 0.55, "envelope exponent threshold"),
        "seed": (int, 0, "bootstrap seed"),
    },
    "statphase": {
        "order": (str, "main", "main, second or fm"),
        "printed": (int, 0, "1 selects the printed correction coefficient"),
        "min_order": (float, 1.3, "order threshold"),
    },
    "pipeline": {
        "N": (float, 64.0, "block scale N"),
        "K": (float, 4.0, "averaging length K"),
        "t": (float, 150.0, "height t"),
        "tol": (float, 1e-6, "relative tolerance"),
        "ledger": (int, 0, "1 also writes the savings ledger"),
    },
    "g1check": {
        "t": (float, 1500.0, "height t"),
        "q": (int, 1, "modulus q"),
        "m": (int, -1, "dual frequency m"),
        "tau": (float, 0.0, "tau"),
        "factor": (float, 10.0, "allowed multiple of E(C, tau)"),
    },
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    out: Path | None = None
    threads: int = 0

    def __post_init__(self):
        spec = _PARAMS[self.subcommand]
        unknown = set(self.params) - set(spec)
        if unknown:
            raise UsageError(f"unknown keys for {self.subcommand}: {sorted(unknown)}")
        if self.threads == 0:
            self.threads = os.cpu_count() or 1
        if self.threads < 1:
            raise UsageError("threads must be >= 1")


def config_file_load(path, subcommand: str) -> dict:
    """``key = value`` lines, ``#`` comments; values typed by the subcommand's parameter table."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"config file {path} does not exist")
    spec = _PARAMS[subcommand]
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = (p.strip() for p in line.partition("="))
        if not sep or not key or not val:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.replace("-", "_")
        if key not in spec:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r} for {subcommand}")
        try:
            out[key] = spec[key][0](val)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value {val!r} for {key}") from None
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gl2lfun", description="GL(2) L-function numerics")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)
    for name, spec in _PARAMS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="key = value file; flags override it")
        sp.add_argument("--out", type=Path, help="write the report (JSON, or CSV for scan/statphase)")
        sp.add_argument("--threads", type=int, default=0, help="worker threads (default: all cores)")
        for key, (typ, default, help_) in spec.items():
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None,
                            help=f"{help_} (default {default})")
    return p


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.subcommand is None:
        raise UsageError("a subcommand is required")
    spec = _PARAMS[ns.subcommand]
    params = {k: d for k, (_, d, _) in spec.items()}
    if ns.config is not None:
        params.update(config_file_load(ns.config, ns.subcommand))
    for k in spec:
        v = getattr(ns, k)
        if v is not None:
            params[k] = v
    return RunConfig(ns.subcommand, params, ns.out, ns.threads)


# ------------------------------------------------------------------ runners


def _write_json(path: Path | None, report: dict) -> None:
    if path is not None:
        path.write_text(json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def _run_coeffs(cfg: RunConfig) -> dict:
    from . import forms

    n_max = cfg.params["n_max"]
    f = forms.delta(n_max)
    xs = [x for x in (1e2, 1e3, 1e4, 1e5) if x <= n_max]
    rs = [forms.rankin_selberg_ratio(f, x) for x in xs]
    mult = forms.multiplicativity_error(f, n_max)
    deligne = forms.deligne_ratio_max(f, n_max)
    ok = deligne <= 1.0 and mult["max_rel_error"] <= 1e-12 and mult["exact"] and max(rs) / min(rs) <= 10
    print(f"deligne max |lambda|/d = {deligne:.6f}; multiplicativity {mult['max_rel_error']:.2e}; "
          f"rankin-selberg ratios {', '.join(f'{r:.4f}' for r in rs)}")
    return {"params": cfg.params, "deligne_ratio_max": deligne, "multiplicativity": mult,
            "rankin_selberg": dict(zip([str(int(x)) for x in xs], rs)), "pass": ok}


def _run_delta(cfg: RunConfig) -> dict:
    from .summation import delta_kloosterman

    n, Q, tol = cfg.params["n"], cfg.params["Q"], cfg.params["tol"]
    lhs = delta_kloosterman(n, Q)
    rhs = 1.0 if n == 0 else 0.0
    res = abs(lhs - rhs)
    print(f"delta(n={n}, Q={Q:g}) = {lhs:.3e}, residual {res:.2e}")
    return {"params": cfg.params, "lhs": lhs, "rhs": rhs, "residual": res, "tolerance": tol, "pass": res <= tol}


def _run_voronoi(cfg: RunConfig) -> dict:
    from . import forms
    from .summation import VoronoiQuery, voronoi_check

    p = cfg.params
    f = forms.delta(60000)
    vq = VoronoiQuery(f, p["a"], p["q"], p["N"], sigma=p["sigma"], reading=p["reading"])
    rep = voronoi_check(vq, rel_tol=p["tol"])
    print(f"voronoi q={p['q']} a={p['a']} N={p['N']:g} ({p['reading']}): residual {rep['residual']:.2e}")
    rep["params"] = dict(p)
    return rep


def _run_afe(cfg: RunConfig) -> dict:
    from . import forms
    from .lfun import AfeConfig, l_value_afe

    p = cfg.params
    f = forms.delta(20000)
    s = l_value_afe(p["t"], f, AfeConfig(X=p["X"], G_scale=p["G_scale"]))
    ok = abs(s.Z_imag) <= 1e-6 * (1 + abs(s.Z))
    print(f"L(1/2 + {p['t']:g}i) = {s.value.real:.12g} {s.value.imag:+.12g}i, Z = {s.Z:.12g}")
    return {"params": p, "value": s.value, "Z": s.Z, "Z_imag": s.Z_imag, "error_estimate": s.error_estimate,
            "n_terms": s.n_terms, "pass": ok}


def _run_scan(cfg: RunConfig) -> dict:
    from . import forms
    from .lfun import weyl_scan

    p = cfg.params
    if not p["step"] > 0 or p["t_max"] < p["t_min"]:
        raise UsageError("need step > 0 and t_max >= t_min")
    n = int(math.floor((p["t_max"] - p["t_min"]) / p["step"] + 1e-9)) + 1
    grid = p["t_min"] + p["step"] * np.arange(n)
    f = forms.delta(20000)
    res = weyl_scan(grid, f, seed=p["seed"], workers=cfg.threads)
    if cfg.out is not None:
        res.write_csv(cfg.out)
    ok = res.alpha <= p["alpha_max"]
    print(f"{n} points, envelope exponent {res.alpha:.3f} (band {res.band[0]:.3f}-{res.band[1]:.3f})")
    return {"params": p, "rows": n, "alpha": res.alpha, "band": list(res.band), "pass": ok}


def _run_statphase(cfg: RunConfig) -> dict:
    from . import oscillatory as osc

    p = cfg.params
    order = p["order"]
    if order == "fm":
        sw = osc.fm_expansion_sweep(printed=bool(p["printed"]))
    elif order in ("main", "second"):
        sw = osc.stationary_sweep(order=order, printed=bool(p["printed"]))
    else:
        raise UsageError(f"order must be main, second or fm, got {order!r}")
    if cfg.out is not None:
        sw.write_csv(cfg.out)
    print(f"{order}: minimum fitted order {sw.min_order:.3f} over {len(sw.orders)} cases")
    return {"params": p, "orders": sw.orders, "min_order": sw.min_order, "pass": sw.min_order >= p["min_order"]}


def _run_pipeline(cfg: RunConfig) -> dict:
    from . import forms
    from .pipeline import PipelineConfig, decomposition_check, savings_ledger

    p = cfg.params
    pc = PipelineConfig(N=p["N"], t=p["t"], K=p["K"], tol=p["tol"])
    f = forms.delta(20000)
    rep = decomposition_check(pc, f, workers=cfg.threads)
    print(f"S+ + S- vs S(N) at N={p['N']:g} K={p['K']:g} t={p['t']:g}: residual {rep['residual']:.2e}")
    if p["ledger"]:
        rep["ledger"] = json.loads(savings_ledger(pc, f).to_json())
    return rep


def _run_g1check(cfg: RunConfig) -> dict:
    from .pipeline import PipelineConfig, g1_g2_check, reference_config

    p = cfg.params
    ref = reference_config()
    pc = ref if p["t"] == ref.t else PipelineConfig(N=p["t"] / (3 * math.pi), t=p["t"], K=p["t"] ** (2 / 3))
    rep = g1_g2_check(p["q"], p["m"], p["tau"], pc, factor=p["factor"])
    print(f"|g1 - g2| = {rep['diff']:.3e}, E = {rep['E']:.3e}, ratio {rep['ratio']:.3f}")
    return rep


_RUNNERS = {
    "coeffs": _run_coeffs,
    "delta": _run_delta,
    "voronoi": _run_voronoi,
    "afe": _run_afe,
    "scan": _run_scan,
    "statphase": _run_statphase,
    "pipeline": _run_pipeline,
    "g1check": _run_g1check,
}


def parse_and_dispatch(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        report = _RUNNERS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"gl2lfun: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ValueError as exc:
        # guards raised by the library modules
        print(f"gl2lfun: error: {exc}", file=sys.stderr)
        return 2
    if cfg.out is not None and cfg.subcommand not in ("scan", "statphase"):
        _write_json(cfg.out, report)
    return 0 if report["pass"] else 1


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
