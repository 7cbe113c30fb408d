"""Command-line driver: ``kitaev-fcs <command> [--config PATH] [--key value ...] [--out DIR]``.

Commands
--------
cgf           F(xi) on a line of real counting fields
dist          (q, ln P, rate) table
cumulants     scaled cumulants of orders 1..max_order
xft-check     fluctuation-theorem report for one channel
oracle-check  closed form against the Keldysh determinant, per case
figure N      figure presets 2, 3, 4 and 5 as plot-ready series

Exit codes: 0 success, 1 configuration error, 2 numerical convergence
error, 3 parameter outside a closed-form case.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (BranchAmbiguity, CaseMismatch, InsufficientSupport, ParityError, SingularPropagator,
                     StepTooSmall, TailNotConverged)
from .fcs import FrequencyGrid, cf_at_frequency, cgf_curve, charge_distribution, cumulants
from .keldysh import CountingField
from .model import ChainSpec, ReservoirSpec
from .oracles import CASES, analytic_cf
from .xft import affinity, fit_slope, xft_report

__all__ = ["ConfigError", "RunConfig", "FIGURE_PRESETS", "build_parser", "run", "main"]

COMMANDS = ("cgf", "dist", "cumulants", "xft-check", "oracle-check", "figure")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


# key -> (type, default)
KEYS: dict[str, tuple[type, object]] = {
    "n_sites": (int, 10),
    "mu": (float, 1.0),
    "eta": (float, 1.0),
    "delta": (float, 0.0),
    "gamma_l": (float, 0.3),
    "gamma_r": (float, 0.3),
    "mu_l": (float, 0.05),
    "mu_r": (float, -0.05),
    "beta": (float, 10.0),
    "d_omega": (float, 0.01),
    "half_width": (float, 0.0),  # 0 selects the automatic window
    "n_xi": (int, 512),
    "xi_min": (float, 0.0),
    "xi_max": (float, 2 * np.pi),
    "n_points": (int, 64),
    "max_order": (int, 4),
    "method": (str, "analytic"),
    "channel": (str, "normal"),
    "affinity": (float, float("nan")),  # nan selects the channel affinity
    "case": (str, "trivial3"),
    "n_samples": (int, 100),
    "seed": (int, 0),
    "workers": (int, 1),
}

FIGURE_PRESETS: dict[str, list[dict]] = {
    "2": [dict(n_sites=10, mu=1.0, eta=1.0, delta=0.0, channel="normal")],
    "3": [dict(n_sites=10, mu=0.0, eta=0.0, delta=1.0, channel="car"),
          dict(n_sites=11, mu=0.0, eta=0.0, delta=1.0, channel="normal")],
    "4": [dict(n_sites=10, mu=0.0, eta=1.0, delta=1.0, channel="lar")],
    "5": [dict(n_sites=10, mu=1.0, eta=1.0, delta=1.0, channel="lar")],
}
_FIGURE_RESERVOIRS = dict(gamma_l=0.3, gamma_r=0.3, mu_l=0.05, mu_r=-0.05, beta=10.0, d_omega=0.01)


def _coerce(key: str, raw):
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}")
    typ = KEYS[key][0]
    try:
        if typ is int:
            val = float(raw)
            if val != int(val):
                raise ValueError
            return int(val)
        return typ(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r}: cannot read {raw!r} as {typ.__name__}") from None


@dataclass
class RunConfig:
    """All run parameters as a flat key/value mapping."""

    values: dict = field(default_factory=lambda: {k: v[1] for k, v in KEYS.items()})

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, raw = (s.strip() for s in line.split("=", 1))
            cfg.values[key] = _coerce(key, raw)
        return cfg

    def to_text(self) -> str:
        return "".join(f"{k} = {self.values[k]!r}\n" if isinstance(self.values[k], float)
                       else f"{k} = {self.values[k]}\n" for k in KEYS)

    def update(self, **kw) -> "RunConfig":
        vals = dict(self.values)
        for k, v in kw.items():
            vals[k] = _coerce(k, v)
        return RunConfig(vals)

    def __getitem__(self, key):
        return self.values[key]

    def chain(self) -> ChainSpec:
        v = self.values
        try:
            return ChainSpec(v["n_sites"], mu=v["mu"], eta=v["eta"], delta=v["delta"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def reservoirs(self) -> ReservoirSpec:
        v = self.values
        try:
            return ReservoirSpec(v["gamma_l"], v["gamma_r"], mu_l=v["mu_l"], mu_r=v["mu_r"], beta=v["beta"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self) -> FrequencyGrid:
        v = self.values
        try:
            if v["half_width"] > 0:
                return FrequencyGrid(v["d_omega"], v["half_width"])
            return FrequencyGrid.auto(self.chain(), self.reservoirs(), v["d_omega"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


# ------------------------------------------------------------------ output


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _metadata(cfg: RunConfig, command: str, grid: FrequencyGrid | None) -> dict:
    meta = {"command": command, "version": __version__, "inputs": dict(cfg.values)}
    if grid is not None:
        meta["grid"] = {"d_omega": grid.d_omega, "half_width": grid.half_width, "n_points": grid.n_points,
                        "tau": grid.tau}
    return meta


def _write_csv(path: Path, meta: dict, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in json.dumps(meta, indent=1, sort_keys=True).splitlines():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) if not isinstance(x, str) else x for x in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")


# ------------------------------------------------------------------ commands


def _cmd_cgf(cfg: RunConfig, out: Path) -> dict:
    chain, res, grid = cfg.chain(), cfg.reservoirs(), cfg.grid()
    xi = np.linspace(cfg["xi_min"], cfg["xi_max"], cfg["n_points"])
    curve = cgf_curve(chain, res, xi, grid=grid)
    meta = _metadata(cfg, "cgf", grid)
    rows = [(x.real, f.real, f.imag, w) for x, f, w in zip(curve.xi_values, curve.f_values, curve.branch_windings)]
    _write_csv(out / "cgf.csv", meta, ["xi", "re_F", "im_F", "winding"], rows)
    doc = {"metadata": meta, "cgf": {"xi": xi, "re_F": curve.f_values.real, "im_F": curve.f_values.imag,
                                     "winding": curve.branch_windings}}
    _write_json(out / "cgf.json", doc)
    return doc


def _cmd_dist(cfg: RunConfig, out: Path, name: str = "dist") -> dict:
    chain, res, grid = cfg.chain(), cfg.reservoirs(), cfg.grid()
    dist = charge_distribution(chain, res, grid=grid, n_xi=cfg["n_xi"])
    meta = _metadata(cfg, name, grid)
    _write_csv(out / f"{name}.csv", meta, ["q", "log_p", "rate"], zip(dist.q_values, dist.log_p, dist.rate))
    doc = {"metadata": meta, "distribution": {"tau": dist.tau, "q": dist.q_values, "log_p": dist.log_p,
                                              "rate": dist.rate}}
    _write_json(out / f"{name}.json", doc)
    return doc


def _cmd_cumulants(cfg: RunConfig, out: Path) -> dict:
    chain, res, grid = cfg.chain(), cfg.reservoirs(), cfg.grid()
    try:
        c = cumulants(chain, res, grid=grid, max_order=cfg["max_order"], method=cfg["method"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    meta = _metadata(cfg, "cumulants", grid)
    _write_csv(out / "cumulants.csv", meta, ["order", "cumulant"], enumerate(c, 1))
    doc = {"metadata": meta, "cumulants": c}
    _write_json(out / "cumulants.json", doc)
    return doc


def _channel_affinity(cfg: RunConfig, res: ReservoirSpec) -> float:
    if not np.isnan(cfg["affinity"]):
        return cfg["affinity"]
    try:
        return affinity(cfg["channel"], res)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_xft(cfg: RunConfig, out: Path) -> dict:
    chain, res, grid = cfg.chain(), cfg.reservoirs(), cfg.grid()
    a = _channel_affinity(cfg, res)
    rep = xft_report(chain, res, grid=grid, affinity_value=a, channel=cfg["channel"], n_xi=cfg["n_xi"])
    meta = _metadata(cfg, "xft-check", grid)
    d = rep.as_dict()
    _write_csv(out / "xft.csv", meta, ["quantity", "value"],
               [(k, v) for k, v in d.items() if not isinstance(v, list)])
    doc = {"metadata": meta, "xft_report": d}
    _write_json(out / "xft.json", doc)
    return doc


def _cmd_oracle(cfg: RunConfig, out: Path) -> dict:
    tags = sorted(CASES) if cfg["case"] == "all" else [cfg["case"]]
    res = cfg.reservoirs()
    rng = np.random.default_rng(cfg["seed"])
    results = {}
    for tag in tags:
        if tag not in CASES:
            raise ConfigError(f"unknown case {tag!r}")
        case = CASES[tag]
        if cfg["case"] == "all":
            chain = case.default_chain()
        else:
            chain = cfg.chain()
        case.validate(chain)
        w = FrequencyGrid.auto(chain, res, cfg["d_omega"]).half_width
        err = 0.0
        for _ in range(cfg["n_samples"]):
            xi = rng.uniform(0, 2 * np.pi)
            om = rng.uniform(-w, w)
            a = analytic_cf(case, chain, res, xi, om)
            b = cf_at_frequency(chain, res, CountingField(xi), om)
            err = max(err, abs(a - b) / abs(a))
        results[tag] = err
    meta = _metadata(cfg, "oracle-check", None)
    _write_csv(out / "oracle.csv", meta, ["case", "max_rel_error"], sorted(results.items()))
    doc = {"metadata": meta, "max_rel_error": results}
    _write_json(out / "oracle.json", doc)
    return doc


def _cmd_figure(cfg: RunConfig, out: Path, which: str, overrides: dict) -> dict:
    if which not in FIGURE_PRESETS:
        raise ConfigError(f"figure must be one of {sorted(FIGURE_PRESETS)}, got {which!r}")
    panels = []
    for preset in FIGURE_PRESETS[which]:
        pc = cfg.update(**{**_FIGURE_RESERVOIRS, **preset}).update(**overrides)
        chain, res, grid = pc.chain(), pc.reservoirs(), pc.grid()
        dist = charge_distribution(chain, res, grid=grid, n_xi=pc["n_xi"])
        ref = _channel_affinity(pc, res)
        tag = f"figure{which}_n{chain.n_sites}"
        meta = _metadata(pc, f"figure {which}", grid)
        meta["reference_line"] = {"slope": ref, "channel": pc["channel"]}
        _write_csv(out / f"{tag}_rate.csv", meta, ["q", "rate"],
                   [(q, r) for q, r in zip(dist.q_values, dist.rate) if np.isfinite(r)])
        lp = dict(zip(dist.q_values.tolist(), dist.log_p))
        ratio = [(q, lp[q] - lp[-q]) for q in sorted(lp) if q > 0 and -q in lp
                 and np.isfinite(lp[q]) and np.isfinite(lp[-q])]
        _write_csv(out / f"{tag}_ratio.csv", meta, ["q", "log_ratio"], ratio)
        panel = {"metadata": meta, "tau": dist.tau, "q": dist.q_values, "rate": dist.rate,
                 "log_ratio": ratio, "reference_slope": ref}
        try:
            fit = fit_slope(dist)
            panel.update(slope=fit.slope, slope_stderr=fit.stderr, fit_residual=fit.residual)
        except InsufficientSupport:
            panel.update(slope=None)
        panels.append(panel)
    doc = {"figure": which, "panels": panels}
    _write_json(out / f"figure{which}.json", doc)
    return doc


# ------------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kitaev-fcs", description="Full counting statistics of an open Kitaev chain.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("figure", nargs="?", help="figure number for the figure command (2, 3, 4 or 5)")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    for key, (typ, default) in KEYS.items():
        flag = "--" + key.replace("_", "-")
        names = [flag] if flag == "--" + key else [flag, "--" + key]
        p.add_argument(*names, dest=key, default=None, help=f"{typ.__name__}, default {default!r}")
    return p


def run(command: str, cfg: RunConfig, out: Path, figure: str | None = None, overrides: dict | None = None) -> dict:
    """Run ``command`` and write its outputs into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    if cfg["workers"] > 1:
        os.environ["KITAEV_FCS_WORKERS"] = str(cfg["workers"])
    if command == "cgf":
        return _cmd_cgf(cfg, out)
    if command == "dist":
        return _cmd_dist(cfg, out)
    if command == "cumulants":
        return _cmd_cumulants(cfg, out)
    if command == "xft-check":
        return _cmd_xft(cfg, out)
    if command == "oracle-check":
        return _cmd_oracle(cfg, out)
    if command == "figure":
        if figure is None:
            raise ConfigError("figure command needs a figure number")
        return _cmd_figure(cfg, out, figure, overrides or {})
    raise ConfigError(f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        cfg = RunConfig()
        if args.config:
            try:
                cfg = RunConfig.from_text(Path(args.config).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
        overrides = {k: getattr(args, k) for k in KEYS if getattr(args, k) is not None}
        cfg = cfg.update(**overrides)
        if args.figure is not None and args.command != "figure":
            raise ConfigError(f"unexpected argument {args.figure!r}")
        run(args.command, cfg, Path(args.out), figure=args.figure, overrides=overrides)
    except ConfigError as exc:
        print(f"kitaev-fcs: configuration error: {exc}", file=sys.stderr)
        return 1
    except (TailNotConverged, BranchAmbiguity, StepTooSmall, SingularPropagator, InsufficientSupport) as exc:
        print(f"kitaev-fcs: convergence error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (CaseMismatch, ParityError) as exc:
        print(f"kitaev-fcs: case error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
