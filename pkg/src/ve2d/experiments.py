"""Config-driven experiment drivers: single runs, viscosity sweeps,
vanishing-viscosity convergence, and identity/inequality audits.

Configs are INI files (UTF-8, '#' comments) with sections [grid],
[initial], [run], [stepper]; see RunConfig.from_ini.  Sweep members run in
a process pool whose size is controlled by the VE2D_THREADS environment
variable (default 1: fully deterministic artifacts).
"""

import configparser
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from . import spectral as sp
from . import svg
from .dynamics import BlowUpError, StepperConfig, choose_dt, step
from .families import derived_family
from .grid import Grid
from .state import (InitialDataParams, PotentialState, make_initial_data,
                    write_snapshot)


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    n: int = 256
    box_len: float = 64.0
    initial: InitialDataParams = field(default_factory=InitialDataParams)
    mu_list: tuple[float, ...] = (0.0,)
    t_final: float = 16.0
    sample_interval: float = 1.0
    k_max: int = 2
    stepper: StepperConfig = field(default_factory=StepperConfig)
    dt: float | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if self.t_final > self.box_len / 4.0 + 1e-12:
            raise ConfigError("t_final must not exceed box_len/4")
        for mu in self.mu_list:
            if not 0.0 <= mu <= 1.0:
                raise ConfigError(f"viscosity {mu} outside [0, 1]")
        if self.sample_interval <= 0:
            raise ConfigError("sample_interval must be positive")

    @classmethod
    def from_ini(cls, path) -> "RunConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            read = parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        if not read:
            raise ConfigError(f"config file not found: {path}")
        try:
            g = parser["grid"] if "grid" in parser else {}
            i = parser["initial"] if "initial" in parser else {}
            r = parser["run"] if "run" in parser else {}
            s = parser["stepper"] if "stepper" in parser else {}
            initial = InitialDataParams(
                amplitude=float(i.get("amplitude", 0.01)),
                profile=i.get("profile", "gaussian-bump"),
                support_radius=(float(i["support_radius"])
                                if "support_radius" in i else None),
                seed=int(i.get("seed", 0)),
                mu=0.0,
            )
            stepper = StepperConfig(
                cfl_factor=float(s.get("cfl_factor", 0.3)),
                scheme=s.get("scheme", "if-rk4"),
                dealias=_parse_bool(s.get("dealias", "true")),
            )
            mu_raw = r.get("mu", "0").replace(",", " ").split()
            return cls(
                n=int(g.get("n", 256)),
                box_len=float(g.get("box_len", 64.0)),
                initial=initial,
                mu_list=tuple(float(m) for m in mu_raw),
                t_final=float(r.get("t_final", 16.0)),
                sample_interval=float(r.get("sample_interval", 1.0)),
                k_max=int(r.get("k_max", 2)),
                stepper=stepper,
                dt=float(s["dt"]) if "dt" in s else None,
                output_dir=r.get("output_dir") or None,
            )
        except (KeyError, ValueError, TypeError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad config value: {exc}") from exc


def _parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def worker_count() -> int:
    env = os.environ.get("VE2D_THREADS")
    if env:
        return max(1, int(env))
    return 1


@dataclass
class RunResult:
    mu: float
    times: list[float]
    records: list[dg.DiagnosticsRecord]
    final_state: PotentialState
    blowup_t: float | None = None

    def series(self, column: str) -> tuple[np.ndarray, np.ndarray]:
        ts = np.array([rec.t for rec in self.records])
        vs = np.array([rec.values[column] for rec in self.records])
        return ts, vs


def run_simulation(cfg: RunConfig, mu: float | None = None,
                   write: bool | None = None) -> RunResult:
    """Evolve from the configured initial data, sampling diagnostics.

    Artifacts (CSV, final snapshot, summary JSON, SVG plots) are written
    when cfg.output_dir is set; a blow-up leaves a partial CSV plus a
    failure marker carrying the blow-up time.
    """
    if mu is None:
        mu = cfg.mu_list[0]
    grid = Grid(cfg.n, cfg.box_len)
    state = make_initial_data(grid, replace(cfg.initial, mu=mu))
    e1_ceiling = None

    records = []
    times = []
    blowup_t = None
    n_samples = int(round(cfg.t_final / cfg.sample_interval))
    try:
        for k in range(n_samples + 1):
            t_target = k * cfg.sample_interval
            while state.t < t_target - 1e-12:
                h = cfg.dt if cfg.dt is not None else choose_dt(state, cfg.stepper)
                state = step(state, min(h, t_target - state.t), cfg.stepper)
            fam = derived_family(state, cfg.k_max)
            rec = dg.sample_record(fam)
            records.append(rec)
            times.append(state.t)
            e1 = rec.values.get("E1", 0.0)
            if e1_ceiling is None:
                e1_ceiling = 100.0 * max(e1, 1e-300)
            elif e1 > e1_ceiling:
                raise BlowUpError(state.t)
    except BlowUpError as exc:
        blowup_t = exc.t

    result = RunResult(mu=mu, times=times, records=records,
                       final_state=state, blowup_t=blowup_t)
    if write is None:
        write = cfg.output_dir is not None
    if write:
        _write_run_artifacts(cfg, result)
    return result


def write_csv(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dg.CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.to_csv_row() + "\n")


def _write_run_artifacts(cfg: RunConfig, result: RunResult) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = f"mu{result.mu:g}"
    write_csv(out / f"run_{tag}.csv", result.records)
    write_snapshot(out / f"final_{tag}.snap", result.final_state)
    summary = {"mu": result.mu, "t_final": result.final_state.t,
               "blowup_t": result.blowup_t}
    if result.blowup_t is None and len(result.records) >= 8:
        ts, good = result.series("good_sup")
        t0 = max(5.0, ts[0] + 1e-9)
        if np.all(good[ts >= t0] > 0) and np.sum(ts >= t0) >= 8:
            p, err = dg.fit_decay(ts, good, t0, ts[-1])
            summary["good_sup_exponent"] = p
            summary["good_sup_exponent_stderr"] = err
        for col in ("id45_res", "id417_res", "id218_res"):
            _, vals = result.series(col)
            summary[f"max_{col}"] = float(np.max(vals))
    with open(out / f"summary_{tag}.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    if result.blowup_t is not None:
        (out / f"BLOWUP_{tag}").write_text(
            f"blow-up at t = {result.blowup_t}\n", encoding="utf-8")
        return
    ts, e1 = result.series("E1")
    svg.line_plot(out / f"energy_{tag}.svg",
                  [(ts, e1, "E1")], title=f"E1 history, mu = {result.mu:g}",
                  xlabel="t", ylabel="E1")
    ts, good = result.series("good_sup")
    pos = good > 0
    if np.count_nonzero(pos & (ts > 0)) >= 2:
        svg.line_plot(out / f"decay_{tag}.svg",
                      [(ts[pos & (ts > 0)], good[pos & (ts > 0)], "good_sup")],
                      title=f"good-unknown decay, mu = {result.mu:g}",
                      xlabel="t", ylabel="sup", logx=True, logy=True)


def _sweep_worker(args) -> RunResult:
    cfg, mu = args
    return run_simulation(cfg, mu=mu)


def sweep_viscosity(cfg: RunConfig) -> dict:
    """Run every mu in cfg.mu_list from identical initial data.

    Returns per-mu energy-ratio maxima, the overall maximum, and fitted
    calE2 growth exponents where the fit window allows it.
    """
    if len(cfg.mu_list) < 1:
        raise ConfigError("sweep needs at least one viscosity value")
    workers = worker_count()
    jobs = [(replace(cfg, output_dir=None), mu) for mu in cfg.mu_list]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(job) for job in jobs]

    report = {"mu": list(cfg.mu_list), "runs": results, "per_mu": {}}
    overall = 0.0
    for res in results:
        if res.blowup_t is not None:
            raise BlowUpError(res.blowup_t)
        ts, e1 = res.series("E1")
        ratio = float(np.max(e1) / e1[0]) if e1[0] > 0 else 0.0
        entry = {"max_E1_ratio": ratio}
        ts, ce2 = res.series("calE2")
        window = ts >= 1.0
        if np.count_nonzero(window) >= 8 and np.all(ce2[window] > 0):
            p, err = dg.fit_decay(ts, ce2, 1.0, ts[-1])
            entry["calE2_growth_exponent"] = p
        report["per_mu"][res.mu] = entry
        overall = max(overall, ratio)
    report["max_E1_ratio"] = overall
    if cfg.output_dir:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for res in results:
            write_csv(out / f"run_mu{res.mu:g}.csv", res.records)
        printable = {k: v for k, v in report.items() if k != "runs"}
        with open(out / "sweep_summary.json", "w", encoding="utf-8") as fh:
            json.dump(printable, fh, indent=2)
    return report


def state_l2_distance(a: PotentialState, b: PotentialState) -> float:
    """L2 norm of the difference of (V, H) pairs on a shared grid."""
    if a.grid != b.grid:
        raise ValueError("states live on different grids")
    return float(np.sqrt(sp.l2_norm_sq(a.grid, a.V - b.V)
                         + sp.l2_norm_sq(a.grid, a.H - b.H)))


def convergence_study(cfg: RunConfig) -> dict:
    """Vanishing-viscosity table: ||U_mu(T) - U_0(T)||_L2 and fitted order.

    Requires mu_list to contain 0 and at least three positive values in
    decreasing geometric progression.
    """
    mus = sorted(cfg.mu_list, reverse=True)
    positive = [m for m in mus if m > 0]
    if 0.0 not in cfg.mu_list or len(positive) < 3:
        raise ConfigError("convergence study needs mu = 0 plus >= 3 "
                          "positive viscosities")
    report = sweep_viscosity(replace(cfg, mu_list=tuple([0.0] + positive),
                                     output_dir=None))
    by_mu = {res.mu: res for res in report["runs"]}
    base = by_mu[0.0].final_state
    table = {mu: state_l2_distance(by_mu[mu].final_state, base)
             for mu in positive}
    table[0.0] = 0.0
    logs = np.log(np.array(positive))
    vals = np.log(np.array([table[mu] for mu in positive]))
    order = float(np.polyfit(logs, vals, 1)[0])
    out = {"table": table, "fitted_order": order, "runs": report["runs"]}
    if cfg.output_dir:
        outdir = Path(cfg.output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        printable = {"table": {f"{k:g}": v for k, v in table.items()},
                     "fitted_order": order}
        with open(outdir / "convergence.json", "w", encoding="utf-8") as fh:
            json.dump(printable, fh, indent=2)
        xs = np.array(positive)
        ys = np.array([table[mu] for mu in positive])
        svg.line_plot(outdir / "convergence.svg", [(xs, ys, "L2 diff")],
                      title="vanishing-viscosity convergence",
                      xlabel="mu", ylabel="||U_mu(T) - U_0(T)||",
                      logx=True, logy=True)
    return out


def audit(cfg: RunConfig, n_random: int = 20, seed: int = 0) -> dict:
    """Identity checks on random fields and on a (short) evolved state."""
    grid = Grid(min(cfg.n, 128), cfg.box_len)
    worst = {}
    for trial in range(n_random):
        V = sp.random_band_limited(grid, seed + 7 * trial)
        H = np.stack([sp.random_band_limited(grid, seed + 7 * trial + i)
                      for i in (1, 2)])
        Vp = sp.random_band_limited(grid, seed + 7 * trial + 3)
        Hp = np.stack([sp.random_band_limited(grid, seed + 7 * trial + i)
                       for i in (4, 5)])
        res = dg.identity_checks(grid, V, H, Vp, Hp,
                                 t=float(trial % 5))
        for name, val in res.items():
            worst[name] = max(worst.get(name, 0.0), val)

    short = replace(cfg, t_final=min(cfg.t_final, 4.0), output_dir=None)
    run = run_simulation(short, mu=cfg.mu_list[0], write=False)
    fam = derived_family(run.final_state, cfg.k_max)
    from .families import commutator_residuals
    commutators = {}
    for idx in fam.indices:
        r1, r2, r3 = commutator_residuals(fam, idx)
        commutators[str(idx)] = {"r1": r1, "r2": r2, "r3": r3}
    ratios = {}
    ratios.update(dg.weighted_sobolev_ratios(
        run.final_state.grid, run.final_state.V, t=run.final_state.t))
    ratios.update(dg.nonlinearity_decay_ratios(fam))
    report = {"identity_residuals": worst, "commutator_residuals": commutators,
              "inequality_ratios": ratios}
    if cfg.output_dir:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "audit.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    return report
