"""Experiment configuration, scenario execution and result bundles.

A config is a TOML file; every key is checked and unknown keys are errors.
Physics parameters (``z``, ``C``, the potential) have no defaults. A run
writes a directory holding ``manifest.json`` plus scenario-specific CSV files,
with floats written to 17 significant digits. Nothing time- or host-dependent
goes into a bundle, so equal configs and seeds give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .configs import PairingWeights, SymFn, basis_for, norm_K_C
from .evolution import (contraction_tolerance, default_delta, ergodic_decay_report,
                        evolve_star, invariance_audit)
from .lattice import DomainError, DomainSpec, Potential, c_phi
from .operators import OperatorParams, truncation_tail_bound
from .oracles import (GibbsSpec, McConfig, exact_gibbs_correlations, gibbs_fixed_point_residual,
                      gibbs_residual_tolerance, mc_birth_death, positivity_probe)
from .regime import (RegimeError, RegimeParams, alpha0, check_contraction_condition,
                     check_low_activity, check_new_z, regime_report)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCENARIOS = ("evolve", "ergodicity", "fixed-point", "mc-compare", "positivity", "regime-report")
HARD_CORE_SCENARIOS = ("fixed-point", "ergodicity", "positivity", "mc-compare")


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# config


def _take(table: dict, name: str, allowed: dict[str, bool]) -> dict:
    """Check ``table`` against ``allowed`` (key -> required)."""
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table")
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{name}]" if name else f"unknown key {key!r}")
    for key, required in allowed.items():
        if required and key not in table:
            raise ConfigError(f"missing key {key!r} in [{name}]" if name else f"missing key {key!r}")
    return table


def _auto(value, name: str):
    if isinstance(value, str):
        if value != "auto":
            raise ConfigError(f"{name} must be a number or \"auto\", got {value!r}")
        return None
    return float(value)


@dataclass
class ExperimentConfig:
    M: int
    h: float
    potential: tuple[float, ...]
    z: float
    C: float
    N_max: int
    scenario: str | None = None
    d: int = 1
    alpha: float | None = None
    delta: float | None = None
    N_xi: int | None = None
    nu: float | None = None
    on_site: str = "auto"
    require_low_activity: bool = True
    initial: dict = field(default_factory=lambda: {"kind": "poisson", "z0": None, "path": None})
    t_end: float = 1.0
    stride: int = 1
    reference: str = "none"
    mc: dict = field(default_factory=dict)
    positivity: dict = field(default_factory=dict)
    output: str | None = None
    seed: int = 0
    base_dir: str = "."

    # derived objects
    @property
    def dom(self) -> DomainSpec:
        return DomainSpec(self.M, self.h, self.d)

    @property
    def pot(self) -> Potential:
        return Potential(self.potential)

    @property
    def c_phi(self) -> float:
        return c_phi(self.pot, self.dom)

    def resolved_delta(self) -> float:
        return default_delta(self.N_max) if self.delta is None else self.delta

    def on_site_for(self, scenario: str) -> str:
        if self.on_site != "auto":
            return self.on_site
        return "hard-core" if scenario in HARD_CORE_SCENARIOS else "exclude"

    def operator_params(self, scenario: str) -> OperatorParams:
        return OperatorParams(self.z, self.resolved_delta(), self.N_xi, self.on_site_for(scenario))

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("base_dir")
        out["potential"] = list(self.potential)
        return out


def parse_config(data: dict, base_dir: str = ".") -> ExperimentConfig:
    top = _take(data, "", {"scenario": False, "seed": False, "output": False, "domain": True,
                           "potential": True, "params": True, "initial": False, "run": False,
                           "mc": False, "positivity": False})
    dom = _take(top["domain"], "domain", {"M": True, "h": True, "d": False})
    pot = _take(top["potential"], "potential", {"R": True, "table": True})
    par = _take(top["params"], "params", {"z": True, "C": True, "N_max": True, "alpha": False,
                                          "delta": False, "N_xi": False, "nu": False,
                                          "on_site": False, "require_low_activity": False})
    table = tuple(float(v) for v in pot["table"])
    if len(table) != int(pot["R"]) + 1:
        raise ConfigError(f"potential table needs R + 1 = {int(pot['R']) + 1} entries, got {len(table)}")
    cfg = ExperimentConfig(M=int(dom["M"]), h=float(dom["h"]), d=int(dom.get("d", 1)),
                           potential=table, z=float(par["z"]), C=float(par["C"]),
                           N_max=int(par["N_max"]), base_dir=base_dir)
    cfg.alpha = _auto(par.get("alpha", "auto"), "alpha")
    cfg.delta = _auto(par.get("delta", "auto"), "delta")
    nxi = par.get("N_xi", "auto")
    cfg.N_xi = None if nxi == "auto" else int(nxi)
    cfg.nu = _auto(par.get("nu", "auto"), "nu")
    cfg.on_site = str(par.get("on_site", "auto"))
    if cfg.on_site not in ("auto", "exclude", "hard-core"):
        raise ConfigError(f"on_site must be auto, exclude or hard-core, got {cfg.on_site!r}")
    cfg.require_low_activity = bool(par.get("require_low_activity", True))

    if "scenario" in top:
        if top["scenario"] not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {top['scenario']!r}")
        cfg.scenario = top["scenario"]
    cfg.seed = int(top.get("seed", 0))
    cfg.output = top.get("output")

    ini = _take(top.get("initial", {"kind": "poisson", "z0": cfg.z}), "initial",
                {"kind": True, "z0": False, "path": False})
    kind = ini["kind"]
    if kind in ("poisson", "gibbs"):
        if "z0" not in ini:
            raise ConfigError(f"initial kind {kind!r} needs z0")
        cfg.initial = {"kind": kind, "z0": float(ini["z0"]), "path": None}
    elif kind == "custom":
        if "path" not in ini:
            raise ConfigError("initial kind 'custom' needs path")
        cfg.initial = {"kind": kind, "z0": None, "path": str(ini["path"])}
    else:
        raise ConfigError(f"initial kind must be poisson, gibbs or custom, got {kind!r}")

    run = _take(top.get("run", {}), "run", {"t_end": False, "stride": False, "reference": False})
    cfg.t_end = float(run.get("t_end", 1.0))
    cfg.stride = int(run.get("stride", 1))
    cfg.reference = str(run.get("reference", "none"))
    if cfg.reference not in ("none", "gibbs"):
        raise ConfigError(f"reference must be none or gibbs, got {cfg.reference!r}")

    mc = _take(top.get("mc", {}), "mc", {"t_end": False, "burn_in": False, "replicas": False,
                                         "n_est": False, "batches": False})
    cfg.mc = {"t_end": float(mc.get("t_end", 20000.0)), "burn_in": float(mc.get("burn_in", 100.0)),
              "replicas": int(mc.get("replicas", 1)), "n_est": int(mc.get("n_est", 2)),
              "batches": int(mc.get("batches", 20))}
    pos = _take(top.get("positivity", {}), "positivity", {"window": False, "times": False})
    cfg.positivity = {"window": int(pos.get("window", 6)),
                      "times": [float(t) for t in pos.get("times", [0.0, 1.0, 2.0, 4.0])]}
    # constructing these validates the geometry early
    cfg.dom, cfg.pot
    if not 0 <= cfg.N_max <= cfg.M:
        raise ConfigError(f"N_max must lie in [0, {cfg.M}]")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data, base_dir=str(path.parent))


# bundles


@dataclass
class Verdict:
    name: str
    passed: bool
    value: float
    bound: float
    margin: float
    note: str = ""


@dataclass
class ResultBundle:
    scenario: str
    out_dir: Path
    manifest: dict[str, Any]
    verdicts: list[Verdict] = field(default_factory=list)
    summary: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def add(self, name, passed, value, bound, note=""):
        margin = bound - value
        self.verdicts.append(Verdict(name, bool(passed), float(value), float(bound), float(margin), note))

    def write(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        man = dict(self.manifest)
        man["audits"] = [asdict(v) for v in self.verdicts]
        man["passed"] = self.passed
        text = json.dumps(_jsonable(man), indent=2, sort_keys=True)
        (self.out_dir / "manifest.json").write_text(text + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.floating):
        return _jsonable(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if isinstance(x, float) else x for x in row])


def _write_symfn(path: Path, f: SymFn) -> None:
    _write_csv(path, ["order", "sites", "value"],
               ((len(eta), " ".join(map(str, eta)), v) for eta, v in f.items()))


def initial_condition(cfg: ExperimentConfig) -> SymFn:
    ini = cfg.initial
    basis = basis_for(cfg.M, cfg.N_max)
    if ini["kind"] == "poisson":
        return SymFn.poisson(basis, ini["z0"])
    if ini["kind"] == "gibbs":
        return exact_gibbs_correlations(GibbsSpec(ini["z0"], cfg.pot, cfg.dom), cfg.N_max)
    path = Path(ini["path"])
    if not path.is_absolute():
        path = Path(cfg.base_dir) / path
    return SymFn.from_csv(path.read_text(), cfg.M, cfg.N_max)


def _regime_block(cfg: ExperimentConfig) -> dict:
    rep = regime_report(cfg.z, cfg.C, cfg.c_phi)
    rep["checks"] = [dict(asdict(c), margin=c.margin) for c in rep["checks"]]
    return rep


def _regime(cfg: ExperimentConfig, need_nu: bool, need_low_activity: bool) -> RegimeParams | None:
    cphi = cfg.c_phi
    check_contraction_condition(cfg.z, cfg.C, cphi)[0].require()
    check_new_z(cfg.z, cfg.C, cphi).require()
    if need_low_activity and cfg.require_low_activity:
        check_low_activity(cfg.z, cphi).require()
    if need_nu:
        return RegimeParams(cfg.z, cfg.C, cphi, cfg.alpha, cfg.nu)
    return None


def _alpha(cfg: ExperimentConfig) -> float:
    if cfg.alpha is not None:
        return cfg.alpha
    return 0.5 * (alpha0(cfg.z, cfg.C, cfg.c_phi) + 1)


def _new_bundle(cfg: ExperimentConfig, scenario: str, out_dir) -> ResultBundle:
    derived = {"c_phi": cfg.c_phi, "delta": cfg.resolved_delta(),
               "N_xi": OperatorParams(cfg.z, cfg.resolved_delta(), cfg.N_xi).resolved_xi_cap(cfg.N_max),
               "on_site": cfg.on_site_for(scenario), "regime": _regime_block(cfg),
               "kernel_tail_bound": tail_note(cfg)}
    manifest = {"scenario": scenario, "config": cfg.echo(), "derived": derived, "seed": cfg.seed}
    return ResultBundle(scenario, Path(out_dir), manifest)


def _norms_csv(path: Path, traj) -> None:
    _write_csv(path, ["t", "norm_C", "norm_alphaC", "dist_ref_C"], traj.norm_rows())


def _snapshots(out: Path, traj) -> list[str]:
    snap = out / "snapshots"
    snap.mkdir(parents=True, exist_ok=True)
    names = []
    for j, (t, k) in enumerate(zip(traj.times, traj.states)):
        name = f"k_{j:05d}.csv"
        _write_symfn(snap / name, k)
        names.append({"t": t, "file": f"snapshots/{name}"})
    return names


# scenarios


def _run_regime_report(cfg, b: ResultBundle) -> None:
    reg = b.manifest["derived"]["regime"]
    rows = [(c["name"], "pass" if c["passed"] else "fail", float(c["value"]), float(c["bound"]),
             float(c["margin"])) for c in reg["checks"]]
    _write_csv(b.out_dir / "regime.csv", ["check", "verdict", "value", "bound", "margin"], rows)
    for c in reg["checks"]:
        if c["name"] == "low-activity" and not cfg.require_low_activity:
            b.add(c["name"], True, c["value"], c["bound"], "advisory")
        else:
            b.add(c["name"], c["passed"], c["value"], c["bound"])
    b.summary.append(f"C_phi = {fmt(cfg.c_phi)}")
    b.summary.append(f"bounds: C e^(-C c) = {fmt(reg['bound_1'])}, 2C e^(-2C c) = {fmt(reg['bound_2'])}")
    for key in ("x1", "x2", "alpha0"):
        if key in reg:
            b.summary.append(f"{key} = {fmt(reg[key])}")
    if "alpha0_error" in reg:
        b.summary.append(f"alpha0: {reg['alpha0_error']}")
    b.summary.append(f"nu* = {fmt(reg['nu_star'])}, rate 1 - nu* = {fmt(reg['rate'])}")
    for name, verdict, value, bound, margin in rows:
        b.summary.append(f"  {name:<14} {verdict:<4} value {value:.6g} bound {bound:.6g} margin {margin:.3g}")


def _run_evolve(cfg, b: ResultBundle) -> None:
    _regime(cfg, need_nu=False, need_low_activity=False)
    alpha = _alpha(cfg)
    params = cfg.operator_params("evolve")
    k0 = initial_condition(cfg)
    k_ref = None
    if cfg.reference == "gibbs":
        k_ref = exact_gibbs_correlations(GibbsSpec(cfg.z, cfg.pot, cfg.dom), cfg.N_max)
    traj = evolve_star(k0, cfg.t_end, params, cfg.pot, cfg.dom, cfg.stride, C=cfg.C, alpha=alpha,
                       k_ref=k_ref)
    _norms_csv(b.out_dir / "norms.csv", traj)
    b.manifest["snapshots"] = _snapshots(b.out_dir, traj)
    b.manifest["derived"]["alpha"] = alpha
    tau = contraction_tolerance(params, cfg.pot, cfg.dom, cfg.C, cfg.N_max) * norm_K_C(k0, cfg.C)
    b.manifest["derived"]["tau_step"] = tau
    if math.isfinite(k0(())) and k0(()) != 0:
        drift = max(abs(k(()) - k0(())) for k in traj.states) / abs(k0(()))
        b.add("k(empty) constant", drift <= 1e-14, drift, 1e-14)
    steps = np.diff(traj.norm_C)
    worst = float(steps.max()) if steps.size else 0.0
    b.add("norm_C non-increasing", worst <= tau, worst, tau)
    inv = invariance_audit(traj, alpha, cfg.C, tau)
    b.add("alpha-norm invariance", inv.passed, inv.value, inv.bound + inv.tolerance)
    if not np.isfinite(norm_K_C(k0, alpha * cfg.C)):
        b.summary.append("initial condition outside the alpha*C space")
    b.summary.append(f"{len(traj.step_times) - 1} steps of delta = {fmt(params.delta)}; "
                     f"final norm_C = {fmt(traj.norm_C[-1])}")


def _run_ergodicity(cfg, b: ResultBundle) -> None:
    reg = _regime(cfg, need_nu=True, need_low_activity=True)
    if cfg.M > 16:
        raise DomainError("ergodicity needs the exact Gibbs state (M <= 16)")
    params = cfg.operator_params("ergodicity")
    k0 = initial_condition(cfg)
    k_mu = exact_gibbs_correlations(GibbsSpec(cfg.z, cfg.pot, cfg.dom), cfg.N_max)
    rep = ergodic_decay_report(k0, k_mu, cfg.t_end, params, cfg.pot, cfg.dom, cfg.C)
    _write_csv(b.out_dir / "decay.csv", ["t", "error_C", "envelope"],
               zip(rep.times.tolist(), rep.errors.tolist(), rep.envelope().tolist()))
    b.manifest["derived"].update({"nu_star": reg.nu, "rate": rep.rate, "tau": rep.tolerance,
                                  "slope": rep.slope, "fit_window": list(rep.fit_window),
                                  "trivially_converged": rep.trivially_converged})
    excess = float(np.max(rep.errors - rep.envelope()))
    b.add("decay envelope", rep.bound_ok, excess, 10 * rep.tolerance)
    b.add("fitted slope", rep.slope_ok, rep.slope, -rep.rate + 0.05)
    if not check_low_activity(cfg.z, cfg.c_phi).passed:
        b.summary.append("low-activity condition not met; finite-volume Gibbs state used anyway")
    b.summary.append(f"e(0) = {fmt(rep.e0)}, e(end) = {fmt(rep.errors[-1])}, slope {rep.slope:.4f} "
                     f"vs -(1 - nu*) = {-rep.rate:.4f}")


def _run_fixed_point(cfg, b: ResultBundle) -> None:
    if cfg.M > 16:
        raise DomainError("fixed-point needs the exact Gibbs state (M <= 16)")
    params = cfg.operator_params("fixed-point")
    k_mu = exact_gibbs_correlations(GibbsSpec(cfg.z, cfg.pot, cfg.dom), cfg.N_max)
    top = params.resolved_xi_cap(cfg.N_max)
    rows = []
    for cap in range(1, top + 1):
        p = OperatorParams(cfg.z, params.delta, cap, params.on_site)
        res = gibbs_fixed_point_residual(k_mu, p, cfg.pot, cfg.dom, cfg.C)
        tol = gibbs_residual_tolerance(k_mu, p, cfg.pot, cfg.dom, cfg.C)
        rows.append((cap, res, tol))
    _write_csv(b.out_dir / "residual.csv", ["N_xi", "residual", "tau_residual"], rows)
    _write_symfn(b.out_dir / "k_gibbs.csv", k_mu)
    cap, res, tol = rows[-1]
    b.add("gibbs residual", res <= 5 * tol, res, 5 * tol)
    if len(rows) > 1:
        gaps = [rows[i][1] - rows[i + 1][1] for i in range(len(rows) - 1)]
        b.add("residual decreases in N_xi", min(gaps) > 0, -min(gaps), 0.0)
    b.summary.extend(f"N_xi = {c}: residual {r:.6g} (tau {t:.3g})" for c, r, t in rows)


def center_tuples(dom: DomainSpec, n_est: int) -> list[tuple[int, ...]]:
    """Center site, then the centered adjacent pair and the pair two steps apart."""
    out = [dom.center_sites(1)]
    if n_est >= 2:
        a, b = dom.center_sites(2)
        out.append((a, b))
        if b + 1 < dom.num_sites:
            out.append((a, b + 1))
    return out


def _run_mc(cfg, b: ResultBundle) -> None:
    mc = cfg.mc
    mcfg = McConfig(cfg.dom, cfg.pot, cfg.z, mc["t_end"], mc["burn_in"], cfg.seed,
                    mc["replicas"], mc["batches"])
    res = mc_birth_death(mcfg, mc["n_est"])
    (b.out_dir / "mc.csv").write_text(res.to_csv())
    b.manifest["derived"]["events"] = res.events
    b.manifest["derived"]["absorbed"] = res.absorbed
    if not check_contraction_condition(cfg.z, cfg.C, cfg.c_phi)[0].passed:
        b.summary.append("warning: activity outside the contraction regime")
    b.add("events after burn-in", res.events >= 100000, -res.events, -100000)
    if cfg.M <= 16:
        exact = exact_gibbs_correlations(GibbsSpec(cfg.z, cfg.pot, cfg.dom), mc["n_est"])
        for eta in center_tuples(cfg.dom, mc["n_est"]):
            diff = abs(res.estimate(eta) - exact(eta))
            bound = 3 * res.stderr(eta)
            b.add(f"mc vs exact {eta}", diff <= bound, diff, bound)
            b.summary.append(f"k{eta}: mc {res.estimate(eta):.6g} +- {res.stderr(eta):.2g}, "
                             f"exact {exact(eta):.6g}")
    b.summary.append(f"{res.events} events after burn-in")


def _run_positivity(cfg, b: ResultBundle) -> None:
    params = cfg.operator_params("positivity")
    k0 = initial_condition(cfg)
    window = cfg.dom.center_sites(cfg.positivity["window"])
    weights = PairingWeights(cfg.dom.volume_element)
    rows = []
    times = sorted(cfg.positivity["times"])
    k = k0
    t_prev = 0.0
    for t in times:
        if t > t_prev:
            k = evolve_star(k, t - t_prev, params, cfg.pot, cfg.dom, 10 ** 9, C=cfg.C).final
            t_prev = t
        rep = positivity_probe(k, window, weights)
        total_dev = abs(rep.total - k(()))
        b.add(f"min pattern t={t:g}", rep.passed, -rep.min_value, rep.tolerance)
        b.add(f"pattern sum t={t:g}", total_dev <= 5 * rep.tolerance, total_dev, 5 * rep.tolerance)
        for xi, p in rep.patterns.items():
            rows.append((t, " ".join(map(str, xi)), p, rep.tolerance))
        b.summary.append(f"t = {t:g}: min pattern {rep.min_value:.3e}, sum {rep.total:.15f}, "
                         f"tau_pos {rep.tolerance:.2e}")
    _write_csv(b.out_dir / "patterns.csv", ["t", "pattern", "probability", "tau_pos"], rows)
    b.manifest["derived"]["window"] = list(window)


RUNNERS = {"regime-report": _run_regime_report, "evolve": _run_evolve,
           "ergodicity": _run_ergodicity, "fixed-point": _run_fixed_point,
           "mc-compare": _run_mc, "positivity": _run_positivity}


def run(cfg: ExperimentConfig, scenario: str | None = None, out_dir=None) -> ResultBundle:
    """Execute one scenario and write its bundle.

    Regime failures propagate as :class:`RegimeError` (naming the inequality
    and its margin) after the manifest has been written with the error.
    """
    scenario = scenario or cfg.scenario
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    if cfg.scenario is not None and cfg.scenario != scenario:
        raise ConfigError(f"config is for scenario {cfg.scenario!r}, not {scenario!r}")
    out_dir = out_dir or cfg.output or f"out-{scenario}"
    b = _new_bundle(cfg, scenario, out_dir)
    b.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        RUNNERS[scenario](cfg, b)
    except RegimeError as exc:
        b.manifest["regime_error"] = {"inequality": exc.inequality, "margin": exc.margin,
                                      "message": str(exc)}
        b.add(exc.inequality, False, -exc.margin, 0.0, "regime")
        b.write()
        raise
    b.write()
    return b


# comparison


def _read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class CompareReport:
    kind: str
    rows: list[tuple]
    max_diff: float
    tolerance: float
    passed: bool


def compare(bundle_a, bundle_b, tolerance: float) -> CompareReport:
    """Differences between two bundles of the same scenario and grid.

    Trajectory bundles are compared at the common time points, both in the
    logged norms and, where both hold a snapshot, in ``||k_a - k_b||_C``.
    MC bundles are compared tuple by tuple against 3 combined standard errors.
    """
    a, b = Path(bundle_a), Path(bundle_b)
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    if ma["scenario"] != mb["scenario"]:
        raise ConfigError(f"scenarios differ: {ma['scenario']} vs {mb['scenario']}")
    ca, cb = ma["config"], mb["config"]
    for key in ("M", "h", "d", "N_max"):
        if ca[key] != cb[key]:
            raise ConfigError(f"incompatible grids: {key} = {ca[key]} vs {cb[key]}")

    if (a / "mc.csv").exists():
        ra, rb = _read_csv(a / "mc.csv"), _read_csv(b / "mc.csv")
        rows, worst = [], 0.0
        ok = True
        for x, y in zip(ra, rb):
            if x["sites"] != y["sites"]:
                raise ConfigError("MC bundles list different tuples")
            d = abs(float(x["estimate"]) - float(y["estimate"]))
            se = math.hypot(float(x["stderr"]), float(y["stderr"]))
            ok &= d <= 3 * se
            worst = max(worst, d)
            rows.append((x["sites"], d, 3 * se))
        return CompareReport("mc", rows, worst, tolerance, bool(ok))

    if not (a / "norms.csv").exists():
        raise ConfigError("bundles carry neither norms.csv nor mc.csv")
    na = {round(float(r["t"]), 9): r for r in _read_csv(a / "norms.csv")}
    nb = {round(float(r["t"]), 9): r for r in _read_csv(b / "norms.csv")}
    common = sorted(set(na) & set(nb))
    if not common:
        raise ConfigError("no common time points")
    snaps_a = {round(s["t"], 9): s["file"] for s in ma.get("snapshots", [])}
    snaps_b = {round(s["t"], 9): s["file"] for s in mb.get("snapshots", [])}
    C = float(ca["C"])
    rows, worst = [], 0.0
    for t in common:
        d = abs(float(na[t]["norm_C"]) - float(nb[t]["norm_C"]))
        ds = math.nan
        if t in snaps_a and t in snaps_b:
            ka = SymFn.from_csv((a / snaps_a[t]).read_text(), ca["M"], ca["N_max"])
            kb = SymFn.from_csv((b / snaps_b[t]).read_text(), cb["M"], cb["N_max"])
            ds = norm_K_C(ka - kb, C)
        worst = max(worst, d, 0.0 if math.isnan(ds) else ds)
        rows.append((t, d, ds))
    return CompareReport("trajectory", rows, worst, tolerance, worst <= tolerance)


def tail_note(cfg: ExperimentConfig) -> float:
    """Analytic kernel-truncation bound for a unit-norm state (reported in manifests)."""
    cap = OperatorParams(cfg.z, cfg.resolved_delta(), cfg.N_xi).resolved_xi_cap(cfg.N_max)
    return truncation_tail_bound(1.0, cfg.C, cfg.c_phi, cap)
