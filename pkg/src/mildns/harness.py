"""Experiment runner and cross-cutting verifiers.

Every experiment is described by a self-contained ExperimentSpec (kind,
parameters, output directory, seed); re-running the same manifest with the
same seed reproduces the delimited outputs byte for byte.  Exit codes:
0 all assertions pass, 1 assertion failure, 2 scheme refusal, 3 invalid spec.
"""

from __future__ import annotations

import filecmp
import json
import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from .constants import grad_weak_norm, measure_constants, weak_norm
from .duhamel import (
    critical_estimate_ratio,
    duhamel_force_all,
    duhamel_G_all,
    duhamel_Gstar_all,
    heat_trajectory,
)
from .field import Field, Grid
from .harnessutil import fit_loglog
from .lorentz import (
    lorentz_banach_norm,
    lorentz_quasinorm,
    lp_norm,
    rearrangement,
)
from .picard import (
    SchemeConfig,
    SchemeDivergence,
    SchemeRefusal,
    global_scheme,
    kato_scheme,
    local_shifted_scheme,
    residual_integral_equation,
    uniqueness_compare,
)
from .profiles import (
    catalogue,
    gaussian_bump,
    mollified_power,
    random_solenoidal,
    solenoidal_single_mode,
    vectorize,
)
from .reporting import save_loglog, save_semilogy, save_series, write_csv
from .spectral import (
    convective_term,
    differential,
    heat_semigroup,
    inverse_transform,
    leray_project,
)
from .subspace import default_ladder, semigroup_continuity_sweep, xsigma_membership
from .timegrid import TimeGrid, Trajectory

__all__ = [
    "verify_strong_de",
    "brezis_decay_profile",
    "BrezisReport",
    "decay_rate_fit",
    "ExperimentSpec",
    "run_experiment",
    "EXPERIMENT_KINDS",
]


# -- verifiers ---------------------------------------------------------------


def verify_strong_de(
    u: Trajectory, f: Trajectory | None, window: tuple[float, float]
) -> float:
    """Normalized sup defect of the differential equation over the window.

    The time derivative is a central difference with exact non-uniform node
    weights; the right side Laplacian u - P[u.grad u] + P f uses the same
    dealiased operators as the schemes, so only time discretization remains.
    Windows touching t = 0 are rejected: the equation is claimed on t > 0.
    """
    t0, t1 = window
    if t0 <= 0:
        raise ValueError("window must start strictly after t = 0")
    nodes = u.time_grid.nodes
    n = u.grid.n
    sup_u = max(weak_norm(g, n) for g in u.fields)
    worst = 0.0
    seen = False
    for i in range(1, len(nodes) - 1):
        if not (t0 <= nodes[i] <= t1):
            continue
        seen = True
        dm = nodes[i] - nodes[i - 1]
        dp = nodes[i + 1] - nodes[i]
        w_m = -dp / (dm * (dm + dp))
        w_0 = (dp - dm) / (dm * dp)
        w_p = dm / (dp * (dm + dp))
        dudt = Field(
            u.grid,
            w_m * u[i - 1].data + w_0 * u[i].data + w_p * u[i + 1].data,
        )
        lap = differential(u[i], "laplacian")
        nonlin = inverse_transform(convective_term(u[i], u[i]))
        rhs_data = lap.data - nonlin.data
        if f is not None:
            rhs_data = rhs_data + leray_project(f.at(nodes[i])).data
        defect = weak_norm(Field(u.grid, dudt.data - rhs_data), n)
        worst = max(worst, defect)
    if not seen:
        raise ValueError("window contains no interior nodes")
    return worst / sup_u if sup_u > 0 else worst


@dataclass
class BrezisReport:
    times: np.ndarray
    gamma: np.ndarray  # t^(1/2 - n/2r) |u(t)|_r on the trajectory
    orbit_times: np.ndarray
    orbit_delta: np.ndarray  # worst heat-flow modulus over the orbit snapshots
    decreasing_to_zero: bool
    extrapolant: float

    def csv_rows(self):
        yield ["t", "gamma"]
        for t, g in zip(self.times, self.gamma):
            yield [t, g]


def brezis_decay_profile(u: Trajectory, r: float) -> BrezisReport:
    """Tabulate the weighted L^r profile whose vanishing drives uniqueness.

    gamma(t) = t^(1/2-n/2r) |u(t)|_r should fall to zero as t -> 0 for data
    in the continuity subspace; the orbit modulus delta(t) takes the same
    weight over the heat flow of trajectory snapshots.
    """
    n = u.grid.n
    if r <= n:
        raise ValueError(f"need r > n = {n}, got {r}")
    w = 0.5 - n / (2.0 * r)
    nodes = u.time_grid.nodes
    pos = nodes > 0
    times = nodes[pos]
    gamma = np.array(
        [t**w * lp_norm(g, r) for t, g in zip(nodes, u.fields) if t > 0]
    )
    # orbit modulus over a small battery of snapshots
    snap_idx = sorted({len(nodes) // 4, len(nodes) // 2, len(nodes) - 1})
    ladder = times[:: max(1, len(times) // 8)]
    orbit = []
    for t in ladder:
        worst = 0.0
        for i in snap_idx:
            ev = heat_semigroup(u[i], float(t))
            worst = max(worst, float(t) ** w * lp_norm(ev, r))
        orbit.append(worst)
    # monotone-to-zero trend at the small-time end
    head = gamma[:4]
    decreasing = bool(len(head) == 4 and np.all(np.diff(head) > 0))
    if len(times) >= 2 and times[1] > times[0]:
        slope = (gamma[1] - gamma[0]) / (times[1] - times[0])
        extrap = float(gamma[0] - slope * times[0])
    else:
        extrap = float(gamma[0])
    ok = decreasing and extrap < 0.5 * float(gamma[-1])
    return BrezisReport(
        times, gamma, np.asarray(ladder), np.asarray(orbit), ok, extrap
    )


def decay_rate_fit(series) -> tuple[float, float, float]:
    """Log-log least-squares (slope, intercept, r^2) of (t, value) pairs."""
    pts = list(series)
    if len(pts) < 5:
        raise ValueError("need at least 5 points")
    t = np.array([p[0] for p in pts], dtype=np.float64)
    v = np.array([p[1] for p in pts], dtype=np.float64)
    if np.any(v <= 0):
        raise ValueError("decay fit needs positive values")
    return fit_loglog(t, v)


# -- experiment specs --------------------------------------------------------

EXPERIMENT_KINDS = (
    "norm",
    "semigroup-rate",
    "picard",
    "xsigma",
    "verify-strong",
    "uniqueness",
    "brezis",
    "critical-constants",
    "suite",
)


@dataclass
class ExperimentSpec:
    kind: str
    out_dir: str
    seed: int = 0
    params: dict = dc_field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "out_dir": self.out_dir, "seed": self.seed,
             "params": self.params},
            indent=2, sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        raw = json.loads(text)
        return cls(
            kind=raw["kind"],
            out_dir=raw.get("out_dir", "out"),
            seed=int(raw.get("seed", 0)),
            params=dict(raw.get("params", {})),
        )


def _grid_from(params: dict, default_n=3, default_N=32, default_L=20.0) -> Grid:
    g = params.get("grid", {})
    return Grid(g.get("n", default_n), g.get("N", default_N), g.get("L", default_L))


def _timegrid_from(params: dict, horizon=4.0, segments=32, gamma=2.0) -> TimeGrid:
    t = params.get("time", {})
    return TimeGrid(
        t.get("horizon", horizon), t.get("segments", segments), t.get("gamma", gamma)
    )


class _Run:
    """Collects summary lines and the worst exit code of one experiment."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.lines: list[str] = []
        self.code = 0
        os.makedirs(out_dir, exist_ok=True)

    def check(self, ok: bool, label: str, detail: str = "") -> bool:
        status = "PASS" if ok else "FAIL"
        self.lines.append(f"{status} {label}" + (f" ({detail})" if detail else ""))
        if not ok:
            self.code = max(self.code, 1)
        return ok

    def note(self, text: str) -> None:
        self.lines.append(text)

    def refuse(self, label: str, detail: str) -> None:
        self.lines.append(f"REFUSED {label} ({detail})")
        self.code = max(self.code, 2)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def finish(self) -> int:
        with open(self.path("summary.txt"), "w") as fh:
            fh.write("\n".join(self.lines) + "\n")
        return self.code


# -- individual experiments --------------------------------------------------


def _exp_norm(spec: ExperimentSpec, run: _Run) -> None:
    params = spec.params
    p = params.get("p", 3.0)
    refinements = params.get("refinements", [32, 64, 128])
    L = params.get("L", 20.0)
    analytic = (4.0 * np.pi / 3.0) ** (1.0 / 3.0)

    # indicator exactness
    grid = Grid(3, 32, L)
    data = np.zeros(grid.shape)
    data.flat[:8] = 5.0
    ind = Field(grid, data)
    value = lorentz_quasinorm(ind, p)
    expected = 5.0 * (8 * grid.cell_volume) ** (1.0 / p)
    run.check(
        abs(value - expected) <= 1e-12 * expected,
        "indicator quasi-norm exact",
        f"value={value:.12g}",
    )

    rows = [["N", "L", "quasinorm", "banach_norm", "analytic", "rel_error"]]
    errors = []
    for N in refinements:
        g = Grid(3, N, L)
        f = mollified_power(g, alpha=3.0 / p)
        qn = lorentz_quasinorm(f, p)
        bn = lorentz_banach_norm(f, p)
        err = abs(qn - analytic) / analytic
        errors.append(err)
        rows.append([N, L, qn, bn, analytic, err])
    write_csv(run.path("norms.csv"), rows)
    run.check(
        all(errors[i + 1] < errors[i] for i in range(len(errors) - 1)),
        "analytic-constant error decreasing under refinement",
        "errors " + ", ".join(f"{e:.4g}" for e in errors),
    )
    run.check(
        errors[-1] < params.get("tol", 0.02),
        f"analytic constant within {params.get('tol', 0.02):.0%} at N={refinements[-1]}",
        f"rel_error={errors[-1]:.4g}",
    )

    g = Grid(3, refinements[0], L)
    re = rearrangement(mollified_power(g, alpha=3.0 / p))
    write_csv(
        run.path("rearrangement.csv"),
        [["mu", "m"]] + [[mu, m] for mu, m in list(re.to_csv_rows())[:: max(1, len(re.magnitudes) // 512)]],
    )
    save_loglog(
        run.path("rearrangement.png"),
        re.measures[:: max(1, len(re.magnitudes) // 512)],
        {"profile": re.magnitudes[:: max(1, len(re.magnitudes) // 512)]},
        "measure", "magnitude", "decreasing rearrangement",
    )


def _exp_semigroup_rate(spec: ExperimentSpec, run: _Run) -> None:
    params = spec.params
    grid = _grid_from(params, default_N=params.get("N", 128), default_L=params.get("L", 6.4))
    p = params.get("p", 3.0)
    r = params.get("r", 6.0)
    n = grid.n
    ts = np.geomspace(params.get("t_min", 1e-2), params.get("t_max", 1.0),
                      params.get("points", 8))
    a = mollified_power(grid, alpha=n / p)
    vals, gvals = [], []
    for t in ts:
        ev = heat_semigroup(a, float(t))
        vals.append(lorentz_quasinorm(ev, r))
        gvals.append(lorentz_quasinorm(differential(ev, "gradient"), r))
    write_csv(
        run.path("smoothing.csv"),
        [["t", "value_norm", "gradient_norm"]]
        + [[t, v, g] for t, v, g in zip(ts, vals, gvals)],
    )
    save_loglog(
        run.path("smoothing.png"), ts, {"value": vals, "gradient": gvals},
        "t", "weak norm", "heat-flow smoothing decay",
    )
    target = -(n / 2.0) * (1.0 / p - 1.0 / r)
    slope_v, _, _ = decay_rate_fit(zip(ts, vals))
    slope_g, _, _ = decay_rate_fit(zip(ts, gvals))
    tol = params.get("tol", 0.05)
    run.check(
        abs(slope_v - target) <= tol,
        "value-norm decay exponent",
        f"slope={slope_v:.4f} target={target:.4f}",
    )
    run.check(
        abs(slope_g - (target - 0.5)) <= tol,
        "gradient-norm decay exponent",
        f"slope={slope_g:.4f} target={target - 0.5:.4f}",
    )


def _default_force(grid, tg, amplitude: float) -> Trajectory | None:
    if amplitude == 0.0:
        return None
    mode = solenoidal_single_mode(grid, (0, 2, 0), amplitude)
    return Trajectory(
        tg, [mode * float(np.sin(t)) for t in tg.nodes]
    )


def _exp_picard(spec: ExperimentSpec, run: _Run) -> None:
    params = spec.params
    grid = _grid_from(params, default_N=16)
    tg = _timegrid_from(params, horizon=4.0, segments=24)
    variant = params.get("variant", "global_weak")
    amp = params.get("amplitude", 0.2)
    # two interacting shear modes: the quadratic term is genuinely active
    a = solenoidal_single_mode(grid, (0, 1, 0), amp) + solenoidal_single_mode(
        grid, (1, 0, 2), 0.6 * amp
    )
    f = _default_force(grid, tg, params.get("force_amplitude", 0.0))
    cfg = SchemeConfig(time_grid=tg, tau_stop=params.get("tau_stop", 1e-9))

    try:
        if variant in ("global_weak", "global_mild"):
            u, ledger = global_scheme(a, f, cfg, variant.split("_")[1])
            form = "IEstar" if variant == "global_weak" else "IE"
            t_loc = tg.horizon
        elif variant == "local_shifted":
            u, ledger, t_loc = local_shifted_scheme(a, f, cfg)
            form = "IEstar"
        elif variant == "kato":
            u, ledger, t_loc = kato_scheme(a, f, cfg)
            form = "IE"
        else:
            run.note(f"unknown variant {variant}")
            run.code = 3
            return
    except SchemeRefusal as exc:
        run.refuse(variant, f"measured={exc.measured:.6g} threshold={exc.threshold:.6g}")
        if exc.ledger is not None:
            with open(run.path("ledger.json"), "w") as fh:
                fh.write(exc.ledger.to_json())
        return
    except SchemeDivergence as exc:
        run.check(False, f"{variant} convergence", f"d-sequence {exc.differences}")
        return

    write_csv(run.path("ledger.csv"), ledger.csv_rows())
    with open(run.path("ledger.json"), "w") as fh:
        fh.write(ledger.to_json())
    res = residual_integral_equation(u, leray_project(a),
                                     f.restricted(len(u) - 1) if f is not None else None,
                                     form)
    run.check(res <= 10 * cfg.tau_stop, "integral-equation residual",
              f"residual={res:.3g}")
    if variant in ("global_weak", "global_mild"):
        k0 = ledger.initial["K0"]
        ks = [it["K"] for it in ledger.iterations]
        run.check(
            all(k <= 2.0 * k0 * (1 + 1e-9) for k in ks),
            "uniform bound K_m <= 2 K_0",
            f"max={max(ks):.6g} bound={2 * k0:.6g}",
        )
        ratios = ledger.difference_ratios()
        run.check(
            all(rho < 1.0 for rho in ratios),
            "difference sequence contracts",
            "ratios " + ", ".join(f"{r:.3f}" for r in ratios[:6]),
        )
    run.note(f"T_loc={t_loc:.6g}" if variant in ("local_shifted", "kato") else "global horizon")
    its = range(1, len(ledger.differences) + 1)
    save_semilogy(run.path("differences.png"), list(its),
                  {"d_m": ledger.differences}, "sweep", "sup difference",
                  f"{variant} contraction")


def _exp_xsigma(spec: ExperimentSpec, run: _Run) -> None:
    params = spec.params
    grid = _grid_from(params)
    rows = [["profile", "expected", "decision", "slope", "delta_last", "plateau"]]
    sweep_rows = [["profile", "epsilon", "delta"]]
    series = {}
    all_ok = True
    for entry in catalogue:
        f = entry.build(grid)
        ladder = default_ladder(entry.ladder_top, entry.ladder_steps)
        sweep = semigroup_continuity_sweep(f, ladder=ladder)
        decision = xsigma_membership(f, sweep)
        ok = decision == entry.expected
        all_ok &= ok
        rows.append([entry.name, entry.expected, decision, sweep.slope,
                     sweep.deltas[-1], sweep.plateau])
        for e, d in zip(sweep.epsilons, sweep.deltas):
            sweep_rows.append([entry.name, e, d])
        series[entry.name] = sweep.deltas / max(sweep.norm, 1e-300)
        run.check(ok, f"decision {entry.name}", f"{decision} vs {entry.expected}")
    write_csv(run.path("decisions.csv"), rows)
    write_csv(run.path("sweeps.csv"), sweep_rows)
    eps_union = {name: default_ladder(e.ladder_top, e.ladder_steps)
                 for name, e in zip(series, catalogue)}
    for name in series:
        save_loglog(run.path(f"sweep_{name}.png"), eps_union[name],
                    {name: series[name]}, "epsilon", "relative delta",
                    "semigroup continuity sweep")


def _exp_verify_strong(spec: ExperimentSpec, run: _Run) -> None:
    params = spec.params
    grid = _grid_from(params, default_N=16, default_L=12.0)
    refinements = params.get("refinements", [16, 32, 64])
    horizon = params.get("horizon", 1.0)
    amp = params.get("amplitude", 0.3)
    a = vectorize(gaussian_bump(grid, sigma=grid.L / 4.0)) * amp
    residuals = []
    for M in refinements:
        tg = TimeGrid(horizon, M, 2.0)
        f = _default_force(grid, tg, params.get("force_amplitude", 0.02))
        cfg = SchemeConfig(time_grid=tg, tau_stop=1e-11)
        try:
            u, ledger, t_loc = kato_scheme(a, f, cfg)
        except SchemeRefusal as exc:
            run.refuse("kato", f"measured={exc.measured:.3g} threshold={exc.threshold:.3g}")
            return
        window = (t_loc / 4.0, t_loc)
        residuals.append(verify_strong_de(u, f, window))
    write_csv(run.path("de_residual.csv"),
              [["segments", "residual"]] + [[M, r] for M, r in zip(refinements, residuals)])
    save_loglog(run.path("de_residual.png"), refinements, {"residual": residuals},
                "time segments", "normalized defect", "strong-equation residual")
    orders = [
        np.log2(residuals[i] / residuals[i + 1])
        / np.log2(refinements[i + 1] / refinements[i])
        for i in range(len(residuals) - 1)
    ]
    run.check(
        all(o >= params.get("order_floor", 1.5) for o in orders),
        "residual refinement order",
        "orders " + ", ".join(f"{o:.2f}" for o in orders),
    )
    run.note(f"residuals {', '.join(f'{r:.3g}' for r in residuals)}")
    # force regularity probe: continuity sweep of P f at a few nodes
    tg = TimeGrid(horizon, refinements[0], 2.0)
    f = _default_force(grid, tg, params.get("force_amplitude", 0.02))
    if f is not None:
        slopes = []
        for i in (1, len(tg) // 2, len(tg) - 1):
            sw = semigroup_continuity_sweep(leray_project(f[i]))
            slopes.append(sw.slope)
        run.note(
            "force (A)-probe slopes min/median "
            f"{min(slopes):.3f}/{sorted(slopes)[len(slopes) // 2]:.3f}"
        )


def _exp_uniqueness(spec: ExperimentSpec, run: _Run) -> None:
    params = spec.params
    grid = _grid_from(params, default_N=16)
    tg = _timegrid_from(params, horizon=1.0, segments=24)
    amp = params.get("amplitude", 0.4)
    a = vectorize(gaussian_bump(grid, sigma=grid.L / 5.0)) * amp
    f = _default_force(grid, tg, params.get("force_amplitude", 0.02))
    cfg = SchemeConfig(time_grid=tg, tau_stop=params.get("tau_stop", 1e-10))
    report = uniqueness_compare(a, f, cfg,
                                schemes=tuple(params.get("schemes",
                                                         ("local_shifted", "kato"))))
    write_csv(
        run.path("uniqueness.csv"),
        [["field", "value"]] + [[k, v] for k, v in report.to_dict().items()],
    )
    run.check(report.verdict == "agree", "cross-scheme agreement",
              f"diff={report.sup_difference:.3g} tol={report.tolerance:.3g}")
    if report.continuation_difference is not None:
        run.check(
            report.continuation_difference <= report.continuation_tolerance,
            "continuation agreement",
            f"diff={report.continuation_difference:.3g}",
        )


def _exp_brezis(spec: ExperimentSpec, run: _Run) -> None:
    params = spec.params
    grid = _grid_from(params, default_N=16, default_L=12.0)
    tg = _timegrid_from(params, horizon=1.0, segments=32)
    r = params.get("r", 6.0)
    a = vectorize(gaussian_bump(grid, sigma=grid.L / 4.0)) * params.get("amplitude", 0.3)
    cfg = SchemeConfig(time_grid=tg, r=r)
    try:
        u, ledger, t_loc = kato_scheme(a, None, cfg)
    except SchemeRefusal as exc:
        run.refuse("kato", f"measured={exc.measured:.3g}")
        return
    report = brezis_decay_profile(u, r)
    write_csv(run.path("brezis.csv"), report.csv_rows())
    save_loglog(run.path("brezis.png"), report.times, {"gamma": report.gamma},
                "t", "weighted L^r profile", "small-time decay")
    run.check(report.decreasing_to_zero, "gamma decreases to zero",
              f"extrapolant={report.extrapolant:.3g} last={report.gamma[-1]:.3g}")


def _exp_critical_constants(spec: ExperimentSpec, run: _Run) -> None:
    params = spec.params
    grid = _grid_from(params, default_N=32)
    tg = _timegrid_from(params, horizon=8.0, segments=24)
    consts = measure_constants(grid, tg, params.get("r", 6.0))
    rows = [["name", "value"]]
    for k, v in consts.to_dict().items():
        rows.append([k, v])
    write_csv(run.path("constants.csv"), rows)
    run.note(f"probe hash {consts.probe_hash}")
    finite = all(
        np.isfinite(v) and v > 0
        for k, v in consts.to_dict().items()
        if isinstance(v, float)
    )
    run.check(finite, "empirical constants finite and positive")

    rng = np.random.default_rng(spec.seed)
    base = random_solenoidal(grid, rng)
    n = grid.n
    p_modi = 1.0 if n == 3 else n / 3.0
    table = [["variant", "p", "q", "horizon", "lhs", "rhs", "ratio", "tail"]]
    ratios = {}
    for horizon_scale in (1.0, 2.0):
        tg2 = TimeGrid(tg.horizon * horizon_scale, tg.segments, 1.0)
        probe = Trajectory.constant(tg2, base)
        for variant, p in (("modi", p_modi), ("meyer", n / 2.0)):
            rep = critical_estimate_ratio(probe, p, variant)
            table.append([variant, rep.p, rep.q, rep.horizon, rep.lhs,
                          rep.rhs, rep.ratio, rep.tail_bound])
            ratios.setdefault(variant, []).append(rep.ratio)
    write_csv(run.path("critical_ratios.csv"), table)
    for variant, pair in ratios.items():
        drift = abs(pair[1] - pair[0]) / pair[0]
        run.check(drift < params.get("horizon_tol", 0.05),
                  f"{variant} ratio stable under horizon doubling",
                  f"drift={drift:.4g}")


def _operator_identity_check(run: _Run, seed: int) -> None:
    """Quick projection/commutation identities on random probes."""
    grid = Grid(3, 16, 20.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        u = random_solenoidal(grid, rng)
        pu = leray_project(u)
        ppu = leray_project(pu)
        scale = np.max(np.abs(pu.data))
        worst = max(worst, np.max(np.abs(ppu.data - pu.data)) / scale)
        hp = heat_semigroup(pu, 0.3)
        ph = leray_project(heat_semigroup(u, 0.3))
        worst = max(worst, np.max(np.abs(hp.data - ph.data)) / scale)
    run.check(worst <= 1e-10, "projection and commutation identities",
              f"worst={worst:.3g}")


def _determinism_check(run: _Run, spec: ExperimentSpec) -> None:
    sub_a = ExperimentSpec("norm", os.path.join(run.out_dir, "det_a"), spec.seed,
                           {"refinements": [16, 32]})
    sub_b = ExperimentSpec("norm", os.path.join(run.out_dir, "det_b"), spec.seed,
                           {"refinements": [16, 32]})
    run_experiment(sub_a)
    run_experiment(sub_b)
    same = True
    for name in sorted(os.listdir(sub_a.out_dir)):
        if not name.endswith(".csv"):
            continue
        same &= filecmp.cmp(
            os.path.join(sub_a.out_dir, name),
            os.path.join(sub_b.out_dir, name),
            shallow=False,
        )
    run.check(same, "rerun produces byte-identical CSVs")


def _exp_suite(spec: ExperimentSpec, run: _Run) -> None:
    """Reduced end-to-end pass over every experiment, one line per criterion."""
    sub_specs = {
        "norm": {"refinements": [32, 64], "tol": 0.05},
        "semigroup-rate": {"grid": {"n": 3, "N": 64, "L": 6.4}, "points": 6},
        "picard": {},
        "xsigma": {},
        "verify-strong": {"refinements": [16, 32]},
        "uniqueness": {},
        "brezis": {},
        "critical-constants": {},
    }
    codes = {}
    for kind, params in sub_specs.items():
        sub = ExperimentSpec(kind, os.path.join(run.out_dir, kind.replace("-", "_")),
                             spec.seed, dict(params))
        codes[kind] = run_experiment(sub)
        run.note(f"[{kind}] exit {codes[kind]}")
    _operator_identity_check(run, spec.seed)
    _determinism_check(run, spec)
    failed = [k for k, c in codes.items() if c != 0]
    run.check(not failed, "all sub-experiments pass",
              "failed: " + ", ".join(failed) if failed else "")


_DISPATCH = {
    "norm": _exp_norm,
    "semigroup-rate": _exp_semigroup_rate,
    "picard": _exp_picard,
    "xsigma": _exp_xsigma,
    "verify-strong": _exp_verify_strong,
    "uniqueness": _exp_uniqueness,
    "brezis": _exp_brezis,
    "critical-constants": _exp_critical_constants,
    "suite": _exp_suite,
}


def run_experiment(spec: ExperimentSpec) -> int:
    """Execute one experiment; returns the exit-code contract value."""
    if spec.kind not in _DISPATCH:
        return 3
    if not isinstance(spec.seed, int) or spec.seed < 0:
        return 3
    run = _Run(spec.out_dir)
    with open(run.path("manifest.json"), "w") as fh:
        fh.write(spec.to_json())
    try:
        _DISPATCH[spec.kind](spec, run)
    except (ValueError, KeyError) as exc:
        run.note(f"invalid spec: {exc}")
        run.finish()
        return 3
    return run.finish()
