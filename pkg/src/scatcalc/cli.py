"""Reproducible experiment driver.

    scatcalc <experiment> --config <file> [--out <dir>] [--seed <int>]
             [--format json|csv]

Experiments: flow, radial, quantize-check, commutant, helmholtz, threshold,
pairing, scatter1d, radon, var-order.  Configs are strict JSON objects (all
violations are reported at once, unknown keys get a nearest-name suggestion);
reports are byte-stable for a fixed (config, seed): floats are serialized
with 17 significant digits and wall time stays out of the report files.

Exit codes: 0 all criteria pass, 1 criterion failure, 2 config error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import difflib
import json
import sys
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

__all__ = ["ExperimentConfig", "RunReport", "load_config", "run_experiment", "emit_report", "main"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    values: dict
    seed: int = 0
    output_dir: str = "."


@dataclass
class RunReport:
    experiment: str
    parameters: dict
    metrics: dict
    criteria: dict
    tables: dict = dc_field(default_factory=dict)
    wall_time_s: float = 0.0  # not serialized: reports must be byte-stable

    @property
    def passed(self) -> bool:
        return all(bool(v) for v in self.criteria.values())


def _positive(x):
    return x > 0


def _even(x):
    return x % 2 == 0 and x >= 8


_COMMON = {
    "seed": (int, 0, None),
    "output_dir": (str, ".", None),
}

_SCHEMAS = {
    "flow": {
        "lambda": (float, 1.0, _positive),
        "dim": (int, 2, lambda v: v in (2, 3)),
        "trajectories": (int, 50, _positive),
        "time": (float, 20.0, _positive),
        "dt": (float, 0.01, lambda v: 0 < v <= 0.01),
    },
    "radial": {
        "model": (str, "helmholtz", lambda v: v in ("helmholtz", "klein_gordon", "wave", "x_dx", "d_x1")),
        "lambda": (float, 1.0, _positive),
        "dim": (int, 2, lambda v: v in (1, 2, 3)),
        "resolution": (int, 8, _positive),
    },
    "quantize-check": {
        "L": (float, 20.0, _positive),
        "N": (int, 128, _even),
    },
    "commutant": {
        "s0": (float, 1.0, _positive),
        "eps": (float, 0.25, _positive),
        "digamma": (float, 10.0, _positive),
        "lambda": (float, 1.0, _positive),
        "r_below": (float, -1.0, lambda v: v < -0.5),
        "r_above": (float, 0.0, lambda v: v > -0.5),
        "delta": (float, 0.05, _positive),
        "L": (float, 6.0, _positive),
        "N": (int, 64, _even),
        "fields": (int, 20, _positive),
    },
    "helmholtz": {
        "lambda": (float, 1.0, _positive),
        "dims": (list, [2, 3], None),
        "r_min": (float, 20.0, _positive),
        "r_max": (float, 200.0, _positive),
        "n_radii": (int, 16, _positive),
    },
    "threshold": {
        "lambda": (float, 1.0, _positive),
        "orders": (list, [-0.75, -0.5, 0.0], None),
        "radii": (list, [50.0, 100.0, 200.0, 400.0], None),
    },
    "pairing": {
        "lambda": (float, 1.0, _positive),
        "radii": (list, [100.0, 200.0, 400.0], None),
    },
    "scatter1d": {
        "potential": (str, "free", lambda v: v in ("free", "square_barrier", "gaussian_bump", "compact_bump")),
        "height": (float, 2.0, None),
        "width": (float, 1.0, _positive),
        "lambdas": (list, [0.5, 0.8, 1.1, 1.4, 1.7, 2.0, 2.3, 2.6, 2.9, 3.2], None),
    },
    "radon": {
        "dim": (int, 2, lambda v: v in (2, 3)),
        "grid_points": (int, 24, lambda v: 4 <= v <= 24),
        "directions": (int, 64, _positive),
        "cone_width": (float, 0.3, _positive),
    },
    "var-order": {
        "L": (float, 12.0, _positive),
        "N": (int, 96, _even),
        "s": (float, 0.0, None),
        "r_const": (float, -1.0, None),
    },
}


def load_config(path, experiment: str) -> ExperimentConfig:
    """Parse and validate a JSON config against the experiment's schema.

    All violations are collected and reported together; unknown keys carry a
    closest-match suggestion.
    """
    if experiment not in _SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {sorted(_SCHEMAS)}")
    try:
        body = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(body, dict):
        raise ConfigError("config body must be a JSON object")
    schema = {**_COMMON, **_SCHEMAS[experiment]}
    problems = []
    values = {}
    for key, spec_val in body.items():
        if key not in schema:
            hint = difflib.get_close_matches(key, schema.keys(), n=1)
            extra = f" (did you mean {hint[0]!r}?)" if hint else ""
            problems.append(f"unknown key {key!r}{extra}")
            continue
        typ, _, check = schema[key]
        val = spec_val
        if typ is float and isinstance(val, int):
            val = float(val)
        if not isinstance(val, typ):
            problems.append(f"key {key!r} must have type {typ.__name__}")
            continue
        if check is not None and not check(val):
            problems.append(f"key {key!r} fails its range check (got {val!r})")
            continue
        values[key] = val
    for key, (typ, default, _) in schema.items():
        values.setdefault(key, default)
    if problems:
        raise ConfigError("invalid config:\n  " + "\n  ".join(problems))
    return ExperimentConfig(
        experiment=experiment,
        values={k: v for k, v in values.items() if k not in _COMMON},
        seed=values["seed"],
        output_dir=values["output_dir"],
    )


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------


def _run_flow(v, seed):
    from .hamflow import PhasePointChart, char_value, flow_trajectory, helmholtz_model
    from .hamflow import helmholtz_radial_distance, trajectory_rows

    lam, n = v["lambda"], v["dim"]
    H = helmholtz_model(lam, n)
    rng = np.random.default_rng(seed)
    dists, rho_max, char_max = [], 0.0, 0.0
    first_rows = None
    for _ in range(v["trajectories"]):
        xi = rng.standard_normal(n)
        xi *= lam / np.linalg.norm(xi)
        xdir = rng.standard_normal(n)
        xdir /= np.linalg.norm(xdir)
        j = int(np.argmax(np.abs(xdir)))
        others = [m for m in range(n) if m != j]
        start = PhasePointChart(
            "spatial_face",
            {"rho": 0.0, "y": xdir[others] / xdir[j], "xi": xi},
            axis=j,
            sign=int(np.sign(xdir[j])),
        )
        path = flow_trajectory(H, start, v["time"], v["dt"])
        dists.append(helmholtz_radial_distance(H, path[-1], "out"))
        rho_max = max(rho_max, max(abs(float(p.coords["rho"])) for p in path))
        char_max = max(char_max, max(abs(char_value(H, p)) for p in path))
        if first_rows is None:
            first_rows = trajectory_rows(H, path[:: max(1, len(path) // 200)])
    metrics = {
        "max_final_distance_to_out": float(max(dists)),
        "max_rho_on_boundary_paths": rho_max,
        "max_char_drift": char_max,
    }
    criteria = {
        "all_trajectories_reach_sink": max(dists) < 1e-3,
        "boundary_invariance": rho_max < 1e-9,
        "char_conservation": char_max < 1e-6,
    }
    return metrics, criteria, {"trajectory": first_rows}


def _run_radial(v, seed):
    from . import hamflow as hf

    name = v["model"]
    if name == "helmholtz":
        H = hf.helmholtz_model(v["lambda"], v["dim"])
    elif name == "klein_gordon":
        H = hf.klein_gordon_model()
    elif name == "wave":
        H = hf.wave_model()
    elif name == "x_dx":
        H = hf.x_dx_model()
    else:
        H = hf.d_x1_model(v["dim"])
    rep = hf.find_radial_points(H, resolution=v["resolution"])
    rows = [
        {
            "family": p.family,
            "verdict": p.verdict,
            "tau": p.tau if p.tau is not None else float("nan"),
            "mu": p.mu if p.mu is not None else float("nan"),
            "max_re_eig": float(np.max(p.eigenvalues.real)),
            "min_re_eig": float(np.min(p.eigenvalues.real)),
        }
        for p in rep.points
    ]
    metrics = {"n_points": len(rep.points)}
    criteria = {"nonempty": len(rep.points) > 0}
    if name == "helmholtz":
        lam = v["lambda"]
        tau_dev = max(abs(abs(p.tau) - lam) for p in rep.points)
        mu_max = max(abs(p.mu) for p in rep.points)
        ratios = []
        for p in rep.points:
            b0, b1, th = hf.threshold_data(H, p.point)
            ratios.append(b1 / b0)
        metrics.update(
            {
                "tau_deviation": float(tau_dev),
                "mu_max": float(mu_max),
                "beta_ratio_err": float(max(abs(r - 2.0) for r in ratios)),
                "threshold_order": -0.5,
            }
        )
        criteria.update(
            {
                "tau_on_sphere": tau_dev < 1e-8,
                "mu_vanishes": mu_max < 1e-8,
                "in_source_out_sink": all(
                    (p.family == "out") == (p.verdict == "sink") for p in rep.points
                ),
                "beta_ratio_two": max(abs(r - 2.0) for r in ratios) < 1e-6,
            }
        )
    if name == "wave":
        pt = hf.PhasePointChart("kg_face", {"rho": 0.0, "v": 0.0, "tau": 0.0, "xi": 0.0}, sign=1)
        verdict, _ = hf.classify_radial(H, pt)
        metrics["zero_section_verdict"] = verdict
        criteria["degenerate_gate"] = verdict == "degenerate"
    return metrics, criteria, {"radial_points": rows}


def _run_quantize(v, seed):
    from .grid import field_from_function, make_grid
    from .symbols import compose_expansion, quantize, sym1d, symbol_from_kernel

    spec = make_grid(1, v["L"], v["N"])
    one = sym1d(lambda x, xi: np.ones_like(x + xi), (0, 0), depends_on_x=False, depends_on_xi=False)
    id_err = float(np.max(np.abs(quantize(one, spec).as_l2_matrix() - np.eye(spec.size))))
    s_xi = sym1d(lambda x, xi: xi + 0 * x, (1, 0), depends_on_x=False)
    s_x = sym1d(lambda x, xi: x + 0 * xi, (0, 1), depends_on_xi=False)
    comp = compose_expansion(s_xi, s_x, 2)
    prod = quantize(s_xi, spec).compose(quantize(s_x, spec))
    target = quantize(comp, spec)
    diff = prod.as_l2_matrix() - target.as_l2_matrix()
    rng = np.random.default_rng(seed)
    resid = 0.0
    for _ in range(5):
        shift = rng.uniform(-2, 2)
        u = field_from_function(spec, lambda x: np.exp(-((x - shift) ** 2) / 6.0))
        resid = max(resid, float(np.linalg.norm(diff @ u.values) / np.linalg.norm(u.values)))
    a = sym1d(lambda x, xi: np.exp(-(x**2) / 2 - xi**2 / 2), (0, 0))
    tab = symbol_from_kernel(quantize(a, spec), spec)
    xs = spec.axis()
    interior = np.abs(xs) <= v["L"] / 2
    vals = tab.value_table().reshape(spec.size, spec.size)
    X, XI = np.meshgrid(xs, spec.freq_axis(), indexing="ij")
    rt_err = float(np.max(np.abs(vals - np.exp(-(X**2) / 2 - XI**2 / 2))[interior]))
    metrics = {"op1_identity_err": id_err, "moyal_terminating_resid": resid, "kernel_roundtrip_err": rt_err}
    criteria = {
        "op1_is_identity": id_err < 1e-10,
        "xi_x_composition": resid < 1e-9,
        "kernel_roundtrip": rt_err < 1e-8,
    }
    return metrics, criteria, {}


def _run_commutant(v, seed):
    from .commutants import (
        SupportTooWideError,
        build_propagation_commutant,
        model_inequality_margins,
        radial_commutant_check,
    )
    from .grid import make_grid

    cb = build_propagation_commutant(v["s0"], v["eps"], digamma=v["digamma"])
    below = radial_commutant_check(v["lambda"], v["r_below"], v["delta"])
    above = radial_commutant_check(v["lambda"], v["r_above"], v["delta"])
    try:
        radial_commutant_check(v["lambda"], -0.5, v["delta"])
        threshold_rejected = False
    except SupportTooWideError:
        threshold_rejected = True
    spec = make_grid(2, v["L"], v["N"])
    pairs = model_inequality_margins(spec, n_fields=v["fields"], seed=seed)
    min_margin = min(r - l for l, r in pairs)
    metrics = {
        "flowbox_residual": cb.residual_sup,
        "radial_residual_below": below.residual_sup,
        "radial_residual_above": above.residual_sup,
        "model_inequality_min_margin": float(min_margin),
    }
    criteria = {
        "flowbox_identity": cb.residual_sup < 1e-8,
        "eprime_in_turn_on": cb.eprime_support_ok,
        "radial_identity_below": below.residual_sup < 1e-8,
        "radial_identity_above": above.residual_sup < 1e-8,
        "threshold_order_rejected": threshold_rejected,
        "model_inequality": min_margin > -1e-8,
    }
    return metrics, criteria, {}


def _run_helmholtz(v, seed):
    from .helmholtz import (
        eigenfunction_evaluator,
        error_slope,
        sphere_density,
        stationary_phase_leading,
    )

    radii = np.geomspace(v["r_min"], v["r_max"], v["n_radii"])
    metrics, criteria, rows = {}, {}, []
    for n in v["dims"]:
        if n == 2:
            f = sphere_density(2, lambda th: 1.0 + 0.5 * th[:, 0] + 0.2j * th[:, 1])
        else:
            f = sphere_density(3, lambda th: 1.0 + 0.4 * th[:, 2] + 0.2 * th[:, 0])
        slope = error_slope(f, v["lambda"], radii)
        target = -(n + 1) / 2.0
        metrics[f"slope_n{n}"] = float(slope)
        criteria[f"stationary_phase_n{n}"] = abs(slope - target) < 0.2
        u = eigenfunction_evaluator(f, v["lambda"])
        direction = np.zeros(n)
        direction[0] = 1.0
        for r in radii:
            pt = (r * direction)[None, :]
            uv = complex(u(pt)[0])
            lv = complex(np.atleast_1d(stationary_phase_leading(f, v["lambda"], pt))[0])
            rows.append(
                {"n": n, "radius": float(r), "abs_u": abs(uv), "abs_leading": abs(lv),
                 "error": abs(uv - lv)}
            )
    return metrics, criteria, {"ladder": rows}


def _run_threshold(v, seed):
    from .helmholtz import sphere_density, threshold_scan

    f = sphere_density(2, lambda th: 1.0 + 0.45 * th[:, 0] + 0.2j * th[:, 1])
    table = threshold_scan(f, v["lambda"], v["orders"], v["radii"])
    rows, metrics, criteria = [], {}, {}
    for r, entry in table.items():
        row = {"order": r, "kind": entry["kind"]}
        if entry["kind"] == "power":
            row["exponent"] = entry["exponent"]
            metrics[f"exponent_r{r}"] = entry["exponent"]
            criteria[f"growth_r{r}"] = abs(entry["exponent"] - (2 * r + 1)) < 0.05
        elif entry["kind"] == "log":
            row["log_r2"] = entry["log_r2"]
            metrics["log_fit_r2"] = entry["log_r2"]
            criteria["log_at_threshold"] = entry["log_r2"] > 0.99
        else:
            row["ratio"] = entry["ratio"]
            metrics[f"bounded_ratio_r{r}"] = entry["ratio"]
            criteria[f"bounded_r{r}"] = entry["ratio"] < 1.1
        rows.append(row)
    return metrics, criteria, {"threshold": rows}


def _run_pairing(v, seed):
    from .helmholtz import (
        asymptotic_profile,
        boundary_pairing_check,
        build_poisson_series,
        solution_from_series,
        sphere_density,
        sphere_rule,
    )

    lam = v["lambda"]
    f1 = sphere_density(2, lambda th: 1.0 + 0.5 * th[:, 0] + 0.2j * th[:, 1])
    ser = build_poisson_series({0: 1.0, 1: 0.4, -1: 0.15j}, 0, lam, 2)
    sol2 = solution_from_series(ser)
    gaps = []
    for R in v["radii"]:
        _, _, gap = boundary_pairing_check(f1, sol2, lam, float(R))
        gaps.append(gap)
    prof = asymptotic_profile(f1, lam)
    nodes, w = sphere_rule(2, 64)
    rhs_self = 2j * lam * (
        np.sum(w * np.abs(prof.f_plus(nodes)) ** 2) - np.sum(w * np.abs(prof.f_minus(nodes)) ** 2)
    )
    metrics = {"final_gap": gaps[-1], "self_pairing_rhs": abs(complex(rhs_self))}
    criteria = {
        "gap_below_10pct": gaps[-1] < 0.10,
        "gap_decreasing": all(gaps[i] > gaps[i + 1] for i in range(len(gaps) - 1)),
        "self_pairing_zero": abs(complex(rhs_self)) < 1e-6,
    }
    rows = [{"R": float(R), "gap": g} for R, g in zip(v["radii"], gaps)]
    return metrics, criteria, {"pairing": rows}


def _run_scatter1d(v, seed):
    from . import scatter1d as sc

    name = v["potential"]
    if name == "free":
        V = sc.free_potential()
    elif name == "square_barrier":
        V = sc.square_barrier(v["height"], v["width"])
    elif name == "gaussian_bump":
        V = sc.gaussian_bump(v["height"], v["width"])
    else:
        V = sc.compact_bump(v["height"], v["width"])
    rows, defects, drifts, oracle_err = [], [], [], 0.0
    for lam in v["lambdas"]:
        sol = sc.solve_scatter(V, float(lam))
        c = sol.coeffs
        defects.append(c.unitarity_defect)
        drifts.append(sc.wronskian_drift(sol))
        if name == "square_barrier":
            o = sc.square_barrier_coeffs(v["height"], v["width"], float(lam))
            oracle_err = max(oracle_err, abs(c.r - o.r) + abs(c.t - o.t))
        rows.append(
            {
                "lambda": float(lam),
                "re_r": c.r.real,
                "im_r": c.r.imag,
                "re_t": c.t.real,
                "im_t": c.t.imag,
                "defect": c.unitarity_defect,
            }
        )
    metrics = {
        "max_unitarity_defect": float(max(defects)),
        "max_wronskian_drift": float(max(drifts)),
    }
    criteria = {
        "unitarity": max(defects) < 1e-6,
        "wronskian_conserved": max(drifts) < 1e-8,
    }
    if name == "square_barrier":
        metrics["barrier_oracle_err"] = float(oracle_err)
        criteria["matches_closed_form"] = oracle_err < 1e-6
    return metrics, criteria, {"coefficients": rows}


def _run_radon(v, seed):
    from .radon import (
        cone_ellipticity_check,
        default_cone,
        default_profile,
        injectivity_probe,
        normal_kernel_symbol,
        pairing_gap,
    )

    phi = default_profile()
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-0.2, 0.2, size=2)

    def f(p):
        return np.exp(-np.sum((p - shift) ** 2, axis=-1))

    def vfun(p, k):
        return np.exp(-0.8 * np.sum(p**2, axis=-1)) * (1.0 + 0.01 * k)

    adj_gap = pairing_gap(f, vfun, phi, 2, n_dirs=32)
    qs = np.geomspace(0.1, 100.0, 21)
    tab = normal_kernel_symbol(2, phi, qs)
    top = tab["scaled"][qs >= 10.0]
    plateau_var = float((top.max() - top.min()) / top.mean())
    cone3 = cone_ellipticity_check(3, default_cone(v["cone_width"]), phi, xi_ladder=(5.0, 20.0, 80.0))
    full2 = cone_ellipticity_check(
        2, type(default_cone())(lambda w: np.ones_like(np.asarray(w, dtype=float))), phi,
        xi_ladder=(5.0, 20.0, 80.0),
    )
    narrow2 = cone_ellipticity_check(2, default_cone(v["cone_width"]), phi, xi_ladder=(5.0, 20.0, 80.0))
    probe = injectivity_probe(v["dim"], grid_points=v["grid_points"], n_dirs=v["directions"])
    metrics = {
        "adjointness_gap": float(adj_gap),
        "plateau_variation": plateau_var,
        "cone3_floor": float(min(cone3["scaled_floor"])),
        "cone2_collapse_ratio": float(narrow2["scaled_floor"][-1] / full2["scaled_floor"][-1]),
        "sigma_min": probe["sigma_min"],
        "reconstruction_error": probe["reconstruction_error"],
    }
    criteria = {
        "adjointness": adj_gap < 1e-6,
        "symbol_positive": bool(np.min(tab["symbol"]) > 0),
        "plateau": plateau_var < 0.05,
        "cone_floor_positive_3d": min(cone3["scaled_floor"]) > 0,
        "cone_collapse_2d": narrow2["scaled_floor"][-1] < 1e-3 * full2["scaled_floor"][-1],
        "injective": probe["sigma_min"] > 0,
        "reconstruction": probe["reconstruction_error"] < 1e-3,
    }
    rows = [
        {"xi": float(q), "symbol": float(s), "scaled": float(sc)}
        for q, s, sc in zip(tab["xi"], tab["symbol"], tab["scaled"])
    ]
    # plain grid dump of the reconstruction demo
    gp = v["grid_points"]
    ax = np.linspace(-1.0, 1.0, gp)
    mesh = np.meshgrid(*([ax] * v["dim"]), indexing="ij")
    Z = np.stack([m.ravel() for m in mesh], axis=-1)
    ball = np.sum(Z**2, axis=-1) <= 1.0
    f0 = np.exp(-6.0 * np.sum(Z[ball] ** 2, axis=-1)) * (
        1.0 - np.clip(np.sum(Z[ball] ** 2, axis=-1), 0, 1)
    )
    rec = np.linalg.solve(probe["matrix"], probe["matrix"] @ f0)
    grid_rows = [
        {**{f"x{j}": float(Z[ball][i, j]) for j in range(v["dim"])},
         "f0": float(f0[i]), "reconstruction": float(rec[i])}
        for i in range(len(f0))
    ]
    return metrics, criteria, {"symbol": rows, "reconstruction": grid_rows}


def _run_var_order(v, seed):
    from .grid import GridField, SobolevOrder, make_grid, sobolev_norm, var_sobolev_norm
    from .symbols import conormal_seminorm, sym1d

    amp = 1.0 / 16.0

    def ell(x, xi):
        return -amp * (1.0 + xi / np.sqrt(1.0 + xi**2))

    a = sym1d(lambda x, xi: (1.0 + x**2) ** (0.5 * ell(x, xi)), (0.0, 0.0))
    rep = conormal_seminorm(a, 1, n=1)
    spec = make_grid(1, v["L"], v["N"])
    xs = spec.axis()
    rng = np.random.default_rng(seed)
    u = GridField(spec, np.exp(-((xs - 1.0) ** 2) / 2.0) * (1.0 + 0.2j))
    rc = v["r_const"]
    const_var = SobolevOrder(s=v["s"], variable_r=lambda x, xi: rc + 0.0 * x[..., 0] * xi[..., 0])
    nvar = var_sobolev_norm(u, const_var)
    nfix = sobolev_norm(u, SobolevOrder(s=v["s"], r=rc))
    rel = abs(nvar - nfix) / nfix
    metrics = {
        "log_loss_growth_ratio": rep.growth_ratio,
        "const_order_rel_err": float(rel),
    }
    criteria = {"log_loss_flagged": rep.flagged, "const_order_consistency": rel < 1e-6}
    return metrics, criteria, {}


_RUNNERS = {
    "flow": _run_flow,
    "radial": _run_radial,
    "quantize-check": _run_quantize,
    "commutant": _run_commutant,
    "helmholtz": _run_helmholtz,
    "threshold": _run_threshold,
    "pairing": _run_pairing,
    "scatter1d": _run_scatter1d,
    "radon": _run_radon,
    "var-order": _run_var_order,
}


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    t0 = time.perf_counter()
    metrics, criteria, tables = _RUNNERS[cfg.experiment](cfg.values, cfg.seed)
    return RunReport(
        experiment=cfg.experiment,
        parameters={**cfg.values, "seed": cfg.seed},
        metrics=metrics,
        criteria=criteria,
        tables=tables,
        wall_time_s=time.perf_counter() - t0,
    )


def _json_scalar(x) -> str:
    if isinstance(x, bool) or isinstance(x, np.bool_):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            return '"%s"' % repr(float(x))
        return format(float(x), ".17g")
    if x is None:
        return "null"
    return json.dumps(str(x))


def _to_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {_to_json(v, indent + 1)}'
            for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    return _json_scalar(obj)


def emit_report(report: RunReport, out_dir, formats=("json",)) -> list:
    """Write report files; returns the paths.  Bytes depend only on content.

    Floats are rendered with 17 significant digits; wall time is deliberately
    excluded so identical (config, seed) runs produce identical bytes.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    payload = {
        "experiment": report.experiment,
        "parameters": report.parameters,
        "metrics": report.metrics,
        "criteria": report.criteria,
        "passed": report.passed,
    }
    paths = []
    if "json" in formats:
        p = out / f"{report.experiment}-report.json"
        p.write_text(_to_json(payload) + "\n")
        paths.append(p)
    if "csv" in formats:
        import csv

        for name, rows in report.tables.items():
            p = out / f"{report.experiment}-{name}.csv"
            if not rows:
                p.write_text("")
                paths.append(p)
                continue
            keys = sorted({k for row in rows for k in row})
            with open(p, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(keys)
                for row in rows:
                    writer.writerow(
                        [
                            format(float(row[k]), ".17g")
                            if isinstance(row.get(k), (float, np.floating))
                            else row.get(k, "")
                            for k in keys
                        ]
                    )
            paths.append(p)
    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="scatcalc", description="scattering-calculus experiment driver"
    )
    parser.add_argument("experiment", choices=sorted(_RUNNERS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=None, help="output directory (default: config's)")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--format", default="json", choices=["json", "csv", "json,csv", "csv,json"])
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.experiment)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    report = run_experiment(cfg)
    try:
        paths = emit_report(report, cfg.output_dir, formats=tuple(args.format.split(",")))
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3
    for name, ok in sorted(report.criteria.items()):
        print(f"[{'PASS' if ok else 'FAIL'}] {report.experiment}: {name}")
    print(f"report: {paths[0]}  (wall {report.wall_time_s:.2f}s)", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
