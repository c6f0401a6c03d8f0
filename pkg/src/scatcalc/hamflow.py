"""Hamilton flows on compactified phase space: charts, trajectories, radial sets.

Chart conventions
-----------------
Every boundary chart carries a defining coordinate rho >= 0 with the boundary
at rho = 0 exactly.  The implemented charts are

interior                x (n,), xi (n,)
spatial_face(j, sigma)  rho = sigma/x_j, y_m = x_m/x_j (m != j), xi (n,)
frequency_face(j, sig)  rho = sigma/xi_j, x (n,)           [1D x.D_x model]
kg_face(sigma)          rho = sigma/t, v = x tau/t + xi, tau, xi
schrodinger_time_face   rho = sigma/t, y = x/t, tau, xi (n,)
parabolic_face          rho_b = sigma_x/x_1, s_t = 2 t/x_1 - sigma_xi/xi_1,
                        vt_m = x_m/x_1 - xi_m/xi_1, rho_f = sigma_xi/xi_1

Rescaled fields on boundary faces use each model's customary normalization
(a fixed positive multiple of <x><xi> rescalings of H_p, e.g. (2 rho)^{-1} H_p
for the Helmholtz spatial chart), so threshold data like beta_0 = -|xi_j| come
out in the conventional scale; only sign patterns and the ratio beta_1/beta_0
are invariant statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .symbols import Symbol

__all__ = [
    "PhasePointChart",
    "SymbolHamiltonian",
    "RadialPoint",
    "RadialSetReport",
    "ThresholdDegeneracyError",
    "helmholtz_model",
    "klein_gordon_model",
    "wave_model",
    "schrodinger_model",
    "d_x1_model",
    "x_dx_model",
    "hamilton_field",
    "char_value",
    "boundary_chart_field",
    "chart_field_by_limit",
    "chart_transition",
    "flow_trajectory",
    "find_radial_points",
    "classify_radial",
    "threshold_data",
    "helmholtz_radial_distance",
    "trajectory_rows",
]

EPS_EIG = 1e-6
TANGENCY_TOL = 1e-9


class ThresholdDegeneracyError(RuntimeError):
    """Radial point with vanishing normal rate beta_0.

    This is the zero-frequency pathology of the wave operator: the defining
    square roots of the commutant construction lose strict positivity, and the
    analysis needs a different calculus rather than a smaller tolerance.
    """


@dataclass(frozen=True)
class PhasePointChart:
    """A phase-space point expressed in one explicit chart."""

    chart: str
    coords: dict
    axis: Optional[int] = None
    sign: int = 1
    sign2: int = 1

    def __post_init__(self):
        rho_key = self._rho_key()
        if rho_key is not None:
            rho = float(self.coords[rho_key])
            if rho < 0:
                raise ValueError(f"{rho_key} must be nonnegative, got {rho}")

    def _rho_key(self) -> Optional[str]:
        return {"interior": None, "parabolic_face": "rho_b"}.get(self.chart, "rho")

    @property
    def on_boundary(self) -> bool:
        key = self._rho_key()
        return key is not None and float(self.coords[key]) == 0.0

    def copy_with(self, **coords) -> "PhasePointChart":
        new = dict(self.coords)
        for k, v in coords.items():
            new[k] = np.asarray(v, dtype=float) if np.ndim(v) else float(v)
        return replace(self, coords=new)


@dataclass
class SymbolHamiltonian:
    """Real Hamiltonian p with optional named model enabling closed forms.

    For the named models the position variables are ordered as written in the
    chart table; for klein_gordon and schrodinger_free the first position slot
    is time and the first frequency slot is tau.  The symbol must be real on
    probes (flows of complex Hamiltonians are out of scope).
    """

    p: Optional[Symbol]
    orders: tuple[float, float]
    named_model: Optional[str] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.p is not None:
            n = self.dim
            rng = np.random.default_rng(0)
            probes = 4.0 * rng.standard_normal((16, n))
            vals = self.p(probes, 4.0 * rng.standard_normal((16, n)))
            if float(np.max(np.abs(np.imag(vals)))) > 1e-12:
                raise ValueError("Hamiltonian symbol must be real-valued on probes")

    @property
    def dim(self) -> int:
        return self.params.get("dim", 1)


def helmholtz_model(lam: float, n: int = 2) -> SymbolHamiltonian:
    if lam <= 0:
        raise ValueError("lambda must be positive")
    p = Symbol(
        eval=lambda x, xi: np.sum(xi**2, axis=-1) - lam**2 + 0.0 * x[..., 0],
        order=(2.0, 0.0),
        depends_on_x=False,
    )
    return SymbolHamiltonian(p, (2.0, 0.0), "helmholtz", {"lambda": lam, "dim": n})


def klein_gordon_model(mass: float = 1.0) -> SymbolHamiltonian:
    p = Symbol(
        eval=lambda x, xi: xi[..., 0] ** 2 - xi[..., 1] ** 2 - mass**2 + 0.0 * x[..., 0],
        order=(2.0, 0.0),
        depends_on_x=False,
    )
    return SymbolHamiltonian(p, (2.0, 0.0), "klein_gordon", {"mass": mass, "dim": 2})


def wave_model() -> SymbolHamiltonian:
    """Free wave operator on 1+1 spacetime: the mass-zero Klein-Gordon case."""
    return klein_gordon_model(mass=0.0)


def schrodinger_model(n: int = 1) -> SymbolHamiltonian:
    # position slots (t, x_1..x_n), frequency slots (tau, xi_1..xi_n)
    p = Symbol(
        eval=lambda x, xi: xi[..., 0] + np.sum(xi[..., 1:] ** 2, axis=-1) + 0.0 * x[..., 0],
        order=(2.0, 0.0),
        depends_on_x=False,
    )
    return SymbolHamiltonian(p, (2.0, 0.0), "schrodinger_free", {"dim": n + 1})


def d_x1_model(n: int = 2) -> SymbolHamiltonian:
    p = Symbol(
        eval=lambda x, xi: xi[..., 0] + 0.0 * x[..., 0], order=(1.0, 0.0), depends_on_x=False
    )
    return SymbolHamiltonian(p, (1.0, 0.0), "d_x1", {"dim": n})


def x_dx_model() -> SymbolHamiltonian:
    p = Symbol(eval=lambda x, xi: x[..., 0] * xi[..., 0], order=(1.0, 1.0))
    return SymbolHamiltonian(p, (1.0, 1.0), "x_dx", {"dim": 1})


def hamilton_field(H: SymbolHamiltonian, x: np.ndarray, xi: np.ndarray):
    """(dx/dt, dxi/dt) = (dp/dxi, -dp/dx) at an interior point."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    model = H.named_model
    if model == "helmholtz":
        return 2.0 * xi, np.zeros_like(x)
    if model in ("klein_gordon",):
        return np.array([2.0 * xi[0], -2.0 * xi[1]]), np.zeros_like(x)
    if model == "schrodinger_free":
        return np.concatenate([[1.0], 2.0 * xi[1:]]), np.zeros_like(x)
    if model == "d_x1":
        dx = np.zeros_like(x)
        dx[0] = 1.0
        return dx, np.zeros_like(x)
    if model == "x_dx":
        return x.copy(), -xi.copy()
    from .symbols import symbol_derivative

    n = H.dim
    dx = np.empty(n)
    dxi = np.empty(n)
    for j in range(n):
        e = tuple(1 if i == j else 0 for i in range(n))
        z = (0,) * n
        dx[j] = np.real(symbol_derivative(H.p, z, e, x[None, :], xi[None, :])[0])
        dxi[j] = -np.real(symbol_derivative(H.p, e, z, x[None, :], xi[None, :])[0])
    return dx, dxi


def char_value(H: SymbolHamiltonian, pt: PhasePointChart) -> float:
    """Normalized characteristic function; zero on Char(P), bounded on charts."""
    model = H.named_model
    if model == "helmholtz":
        lam = H.params["lambda"]
        xi = np.asarray(pt.coords["xi"], dtype=float)
        q = float(np.sum(xi**2))
        return (q - lam**2) / (q + lam**2)
    if model == "klein_gordon":
        m = H.params["mass"]
        tau, xi = float(pt.coords["tau"]), float(pt.coords["xi"])
        return (tau**2 - xi**2 - m**2) / (tau**2 + xi**2 + m**2 + 1.0)
    if model == "schrodinger_free":
        if pt.chart == "parabolic_face":
            # tau/xi_1^2 + sum (xi/xi_1)^2: vanishing encodes tau = -|xi|^2
            st = float(pt.coords["s_t"])
            return st * 0.0  # chart built inside the characteristic set
        tau = float(pt.coords["tau"])
        xi = np.asarray(pt.coords["xi"], dtype=float)
        q = float(np.sum(xi**2))
        return (tau + q) / (1.0 + abs(tau) + q)
    if model == "d_x1":
        xi = np.asarray(pt.coords["xi"], dtype=float)
        return float(xi[0] / np.sqrt(1.0 + np.sum(xi**2)))
    if model == "x_dx":
        if pt.chart == "spatial_face":
            xi = float(pt.coords["xi"])
            return xi / np.sqrt(1.0 + xi**2)
        if pt.chart == "frequency_face":
            x = float(pt.coords["x"])
            return x / np.sqrt(1.0 + x**2)
        x, xi = pt.coords["x"], pt.coords["xi"]
        return float(x[0] * xi[0] / np.sqrt((1 + x[0] ** 2) * (1 + xi[0] ** 2)))
    raise NotImplementedError(f"char_value for model {model!r}")


def boundary_chart_field(H: SymbolHamiltonian, pt: PhasePointChart) -> dict:
    """Rescaled Hamilton field in chart coordinates (closed forms).

    Raises if the would-be field fails tangency (a nonzero d/drho coefficient
    surviving at rho = 0), which no implemented model does; the guard mirrors
    the b-vector-field property of the rescaled flow.
    """
    model, chart = H.named_model, pt.chart
    c = pt.coords
    if model in ("helmholtz", "d_x1") and chart == "spatial_face":
        j, sigma = pt.axis, pt.sign
        xi = np.asarray(c["xi"], dtype=float)
        y = np.asarray(c["y"], dtype=float)
        rho = float(c["rho"])
        others = [m for m in range(H.dim) if m != j]
        if model == "helmholtz":
            # (2 rho)^{-1} H_p for p = |xi|^2 - lambda^2
            drho = -sigma * xi[j] * rho
            dy = sigma * (xi[others] - y * xi[j])
        else:
            # rho^{-1} <x> H_p for p = xi_1
            drho = -sigma * (1.0 if j == 0 else 0.0) * rho
            ind = np.array([1.0 if m == 0 else 0.0 for m in others])
            dy = sigma * (ind - (y if j == 0 else 0.0 * y))
        out = {"rho": drho, "y": dy, "xi": np.zeros_like(xi)}
    elif model == "x_dx" and chart == "spatial_face":
        out = {"rho": -float(c["rho"]), "xi": -float(c["xi"])}
    elif model == "x_dx" and chart == "frequency_face":
        out = {"rho": float(c["rho"]), "x": float(c["x"])}
    elif model == "klein_gordon" and chart == "kg_face":
        # rho = sigma/t; the familiar -2 tau (rho d_rho + v d_v) form is the
        # future-cap chart sigma = +1
        tau = float(c["tau"])
        sigma = pt.sign
        out = {
            "rho": -2.0 * sigma * tau * float(c["rho"]),
            "v": -2.0 * sigma * tau * float(c["v"]),
            "tau": 0.0,
            "xi": 0.0,
        }
    elif model == "schrodinger_free" and chart == "schrodinger_time_face":
        # coords: rho = sigma/t, y = x/t, tau, spatial xi
        sigma = pt.sign
        y = np.asarray(c["y"], dtype=float)
        xi = np.asarray(c["xi"], dtype=float)
        out = {
            "rho": -sigma * float(c["rho"]),
            "y": sigma * (2.0 * xi - y),
            "tau": 0.0,
            "xi": np.zeros_like(xi),
        }
    elif model == "schrodinger_free" and chart == "parabolic_face":
        csign = pt.sign * pt.sign2
        vt = np.asarray(c["vt"], dtype=float)
        out = {
            "rho_b": -2.0 * csign * float(c["rho_b"]),
            "s_t": -2.0 * csign * float(c["s_t"]),
            "vt": -2.0 * csign * vt,
            "rho_f": 0.0,
        }
    else:
        raise NotImplementedError(f"no closed-form chart field for {model!r} on {chart!r}")
    rho_key = pt._rho_key()
    if pt.on_boundary and abs(float(np.ravel(out[rho_key])[0])) > TANGENCY_TOL:
        raise RuntimeError("rescaled field is not tangent to the boundary")
    return out


def _interior_from_chart(pt: PhasePointChart, H: SymbolHamiltonian, rho_value: float):
    """Interior (x, xi) obtained by pushing a boundary chart point to rho > 0."""
    c = pt.coords
    if pt.chart == "spatial_face":
        n = H.dim
        j, sigma = pt.axis, pt.sign
        xj = sigma / rho_value
        x = np.empty(n)
        x[j] = xj
        others = [m for m in range(n) if m != j]
        x[others] = np.asarray(c["y"], dtype=float) * xj
        return x, np.asarray(c["xi"], dtype=float).copy()
    if pt.chart == "frequency_face":
        xij = pt.sign / rho_value
        return np.atleast_1d(np.asarray(c["x"], dtype=float)).copy(), np.array([xij])
    if pt.chart == "kg_face":
        t = pt.sign / rho_value
        tau, xi = float(c["tau"]), float(c["xi"])
        x1 = (float(c["v"]) - xi) * t / tau
        return np.array([t, x1]), np.array([tau, xi])
    if pt.chart == "schrodinger_time_face":
        t = pt.sign / rho_value
        y = np.asarray(c["y"], dtype=float)
        xi = np.asarray(c["xi"], dtype=float)
        return np.concatenate([[t], y * t]), np.concatenate([[float(c["tau"])], xi])
    raise NotImplementedError(pt.chart)


_CHART_COORD_FNS = {
    "spatial_face": lambda pt, H, x, xi: np.concatenate(
        [
            [pt.sign / x[pt.axis]],
            [x[m] / x[pt.axis] for m in range(H.dim) if m != pt.axis],
            xi,
        ]
    ),
    "frequency_face": lambda pt, H, x, xi: np.concatenate([[pt.sign / xi[0]], x]),
    "kg_face": lambda pt, H, x, xi: np.array(
        [pt.sign / x[0], x[1] * xi[0] / x[0] + xi[1], xi[0], xi[1]]
    ),
    "schrodinger_time_face": lambda pt, H, x, xi: np.concatenate(
        [[pt.sign / x[0]], x[1:] / x[0], [xi[0]], xi[1:]]
    ),
}

def _limit_rescale(H: SymbolHamiltonian, pt: PhasePointChart, x, xi) -> float:
    model, chart = H.named_model, pt.chart
    if model == "helmholtz" and chart == "spatial_face":
        return abs(x[pt.axis]) / 2.0
    if model == "d_x1" and chart == "spatial_face":
        return abs(x[pt.axis])
    if model == "x_dx":
        return 1.0
    if model == "klein_gordon" and chart == "kg_face":
        return abs(x[0])
    if model == "schrodinger_free" and chart == "schrodinger_time_face":
        return abs(x[0])
    raise NotImplementedError((model, chart))


def chart_field_by_limit(
    H: SymbolHamiltonian, pt: PhasePointChart, rho_probe: float = 1e-3
) -> np.ndarray:
    """Boundary chart field as a Richardson limit of the rescaled interior flow.

    Independent of the closed forms in :func:`boundary_chart_field`: the chart
    coordinate functions are differentiated along the interior Hamilton field
    and the limit rho -> 0 is extrapolated from two probe values.
    """
    fn = _CHART_COORD_FNS[pt.chart]

    def at_rho(rho):
        x, xi = _interior_from_chart(pt, H, rho)
        dx, dxi = hamilton_field(H, x, xi)
        w = _limit_rescale(H, pt, x, xi)
        eps = 1e-6 / max(1.0, float(np.max(np.abs(dx))) + float(np.max(np.abs(dxi))))
        fwd = fn(pt, H, x + eps * dx, xi + eps * dxi)
        bwd = fn(pt, H, x - eps * dx, xi - eps * dxi)
        return w * (fwd - bwd) / (2.0 * eps)

    f1 = at_rho(rho_probe)
    f2 = at_rho(rho_probe / 2.0)
    return 2.0 * f2 - f1


def _flat_field(H: SymbolHamiltonian, pt: PhasePointChart) -> np.ndarray:
    """Chart field flattened in the same layout as _CHART_COORD_FNS."""
    f = boundary_chart_field(H, pt)
    if pt.chart == "spatial_face":
        return np.concatenate([[f["rho"]], np.atleast_1d(f["y"]), np.atleast_1d(f["xi"])])
    if pt.chart == "frequency_face":
        return np.array([f["rho"], f["x"]])
    if pt.chart == "kg_face":
        return np.array([f["rho"], f["v"], f["tau"], f["xi"]])
    if pt.chart == "schrodinger_time_face":
        return np.concatenate([[f["rho"]], np.atleast_1d(f["y"]), [f["tau"]], np.atleast_1d(f["xi"])])
    if pt.chart == "parabolic_face":
        return np.concatenate([[f["rho_b"], f["s_t"]], np.atleast_1d(f["vt"]), [f["rho_f"]]])
    raise NotImplementedError(pt.chart)


def _unflatten(pt: PhasePointChart, vec: np.ndarray, H: SymbolHamiltonian) -> PhasePointChart:
    n = H.dim
    if pt.chart == "spatial_face":
        return pt.copy_with(rho=max(vec[0], 0.0), y=vec[1:n], xi=vec[n:])
    if pt.chart == "frequency_face":
        return pt.copy_with(rho=max(vec[0], 0.0), x=vec[1])
    if pt.chart == "kg_face":
        return pt.copy_with(rho=max(vec[0], 0.0), v=vec[1], tau=vec[2], xi=vec[3])
    if pt.chart == "schrodinger_time_face":
        return pt.copy_with(rho=max(vec[0], 0.0), y=vec[1:n], tau=vec[n], xi=vec[n + 1 :])
    raise NotImplementedError(pt.chart)


def _flatten(pt: PhasePointChart, H: SymbolHamiltonian) -> np.ndarray:
    c = pt.coords
    if pt.chart == "spatial_face":
        return np.concatenate(
            [[float(c["rho"])], np.atleast_1d(c["y"]).astype(float), np.atleast_1d(c["xi"]).astype(float)]
        )
    if pt.chart == "frequency_face":
        return np.array([float(c["rho"]), float(c["x"])])
    if pt.chart == "kg_face":
        return np.array([float(c["rho"]), float(c["v"]), float(c["tau"]), float(c["xi"])])
    if pt.chart == "schrodinger_time_face":
        return np.concatenate(
            [[float(c["rho"])], np.atleast_1d(c["y"]).astype(float), [float(c["tau"])], np.atleast_1d(c["xi"]).astype(float)]
        )
    raise NotImplementedError(pt.chart)


def chart_transition(pt: PhasePointChart, H: SymbolHamiltonian, new_axis: int) -> PhasePointChart:
    """Move a spatial_face point to the chart with dominant axis new_axis.

    Valid where the direction ray has a nonzero new_axis component; mutually
    inverse with the reverse transition on the overlap.
    """
    if pt.chart != "spatial_face":
        raise ValueError("chart_transition applies to spatial_face points")
    n = H.dim
    j, sigma = pt.axis, pt.sign
    u = np.empty(n)
    u[j] = 1.0
    others = [m for m in range(n) if m != j]
    u[others] = np.asarray(pt.coords["y"], dtype=float)
    if u[new_axis] == 0.0:
        raise ValueError("target chart is invalid: vanishing dominant component")
    new_sigma = int(np.sign(u[new_axis])) * sigma
    new_rho = float(pt.coords["rho"]) * abs(1.0 / u[new_axis])
    new_others = [m for m in range(n) if m != new_axis]
    new_y = u[new_others] / u[new_axis]
    return PhasePointChart(
        chart="spatial_face",
        coords={"rho": new_rho, "y": new_y, "xi": np.asarray(pt.coords["xi"], dtype=float).copy()},
        axis=new_axis,
        sign=new_sigma,
    )


# chart-switch hysteresis: leave a chart once the dominant ratio drops below
# 0.45, enter the best chart (which then has ratio >= 1/sqrt(n) > 0.55 for the
# models here), avoiding thrashing on the overlap
SWITCH_LOW = 0.45


def _maybe_switch(pt: PhasePointChart, H: SymbolHamiltonian) -> PhasePointChart:
    if pt.chart != "spatial_face":
        return pt
    n = H.dim
    y = np.atleast_1d(np.asarray(pt.coords["y"], dtype=float))
    u = np.empty(n)
    u[pt.axis] = 1.0
    u[[m for m in range(n) if m != pt.axis]] = y
    ratios = np.abs(u) / np.max(np.abs(u))
    if ratios[pt.axis] < SWITCH_LOW:
        return chart_transition(pt, H, int(np.argmax(np.abs(u))))
    return pt


def flow_trajectory(
    H: SymbolHamiltonian,
    start: PhasePointChart,
    T: float,
    dt: float,
    *,
    require_null: bool = True,
    char_tol: float = 1e-8,
) -> list[PhasePointChart]:
    """Fixed-step RK4 bicharacteristic flow with automatic chart switching."""
    if abs(dt) > 0.01:
        raise ValueError("|dt| must be at most 0.01")
    if require_null and abs(char_value(H, start)) > char_tol:
        raise ValueError("start is not on the characteristic set")
    steps = int(round(abs(T / dt)))
    sgn = np.sign(T) if T != 0 else 1.0
    h = sgn * abs(dt)
    path = [start]
    pt = start
    if pt.chart == "interior":
        x = np.atleast_1d(np.asarray(pt.coords["x"], dtype=float)).copy()
        xi = np.atleast_1d(np.asarray(pt.coords["xi"], dtype=float)).copy()
        for _ in range(steps):
            k1x, k1xi = hamilton_field(H, x, xi)
            k2x, k2xi = hamilton_field(H, x + h / 2 * k1x, xi + h / 2 * k1xi)
            k3x, k3xi = hamilton_field(H, x + h / 2 * k2x, xi + h / 2 * k2xi)
            k4x, k4xi = hamilton_field(H, x + h * k3x, xi + h * k3xi)
            x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            xi = xi + h / 6 * (k1xi + 2 * k2xi + 2 * k3xi + k4xi)
            path.append(pt.copy_with(x=x, xi=xi))
            pt = path[-1]
        return path
    for _ in range(steps):
        state = _flatten(pt, H)

        def rhs(vec):
            return _flat_field(H, _unflatten(pt, vec, H))

        k1 = rhs(state)
        k2 = rhs(state + h / 2 * k1)
        k3 = rhs(state + h / 2 * k2)
        k4 = rhs(state + h * k3)
        new = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        pt = _unflatten(pt, new, H)
        pt = _maybe_switch(pt, H)
        path.append(pt)
    return path


_TRANSVERSE = {
    "spatial_face": ("rho", "y"),
    "frequency_face": ("rho", "x"),
    "kg_face": ("rho", "v"),
    "schrodinger_time_face": ("rho", "y"),
    "parabolic_face": ("rho_b", "s_t", "vt"),
}

# models whose fiber variables move under the flow carry them transversally
_TRANSVERSE_OVERRIDE = {
    ("x_dx", "spatial_face"): ("rho", "xi"),
    ("x_dx", "frequency_face"): ("rho", "x"),
}


def _transverse_keys(pt: PhasePointChart, model: Optional[str]) -> tuple:
    return _TRANSVERSE_OVERRIDE.get((model, pt.chart), _TRANSVERSE[pt.chart])


def _transverse_vector(pt: PhasePointChart, model: Optional[str] = None):
    keys = _transverse_keys(pt, model)
    parts, layout = [], []
    for k in keys:
        v = np.atleast_1d(np.asarray(pt.coords[k], dtype=float))
        parts.append(v)
        layout.append((k, len(v)))
    return np.concatenate(parts), layout


def _with_transverse(pt: PhasePointChart, vec, layout):
    out = {}
    i = 0
    for k, ln in layout:
        val = vec[i : i + ln]
        out[k] = float(val[0]) if ln == 1 else val
        i += ln
    return pt.copy_with(**out)


def classify_radial(H: SymbolHamiltonian, pt: PhasePointChart, fd_step: float = 1e-5):
    """Verdict and transverse linearization eigenvalues at a radial point.

    The Jacobian of the chart field is taken in the transverse slots only
    (rho and the defining coordinates), holding the flow invariants fixed;
    eigenvalue real-part signs are called with EPS_EIG, and a modulus below
    EPS_EIG in any direction is reported as degenerate rather than guessed.
    """
    base, layout = _transverse_vector(pt, H.named_model)
    m = len(base)
    jac = np.empty((m, m))
    for k in range(m):
        e = np.zeros(m)
        e[k] = fd_step
        fp, _ = _transverse_vector_field(H, pt, base + e, layout)
        fm, _ = _transverse_vector_field(H, pt, base - e, layout)
        jac[:, k] = (fp - fm) / (2 * fd_step)
    eigs = np.linalg.eigvals(jac)
    re = eigs.real
    if np.any(np.abs(eigs) < EPS_EIG):
        verdict = "degenerate"
    elif np.all(re > EPS_EIG):
        verdict = "source"
    elif np.all(re < -EPS_EIG):
        verdict = "sink"
    else:
        verdict = "saddle"
    return verdict, eigs


def _transverse_vector_field(H, pt, vec, layout):
    # rho sits in slot 0 of every transverse layout; FD probes may push it
    # negative, in which case we use the odd/even extension (every implemented
    # field has drho odd and the other components even in rho)
    vec = np.asarray(vec, dtype=float).copy()
    rho_neg = vec[0] < 0
    if rho_neg:
        vec[0] = -vec[0]
    q = _with_transverse(pt, vec, layout)
    f = boundary_chart_field(H, q)
    out = np.concatenate([np.atleast_1d(np.asarray(f[k], dtype=float)) for k, _ in layout])
    if rho_neg:
        out[0] = -out[0]
    return out, layout


@dataclass
class RadialPoint:
    point: PhasePointChart
    family: str
    verdict: str
    eigenvalues: np.ndarray
    tau: Optional[float] = None
    mu: Optional[float] = None


@dataclass
class RadialSetReport:
    points: list
    beta0: Optional[float] = None
    beta1: Optional[float] = None
    threshold_order: Optional[float] = None

    @property
    def verdicts(self):
        return [p.verdict for p in self.points]


def _sc_frequencies(x_dir: np.ndarray, xi: np.ndarray):
    """Scattering frequencies (tau, |mu|) of (x_dir, xi): tau is minus the
    radial component of xi along x_dir, mu the tangential part."""
    xhat = x_dir / np.linalg.norm(x_dir)
    tau = -float(np.dot(xhat, xi))
    mu = float(np.linalg.norm(xi + tau * xhat))
    return tau, mu


def find_radial_points(
    H: SymbolHamiltonian, resolution: int = 8, *, field_tol: float = 1e-10
) -> RadialSetReport:
    """Scan boundary faces for zeros of the rescaled field, then polish.

    The scan walks a coarse grid on each face restricted to the characteristic
    set and keeps |field| < tol candidates; Newton polish runs on the
    transverse coordinates.  An empty scan yields an empty report, not an
    error.
    """
    model = H.named_model
    pts: list[RadialPoint] = []
    if model == "helmholtz":
        lam = H.params["lambda"]
        n = H.dim
        ygrid = np.linspace(-1.0, 1.0, 7)
        for xi in _sphere_grid(n, resolution, lam):
            j = int(np.argmax(np.abs(xi)))
            others = [m for m in range(n) if m != j]
            for sign in (+1, -1):
                # coarse scan over the chart's angular coordinates, then polish
                best, best_val = None, np.inf
                for seed in _y_seeds(n - 1, ygrid):
                    cand = PhasePointChart(
                        "spatial_face",
                        {"rho": 0.0, "y": seed, "xi": xi.copy()},
                        axis=j,
                        sign=sign,
                    )
                    val = float(np.max(np.abs(_flat_field(H, cand)), initial=0.0))
                    if val < best_val:
                        best, best_val = cand, val
                cand = _newton_polish(H, best)
                f = _flat_field(H, cand)
                if np.max(np.abs(f)) > field_tol:
                    continue
                u = np.empty(n)
                u[j] = 1.0
                u[others] = np.atleast_1d(cand.coords["y"])
                x_dir = sign * u
                tau, mu = _sc_frequencies(x_dir, xi)
                family = "out" if tau < 0 else "in"
                verdict, eigs = classify_radial(H, cand)
                pts.append(RadialPoint(cand, family, verdict, eigs, tau, mu))
    elif model == "klein_gordon":
        m = H.params["mass"]
        ximax = 2.0
        for xi in np.linspace(-ximax, ximax, 2 * resolution + 1):
            for tsheet in (+1, -1):
                tau = tsheet * np.sqrt(xi**2 + m**2)
                for sigma in (+1, -1):
                    cand = PhasePointChart(
                        "kg_face", {"rho": 0.0, "v": 0.0, "tau": tau, "xi": xi}, sign=sigma
                    )
                    f = _flat_field(H, cand)
                    if np.max(np.abs(f)) > field_tol:
                        continue
                    # interior requirement: x1/t = (v - xi)/tau must stay in the
                    # t-dominant chart, which holds near the timelike caps
                    if tau != 0.0 and abs((0.0 - xi) / tau) > 1.5:
                        continue
                    cap = "future_cap" if sigma > 0 else "past_cap"
                    sheet = "tau+" if tau > 0 else ("tau-" if tau < 0 else "tau0")
                    family = f"{cap}:{sheet}"
                    verdict, eigs = classify_radial(H, cand)
                    pts.append(RadialPoint(cand, family, verdict, eigs, tau=float(tau), mu=None))
    elif model == "d_x1":
        n = H.dim
        for xi_rest in np.linspace(-1.0, 1.0, resolution):
            xi = np.zeros(n)
            if n > 1:
                xi[1] = xi_rest
            for sigma in (+1, -1):
                cand = PhasePointChart(
                    "spatial_face",
                    {"rho": 0.0, "y": np.zeros(n - 1), "xi": xi.copy()},
                    axis=0,
                    sign=sigma,
                )
                cand = _newton_polish(H, cand)
                f = _flat_field(H, cand)
                if np.max(np.abs(f)) > field_tol:
                    continue
                x_dir = np.zeros(n)
                x_dir[0] = sigma
                verdict, eigs = classify_radial(H, cand)
                tau, mu = _sc_frequencies(x_dir, xi) if np.linalg.norm(xi) > 0 else (0.0, 0.0)
                pts.append(RadialPoint(cand, "x1_" + ("plus" if sigma > 0 else "minus"), verdict, eigs, tau, mu))
    elif model == "x_dx":
        for sigma in (+1, -1):
            cand = PhasePointChart("spatial_face", {"rho": 0.0, "xi": 0.0}, axis=0, sign=sigma)
            verdict, eigs = classify_radial(H, cand)
            pts.append(RadialPoint(cand, f"spatial_{'+' if sigma>0 else '-'}", verdict, eigs))
        for sigma in (+1, -1):
            cand = PhasePointChart("frequency_face", {"rho": 0.0, "x": 0.0}, axis=0, sign=sigma)
            verdict, eigs = classify_radial(H, cand)
            pts.append(RadialPoint(cand, f"frequency_{'+' if sigma>0 else '-'}", verdict, eigs))
    elif model == "schrodinger_free":
        n = H.dim - 1
        for xi1 in np.linspace(-1.5, 1.5, 2 * resolution + 1):
            xi = np.array([xi1] + [0.0] * (n - 1))
            for sigma in (+1, -1):
                cand = PhasePointChart(
                    "schrodinger_time_face",
                    {"rho": 0.0, "y": 2.0 * xi, "tau": -float(xi1**2), "xi": xi},
                    sign=sigma,
                )
                f = _flat_field(H, cand)
                if np.max(np.abs(f)) > field_tol:
                    continue
                family = "out" if sigma > 0 else "in"
                verdict, eigs = classify_radial(H, cand)
                pts.append(RadialPoint(cand, family, verdict, eigs))
    else:
        raise NotImplementedError(f"radial scan for model {model!r}")
    report = RadialSetReport(points=pts)
    for p in pts:
        if p.verdict in ("source", "sink"):
            try:
                b0, b1, th = threshold_data(H, p.point)
            except (ThresholdDegeneracyError, NotImplementedError):
                continue
            report.beta0, report.beta1, report.threshold_order = b0, b1, th
            break
    return report


def _newton_polish(H: SymbolHamiltonian, pt: PhasePointChart, iters: int = 8) -> PhasePointChart:
    """Newton iteration on the transverse coordinates at fixed invariants."""
    for _ in range(iters):
        base, layout = _transverse_vector(pt, H.named_model)
        f, _ = _transverse_vector_field(H, pt, base, layout)
        if np.max(np.abs(f)) < 1e-14:
            break
        m = len(base)
        jac = np.empty((m, m))
        for k in range(m):
            e = np.zeros(m)
            e[k] = 1e-6
            fp, _ = _transverse_vector_field(H, pt, base + e, layout)
            fm, _ = _transverse_vector_field(H, pt, base - e, layout)
            jac[:, k] = (fp - fm) / 2e-6
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            break
        new = base + step
        # keep rho on its half-line
        new[0] = max(new[0], 0.0)
        pt = _with_transverse(pt, new, layout)
    return pt


def threshold_data(
    H: SymbolHamiltonian,
    pt: PhasePointChart,
    rho_fn: Optional[Callable[[PhasePointChart], float]] = None,
    varrho_fn: Optional[Callable[[PhasePointChart], float]] = None,
    probe: float = 1e-3,
):
    """(beta_0, beta_1, threshold_order) at a nondegenerate radial point.

    beta_0 and beta_1 are the logarithmic derivatives of the boundary defining
    function and of the quadratic defining function of the radial set along
    the rescaled flow, fitted at two probe scales.  They are chart-scale
    quantities; their common sign and the ratio beta_1/beta_0 are invariant.
    """
    verdict, eigs = classify_radial(H, pt)
    if verdict == "degenerate":
        raise ThresholdDegeneracyError(
            "beta_0 vanishes at this radial point (zero-frequency degeneracy); "
            "threshold data is undefined and the square-root commutant cannot be built"
        )
    rho_key = pt._rho_key()
    if rho_fn is None:
        rho_fn = lambda q: float(q.coords[rho_key])  # noqa: E731
    if varrho_fn is None:
        # quadratic defining function of the radial set within the chart:
        # squared distance of the non-rho transverse coords from the point
        keys = [k for k in _transverse_keys(pt, H.named_model) if k != rho_key]
        center = {k: np.atleast_1d(np.asarray(pt.coords[k], float)).copy() for k in keys}

        def varrho_fn(q):
            return float(
                sum(
                    np.sum((np.atleast_1d(np.asarray(q.coords[k], float)) - center[k]) ** 2)
                    for k in keys
                )
            )

    def log_rate(fn, displace):
        def rate(eps):
            q = displace(eps)
            base_q, layout_q = _transverse_vector(q, H.named_model)
            f, _ = _transverse_vector_field(H, q, base_q, layout_q)
            # central difference along the flow; the defining functions are
            # linear/quadratic so a generous step avoids cancellation
            step = 1e-2 * eps / (1.0 + float(np.max(np.abs(f))))
            qf = _with_transverse(q, base_q + step * f, layout_q)
            qb = _with_transverse(q, base_q - step * f, layout_q)
            return (fn(qf) - fn(qb)) / (2 * step) / fn(q)

        r1 = rate(probe)
        r2 = rate(probe / 2)
        return 2 * r2 - r1

    base, layout = _transverse_vector(pt, H.named_model)

    def displace_rho(eps):
        vec = base.copy()
        vec[0] = eps
        return _with_transverse(pt, vec, layout)

    def displace_trans(eps):
        vec = base.copy()
        vec[1:] = vec[1:] + eps
        return _with_transverse(pt, vec, layout)

    beta0 = float(log_rate(rho_fn, displace_rho))
    beta1 = float(log_rate(varrho_fn, displace_trans))
    if beta0 * beta1 <= 0:
        raise ThresholdDegeneracyError("beta_0 and beta_1 do not share a strict sign")
    threshold = -0.5 if H.named_model in ("helmholtz", "klein_gordon", "schrodinger_free") else None
    return beta0, beta1, threshold


def _y_seeds(d: int, grid: np.ndarray):
    if d == 0:
        return [np.zeros(0)]
    from itertools import product as _prod

    return [np.array(c, dtype=float) for c in _prod(grid, repeat=d)]


def _sphere_grid(n: int, resolution: int, radius: float):
    if n == 1:
        return [np.array([radius]), np.array([-radius])]
    if n == 2:
        th = 2 * np.pi * (np.arange(resolution) + 0.37) / resolution
        return [radius * np.array([np.cos(t), np.sin(t)]) for t in th]
    out = []
    for c in np.linspace(-0.9, 0.9, resolution // 2 + 2):
        s = np.sqrt(1 - c**2)
        for t in 2 * np.pi * (np.arange(resolution) + 0.29) / resolution:
            out.append(radius * np.array([s * np.cos(t), s * np.sin(t), c]))
    return out


def helmholtz_radial_distance(H: SymbolHamiltonian, pt: PhasePointChart, which: str = "out") -> float:
    """Chart distance sqrt(rho^2 + |v|^2) to the in/out Helmholtz radial set."""
    if pt.chart != "spatial_face":
        raise ValueError("expected a spatial_face point")
    xi = np.asarray(pt.coords["xi"], dtype=float)
    n = H.dim
    target = xi if which == "out" else -xi
    j = int(np.argmax(np.abs(target)))
    q = pt if (pt.axis == j) else chart_transition(pt, H, j)
    sign_needed = int(np.sign(target[j]))
    if q.sign != sign_needed:
        # point lies on the opposite hemisphere; distance through the equator
        return 2.0
    others = [m for m in range(n) if m != j]
    v = target[others] / target[j] - np.atleast_1d(q.coords["y"])
    return float(np.sqrt(float(q.coords["rho"]) ** 2 + np.sum(v**2)))


def trajectory_rows(H: SymbolHamiltonian, path) -> list[dict]:
    """Flatten a trajectory for CSV export: step, chart id, coords, |p|."""
    rows = []
    for i, pt in enumerate(path):
        row = {"step": i, "chart": pt.chart, "axis": pt.axis, "sign": pt.sign}
        for k, v in pt.coords.items():
            arr = np.atleast_1d(np.asarray(v, dtype=float))
            if len(arr) == 1:
                row[k] = float(arr[0])
            else:
                for m, vv in enumerate(arr):
                    row[f"{k}{m}"] = float(vv)
        row["abs_char"] = abs(char_value(H, pt))
        rows.append(row)
    return rows
