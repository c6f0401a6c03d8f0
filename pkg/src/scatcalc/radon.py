"""Flat localized X-ray (Radon) transform, its adjoint and normal operator.

The transform integrates along straight lines against an even, nonnegative
profile phi that is positive on |t| <= 1 and supported in |t| <= 2; the
normal operator A = L I_0 is then a convolution whose Fourier symbol

    a(xi) = int_{S^{n-1}} |phi_hat(omega . xi)|^2 domega

is strictly positive (an integral of squares) and decays like c/|xi|: the
sphere integral concentrates on the equator omega . xi = 0 with width ~1/|xi|.
A direction cutoff chi(omega_1) preserves the positive floor exactly when the
orthogroup {omega . xihat = 0} always meets {chi > 0}: true for n >= 3 (two
great circles on S^2 intersect), false for narrow cutoffs in n = 2 (two
antipodal points miss the allowed arc), and the probe exhibits both.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse
from scipy.linalg import svdvals

from .bumps import plateau

__all__ = [
    "LocalizerProfile",
    "ConeCutoff",
    "default_profile",
    "default_cone",
    "direction_rule",
    "xray_transform",
    "backproject",
    "pairing_gap",
    "normal_kernel_symbol",
    "normal_symbol_hankel",
    "cone_ellipticity_check",
    "injectivity_probe",
]


def _composite_rule(lo, hi, n_panels: int, order: int):
    edges = np.linspace(lo, hi, n_panels + 1)
    nodes, w = leggauss(order)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    return (mid[:, None] + half[:, None] * nodes).ravel(), (half[:, None] * w).ravel()


@dataclass
class LocalizerProfile:
    """Line profile phi and its self-convolution phi_tilde = phi * phi.

    Plateau-type profiles converge slowly under single-panel Gauss rules, so
    every integral here uses composite panels (aligned with the plateau
    structure for the fixed-range ones, oscillation-adaptive for phi_hat).
    """

    phi: Callable[[np.ndarray], np.ndarray]
    support: float = 2.0

    def __post_init__(self):
        self._gl16 = leggauss(16)
        self._hat_cache = (0, None)

    def __call__(self, t):
        return np.asarray(self.phi(np.asarray(t, dtype=float)), dtype=float)

    def phi_tilde(self, s):
        """(phi * phi)(s) by composite Gauss quadrature over the overlap."""
        s = np.asarray(s, dtype=float)
        nodes16, w16 = self._gl16
        lo = np.maximum(-self.support, s - self.support)
        hi = np.minimum(self.support, s + self.support)
        out = np.zeros_like(s)
        n_panels = 8
        for k in range(n_panels):
            a = lo + (hi - lo) * k / n_panels
            b = lo + (hi - lo) * (k + 1) / n_panels
            mid, half = 0.5 * (a + b), np.clip(0.5 * (b - a), 0.0, None)
            pts = mid[..., None] + half[..., None] * nodes16
            vals = self(pts) * self(s[..., None] - pts)
            out = out + np.sum(vals * w16, axis=-1) * half
        return out

    def phi_hat(self, s):
        """Fourier transform int phi(t) exp(-i s t) dt (real and even).

        Panels track the oscillation count so the transform stays accurate
        out to the |xi| ladders of the symbol scans.
        """
        s = np.asarray(s, dtype=float)
        smax = float(np.max(np.abs(s))) if s.size else 0.0
        n_panels = int(max(4, np.ceil(smax * self.support / np.pi)))
        if n_panels != self._hat_cache[0]:
            self._hat_cache = (n_panels, _composite_rule(-self.support, self.support, n_panels, 16))
        pts, w = self._hat_cache[1]
        vals = self(pts)
        return np.sum(vals * w * np.cos(np.multiply.outer(s, pts)), axis=-1)


def default_profile() -> LocalizerProfile:
    """Smooth even profile: 1 on |t| <= 1, 0 for |t| >= 2."""
    return LocalizerProfile(phi=lambda t: plateau(t, 1.0, 2.0))


@dataclass
class ConeCutoff:
    chi: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if float(self.chi(np.zeros(1))[0]) < 0.5:
            raise ValueError("cone cutoff must satisfy chi(0) >= 0.5")

    def __call__(self, w1):
        vals = np.asarray(self.chi(np.asarray(w1, dtype=float)), dtype=float)
        if np.any(vals < 0):
            raise ValueError("cone cutoff must be nonnegative")
        return vals


def default_cone(width: float = 0.3) -> ConeCutoff:
    return ConeCutoff(chi=lambda w1: plateau(w1, width / 2.0, width))


def direction_rule(n: int, count: int):
    """Direction quadrature: `count` angles on S^1, a product grid on S^2."""
    if n == 2:
        th = np.pi * (2.0 * np.arange(count) + 1.0) / count / 2.0 * 2.0
        nodes = np.stack([np.cos(th), np.sin(th)], axis=-1)
        return nodes, np.full(count, 2.0 * np.pi / count)
    nc = max(4, int(np.sqrt(count / 2)))
    na = max(8, count // nc)
    c, wc = leggauss(nc)
    s = np.sqrt(1.0 - c**2)
    phi = 2.0 * np.pi * (np.arange(na) + 0.5) / na
    nodes = np.stack(
        [
            np.outer(c, np.ones(na)).ravel(),
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
        ],
        axis=-1,
    )
    w = np.outer(wc, np.full(na, 2.0 * np.pi / na)).ravel()
    return nodes, w


def _line_rule(support: float, n_t: int = 16):
    # 4 panels aligned with the plateau structure, n_t Gauss nodes each
    return _composite_rule(-support, support, 4, n_t)


def xray_transform(f: Callable, z, omega, phi: LocalizerProfile, n_t: int = 24):
    """I_0 f(z, omega) = int f(z + t omega) phi(t) dt by Gauss quadrature.

    f is vectorized over (M, n) arrays; z and omega may carry matching batch
    dimensions (..., n).
    """
    z = np.asarray(z, dtype=float)
    omega = np.asarray(omega, dtype=float)
    t, w = _line_rule(phi.support, n_t)
    pts = z[..., None, :] + t[:, None] * omega[..., None, :]
    batch = pts.shape[:-1]
    vals = np.asarray(f(pts.reshape(-1, pts.shape[-1]))).reshape(batch)
    return np.sum(vals * (w * phi(t)), axis=-1)


def backproject(
    v,
    phi: LocalizerProfile,
    directions,
    dir_weights,
    *,
    z_axes=None,
    n_t: int = 24,
):
    """Adjoint evaluator L v(y) = int v(y - t omega, omega) phi(t) dt domega.

    v is either a callable v(z_points, omega_index) or an array of samples of
    shape (len(z1), ..., len(zn), n_dirs) over the tensor grid `z_axes`, in
    which case a cubic interpolant (zero outside the grid) is used per
    direction; out-of-range queries are treated as zero, consistent with
    compactly supported data.
    """
    directions = np.asarray(directions, dtype=float)
    dir_weights = np.asarray(dir_weights, dtype=float)
    t, wt = _line_rule(phi.support, n_t)
    wt = wt * phi(t)

    if callable(v):
        v_of = v
    else:
        from scipy.interpolate import RegularGridInterpolator

        interps = []
        for k in range(v.shape[-1]):
            interps.append(
                RegularGridInterpolator(
                    z_axes, v[..., k], method="cubic", bounds_error=False, fill_value=0.0
                )
            )

        def v_of(pts, k):
            return interps[k](pts)

    def Lv(y):
        y = np.asarray(y, dtype=float)
        single = y.ndim == 1
        ys = y[None, :] if single else y
        out = np.zeros(len(ys), dtype=complex)
        for k, (om, wk) in enumerate(zip(directions, dir_weights)):
            pts = ys[:, None, :] - t[:, None] * om[None, None, :]
            vals = np.asarray(v_of(pts.reshape(-1, ys.shape[-1]), k)).reshape(len(ys), len(t))
            out += wk * (vals @ wt)
        return out[0] if single else out

    return Lv


def pairing_gap(
    f: Callable,
    v: Callable,
    phi: LocalizerProfile,
    n: int,
    *,
    box: float = 6.0,
    n_dirs: int = 64,
    n_gauss: int = 32,
) -> float:
    """Relative defect of <I_0 f, v> = <f, L v> by tensor Gauss quadrature.

    f and v(., omega_index) must be smooth and decayed at the box scale (the
    box must also absorb the +-2 line reach of the localizer); both pairings
    quadrate the same continuum integrals, so the gap then measures
    quadrature error alone.
    """
    dirs, dw = direction_rule(n, n_dirs)
    nodes, w = leggauss(n_gauss)
    ax = box * nodes
    axw = box * w
    mesh = np.meshgrid(*([ax] * n), indexing="ij")
    Z = np.stack([m.ravel() for m in mesh], axis=-1)
    WZ = np.prod(np.meshgrid(*([axw] * n), indexing="ij"), axis=0).ravel()
    # evaluate both sides sharing the direction rule
    lhs = 0.0 + 0j
    for k, (om, wk) in enumerate(zip(dirs, dw)):
        If = xray_transform(f, Z, np.broadcast_to(om, Z.shape), phi)
        vv = np.asarray(v(Z, k))
        lhs += wk * np.sum(WZ * If * np.conj(vv))
    Lv = backproject(v, phi, dirs, dw)
    rhs = np.sum(WZ * np.asarray(f(Z)) * np.conj(Lv(Z)))
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale


def normal_kernel_symbol(n: int, phi: LocalizerProfile, xi_grid, *, n_sphere: int = 2048) -> dict:
    """Symbol a(|xi|) = int_{S^{n-1}} phi_hat(omega.xi)^2 domega, radially.

    n = 2 uses a dense trapezoid in the circle angle; n = 3 reduces by
    azimuthal symmetry to 2 pi int_{-1}^{1} phi_hat(|xi| c)^2 dc on a
    Gauss-Legendre rule.  Values are manifestly positive (integrals of
    squares); the table also reports the |xi|-scaled plateau.
    """
    q = np.asarray(xi_grid, dtype=float)
    if n == 2:
        gamma = 2.0 * np.pi * np.arange(n_sphere) / n_sphere
        vals = phi.phi_hat(np.outer(q, np.cos(gamma))) ** 2
        a = vals.sum(axis=1) * (2.0 * np.pi / n_sphere)
    elif n == 3:
        c, w = leggauss(min(n_sphere, 512))
        vals = phi.phi_hat(np.outer(q, c)) ** 2
        a = 2.0 * np.pi * vals @ w
    else:
        raise ValueError("n must be 2 or 3")
    return {"xi": q, "symbol": a, "scaled": a * q}


def normal_symbol_hankel(n: int, phi: LocalizerProfile, xi_grid) -> np.ndarray:
    """Oracle: the same symbol as the radial Fourier transform of the kernel
    K(w) = 2 phi_tilde(|w|) |w|^{-(n-1)} (the singular weight cancels against
    the Jacobian, leaving smooth integrals of phi_tilde against J_0 / sin)."""
    from scipy.special import j0

    q = np.asarray(xi_grid, dtype=float)
    qmax = float(np.max(q)) if q.size else 1.0
    n_panels = int(max(8, np.ceil(qmax * phi.support)))
    rho, wr = _composite_rule(0.0, 2.0 * phi.support, n_panels, 12)
    pt = phi.phi_tilde(rho)
    if n == 2:
        return 4.0 * np.pi * np.array([np.sum(wr * pt * j0(qq * rho)) for qq in q])
    if n == 3:
        out = []
        for qq in q:
            if qq == 0:
                out.append(8.0 * np.pi * np.sum(wr * pt))
            else:
                out.append(8.0 * np.pi / qq * np.sum(wr * pt * np.sin(qq * rho) / rho))
        return np.array(out)
    raise ValueError("n must be 2 or 3")


def cone_ellipticity_check(
    n: int,
    chi: ConeCutoff,
    phi: LocalizerProfile,
    *,
    xi_ladder=(5.0, 10.0, 20.0, 40.0, 80.0),
    n_tilt: int = 13,
) -> dict:
    """min over directions of the chi-weighted symbol, per |xi| rung.

    The symbol a_chi(xi) = int chi(omega_1) phi_hat(omega.xi)^2 domega is
    evaluated over a ladder of tilt angles between xihat and the e_1 axis
    (rotational symmetry about e_1 reduces the direction scan to the tilt).
    Reported floors are |xi|-scaled.
    """
    tilts = np.linspace(0.0, np.pi / 2.0, n_tilt)
    floors = []
    per_dir = np.empty((len(xi_ladder), n_tilt))
    for iq, q in enumerate(xi_ladder):
        n_nodes = int(max(256, 8 * q))
        if n == 2:
            gamma = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
            wgt = 2.0 * np.pi / n_nodes
            om1 = np.cos(gamma)
            for it, tl in enumerate(tilts):
                xihat = np.array([np.cos(tl), np.sin(tl)])
                dots = om1 * xihat[0] + np.sin(gamma) * xihat[1]
                per_dir[iq, it] = np.sum(chi(om1) * phi.phi_hat(q * dots) ** 2) * wgt
        else:
            nc = max(64, int(2 * q))
            c, wc = leggauss(nc)
            na = max(64, int(2 * q))
            az = 2.0 * np.pi * np.arange(na) / na
            s = np.sqrt(1.0 - c**2)
            om = np.stack(
                [
                    np.outer(c, np.ones(na)).ravel(),
                    np.outer(s, np.cos(az)).ravel(),
                    np.outer(s, np.sin(az)).ravel(),
                ],
                axis=-1,
            )
            wgt = np.outer(wc, np.full(na, 2.0 * np.pi / na)).ravel()
            chiv = chi(om[:, 0])
            for it, tl in enumerate(tilts):
                xihat = np.array([np.cos(tl), np.sin(tl), 0.0])
                dots = om @ xihat
                per_dir[iq, it] = np.sum(wgt * chiv * phi.phi_hat(q * dots) ** 2)
        floors.append(float(np.min(per_dir[iq]) * q))
    return {
        "xi": list(xi_ladder),
        "tilts": tilts,
        "scaled_values": per_dir * np.asarray(xi_ladder)[:, None],
        "scaled_floor": floors,
    }


# ---------------------------------------------------------------------------
# discrete injectivity probe
# ---------------------------------------------------------------------------


def _interp_matrix(axes, pts) -> sparse.csr_matrix:
    """Sparse multilinear interpolation matrix: rows evaluate at pts, columns
    index the tensor grid; queries outside the grid evaluate to zero."""
    n = len(axes)
    sizes = [len(a) for a in axes]
    steps = [a[1] - a[0] for a in axes]
    idx0, frac, inside = [], [], np.ones(len(pts), dtype=bool)
    for j, a in enumerate(axes):
        u = (pts[:, j] - a[0]) / steps[j]
        i0 = np.floor(u).astype(int)
        inside &= (i0 >= 0) & (i0 <= sizes[j] - 2)
        i0c = np.clip(i0, 0, sizes[j] - 2)
        idx0.append(i0c)
        frac.append(u - i0c)
    rows, cols, vals = [], [], []
    for corner in range(2**n):
        wt = np.ones(len(pts))
        flat = np.zeros(len(pts), dtype=int)
        stride = 1
        for j in reversed(range(n)):
            bit = (corner >> j) & 1
            wt = wt * (frac[j] if bit else (1.0 - frac[j]))
            flat = flat + (idx0[j] + bit) * stride
            stride *= sizes[j]
        keep = inside & (wt != 0)
        rows.append(np.nonzero(keep)[0])
        cols.append(flat[keep])
        vals.append(wt[keep])
    M = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(pts), int(np.prod(sizes))),
    )
    return M.tocsr()


def injectivity_probe(
    n: int,
    *,
    grid_points: int = 24,
    box: float = 1.0,
    n_dirs: int = 64,
    n_t: int = 16,
    phi: Optional[LocalizerProfile] = None,
    chi: Optional[ConeCutoff] = None,
    f0: Optional[Callable] = None,
) -> dict:
    """sigma_min of the discretized normal operator A = L I_0 plus a solve.

    f lives on a grid_points^n tensor grid over [-box, box]^n (zero outside);
    I_0 samples line integrals on (z grid) x (direction rule); L backprojects
    with the same rule; the optional cone cutoff multiplies the direction
    weights inside L.  Reports sigma_min, the relative reconstruction error
    for a known bump f0, and the matrix itself.
    """
    if phi is None:
        phi = default_profile()
    axes = tuple(np.linspace(-box, box, grid_points) for _ in range(n))
    mesh = np.meshgrid(*axes, indexing="ij")
    Z = np.stack([m.ravel() for m in mesh], axis=-1)
    # restrict the function space to the inscribed ball: the corners of the
    # box are barely sampled by localized lines and contribute spurious
    # near-null high-frequency modes that wander under refinement
    ball = np.sum(Z**2, axis=-1) <= box**2
    dirs, dw = direction_rule(n, n_dirs)
    t, wt = _line_rule(phi.support, n_t)
    wt = wt * phi(t)
    size = grid_points**n
    n_rays = size * len(dirs)
    blocks_I, blocks_L = [], []
    for k, om in enumerate(dirs):
        pts_f = (Z[:, None, :] + t[:, None] * om[None, None, :]).reshape(-1, n)
        Mk = _interp_matrix(axes, pts_f)
        I0k = sparse.kron(sparse.eye(size, format="csr"), sparse.csr_matrix(wt[None, :])) @ Mk
        blocks_I.append(I0k)
        pts_b = (Z[:, None, :] - t[:, None] * om[None, None, :]).reshape(-1, n)
        Mb = _interp_matrix(axes, pts_b)
        Lk = sparse.kron(sparse.eye(size, format="csr"), sparse.csr_matrix(wt[None, :])) @ Mb
        wchi = dw[k] * (float(chi(np.array([om[0]]))[0]) if chi is not None else 1.0)
        blocks_L.append(wchi * Lk)
    A = sum(blocks_L[k] @ blocks_I[k] for k in range(len(dirs)))
    A = np.asarray(A.todense())[np.ix_(ball, ball)]
    sv = svdvals(A)
    sigma_min, sigma_max = float(sv[-1]), float(sv[0])
    if f0 is None:
        def f0(p):
            r2 = np.sum(p**2, axis=-1)
            return np.exp(-6.0 * r2) * (1.0 - np.clip(r2, 0, 1))

    fvec = np.asarray(f0(Z[ball]), dtype=float)
    rhs = A @ fvec
    rec = np.linalg.solve(A, rhs)
    err = float(np.linalg.norm(rec - fvec) / max(np.linalg.norm(fvec), 1e-300))
    return {
        "sigma_min": sigma_min,
        "sigma_max": sigma_max,
        "reconstruction_error": err,
        "matrix": A,
        "grid_points": grid_points,
        "dof": int(ball.sum()),
    }
