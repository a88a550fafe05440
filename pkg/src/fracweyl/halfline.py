"""Model operator (1 - d^2/dt^2)^s on the half-line and its spectral toolkit.

The half-line operator with a Dirichlet-type exterior condition is
diagonalized by generalized eigenfunctions

    F(lam, x) = sin(lam*x + phase(lam)) - laplace_tail(lam, x),

where the tail is the Laplace transform of a nonnegative spectral density
supported on [1, inf).  The tail is subtracted: laplace_tail(lam, 0)
equals sin(phase(lam)) exactly, so F vanishes at the boundary, and this
is the sign under which F passes the weak eigenfunction pairing against
the Fourier-multiplier operator (the additive sign fails by orders of
magnitude; see the tests).  Everything else here is assembled from those
two ingredients: the projector and Riesz-mean kernels, the boundary-layer
profile whose integral is the surface coefficient of the two-term trace
expansion, and the integrated spectral shifts.

Numerical core
--------------
All log-ratio integrands are reduced to the single stable function

    N(L) = ln|expm1(L)| - (1-s) L - ln|expm1(s L)|,   L = log((1+z^2)/(1+lam^2)),

which decays at both ends of the z-axis.  Poisson integrals of the full
log-ratio split into a closed-form part plus a Poisson integral of N; this
is what makes the density evaluable to ~1e-8 in bulk quantities.

Conditionally convergent integrals over the half-line variable t are never
left to naive quadrature: the pure-oscillation component is integrated in
closed form (Abel regularization), which contributes both the familiar
-sin(2*phase)/(2*lam) density *and* a boundary term (mu-1)/4 from lam -> 0;
the remaining tail terms are absolutely convergent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .quadcore import QuadratureSpec

__all__ = [
    "FractionalOrder",
    "HalfLineModel",
    "DirichletLineModel",
    "CountingShiftResult",
    "KernelValue",
    "TruncationUnstableError",
    "GAMMA_READINGS",
    "DEFAULT_GAMMA_READING",
    "dispersion",
    "phase_shift",
    "spectral_density",
    "laplace_tail",
    "eigenfunction",
    "outer_function",
    "closed_form_double_laplace",
    "projector_kernel",
    "riesz_kernel_diag",
    "riesz_kernel_line",
    "boundary_layer",
    "energy_shift",
    "counting_shift",
    "gamma_reading_residuals",
]

# Candidate algebraic forms of the spectral-density denominator; they
# differ in which powers of (xi^2-1) enter and whether the dispersion
# shift is included.  The resolution procedure (gamma_reading_residuals)
# selects the modulus-squared form
# "shifted_modulus" = |(xi^2-1)^s e^{i pi s} - (1+lam^2)^s|^2, the only
# candidate whose double Laplace transform reproduces the closed form and
# whose Laplace tail stays within [0, 1].
GAMMA_READINGS = ("unshifted_linear", "unshifted_power", "shifted_modulus")
DEFAULT_GAMMA_READING = "shifted_modulus"


class TruncationUnstableError(ArithmeticError):
    """Truncated shift integral moved too much when the cutoff doubled."""


@dataclass(frozen=True)
class FractionalOrder:
    """Fractional exponent s in (0,1) with the ambient dimension d >= 2."""

    s: float
    d: int = 2

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"fractional order must lie in (0,1), got {self.s}")
        if self.d != int(self.d) or self.d < 2:
            raise ValueError(f"ambient dimension must be an integer >= 2, got {self.d}")


@dataclass(frozen=True)
class CountingShiftResult:
    """Truncated counting shift with its cutoff-doubling diagnostic."""

    value: float
    t_cut: float
    doubling_delta: float


@dataclass(frozen=True)
class KernelValue:
    """One evaluated kernel entry; kernels vanish below the spectral bottom."""

    t: float
    u: float
    mu: float
    value: float

    def __post_init__(self):
        if self.t < 0 or self.u < 0 or not self.mu > 0:
            raise ValueError("kernel arguments need t, u >= 0 and mu > 0")
        if self.mu < 1.0 and self.value != 0.0:
            raise ValueError("kernel values must vanish below the spectral bottom")


def dispersion(E, s: float):
    """Shifted dispersion (E+1)^s - 1; vanishes at E = 0, strictly increasing."""
    E = np.asarray(E, dtype=float)
    if np.any(E < 0):
        raise ValueError("dispersion is defined for E >= 0")
    out = np.expm1(s * np.log1p(E))
    return float(out) if out.ndim == 0 else out


def _dispersion_prime(E, s: float):
    return s * np.exp((s - 1.0) * np.log1p(E))


def _decay_logratio(L, s: float):
    """N(L) = ln|expm1 L| - (1-s) L - ln|expm1(s L)|, with N(0) = -ln s."""
    L = np.asarray(L, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.log(np.abs(np.expm1(L)))
               - (1.0 - s) * L
               - np.log(np.abs(np.expm1(s * L))))
    return np.where(L == 0.0, -math.log(s), out)


@lru_cache(maxsize=64)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_quad(edges: np.ndarray, n: int):
    """Gauss-Legendre nodes/weights on a sequence of contiguous panels."""
    x, w = _gl(n)
    lo = edges[:-1]
    hi = edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _geometric_edges(lo: float, hi: float, ratio: float = 3.0):
    edges = [0.0, lo]
    x = lo
    while x < hi:
        x *= ratio
        edges.append(min(x, hi))
    return np.array(edges)


def _osc_edges(hi: float, total_phase: float, base: int = 6, cap: int = 600):
    """Uniform panels over (0, hi) sized to resolve a given phase sweep."""
    panels = min(cap, base + int(total_phase / (2.0 * math.pi) * 1.6))
    return np.linspace(0.0, hi, panels + 1)


def _spectral_edge(mu: float, s: float) -> float:
    """Largest lam with (lam^2+1)^s < mu; zero when mu <= 1."""
    if mu <= 1.0:
        return 0.0
    return math.sqrt(math.expm1(math.log(mu) / s))


class HalfLineModel:
    """Cached spectral data of the half-line operator for one fractional order.

    Construction precomputes a monotone phase-shift table on a log grid;
    the spectral-density tables build lazily, one per requested lam, and
    are pure acceleration: every cached value is reproducible from the
    order and the quadrature spec alone.  After construction the model is
    immutable apart from that cache; concurrent readers at worst rebuild
    an identical entry.
    """

    #: log-spaced phase table range and size
    THETA_LO = 1e-4
    THETA_HI = 1e4
    THETA_NODES = 400

    def __init__(self, order: FractionalOrder, quad: QuadratureSpec = QuadratureSpec(),
                 gamma_reading: str = DEFAULT_GAMMA_READING):
        if gamma_reading not in GAMMA_READINGS:
            raise ValueError(f"unknown gamma reading {gamma_reading!r}")
        self.order = order
        self.quad = quad
        self.gamma_reading = gamma_reading
        self._gamma_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}
        self._gap_r_cache: dict[int, dict] = {}
        self._xi_nodes, self._xi_weights = self._build_xi_quadrature()
        grid = np.logspace(math.log10(self.THETA_LO), math.log10(self.THETA_HI),
                           self.THETA_NODES)
        vals = np.array([self._phase_direct(l) for l in grid])
        if np.any(np.diff(vals) < -1e-12):
            raise AssertionError("phase table lost monotonicity")
        self._theta_grid = grid
        self._theta_interp = PchipInterpolator(np.log(grid), vals, extrapolate=False)
        self._theta_limit = math.pi * (1.0 - order.s) / 4.0

    # -- phase shift --------------------------------------------------

    def _phase_direct(self, lam: float) -> float:
        """Phase shift from the substituted z-form, smooth on (0, 1)."""
        s = self.order.s
        lam2 = lam * lam
        edges = np.concatenate([_geometric_edges(1e-18, 0.5, ratio=10.0),
                                [0.7, 0.85, 1.0]])
        z, w = _panel_quad(edges[1:], 16)  # skip the (0, 1e-18) sliver
        one_minus_z2 = (1.0 - z) * (1.0 + z)
        v = lam2 * one_minus_z2 / (1.0 + lam2)
        L1 = np.log1p(-v)            # < 0
        L2 = np.log1p(v / (z * z))   # > 0
        num = np.log(-np.expm1(s * L1))
        den = np.log(np.expm1(s * L2))
        integrand = (num - den - 2.0 * np.log(z)) / one_minus_z2
        return float(np.dot(w, integrand)) / math.pi

    def phase(self, lam: float) -> float:
        """Scattering phase of the generalized eigenfunctions; increasing in
        lam from 0 to pi(1-s)/4."""
        if not lam > 0:
            raise ValueError(f"phase requires lam > 0, got {lam}")
        if self.THETA_LO <= lam <= self.THETA_HI:
            return float(self._theta_interp(math.log(lam)))
        return self._phase_direct(lam)

    def phase_vec(self, lam: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        out = np.empty_like(lam)
        inside = (lam >= self.THETA_LO) & (lam <= self.THETA_HI)
        if inside.any():
            out[inside] = self._theta_interp(np.log(lam[inside]))
        for i in np.nonzero(~inside)[0]:
            out[i] = self._phase_direct(float(lam[i]))
        return out

    # -- spectral density and Laplace tails ----------------------------

    def _build_xi_quadrature(self):
        """Fixed nodes/weights for integrals of the density over (1, inf).

        Near xi = 1 the density vanishes like (xi-1)^s, handled by the
        substitution xi = 1 + v^(1/s); the algebraic tail ~ xi^(-1-s) is
        flattened exactly by xi = 2 w^(-1/s).
        """
        s = self.order.s
        v, wv = _panel_quad(np.array([1e-8, 1e-5, 1e-3, 0.03, 0.2, 0.6, 1.0]), 16)
        xi_a = 1.0 + v ** (1.0 / s)
        w_a = wv * v ** (1.0 / s - 1.0) / s
        u, wu = _panel_quad(np.array([1e-9, 1e-4, 0.02, 0.15, 0.45, 1.0]), 16)
        xi_b = 2.0 * u ** (-1.0 / s)
        w_b = wu * (2.0 / s) * u ** (-1.0 / s - 1.0)
        return np.concatenate([xi_a, xi_b]), np.concatenate([w_a, w_b])

    def _poisson_decay(self, lam: float, x: np.ndarray) -> np.ndarray:
        """Q(x) = int_0^inf x/(x^2+z^2) N(log((1+z^2)/(1+lam^2))) dz."""
        x = np.asarray(x, dtype=float)
        pos = x[x > 0]
        if pos.size == 0:
            return np.zeros_like(x)
        scale_hi = 1e7 * max(float(pos.max()), lam, 1.0)
        scale_lo = 1e-8 * min(float(pos.min()), 1.0, max(lam, 1e-8))
        z, w = _panel_quad(_geometric_edges(scale_lo, scale_hi, ratio=3.0), 16)
        L = np.log1p((z - lam) * (z + lam) / (1.0 + lam * lam))
        nw = w * _decay_logratio(L, self.order.s)
        out = np.zeros_like(x)
        mask = x > 0
        xv = x[mask]
        out[mask] = (xv[:, None] / (xv[:, None] ** 2 + z[None, :] ** 2) @ nw)
        return out

    def gamma_values(self, lam: float, xi, reading: str | None = None) -> np.ndarray:
        """Spectral density of the Laplace tail; zero below xi = 1."""
        s = self.order.s
        reading = reading or self.gamma_reading
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.zeros_like(xi)
        m = xi > 1.0
        if not m.any() or lam <= 0.0:
            return out
        xv = xi[m]
        lam2 = lam * lam
        psi_l = float(dispersion(lam2, s))
        xi2m1 = (xv - 1.0) * (xv + 1.0)
        pow_s = xi2m1 ** s
        cos_pi_s = math.cos(math.pi * s)
        sin_pi_s = math.sin(math.pi * s)
        shift_s = (1.0 + lam2) ** s
        if reading == "unshifted_linear":
            den = psi_l ** 2 + pow_s - 2.0 * psi_l * xi2m1 * cos_pi_s
        elif reading == "unshifted_power":
            den = (pow_s - psi_l * cos_pi_s) ** 2 + (psi_l * sin_pi_s) ** 2
        else:  # shifted_modulus
            den = (pow_s - shift_s) ** 2 + 2.0 * shift_s * pow_s * (1.0 - cos_pi_s)
        q = self._poisson_decay(lam, xv)
        expfac = ((1.0 + xv) ** (s - 1.0)
                  * math.sqrt((1.0 + lam2) ** (1.0 - s) / s)
                  * np.exp(-q / math.pi))
        num = lam * _dispersion_prime(lam2, s) * sin_pi_s * pow_s / math.pi
        with np.errstate(divide="ignore"):
            vals = num / den * expfac
        out[m] = vals
        return out

    def gamma_table(self, lam: float):
        """(nodes, density*weights) quadrature table for tail integrals."""
        key = round(lam, 12)
        tab = self._gamma_cache.get(key)
        if tab is None:
            xi = self._xi_nodes
            tab = (xi, self._xi_weights * self.gamma_values(lam, xi))
            self._gamma_cache[key] = tab
        return tab

    def laplace_tail(self, lam: float, x):
        """G(lam, x) = int_1^inf exp(-x*xi) gamma(xi) dxi, in [0, 1]."""
        xi, c = self.gamma_table(lam)
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        vals = np.exp(-x_arr[:, None] * xi[None, :]) @ c
        return float(vals[0]) if np.isscalar(x) or np.ndim(x) == 0 else vals

    def eigenfunction(self, lam: float, x):
        """Generalized eigenfunction F(lam, x) = sin(lam x + phase) - tail;
        vanishes at x = 0 and is bounded by 2 in modulus."""
        th = self.phase(lam)
        x_arr = np.asarray(x, dtype=float)
        return np.sin(lam * x_arr + th) - self.laplace_tail(lam, x_arr)

    # -- closed-form double Laplace transform --------------------------

    def _log_kappa(self, lam: float) -> float:
        # kappa = ln(lam^2 psi'(lam^2) / psi(lam^2))
        s = self.order.s
        lam2 = lam * lam
        return (math.log(s) + math.log(lam2) + (s - 1.0) * math.log1p(lam2)
                - math.log(math.expm1(s * math.log1p(lam2))))

    def outer_function(self, lam: float, t: float) -> float:
        """Exponential of the Poisson integral of the log spectral ratio.

        Equals 1 at t = 0 and decays like t^(1-s) relative to the free
        factor; enters the closed-form double Laplace transform.
        """
        if not lam > 0:
            raise ValueError("outer_function requires lam > 0")
        if t < 0:
            raise ValueError("outer_function requires t >= 0")
        if t == 0.0:
            return 1.0
        s = self.order.s
        lam2 = lam * lam
        c0 = 0.5 * (math.log(s) - (1.0 - s) * math.log1p(lam2) - self._log_kappa(lam))
        q = float(self._poisson_decay(lam, np.array([t]))[0])
        return (1.0 + t) ** (1.0 - s) * math.exp(c0 + q / math.pi)

    def closed_form_double_laplace(self, lam: float, t: float) -> float:
        """Closed form of the double Laplace transform of the density."""
        s = self.order.s
        lam2 = lam * lam
        th = self.phase(lam)
        ratio = _dispersion_prime(lam2, s) / math.expm1(s * math.log1p(lam2))
        phi = self.outer_function(lam, t)
        return ((lam * math.cos(th) + t * math.sin(th)) / (lam2 + t * t)
                - lam2 * math.sqrt(ratio) * phi / (lam2 + t * t))

    # -- kernels -------------------------------------------------------

    def _g_grid(self, mu: float, n: int = 32):
        """Edge-substituted lam grid on the spectral window with weights."""
        edge = _spectral_edge(mu, self.order.s)
        phi, w = _panel_quad(np.array([0.0, math.pi / 2.0]), n)
        lam = edge * np.sin(phi)
        return lam, edge * np.cos(phi) * w, edge

    def kernel_gap(self, x: float, mu: float) -> float:
        """Diagonal deficit a(mu) - a_half(x, mu) of the Riesz-mean kernels.

        Decomposed through 1 - 2 F^2 = cos(2 lam x + 2 phase)
        + 4 sin(lam x + phase) G - 2 G^2: the cosine sweep is integrated on
        an oscillation-resolving grid, the tail terms on a smooth edge
        grid, interpolated where the sine factor oscillates.
        """
        if mu <= 1.0:
            return 0.0
        s = self.order.s
        lam_g, w_g, edge = self._g_grid(mu)
        dense = _osc_edges(edge, 2.0 * x * edge)
        lam_d, w_d = _panel_quad(dense, 8)
        th_d = self.phase_vec(lam_d)
        wt_d = mu - (1.0 + lam_d ** 2) ** s
        total = float(np.dot(w_d, wt_d * np.cos(2.0 * lam_d * x + 2.0 * th_d)))
        g_vals = np.array([self.laplace_tail(l, x) for l in lam_g])
        if x <= 12.0:
            lam_aug = np.concatenate([[0.0], lam_g, [edge]])
            g_aug = np.concatenate([[0.0], g_vals,
                                    [self.laplace_tail(edge, x)]])
            g_interp = PchipInterpolator(lam_aug, g_aug)
            gd = g_interp(lam_d)
            total += float(np.dot(w_d, wt_d * (4.0 * np.sin(lam_d * x + th_d) * gd
                                               - 2.0 * gd * gd)))
        else:
            th_g = self.phase_vec(lam_g)
            wt_g = mu - (1.0 + lam_g ** 2) ** s
            total += float(np.dot(w_g, wt_g * (4.0 * np.sin(lam_g * x + th_g) * g_vals
                                               - 2.0 * g_vals * g_vals)))
        return total / math.pi

    def riesz_kernel_line(self, mu: float) -> float:
        """Diagonal of the whole-line Riesz-mean kernel (t-independent)."""
        if mu <= 1.0:
            return 0.0
        lam, w, _ = self._g_grid(mu, n=64)
        return float(np.dot(w, mu - (1.0 + lam ** 2) ** self.order.s)) / math.pi

    def riesz_kernel_diag(self, t: float, mu: float) -> float:
        """Diagonal half-line Riesz-mean kernel; zero at or below mu = 1."""
        if mu <= 1.0:
            return 0.0
        return self.riesz_kernel_line(mu) - self.kernel_gap(t, mu)

    def projector_kernel(self, t: float, u: float, mu: float) -> float:
        """Kernel of the spectral projector below mu; zero for mu <= 1."""
        if mu <= 1.0:
            return 0.0
        lam_g, _, edge = self._g_grid(mu)
        dense = _osc_edges(edge, (abs(t) + abs(u)) * edge)
        lam_d, w_d = _panel_quad(dense, 8)
        th_d = self.phase_vec(lam_d)
        gt = np.array([self.laplace_tail(l, t) for l in lam_g])
        gu = np.array([self.laplace_tail(l, u) for l in lam_g])
        lam_aug = np.concatenate([[0.0], lam_g, [edge]])
        gt_i = PchipInterpolator(lam_aug, np.concatenate(
            [[0.0], gt, [self.laplace_tail(edge, t)]]))(lam_d)
        gu_i = PchipInterpolator(lam_aug, np.concatenate(
            [[0.0], gu, [self.laplace_tail(edge, u)]]))(lam_d)
        ft = np.sin(lam_d * t + th_d) - gt_i
        fu = np.sin(lam_d * u + th_d) - gu_i
        return 2.0 / math.pi * float(np.dot(w_d, ft * fu))

    def projector_profile(self, t: float, u: np.ndarray, mu: float) -> np.ndarray:
        """Projector kernel row e(t, u_j, mu) over an array of offsets.

        Single oscillation-resolving grid sized for max(u); used by the
        idempotence check, which integrates the kernel against itself over
        a long truncated window.
        """
        u = np.asarray(u, dtype=float)
        if mu <= 1.0:
            return np.zeros_like(u)
        lam_g, _, edge = self._g_grid(mu)
        span = abs(t) + float(np.max(u))
        dense = _osc_edges(edge, span * edge, cap=1600)
        lam_d, w_d = _panel_quad(dense, 8)
        th_d = self.phase_vec(lam_d)
        lam_aug = np.concatenate([[0.0], lam_g, [edge]])
        gt = np.concatenate([[0.0],
                             [self.laplace_tail(l, t) for l in lam_g],
                             [self.laplace_tail(edge, t)]])
        ft = np.sin(lam_d * t + th_d) - PchipInterpolator(lam_aug, gt)(lam_d)
        xi, c = zip(*(self.gamma_table(l) for l in lam_g))
        g_cols = np.empty((lam_aug.size, u.size))
        g_cols[0] = 0.0
        for i, l in enumerate(lam_g):
            g_cols[i + 1] = self.laplace_tail(l, u)
        g_cols[-1] = self.laplace_tail(edge, u)
        g_interp = PchipInterpolator(lam_aug, g_cols, axis=0)(lam_d)
        out = np.empty(u.size)
        step = 2048
        wf = w_d * ft
        for j0 in range(0, u.size, step):
            j1 = min(j0 + step, u.size)
            fu = (np.sin(np.outer(lam_d, u[j0:j1]) + th_d[:, None])
                  - g_interp[:, j0:j1])
            out[j0:j1] = wf @ fu
        return 2.0 / math.pi * out

    # -- boundary layer -------------------------------------------------

    def _layer_r_quad(self):
        cached = self._gap_r_cache.get(0)
        if cached is None:
            r, w = _panel_quad(np.array([0.0, 0.02, 0.06, 0.15, 0.3,
                                         0.5, 0.7, 0.85, 0.95, 1.0]), 8)
            cached = (r, w)
            self._gap_r_cache[0] = cached
        return cached

    def boundary_layer(self, t: float) -> float:
        """Boundary-layer profile K(t): tangential-frequency integral of the
        kernel deficit, vanishing as t -> inf; integrates to the surface
        coefficient."""
        if not t > 0:
            raise ValueError(f"boundary_layer requires t > 0, got {t}")
        s, d = self.order.s, self.order.d
        from .quadcore import sphere_area
        pref = sphere_area(d - 2) / (2.0 * math.pi) ** (d - 1)
        r, w = self._layer_r_quad()
        vals = np.array([self.kernel_gap(t * ri, ri ** (-2.0 * s)) for ri in r])
        return pref * float(np.dot(w, r ** (d - 1.0 + 2.0 * s) * vals))

    # -- integrated t-densities and shifts ------------------------------

    def tail_moment(self, lam: float) -> float:
        """int_0^inf sin(lam t + phase) G(lam, t) dt, in closed form."""
        th = self.phase(lam)
        xi, c = self.gamma_table(lam)
        return float(np.dot(c, (xi * math.sin(th) + lam * math.cos(th))
                            / (xi * xi + lam * lam)))

    def tail_square_moment(self, lam: float) -> float:
        """int_0^inf G(lam, t)^2 dt, in closed form over the density table."""
        xi, c = self.gamma_table(lam)
        return float(np.sum(np.outer(c, c) / (xi[:, None] + xi[None, :])))

    def t_integrated_gap_density(self, lam: float) -> float:
        """Regular part of int_0^inf (1 - 2 F^2) dt at spectral parameter lam.

        The Abel-regularized cosine component contributes
        -sin(2 phase)/(2 lam) here; its lam -> 0 boundary term (a constant
        pi/4 per unit of the outer integral's weight at the spectral
        bottom) is accounted for by the callers.
        """
        th = self.phase(lam)
        return (-math.sin(2.0 * th) / (2.0 * lam)
                + 4.0 * self.tail_moment(lam)
                - 2.0 * self.tail_square_moment(lam))

    def energy_shift(self, mu: float) -> float:
        """Integrated kernel deficit zeta(mu) = mu^-1 int (a - a_half) dt."""
        if not mu > 1.0:
            raise ValueError(f"energy_shift requires mu > 1, got {mu}")
        s = self.order.s
        lam, w, _ = self._g_grid(mu, n=48)
        wt = mu - (1.0 + lam ** 2) ** s
        dens = np.array([self.t_integrated_gap_density(l) for l in lam])
        return ((mu - 1.0) / 4.0 + float(np.dot(w, wt * dens)) / math.pi) / mu

    def counting_shift(self, mu: float, t_cut: float = 40.0,
                       unstable_tol: float | None = None) -> CountingShiftResult:
        """Truncated counting-function shift with cutoff diagnostics.

        The underlying integral is not known to converge; the result
        carries the change produced by doubling the cutoff, and the call
        fails with TruncationUnstableError only when a tolerance is given
        and exceeded.
        """
        if not mu > 1.0:
            raise ValueError(f"counting_shift requires mu > 1, got {mu}")
        v1 = self._counting_shift_at(mu, t_cut)
        v2 = self._counting_shift_at(mu, 2.0 * t_cut)
        delta = v2 - v1
        if unstable_tol is not None and abs(delta) > unstable_tol * max(abs(v1), 1e-12):
            raise TruncationUnstableError(
                f"counting shift moved by {delta!r} when doubling t_cut={t_cut}")
        return CountingShiftResult(v1, t_cut, delta)

    def _counting_shift_at(self, mu: float, T: float) -> float:
        s = self.order.s
        lam_g, w_g, edge = self._g_grid(mu, n=48)
        # oscillatory closed-form piece, gamma-free, on a dense grid
        dense = _osc_edges(edge, 2.0 * T * edge)
        lam_d, w_d = _panel_quad(dense, 8)
        th_d = self.phase_vec(lam_d)
        osc = (np.sin(2.0 * lam_d * T + 2.0 * th_d) - np.sin(2.0 * th_d)) / (2.0 * lam_d)
        total = float(np.dot(w_d, osc))
        for lam, w in zip(lam_g, w_g):
            th = self.phase(lam)
            xi, c = self.gamma_table(lam)
            damp = np.exp(-T * xi)
            i1 = float(np.dot(c, ((xi * math.sin(th) + lam * math.cos(th))
                                  - damp * (xi * np.sin(lam * T + th)
                                            + lam * np.cos(lam * T + th)))
                              / (xi * xi + lam * lam)))
            pair = xi[:, None] + xi[None, :]
            i2 = float(np.sum(np.outer(c, c) * (1.0 - np.exp(-T * pair)) / pair))
            total += w * (4.0 * i1 - 2.0 * i2)
        return total / math.pi


class DirichletLineModel:
    """Local (s = 1) analogue with sine eigenfunctions: zero phase shift and
    no Laplace tail.  The kernel deficit has a closed form, which both
    drives the power-of-the-Dirichlet-Laplacian comparison constant and
    serves as an exact oracle for the generic layer machinery."""

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("dimension must be >= 2")
        self.d = d
        self.exponent = 1.0  # plays the role of s in the layer reduction

    @staticmethod
    def kernel_gap(x: float, mu: float) -> float:
        if mu <= 1.0:
            return 0.0
        edge = math.sqrt(mu - 1.0)
        u = 2.0 * edge * x
        if u < 1e-3:
            j = 1.0 / 3.0 - u * u / 30.0 + u ** 4 / 840.0
        else:
            j = (math.sin(u) - u * math.cos(u)) / u ** 3
        return 2.0 * edge ** 3 * j / math.pi

    @staticmethod
    def energy_shift(mu: float) -> float:
        if not mu > 1.0:
            raise ValueError("energy_shift requires mu > 1")
        return (mu - 1.0) / (4.0 * mu)

    def boundary_layer(self, t: float) -> float:
        if not t > 0:
            raise ValueError("boundary_layer requires t > 0")
        from .quadcore import sphere_area
        d = self.d
        pref = sphere_area(d - 2) / (2.0 * math.pi) ** (d - 1)
        r, w = _panel_quad(np.array([0.0, 0.02, 0.06, 0.15, 0.3,
                                     0.5, 0.7, 0.85, 0.95, 1.0]), 8)
        vals = np.array([self.kernel_gap(t * ri, ri ** -2.0) for ri in r])
        return pref * float(np.dot(w, r ** (d + 1.0) * vals))


# -- module-level operation surface over shared default models ----------


@lru_cache(maxsize=32)
def _default_model(s: float, d: int = 2) -> HalfLineModel:
    return HalfLineModel(FractionalOrder(s, d))


def phase_shift(lam: float, s: float) -> float:
    return _default_model(s).phase(lam)


def spectral_density(lam: float, xi: float, s: float,
                     reading: str | None = None) -> float:
    if not lam > 0:
        raise ValueError("spectral_density requires lam > 0")
    if not xi > 0:
        raise ValueError("spectral_density requires xi > 0")
    return float(_default_model(s).gamma_values(lam, xi, reading)[0])


def laplace_tail(lam: float, x: float, s: float) -> float:
    return _default_model(s).laplace_tail(lam, x)


def eigenfunction(lam: float, x: float, s: float) -> float:
    return float(_default_model(s).eigenfunction(lam, x))


def outer_function(lam: float, t: float, s: float) -> float:
    return _default_model(s).outer_function(lam, t)


def closed_form_double_laplace(lam: float, t: float, s: float) -> float:
    return _default_model(s).closed_form_double_laplace(lam, t)


def projector_kernel(t: float, u: float, mu: float, s: float) -> float:
    return _default_model(s).projector_kernel(t, u, mu)


def riesz_kernel_diag(t: float, mu: float, s: float) -> float:
    return _default_model(s).riesz_kernel_diag(t, mu)


def riesz_kernel_line(mu: float, s: float) -> float:
    return _default_model(s).riesz_kernel_line(mu)


def boundary_layer(t: float, order: FractionalOrder) -> float:
    return _default_model(order.s, order.d).boundary_layer(t)


def energy_shift(mu: float, s: float) -> float:
    return _default_model(s).energy_shift(mu)


def counting_shift(mu: float, s: float, t_cut: float = 40.0,
                   unstable_tol: float | None = None) -> CountingShiftResult:
    return _default_model(s).counting_shift(mu, t_cut, unstable_tol)


def gamma_reading_residuals(s: float, points=((1.0, 1.0), (2.0, 0.7)),
                            quad: QuadratureSpec | None = None) -> dict:
    """Relative residuals of the Laplace-chain closure for every candidate
    denominator reading, plus the worst violation of the unit bound on the
    Laplace tail.  The selected reading is the one with residuals at
    rounding scale; run by the test suite as the documented resolution of
    the denominator ambiguity."""
    from .quadcore import integrate
    quad = quad or QuadratureSpec(rel_tol=1e-9)
    out = {}
    for reading in GAMMA_READINGS:
        model = HalfLineModel(FractionalOrder(s), gamma_reading=reading)
        worst = 0.0
        bound = 0.0
        for lam, t in points:
            xi, c = model.gamma_table(lam)

            def tail(u_arr):
                return np.exp(-np.multiply.outer(u_arr, xi)) @ c

            def outer_integrand(u_arr):
                return np.exp(-t * u_arr) * tail(u_arr)

            g_num = integrate(outer_integrand, 0.0, math.inf, quad).value
            g_ref = model.closed_form_double_laplace(lam, t)
            worst = max(worst, abs(g_num - g_ref) / abs(g_ref))
            gvals = tail(np.linspace(0.0, 5.0, 41))
            bound = max(bound, float(np.max(gvals) - 1.0), float(-np.min(gvals)))
        out[reading] = {"closure_residual": worst, "unit_bound_excess": max(bound, 0.0)}
    return out
