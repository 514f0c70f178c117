"""Scale-function and speed-measure machinery for drifted Brownian comparison.

The comparison process is Brownian motion with constant downward drift
rate a; its scale function f(x) = (e^{2ax} - 1)/(2a) turns it into a
martingale N with dN = (1 + 2 a N) dW and speed density (1 + 2av)^{-2}.
All Green-formula integrals are evaluated in closed form; Monte-Carlo
routines exist only to confront the closed forms and the escape bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .report import VerificationReport
from .rng import step_generator

_A_TINY = 1e-12


def scale_function(a: float, x) -> float | np.ndarray:
    """f(x) = (e^{2ax} - 1) / (2a); the limit x as a -> 0."""
    x = np.asarray(x, dtype=float)
    if a < 0:
        raise ValueError("a must be nonnegative")
    if a < _A_TINY:
        out = x
    else:
        out = np.expm1(2.0 * a * x) / (2.0 * a)
    return float(out) if out.ndim == 0 else out


def scale_inverse(a: float, y) -> float | np.ndarray:
    """f^{-1}(y) = ln(1 + 2ay) / (2a)."""
    y = np.asarray(y, dtype=float)
    if a < _A_TINY:
        out = y
    else:
        out = np.log1p(2.0 * a * y) / (2.0 * a)
    return float(out) if out.ndim == 0 else out


def green_constants(a: float, eps1: float) -> tuple[float, float]:
    """(C_eps1, s1): C = 2 int_0^{eps1/2} dv/(1+2av)^2 = eps1/(1 + a eps1),
    and the escape-time budget s1 = eps1 * C."""
    if a < 0 or eps1 <= 0:
        raise ValueError("need a >= 0 and eps1 > 0")
    c = eps1 if a < _A_TINY else eps1 / (1.0 + a * eps1)
    return c, eps1 * c


def _I1(a: float, w: float) -> float:
    """int_0^w v (1+2av)^{-2} dv."""
    if a < _A_TINY:
        return 0.5 * w * w
    t = 2.0 * a * w
    return (np.log1p(t) - t / (1.0 + t)) / (4.0 * a * a)


def _J(a: float, u: float, L: float) -> float:
    """int_u^L (1+2av)^{-2} dv."""
    if a < _A_TINY:
        return L - u
    return (1.0 / (1.0 + 2.0 * a * u) - 1.0 / (1.0 + 2.0 * a * L)) / (2.0 * a)


def expected_exit_time(a: float, u: float, L: float) -> float:
    """Green-formula mean exit time of the natural-scale martingale from (0, L):
    E_u(T_0 ^ T_L) = 2 int_0^L (1 - (u v v)/L)(u ^ v) dv/(1+2av)^2."""
    if not 0 <= u <= L:
        raise ValueError("need 0 <= u <= L")
    if u == 0 or u == L:
        return 0.0
    return 2.0 * (
        (1.0 - u / L) * _I1(a, u) + u * (_J(a, u, L) - (_I1(a, L) - _I1(a, u)) / L)
    )


@dataclass(frozen=True)
class DriftedBMParams:
    """Derived constants of the drifted-Brownian comparison argument.

    a is the effective downward drift scale (drift bound over the
    ellipticity floor); eps0 is the boundary-collar width in the original
    coordinate; everything else follows: eps1 = f(eps0), the Green constant
    C_eps1, the time budget s1 = eps1 C_eps1, the half-collar pullback
    eps = f^{-1}(eps1 / 2).
    """

    a: float
    eps0: float

    def __post_init__(self):
        if self.a < 0 or self.eps0 <= 0:
            raise ValueError("need a >= 0 and eps0 > 0")

    @property
    def eps1(self) -> float:
        return float(scale_function(self.a, self.eps0))

    @property
    def c_eps1(self) -> float:
        return green_constants(self.a, self.eps1)[0]

    @property
    def s1(self) -> float:
        return green_constants(self.a, self.eps1)[1]

    @property
    def eps(self) -> float:
        return float(scale_inverse(self.a, self.eps1 / 2.0))

    def t1(self, sigma_min2: float) -> float:
        """Original-coordinate time budget s1 / sigma_min^2."""
        if sigma_min2 <= 0:
            raise ValueError("sigma_min2 must be positive")
        return self.s1 / sigma_min2


def natural_scale_exit_mc(
    a: float,
    u: float,
    hi: float,
    horizon: float,
    n: int,
    seed: int,
    *,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate dN = (1 + 2aN) dW from u on (0, hi) up to `horizon`.

    Returns (state, exit_time): state 1 = hit hi first, 2 = hit 0 first,
    3 = still inside at the horizon.  Both barriers get the Brownian-bridge
    crossing correction with the locally frozen volatility.
    """
    if not 0 < u < hi:
        raise ValueError("need 0 < u < hi")
    pos = np.full(n, float(u))
    state = np.zeros(n, dtype=np.int8)
    exit_time = np.full(n, np.inf)
    idx = np.arange(n)
    n_steps = int(np.ceil(horizon / dt - 1e-9))
    sqdt = np.sqrt(dt)
    for step in range(n_steps):
        if idx.size == 0:
            break
        g = step_generator(seed, step)
        z = g.standard_normal(idx.size)
        un = g.random(idx.size)
        sig = 1.0 + 2.0 * a * pos[idx]
        new = pos[idx] + sig * sqdt * z
        var = sig * sig * dt
        p_hi = np.exp(-2.0 * np.maximum(hi - pos[idx], 0) * np.maximum(hi - new, 0) / var)
        p_lo = np.exp(-2.0 * np.maximum(pos[idx], 0) * np.maximum(new, 0) / var)
        hit_hi = (new >= hi) | (un < p_hi)
        hit_lo = (new <= 0) | (~hit_hi & (un >= p_hi) & (un < p_hi + p_lo))
        t_now = (step + 1) * dt
        state[idx[hit_hi]] = 1
        state[idx[hit_lo]] = 2
        exit_time[idx[hit_hi | hit_lo]] = t_now
        keep = ~(hit_hi | hit_lo)
        pos[idx[keep]] = new[keep]
        idx = idx[keep]
    state[idx] = 3
    return state, exit_time


def escape_bounds_check(
    a: float,
    eps1: float,
    u_grid,
    n: int,
    seed: int,
    *,
    dt: float = 1e-4,
    z_ci: float = 3.0,
) -> VerificationReport:
    """MC check of the martingale escape bound and the Green tail bound.

    For each u in (0, eps1/2): P_u(T_{eps1/2} <= s1 ^ T_0) >= u/eps1, and
    P_u(s1 <= T_0 ^ T_{eps1/2}) <= u C_eps1 / s1, each within z_ci SEs.
    """
    c_eps, s1 = green_constants(a, eps1)
    rep = VerificationReport(title=f"escape bounds (a={a}, eps1={eps1})")
    rep.add_info("c-eps1", c_eps)
    rep.add_info("s1", s1)
    for k, u in enumerate(u_grid):
        if not 0 < u < eps1 / 2:
            raise ValueError(f"u={u} outside (0, eps1/2)")
        state, _ = natural_scale_exit_mc(
            a, u, eps1 / 2.0, s1, n, seed + 7919 * k, dt=dt
        )
        p_escape = float((state == 1).mean())
        p_tail = float((state == 3).mean())
        se_e = float(np.sqrt(p_escape * (1 - p_escape) / n))
        se_t = float(np.sqrt(p_tail * (1 - p_tail) / n))
        rep.check_ge(
            f"escape-lower-bound[u={u:g}]",
            p_escape,
            u / eps1,
            tol=z_ci * se_e,
            se=se_e,
        )
        rep.check_le(
            f"tail-upper-bound[u={u:g}]",
            p_tail,
            u * c_eps / s1,
            tol=z_ci * se_t,
            se=se_t,
        )
    return rep


def lemma32_verify(
    model,
    x_grid,
    n: int,
    seed: int,
    *,
    eps: float | None = None,
    t1: float | None = None,
    dt: float,
    z_ci: float = 3.0,
) -> VerificationReport:
    """Boundary-return lower bound on an interval model.

    Checks that min over the grid of P_x(T_eps <= t1 < tau)/rho(x) has a
    positive lower confidence bound; (eps, t1) default to the drifted-BM
    comparison values derived from the model's declared bounds.
    """
    from .domains import InnerCompact, Interval
    from .simulate import hitting_before

    if not isinstance(model.domain, Interval):
        raise ValueError("lemma32_verify expects an interval model")
    if eps is None or t1 is None:
        a = model.drift_bound / model.sigma_min2
        params = DriftedBMParams(a=a, eps0=model.domain.inradius / 2.0)
        eps = params.eps if eps is None else eps
        t1 = params.t1(model.sigma_min2) if t1 is None else t1
    target = InnerCompact(model.domain, eps)
    rep = VerificationReport(title=f"lemma-3.2 bound (eps={eps:g}, t1={t1:g})")
    rep.add_info("eps", eps)
    rep.add_info("t1", t1)
    min_lower = np.inf
    min_ratio = np.inf
    for k, x in enumerate(x_grid):
        rho = float(model.domain.rho_boundary(np.atleast_1d(x))[0])
        est, se = hitting_before(model, x, target, t1, n, seed + 104729 * k, dt=dt)
        ratio = est / rho
        lower = max(est - z_ci * se, 0.0) / rho
        min_ratio = min(min_ratio, ratio)
        min_lower = min(min_lower, lower)
        rep.add_info(f"ratio[x={float(np.atleast_1d(x)[0]):g}]", ratio, se=se / rho)
    rep.check_ge("min-ratio-lower-ci", min_lower, 1e-12)
    rep.add_info("c-prime-estimate", min_ratio)
    return rep
