"""Right-hand sides and time integration, uniform in viscosity mu in [0, 1].

The default stepper is classical RK4 with the viscous semigroup applied as
an exact spectral integrating factor on V (potential form) or v (primitive
form).  With the coupling and nonlinearity switched off, a step therefore
reproduces pure heat decay e^{-mu |k|^2 dt} to machine precision, for every
mu, and mu = 0 degenerates to plain RK4 on the hyperbolic system.
"""

from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .grid import Grid
from .state import PotentialState, PrimitiveState


class BlowUpError(RuntimeError):
    """Raised when the integration produces non-finite fields."""

    def __init__(self, t: float):
        super().__init__(f"solution blew up at t = {t:.6g}")
        self.t = t


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping knobs.

    scheme: only "if-rk4" (integrating-factor RK4) is implemented; the
    viscous operator is diagonal in spectral space, so exactness uniform in
    mu is free.  The coupling/nonlinear switches exist for linear-regime
    tests and are both on in production.
    """

    cfl_factor: float = 0.3
    scheme: str = "if-rk4"
    dealias: bool = True
    coupling: bool = True
    nonlinear: bool = True

    def __post_init__(self):
        if not 0.0 < self.cfl_factor <= 1.0:
            raise ValueError("cfl_factor must lie in (0, 1]")
        if self.scheme != "if-rk4":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


def _mul(grid: Grid, a: np.ndarray, b: np.ndarray, dealias: bool) -> np.ndarray:
    prod = a * b
    return sp.dealias(grid, prod) if dealias else prod


def quadratic_source(grid: Grid, V: np.ndarray, H: np.ndarray,
                     dealias: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Nonlinear sources (f1, f2) of the potential-form system.

    f1 = sum_ij riesz_pp(i, j, -d_i^perp V d_j^perp V + d_i^perp H . d_j^perp H)
    f2_j = d_l^perp H_j d_l V
    """
    gpV = sp.perp_gradient(grid, V)
    gV = sp.gradient(grid, V)
    gpH = np.stack([sp.perp_gradient(grid, H[j]) for j in range(2)])  # (j, l)

    f1 = np.zeros((grid.n, grid.n))
    for i in range(2):
        for j in range(2):
            fij = -_mul(grid, gpV[i], gpV[j], dealias)
            for m in range(2):
                fij += _mul(grid, gpH[m, i], gpH[m, j], dealias)
            f1 += sp.riesz_pp(grid, i + 1, j + 1, fij)

    f2 = np.stack([
        sum(_mul(grid, gpH[j, l], gV[l], dealias) for l in range(2))
        for j in range(2)
    ])
    return f1, f2


def rhs_potential(state: PotentialState,
                  cfg: StepperConfig = StepperConfig(),
                  include_viscosity: bool = True
                  ) -> tuple[np.ndarray, np.ndarray]:
    """(dV, dH) of the potential-form system.

    dV = mu lap V + div H + f1,   dH_j = d_j V + f2_j.
    include_viscosity=False drops mu lap V (the stepper handles it exactly
    through the integrating factor).
    """
    g = state.grid
    dV = np.zeros_like(state.V)
    dH = np.zeros_like(state.H)
    if include_viscosity and state.mu > 0:
        dV += state.mu * sp.laplacian(g, state.V)
    if cfg.coupling:
        dV += sp.divergence(g, state.H)
        dH += sp.gradient(g, state.V)
    if cfg.nonlinear:
        f1, f2 = quadratic_source(g, state.V, state.H, cfg.dealias)
        dV += f1
        dH += f2
    return dV, dH


def rhs_primitive(state: PrimitiveState,
                  cfg: StepperConfig = StepperConfig(),
                  include_viscosity: bool = True
                  ) -> tuple[np.ndarray, np.ndarray]:
    """(dv, dG) of the primitive system with pressure removed by projection.

    dv = P[mu lap v + div G - v.grad v + div(G G^T)],
    dG = grad v + (grad v) G - v.grad G,  with (grad v)_{ij} = d_j v_i.
    """
    g = state.grid
    v, G = state.v, state.G
    dv = np.zeros_like(v)
    dG = np.zeros_like(G)
    if include_viscosity and state.mu > 0:
        dv += state.mu * np.stack([sp.laplacian(g, v[i]) for i in range(2)])

    gv = np.stack([sp.gradient(g, v[i]) for i in range(2)])  # gv[i, j] = d_j v_i
    if cfg.coupling:
        for i in range(2):
            dv[i] += sum(sp.derivative(g, G[i, j], axis=j + 1) for j in range(2))
            dG[i] += gv[i]

    if cfg.nonlinear:
        gG = np.empty((2, 2, 2) + v.shape[1:])  # gG[i, j, l] = d_l G_{ij}
        for i in range(2):
            for j in range(2):
                for l in range(2):
                    gG[i, j, l] = sp.derivative(g, G[i, j], axis=l + 1)
        for i in range(2):
            adv = sum(_mul(g, v[l], gv[i, l], cfg.dealias) for l in range(2))
            dv[i] -= adv
            for j in range(2):
                GGt = sum(_mul(g, G[i, k], G[j, k], cfg.dealias)
                          for k in range(2))
                dv[i] += sp.derivative(g, GGt, axis=j + 1)
                dG[i, j] += sum(_mul(g, gv[i, k], G[k, j], cfg.dealias)
                                for k in range(2))
                dG[i, j] -= sum(_mul(g, v[l], gG[i, j, l], cfg.dealias)
                                for l in range(2))
        dv = sp.leray_project(g, dv)
    return dv, dG


def choose_dt(state: PotentialState, cfg: StepperConfig) -> float:
    """dt = cfl * spacing / (1 + max|v|); unit wave speed, viscosity free."""
    v = sp.perp_gradient(state.grid, state.V)
    return cfg.cfl_factor * state.grid.spacing / (1.0 + sp.linf_norm(v))


def _heat_factor(grid: Grid, mu: float, dt: float) -> np.ndarray:
    return np.exp(-mu * grid.k_sq * dt)


def _apply_factor(grid: Grid, f: np.ndarray, factor: np.ndarray) -> np.ndarray:
    return sp.ifft(factor * sp.fft(f))


def step(state: PotentialState, dt: float,
         cfg: StepperConfig = StepperConfig()) -> PotentialState:
    """One integrating-factor RK4 step of the potential system."""
    g = state.grid
    E = _heat_factor(g, state.mu, dt / 2.0)
    E2 = E * E

    def N(V, H):
        s = PotentialState(grid=g, V=V, H=H, t=state.t, mu=state.mu)
        return rhs_potential(s, cfg, include_viscosity=False)

    def eV(V, factor):
        return _apply_factor(g, V, factor)

    V, H = state.V, state.H
    k1V, k1H = N(V, H)
    k2V, k2H = N(eV(V + 0.5 * dt * k1V, E), H + 0.5 * dt * k1H)
    k3V, k3H = N(eV(V, E) + 0.5 * dt * k2V, H + 0.5 * dt * k2H)
    k4V, k4H = N(eV(V, E2) + dt * eV(k3V, E), H + dt * k3H)

    Vn = (eV(V, E2)
          + dt / 6.0 * (eV(k1V, E2) + 2.0 * eV(k2V + k3V, E) + k4V))
    Hn = H + dt / 6.0 * (k1H + 2.0 * (k2H + k3H) + k4H)

    if not (np.all(np.isfinite(Vn)) and np.all(np.isfinite(Hn))):
        raise BlowUpError(state.t + dt)
    return PotentialState(grid=g, V=Vn, H=Hn, t=state.t + dt, mu=state.mu)


def step_primitive(state: PrimitiveState, dt: float,
                   cfg: StepperConfig = StepperConfig()) -> PrimitiveState:
    """One integrating-factor RK4 step of the primitive system."""
    g = state.grid
    E = _heat_factor(g, state.mu, dt / 2.0)
    E2 = E * E

    def N(v, G):
        s = PrimitiveState(grid=g, v=v, G=G, t=state.t, mu=state.mu)
        return rhs_primitive(s, cfg, include_viscosity=False)

    def ev(v, factor):
        return np.stack([_apply_factor(g, v[i], factor) for i in range(2)])

    v, G = state.v, state.G
    k1v, k1G = N(v, G)
    k2v, k2G = N(ev(v + 0.5 * dt * k1v, E), G + 0.5 * dt * k1G)
    k3v, k3G = N(ev(v, E) + 0.5 * dt * k2v, G + 0.5 * dt * k2G)
    k4v, k4G = N(ev(v, E2) + dt * ev(k3v, E), G + dt * k3G)

    vn = (ev(v, E2)
          + dt / 6.0 * (ev(k1v, E2) + 2.0 * ev(k2v + k3v, E) + k4v))
    Gn = G + dt / 6.0 * (k1G + 2.0 * (k2G + k3G) + k4G)

    if not (np.all(np.isfinite(vn)) and np.all(np.isfinite(Gn))):
        raise BlowUpError(state.t + dt)
    return PrimitiveState(grid=g, v=vn, G=Gn, t=state.t + dt, mu=state.mu)


def evolve(state: PotentialState, t_final: float,
           cfg: StepperConfig = StepperConfig(),
           dt: float | None = None,
           callback=None) -> PotentialState:
    """Advance to t_final, choosing dt from the CFL rule unless given.

    callback(state) is invoked after every step.  The final step is
    shortened to land exactly on t_final.
    """
    s = state
    while s.t < t_final - 1e-12:
        h = dt if dt is not None else choose_dt(s, cfg)
        h = min(h, t_final - s.t)
        s = step(s, h, cfg)
        if callback is not None:
            callback(s)
    return s
