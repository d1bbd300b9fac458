"""Energy functionals, light-cone geometry, identity checks, and decay fits.

Functionals over a derived family (k ranges over 0..k_max where defined):

    E_k     sum of ||U^(alpha,a)||_L2^2            over order <= k
    calE_k  sum of ||grad U^(alpha,a)||_L2^2       over order <= k-1
    X_k     like calE_k with weight <r - t>
    Y_k     r-weighted radial good unknowns        over order <= k-1
    G_k     good unknowns with <t-r>^-2 e^q kernel over order <= k-1

with q = arctan(r - t).  The good unknowns are d_i V + d_i H . omega and
d_i H . omega_perp, which decay faster near the light cone r ~ t.
"""

from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .families import DerivedFamily, MultiIndex, nonlinearity_f
from .grid import Grid


@dataclass(frozen=True)
class GeometryWeights:
    """Light-cone geometry at time t with one-cell origin regularization."""

    grid: Grid
    t: float
    r: np.ndarray          # regularized: max(|x|, spacing)
    omega: np.ndarray      # (2, n, n), x / r_reg
    omega_perp: np.ndarray
    sigma: np.ndarray      # r - t (true r)
    sigma_bracket: np.ndarray   # <r - t>
    eq: np.ndarray         # ghost weight e^{arctan(r - t)}
    mask: np.ndarray       # light cone region r >= <t>/2
    interior: np.ndarray   # away from the regularized origin, r >= spacing


def geometry_weights(grid: Grid, t: float) -> GeometryWeights:
    r_true = grid.r
    r = np.maximum(r_true, grid.spacing)
    omega = np.stack([grid.x1 / r, grid.x2 / r])
    omega_perp = np.stack([-omega[1], omega[0]])
    sigma = r_true - t
    return GeometryWeights(
        grid=grid, t=t, r=r, omega=omega, omega_perp=omega_perp,
        sigma=sigma, sigma_bracket=np.sqrt(1.0 + sigma ** 2),
        eq=np.exp(np.arctan(sigma)),
        mask=r_true >= np.sqrt(1.0 + t * t) / 2.0,
        interior=r_true >= grid.spacing,
    )


def _pair_l2_sq(grid: Grid, V, H) -> float:
    return sp.l2_norm_sq(grid, V) + sp.l2_norm_sq(grid, H)


def energies(fam: DerivedFamily) -> dict[str, float]:
    """E_k for k <= k_max and calE_k for 1 <= k <= k_max."""
    g = fam.state.grid
    by_order = {}
    grad_by_order = {}
    for idx in fam.indices:
        V, H = fam.fields(idx)
        by_order.setdefault(idx.order, 0.0)
        by_order[idx.order] += _pair_l2_sq(g, V, H)
        gV = sp.gradient(g, V)
        gH = np.stack([sp.gradient(g, H[j]) for j in range(2)])
        grad_by_order.setdefault(idx.order, 0.0)
        grad_by_order[idx.order] += sp.l2_norm_sq(g, gV) + sp.l2_norm_sq(g, gH)
    out = {}
    for k in range(fam.k_max + 1):
        out[f"E{k}"] = sum(by_order.get(m, 0.0) for m in range(k + 1))
        if k >= 1:
            out[f"calE{k}"] = sum(grad_by_order.get(m, 0.0) for m in range(k))
    return out


def _good_unknown_grads(fam: DerivedFamily, w: GeometryWeights, idx):
    """Per spatial direction i: (d_i V + d_i H . omega, d_i H . omega_perp)."""
    g = fam.state.grid
    V, H = fam.fields(idx)
    gV = sp.gradient(g, V)
    gH = np.stack([sp.gradient(g, H[j]) for j in range(2)])  # (j, i, n, n)
    good_r = np.empty((2, g.n, g.n))
    good_t = np.empty((2, g.n, g.n))
    for i in range(2):
        dH_i = gH[:, i]                       # vector d_i H
        good_r[i] = gV[i] + dH_i[0] * w.omega[0] + dH_i[1] * w.omega[1]
        good_t[i] = dH_i[0] * w.omega_perp[0] + dH_i[1] * w.omega_perp[1]
    return good_r, good_t


def weighted_norms(fam: DerivedFamily, t: float | None = None
                   ) -> dict[str, float]:
    """X_k, Y_k, G_k for 1 <= k <= k_max."""
    g = fam.state.grid
    if t is None:
        t = fam.state.t
    w = geometry_weights(g, t)
    x_by, y_by, g_by = {}, {}, {}
    for idx in fam.indices:
        if idx.order > fam.k_max - 1:
            continue
        V, H = fam.fields(idx)
        gV = sp.gradient(g, V)
        gH = np.stack([sp.gradient(g, H[j]) for j in range(2)])
        xterm = (sp.l2_norm_sq(g, w.sigma_bracket * gV)
                 + sp.l2_norm_sq(g, w.sigma_bracket * gH))
        dr_V = w.omega[0] * gV[0] + w.omega[1] * gV[1]
        dr_H = np.stack([w.omega[0] * gH[j, 0] + w.omega[1] * gH[j, 1]
                         for j in range(2)])
        good_rad = dr_V + dr_H[0] * w.omega[0] + dr_H[1] * w.omega[1]
        good_tan = dr_H[0] * w.omega_perp[0] + dr_H[1] * w.omega_perp[1]
        yterm = (sp.l2_norm_sq(g, w.r * good_rad)
                 + sp.l2_norm_sq(g, w.r * good_tan))
        good_r, good_t = _good_unknown_grads(fam, w, idx)
        kern = w.eq / w.sigma_bracket ** 2
        gterm = float(np.sum((good_r ** 2 + good_t ** 2) * kern)
                      * g.spacing ** 2)
        o = idx.order
        x_by[o] = x_by.get(o, 0.0) + xterm
        y_by[o] = y_by.get(o, 0.0) + yterm
        g_by[o] = g_by.get(o, 0.0) + gterm
    out = {}
    for k in range(1, fam.k_max + 1):
        out[f"X{k}"] = sum(x_by.get(m, 0.0) for m in range(k))
        out[f"Y{k}"] = sum(y_by.get(m, 0.0) for m in range(k))
        out[f"G{k}"] = sum(g_by.get(m, 0.0) for m in range(k))
    return out


def good_unknown_norms(fam: DerivedFamily, t: float | None = None,
                       max_order: int | None = None) -> dict:
    """Sup norms of the good unknowns over the light cone mask r >= <t>/2.

    Returns per-index (radial, tangential) sups and their overall sum.
    """
    g = fam.state.grid
    if t is None:
        t = fam.state.t
    if max_order is None:
        max_order = fam.k_max - 1
    w = geometry_weights(g, t)
    if not np.any(w.mask):
        raise ValueError(f"light-cone mask is empty at t = {t}")
    per_index = {}
    total = 0.0
    for idx in fam.indices:
        if idx.order > max_order:
            continue
        good_r, good_t = _good_unknown_grads(fam, w, idx)
        s_r = float(np.max(np.abs(good_r[:, w.mask])))
        s_t = float(np.max(np.abs(good_t[:, w.mask])))
        per_index[idx] = (s_r, s_t)
        total += s_r + s_t
    return {"per_index": per_index, "sum": total}


# ---------------------------------------------------------------------------
# exact algebraic identities

def identity_checks(grid: Grid, V: np.ndarray, H: np.ndarray,
                    Vp: np.ndarray | None = None,
                    Hp: np.ndarray | None = None,
                    t: float = 0.0) -> dict[str, float]:
    """L-inf residuals of the pointwise algebraic identities.

    null_split:   d_iH'.d_kd_jH - d_iV' d_kd_jV rewritten through the good
                  unknowns and the orthonormal frame (omega, omega_perp)
    f2_split:     the radial/tangential decomposition of d_l^perp H_j d_l V
    grad_split:   grad f = omega d_r f + (omega_perp / r) d_theta f
    perp_cancel:  sum_j d_j^perp V d_j V = 0
    riesz_trace:  sum_i riesz_pp(i, i, f) = 0

    All are exact away from the regularized origin; the first two are
    evaluated on r >= spacing, grad_split on r >= 4 spacing.
    """
    w = geometry_weights(grid, t)
    if Vp is None:
        Vp = V
    if Hp is None:
        Hp = H
    gV = sp.gradient(grid, V)
    gVp = sp.gradient(grid, Vp)
    gH = np.stack([sp.gradient(grid, H[j]) for j in range(2)])
    gHp = np.stack([sp.gradient(grid, Hp[j]) for j in range(2)])
    ggV = np.stack([sp.gradient(grid, gV[j]) for j in range(2)])   # [j, k]
    ggH = np.stack([np.stack([sp.gradient(grid, gH[m, j]) for j in range(2)])
                    for m in range(2)])                            # [m, j, k]
    out = {}

    # null_split over all (i, j, k)
    res = 0.0
    for i in range(2):
        goodV_i = gVp[i] + gHp[0, i] * w.omega[0] + gHp[1, i] * w.omega[1]
        goodT_i = gHp[0, i] * w.omega_perp[0] + gHp[1, i] * w.omega_perp[1]
        for j in range(2):
            for k in range(2):
                lhs = (gHp[0, i] * ggH[0, j, k] + gHp[1, i] * ggH[1, j, k]
                       - gVp[i] * ggV[j, k])
                dH_jk_r = (ggH[0, j, k] * w.omega[0]
                           + ggH[1, j, k] * w.omega[1])
                dH_jk_t = (ggH[0, j, k] * w.omega_perp[0]
                           + ggH[1, j, k] * w.omega_perp[1])
                rhs = (goodV_i * dH_jk_r
                       - gVp[i] * (ggV[j, k] + dH_jk_r)
                       + goodT_i * dH_jk_t)
                res = max(res, float(np.max(np.abs((lhs - rhs)[w.interior]))))
    out["null_split"] = res

    # f2_split: sum_l d_l^perp H_m d_l V decomposed along (omega, omega_perp)
    gpH = np.stack([sp.perp_gradient(grid, H[j]) for j in range(2)])  # [j, l]
    gpV = sp.perp_gradient(grid, V)
    f2 = np.stack([gpH[m, 0] * gV[0] + gpH[m, 1] * gV[1] for m in range(2)])
    coef_r = np.zeros_like(V)
    coef_t = np.zeros_like(V)
    for l in range(2):
        gpH_l = gpH[:, l]                      # vector d_l^perp H
        coef_r += (gpH_l[0] * w.omega[0] + gpH_l[1] * w.omega[1]
                   + gpV[l]) * gV[l]
        coef_t += (gpH_l[0] * w.omega_perp[0]
                   + gpH_l[1] * w.omega_perp[1]) * gV[l]
    rhs = np.stack([coef_r * w.omega[m] + coef_t * w.omega_perp[m]
                    for m in range(2)])
    out["f2_split"] = float(np.max(np.abs((f2 - rhs)[:, w.interior])))

    # grad_split on r >= 4 spacing
    far = grid.r >= 4.0 * grid.spacing
    dr = w.omega[0] * gV[0] + w.omega[1] * gV[1]
    dtheta = grid.x1 * gV[1] - grid.x2 * gV[0]
    res = 0.0
    for i in range(2):
        rhs = w.omega[i] * dr + w.omega_perp[i] / w.r * dtheta
        res = max(res, float(np.max(np.abs((gV[i] - rhs)[far]))))
    out["grad_split"] = res

    # antisymmetry cancellation
    out["perp_cancel"] = sp.linf_norm(gpV[0] * gV[0] + gpV[1] * gV[1])

    # trace of the perp-Riesz multiplier vanishes (k_perp . k = 0)
    trace = sum(sp.riesz_pp(grid, i, i, V) for i in (1, 2))
    out["riesz_trace"] = sp.linf_norm(trace)
    return out


# ---------------------------------------------------------------------------
# inequality constants (the analysis proves "<="; we record the ratios)

def _ratio(lhs: np.ndarray, rhs) -> float:
    if np.isscalar(rhs) or rhs.ndim == 0:
        return float(np.max(lhs) / max(float(rhs), 1e-30))
    floor = 1e-12 * float(np.max(rhs)) + 1e-30
    return float(np.max(lhs / (rhs + floor)))


def weighted_sobolev_ratios(grid: Grid, f: np.ndarray,
                                  t: float = 0.0) -> dict[str, float]:
    """LHS/RHS ratios of the three weighted Sobolev-type inequalities.

    sob_r:       r |f|^2            vs sums of ||d_r rot^a f||^2 + ||rot^a f||^2
    sob_rw:      r <t-r>^2 |f|^2    vs the same sums with weight <t-r>
    sob_int:     <t> sup_{r<=t/2}|f| vs sum_{|a|<=2} ||<t-r> d^a f||
    """
    w = geometry_weights(grid, t)
    fs = [f, sp.rotation(grid, f)]
    rhs1 = rhs2 = 0.0
    for h in fs:
        gh = sp.gradient(grid, h)
        dr = w.omega[0] * gh[0] + w.omega[1] * gh[1]
        rhs1 += sp.l2_norm_sq(grid, dr) + sp.l2_norm_sq(grid, h)
        rhs2 += (sp.l2_norm_sq(grid, w.sigma_bracket * dr)
                 + sp.l2_norm_sq(grid, w.sigma_bracket * h))
    out = {
        "sob_r": _ratio(grid.r * f ** 2, rhs1),
        "sob_rw": _ratio(grid.r * w.sigma_bracket ** 2 * f ** 2, rhs2),
    }
    inner = grid.r <= t / 2.0
    if np.any(inner):
        lhs = np.sqrt(1.0 + t * t) * float(np.max(np.abs(f[inner])))
        rhs = 0.0
        derivs = {(): f}
        for order in (1, 2):
            new = {}
            for word, h in list(derivs.items()):
                if len(word) == order - 1:
                    for ax in (1, 2):
                        new[word + (ax,)] = sp.derivative(grid, h, ax)
            derivs.update(new)
        for h in derivs.values():
            rhs += sp.l2_norm(grid, w.sigma_bracket * h)
        out["sob_int"] = lhs / max(rhs, 1e-30)
    else:
        out["sob_int"] = 0.0
    return out


def _order_sums(fam: DerivedFamily, w: GeometryWeights):
    """Pointwise sums of |V|, |H|, |grad...| grouped by (alpha order, a order)."""
    g = fam.state.grid
    sums_V, sums_H = {}, {}
    for idx in fam.indices:
        V, H = fam.fields(idx)
        key = (idx.alpha, sum(idx.a))
        absH = np.sqrt(H[0] ** 2 + H[1] ** 2)
        sums_V[key] = sums_V.get(key, 0.0) + np.abs(V)
        sums_H[key] = sums_H.get(key, 0.0) + absH
    return sums_V, sums_H


def nonlinearity_decay_ratios(fam: DerivedFamily,
                              idx: MultiIndex = MultiIndex(0, (0, 0, 0, 0)),
                              t: float | None = None) -> dict[str, float]:
    """Pointwise decay bounds of the quadratic nonlinearities near the cone.

    f2_decay, f3_decay, divf2_decay, fij_decay: LHS/RHS ratios where each
    right side combines 1/r with order-graded field sums, and fij adds the
    good-unknown structure terms.
    """
    g = fam.state.grid
    if t is None:
        t = fam.state.t
    w = geometry_weights(g, t)
    sums_V, sums_H = _order_sums(fam, w)

    def graded(sums_a, sums_b, extra_a: int, extra_b: int, amax, bmax):
        total = np.zeros((g.n, g.n))
        for (ma, la), A in sums_a.items():
            for (mb, lb), B in sums_b.items():
                if (ma + mb <= amax and la - extra_a >= 0
                        and lb - extra_b >= 0
                        and (la - extra_a) + (lb - extra_b) <= bmax):
                    total += A * B
        return total

    alpha, a = idx
    f1, f2, f3, fij = nonlinearity_f(fam, idx)
    out = {}

    lhs = np.sqrt(f2[0] ** 2 + f2[1] ** 2)
    rhs = graded(sums_V, sums_H, 1, 1, alpha, sum(a)) / w.r
    out["f2_decay"] = _ratio(lhs, rhs)

    rhs = graded(sums_H, sums_H, 1, 1, alpha, sum(a)) / w.r
    out["f3_decay"] = _ratio(np.abs(f3), rhs)

    if idx.order + 2 <= fam.k_max:
        divf2 = sp.divergence(g, f2)
        rhs = graded(sums_V, sums_H, 2, 2, alpha, sum(a)) / w.r
        out["divf2_decay"] = _ratio(np.abs(divf2), rhs)

    lhs = np.max(np.abs(np.stack(list(fij.values()))), axis=0)
    rhs = (graded(sums_V, sums_V, 1, 1, alpha, sum(a))
           + graded(sums_H, sums_H, 1, 1, alpha, sum(a))) / w.r
    from .families import _splittings
    for left, right, _ in _splittings(idx):
        Vl, Hl = fam.fields(left)
        Vr, Hr = fam.fields(right)
        gVl = sp.gradient(g, Vl)
        gHl = np.stack([sp.gradient(g, Hl[j]) for j in range(2)])
        gVr = sp.gradient(g, Vr)
        gHr = np.stack([sp.gradient(g, Hr[j]) for j in range(2)])
        drV = w.omega[0] * gVl[0] + w.omega[1] * gVl[1]
        drH = np.stack([w.omega[0] * gHl[j, 0] + w.omega[1] * gHl[j, 1]
                        for j in range(2)])
        good_rad = np.abs(drV + drH[0] * w.omega[0] + drH[1] * w.omega[1])
        good_tan_l = np.abs(drH[0] * w.omega_perp[0]
                            + drH[1] * w.omega_perp[1])
        drHr = np.stack([w.omega[0] * gHr[j, 0] + w.omega[1] * gHr[j, 1]
                         for j in range(2)])
        good_tan_r = np.abs(drHr[0] * w.omega_perp[0]
                            + drHr[1] * w.omega_perp[1])
        mag_grad_r = np.sqrt(np.sum(gVr ** 2, axis=0)) + np.sqrt(
            np.sum(gHr ** 2, axis=(0, 1)))
        rhs = rhs + good_rad * mag_grad_r + good_tan_l * good_tan_r
    out["fij_decay"] = _ratio(lhs, rhs)
    return out


# ---------------------------------------------------------------------------
# decay fitting

def fit_decay(ts, values, t0: float, t1: float) -> tuple[float, float]:
    """Least-squares exponent of value ~ t^p over the window [t0, t1].

    Returns (p, stderr).  Requires at least 8 strictly positive samples in
    the window.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = (ts >= t0) & (ts <= t1)
    ts, values = ts[sel], values[sel]
    if ts.size < 8:
        raise ValueError(f"need >= 8 samples in window, got {ts.size}")
    if np.any(values <= 0) or np.any(ts <= 0):
        raise ValueError("decay fit requires positive times and values")
    x, y = np.log(ts), np.log(values)
    (slope, _), cov = np.polyfit(x, y, 1, cov=True)
    return float(slope), float(np.sqrt(cov[0, 0]))


# ---------------------------------------------------------------------------
# CSV record

CSV_HEADER = ("t,mu,E0,E1,E2,calE1,calE2,X1,X2,Y1,Y2,G1,G2,"
              "good_sup,constraint_L2,constraint_Linf,"
              "id45_res,id417_res,id218_res")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One CSV row of the diagnostics pipeline."""

    t: float
    mu: float
    values: dict[str, float]

    def to_csv_row(self) -> str:
        cols = CSV_HEADER.split(",")[2:]
        parts = [f"{self.t:.10g}", f"{self.mu:.10g}"]
        parts += [f"{self.values[c]:.12g}" for c in cols]
        return ",".join(parts)


def sample_record(fam: DerivedFamily) -> DiagnosticsRecord:
    """Evaluate the full diagnostics suite on one family."""
    from .state import constraint_norms
    st = fam.state
    vals = {}
    vals.update(energies(fam))
    vals.update(weighted_norms(fam))
    # families built with k_max < 2 leave the deeper columns empty
    for col in CSV_HEADER.split(",")[2:]:
        vals.setdefault(col, float("nan"))
    vals["good_sup"] = good_unknown_norms(fam)["sum"]
    c2, cinf = constraint_norms(st.grid, st.H)
    vals["constraint_L2"] = c2
    vals["constraint_Linf"] = cinf
    ids = identity_checks(st.grid, st.V, st.H, t=st.t)
    vals["id45_res"] = ids["null_split"]
    vals["id417_res"] = ids["f2_split"]
    vals["id218_res"] = ids["grad_split"]
    # not part of the CSV schema, but useful for decay studies
    gV = sp.gradient(st.grid, st.V)
    gH = np.stack([sp.gradient(st.grid, st.H[j]) for j in range(2)])
    vals["grad_sup"] = max(sp.linf_norm(gV), sp.linf_norm(gH))
    return DiagnosticsRecord(t=st.t, mu=st.mu, values=vals)
