"""Monitored quantities along a trajectory and the checks built on them:
conservation, the pseudoconformal energy identity, decay fits, space-time
norms, scattering/non-scattering detection, the modified time-reversal
symmetry, and the linear asymptotic profile.

Conventions
-----------
* <f, g> is conjugate-linear in the FIRST slot (spectral.inner).
* The Japanese bracket <t> = sqrt(1 + t^2) is used in decay fits.
* nl_potential is the raw s-quadrature of the space integral of |w|^{p+2},
  with no prefactor; the two energy conventions differ in how they weigh it:
  energy_defocusing = kinetic + nl_potential/(p+2), while the focusing-side
  convention energy_focusing_CHL = kinetic - nl_potential carries no 1/(p+2).
  Every consumer states which one it uses.
* Fit windows exclude t < 1 by default: the decay estimates are asymptotic
  statements on [1, infinity).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .spectral import (BOUNDARY_MASS_DEFAULT, ComplexField, NormSpec,
                       boundary_mass_fraction, continuum_transform, fft,
                       free_propagate, galilean_norm, gradient_norm_sq, ifft,
                       inner, l2_norm, lr_norm, norm)
from .exponents import exponent_report

CSV_FIELDS = ("t", "mass", "kinetic", "nl_potential", "energy_defocusing",
              "energy_focusing_CHL", "Ju_norm", "pce", "w_norm_p2",
              "w1_norm_p2", "sigma_weighted_potential",
              "boundary_mass_fraction")


@dataclass
class DiagnosticsTimeSeries:
    """One row per checkpoint; columns are exactly CSV_FIELDS."""

    t: np.ndarray
    mass: np.ndarray
    kinetic: np.ndarray
    nl_potential: np.ndarray
    energy_defocusing: np.ndarray
    energy_focusing_CHL: np.ndarray
    Ju_norm: np.ndarray
    pce: np.ndarray
    w_norm_p2: np.ndarray
    w1_norm_p2: np.ndarray
    sigma_weighted_potential: np.ndarray
    boundary_mass_fraction: np.ndarray
    flagged: np.ndarray = None  # checkpoints exceeding the validity threshold

    def column(self, name):
        if name not in CSV_FIELDS:
            raise KeyError(f"unknown diagnostics column {name!r}")
        return getattr(self, name)

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class FitResult:
    """Log-log least-squares fit over a time window."""

    exponent: float
    intercept: float
    r_squared: float
    window: tuple


def _sigma_powers(u_hat, grid, params):
    """Per-node integrals int |w_j|^{p+2} dx for w_j = exp(i s_j Lap) u."""
    out = []
    pw = params.p + 2.0
    for s_j, _ in params.sigma_nodes:
        w = ifft(np.exp(-1j * s_j * grid.xi_sq) * u_hat)
        out.append(grid.cell_volume * float(np.sum(np.abs(w) ** pw)))
    return out


def nl_potential(u, params):
    """s-quadrature of the space integral of |w|^{p+2} (raw, no prefactor)."""
    powers = _sigma_powers(fft(u.values), u.grid, params)
    return sum(w_j * g for (_, w_j), g in zip(params.sigma_nodes, powers))


def chl_energy(u, params):
    """kinetic - nl_potential: the focusing-side energy convention with no
    1/(p+2) prefactor (the s-domain is the unit interval)."""
    return 0.5 * gradient_norm_sq(u) - nl_potential(u, params)


def record(trajectory, params=None, boundary_threshold=BOUNDARY_MASS_DEFAULT):
    """Compute the full diagnostics table along a trajectory.

    The s-integrals reuse the quadrature rule carried by `params`
    (trajectory.params when omitted)."""
    params = trajectory.params if params is None else params
    grid = trajectory.grid
    p = params.p
    rows = {name: [] for name in CSV_FIELDS}
    flagged = []
    for t_k, u in trajectory.checkpoints:
        u_hat = fft(u.values)
        mass = grid.cell_volume * float(np.sum(np.abs(u.values) ** 2))
        power = np.abs(u_hat) ** 2
        kin = 0.5 * grid.cell_volume * float(
            sum(np.sum(xi_j ** 2 * power) for xi_j in grid.xi_grad))
        node_powers = _sigma_powers(u_hat, grid, params)
        pot = sum(w_j * g for (_, w_j), g in zip(params.sigma_nodes, node_powers))
        spot = sum(s_j * w_j * g
                   for (s_j, w_j), g in zip(params.sigma_nodes, node_powers))
        # w(1) needs one extra free propagation: s=1 is not a quadrature node.
        w1 = ifft(np.exp(-1j * grid.xi_sq) * u_hat)
        w1_pow = grid.cell_volume * float(np.sum(np.abs(w1) ** (p + 2.0)))
        ju = galilean_norm(u, t_k)
        bmf = boundary_mass_fraction(u)
        rows["t"].append(t_k)
        rows["mass"].append(mass)
        rows["kinetic"].append(kin)
        rows["nl_potential"].append(pot)
        rows["energy_defocusing"].append(kin + pot / (p + 2.0))
        rows["energy_focusing_CHL"].append(kin - pot)
        rows["Ju_norm"].append(ju)
        rows["pce"].append(ju * ju + (8.0 * t_k * t_k / (p + 2.0)) * pot)
        rows["w_norm_p2"].append(pot ** (1.0 / (p + 2.0)))
        rows["w1_norm_p2"].append(w1_pow)
        rows["sigma_weighted_potential"].append(spot)
        rows["boundary_mass_fraction"].append(bmf)
        flagged.append(bmf > boundary_threshold)
    arrays = {name: np.array(vals) for name, vals in rows.items()}
    return DiagnosticsTimeSeries(flagged=np.array(flagged, dtype=bool), **arrays)


@dataclass
class PceCheckReport:
    """Residual of the pseudoconformal-energy balance for one boundary
    coefficient variant: d/dt[pce] against the three signed terms on the
    right-hand side, differenced on interior checkpoints."""

    coefficient_variant: str
    window: tuple
    times: np.ndarray
    lhs: np.ndarray          # centered d/dt of pce
    rhs: np.ndarray
    residual: np.ndarray     # lhs - rhs
    aggregate_relative_residual: float


PCE_VARIANTS = ("t_plus_1", "two_t_plus_1")


def pce_identity_check(series, trajectory, params, coefficient_variant,
                       window=None):
    """Check the pseudoconformal energy balance

        d/dt [ ||Ju||^2 + (8t^2/(p+2)) * V ]
            = -((dp/2-4)/t) * (8t^2/(p+2)) * V
              - ((dp/2-2)/t^2) * (8t^2/(p+2)) * V_sigma
              - (8 c(t)/(p+2)) * W1

    with V = nl_potential, V_sigma = sigma_weighted_potential,
    W1 = w1_norm_p2, and boundary coefficient c(t) = t+1 or 2t+1 depending on
    `coefficient_variant` (both are exposed; the numerics pick the right one).
    The left side is a second-order centered difference of the pce column on
    interior checkpoints inside `window`, which must not contain t = 0.
    """
    if coefficient_variant not in PCE_VARIANTS:
        raise ValueError(f"coefficient_variant must be one of {PCE_VARIANTS}")
    t = series.t
    if window is None:
        window = (max(1.0, float(t.min())), float(t.max()))
    t_lo, t_hi = window
    if t_lo <= 0.0 <= t_hi or t_lo >= t_hi:
        raise ValueError(f"window {window} must exclude t=0 and be increasing")
    d, p = params.dimension, params.p
    idx = [k for k in range(1, len(t) - 1)
           if t_lo <= t[k - 1] and t[k + 1] <= t_hi]
    if len(idx) < 2:
        raise ValueError("window contains too few interior checkpoints")
    idx = np.array(idx)
    lhs = (series.pce[idx + 1] - series.pce[idx - 1]) / (t[idx + 1] - t[idx - 1])
    tk = t[idx]
    pref = 8.0 / (p + 2.0)
    c_t = tk + 1.0 if coefficient_variant == "t_plus_1" else 2.0 * tk + 1.0
    rhs = (-(d * p / 2.0 - 4.0) * pref * tk * series.nl_potential[idx]
           - (d * p / 2.0 - 2.0) * pref * series.sigma_weighted_potential[idx]
           - pref * c_t * series.w1_norm_p2[idx])
    residual = lhs - rhs
    denom = float(np.linalg.norm(rhs))
    agg = float(np.linalg.norm(residual)) / denom if denom > 0 else math.inf
    return PceCheckReport(coefficient_variant=coefficient_variant,
                          window=(float(t_lo), float(t_hi)), times=tk,
                          lhs=lhs, rhs=rhs, residual=residual,
                          aggregate_relative_residual=agg)


def decay_fit(series, quantity, window):
    """Least-squares slope of log(quantity) against log<t> over the window
    (<t> = sqrt(1+t^2)); needs at least 8 checkpoints inside."""
    t = series.t
    y = series.column(quantity)
    t_lo, t_hi = window
    mask = (t >= t_lo) & (t <= t_hi)
    if mask.sum() < 8:
        raise ValueError(f"window {window} holds {int(mask.sum())} checkpoints, need >= 8")
    tw, yw = t[mask], y[mask]
    if np.any(yw <= 0):
        raise ValueError(f"{quantity} must be positive for a log-log fit")
    x = np.log(np.sqrt(1.0 + tw ** 2))
    z = np.log(yw)
    slope, intercept = np.polyfit(x, z, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((z - pred) ** 2))
    ss_tot = float(np.sum((z - z.mean()) ** 2))
    r_sq = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitResult(exponent=float(slope), intercept=float(intercept),
                     r_squared=max(0.0, min(1.0, r_sq)),
                     window=(float(t_lo), float(t_hi)))


def spacetime_norm(trajectory, params, q, r, sigma_mode="Lq_in_sigma_and_t"):
    """Space-time Lebesgue norm of w(s, t) over the trajectory's window:
    trapezoidal in t over checkpoints of the s-quadratured L^r_x norms.

    sigma_mode "sup_over_sigma" takes the max over nodes per checkpoint;
    "Lq_in_sigma_and_t" treats s and t as one product measure (needs q < inf).
    """
    if sigma_mode not in ("sup_over_sigma", "Lq_in_sigma_and_t"):
        raise ValueError(f"unknown sigma_mode {sigma_mode!r}")
    if not (q >= 1 and r >= 1):
        raise ValueError("q and r must be >= 1")
    grid = trajectory.grid
    times = trajectory.times()
    per_time = []
    for _, u in trajectory.checkpoints:
        u_hat = fft(u.values)
        node_norms = []
        for s_j, _ in params.sigma_nodes:
            w = ifft(np.exp(-1j * s_j * grid.xi_sq) * u_hat)
            node_norms.append(lr_norm(w, grid, r))
        if sigma_mode == "sup_over_sigma":
            per_time.append(max(node_norms))
        else:
            per_time.append(sum(w_j * nn ** q for (_, w_j), nn
                                in zip(params.sigma_nodes, node_norms)))
    per_time = np.array(per_time)
    if sigma_mode == "sup_over_sigma":
        if math.isinf(q):
            return float(per_time.max())
        return float(np.trapezoid(per_time ** q, times) ** (1.0 / q))
    if math.isinf(q):
        raise ValueError("q = inf needs sigma_mode='sup_over_sigma'")
    return float(np.trapezoid(per_time, times) ** (1.0 / q))


@dataclass
class ScatteringReport:
    """Cauchy differences of v(t) = exp(-it Lap) u(t) between consecutive
    checkpoints, per norm; `final_state` is the candidate limit profile."""

    times: np.ndarray
    diffs: dict                 # norm name -> array of length n-1 (or None)
    data_norms: dict            # norm name -> norm of v at first checkpoint
    final_state: ComplexField


def scattering_profile(trajectory):
    """Detect scattering: v(t_k) = exp(-i t_k Lap) u(t_k) should go Cauchy
    in the norms the regime supplies (L^2 always; H^{s_c} when s_c >= 0;
    weighted L^2 via |x|^gamma when gamma > 0; Sigma always)."""
    if len(trajectory.checkpoints) < 4:
        raise ValueError("need at least 4 checkpoints to assess a Cauchy tail")
    rep = exponent_report(trajectory.params.dimension, trajectory.params.p)
    specs = {"L2": NormSpec.lebesgue(2)}
    if rep.s_c >= 0:
        specs["H_sc"] = NormSpec.sobolev(rep.s_c)
    if rep.gamma > 0:
        specs["FH_gamma"] = NormSpec.weighted_l2(rep.gamma)
    specs["Sigma"] = NormSpec.sigma()
    vs = [free_propagate(u, -t_k) for t_k, u in trajectory.checkpoints]
    times = trajectory.times()
    diffs = {}
    for name, spec in specs.items():
        vals = []
        for k in range(len(vs) - 1):
            delta = ComplexField(trajectory.grid,
                                 vs[k + 1].values - vs[k].values)
            vals.append(norm(delta, spec))
        diffs[name] = np.array(vals)
    data_norms = {name: norm(vs[0], spec) for name, spec in specs.items()}
    return ScatteringReport(times=times, diffs=diffs, data_norms=data_norms,
                            final_state=vs[-1])


@dataclass
class NonscatteringReport:
    """Overlap Im<u(t), exp(it Lap) psi> along the run, its centered-difference
    derivative, and the power-law fit of that derivative (theory: the
    derivative stays positive and decays like t^{-dp/2})."""

    times: np.ndarray
    overlap: np.ndarray
    deriv_times: np.ndarray
    deriv: np.ndarray
    fit: FitResult
    C0: complex                   # <|phi_hat|^p phi_hat, psi_hat>, phi = u(t_0)
    theoretical_exponent: float
    strictly_increasing: bool     # overlap monotone on the fit window
    derivative_sign_change: bool  # fit is ill-conditioned when True


def nonscattering_probe(trajectory, psi, window=None):
    """Track the probe overlap against z(t) = exp(it Lap) psi and fit the decay
    of its time derivative.  Intended for the long-range regime p <= 2/d
    (warned otherwise, not rejected)."""
    params = trajectory.params
    if params.p > 2.0 / params.dimension + 1e-12:
        warnings.warn(f"nonscattering probe is meaningful for p <= 2/d; "
                      f"got p={params.p}, d={params.dimension}", stacklevel=2)
    times = trajectory.times()
    overlap = np.array([inner(u, free_propagate(psi, t_k)).imag
                        for t_k, u in trajectory.checkpoints])
    dts = np.diff(times)
    if np.any(dts <= 0):
        raise ValueError("checkpoint times must be strictly increasing")
    deriv = (overlap[2:] - overlap[:-2]) / (times[2:] - times[:-2])
    deriv_times = times[1:-1]
    if window is None:
        window = (max(1.0, float(deriv_times.min())), float(deriv_times.max()))
    t_lo, t_hi = window
    mask = (deriv_times >= t_lo) & (deriv_times <= t_hi)
    dw, tw = deriv[mask], deriv_times[mask]
    sign_change = bool(np.any(dw <= 0))
    pos = dw > 0
    if pos.sum() < 2:
        raise ValueError("overlap derivative is nonpositive on the window; no fit")
    slope, intercept = np.polyfit(np.log(tw[pos]), np.log(dw[pos]), 1)
    z = np.log(dw[pos])
    pred = slope * np.log(tw[pos]) + intercept
    ss_tot = float(np.sum((z - z.mean()) ** 2))
    r_sq = 1.0 - float(np.sum((z - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    fit = FitResult(exponent=float(slope), intercept=float(intercept),
                    r_squared=max(0.0, min(1.0, r_sq)),
                    window=(float(t_lo), float(t_hi)))
    # C0 from the continuum transforms of the initial data and the probe.
    t0, u0 = trajectory.checkpoints[0]
    phi_hat = continuum_transform(u0)
    psi_hat = continuum_transform(psi)
    grid = trajectory.grid
    dxi = (2.0 * np.pi / grid.box_length) ** grid.dimension
    c0 = complex(dxi * np.sum(np.abs(phi_hat) ** params.p
                              * np.conj(phi_hat) * psi_hat))
    omask = (times >= t_lo) & (times <= t_hi)
    increasing = bool(np.all(np.diff(overlap[omask]) > 0))
    return NonscatteringReport(times=times, overlap=overlap,
                               deriv_times=deriv_times, deriv=deriv, fit=fit,
                               C0=c0,
                               theoretical_exponent=-params.dimension * params.p / 2.0,
                               strictly_increasing=increasing,
                               derivative_sign_change=sign_change)


@dataclass
class ReversalReport:
    """Deviation of the modified time reversal v(t) = exp(-i Lap) conj(u(-t)):
    both the field match and the unit-window energy identity, per checkpoint."""

    times: np.ndarray
    field_deviation: np.ndarray
    energy_deviation: np.ndarray
    max_field_deviation: float
    max_energy_deviation: float


def time_reversal_check(forward, backward):
    """Compare a forward run of v0 = exp(-i Lap) conj(u(0)) against the
    transform of a backward run of u: v(t) should equal
    exp(-i Lap) conj(u(-t)) and the energies kinetic - nl_potential should
    match pairwise at mirrored times."""
    tf = forward.times()
    tb = backward.times()
    if len(tf) != len(tb) or np.max(np.abs(tf + tb)) > 1e-9 * max(1.0, np.max(np.abs(tf))):
        raise ValueError("checkpoint schedules are not mirror images")
    params = forward.params
    f_dev, e_dev = [], []
    for (t_k, v_k), (_, u_k) in zip(forward.checkpoints, backward.checkpoints):
        mirrored = free_propagate(
            ComplexField(backward.grid, np.conj(u_k.values)), -1.0)
        denom = l2_norm(mirrored.values, backward.grid)
        f_dev.append(l2_norm(v_k.values - mirrored.values, forward.grid)
                     / max(denom, 1e-300))
        e_v = chl_energy(v_k, params)
        e_u = chl_energy(u_k, params)
        e_dev.append(abs(e_v - e_u) / max(abs(e_u), 1e-300))
    f_dev = np.array(f_dev)
    e_dev = np.array(e_dev)
    return ReversalReport(times=tf, field_deviation=f_dev,
                          energy_deviation=e_dev,
                          max_field_deviation=float(f_dev.max()),
                          max_energy_deviation=float(e_dev.max()))


def _interp_modulus(grid, mod_sorted, freq_sorted, points):
    """Linearly interpolate a modulus table given on the sorted dual lattice
    at arbitrary points (0 outside the table, where the transform has decayed)."""
    if grid.dimension == 1:
        return np.interp(points[0], freq_sorted[0], mod_sorted,
                         left=0.0, right=0.0)
    # Bilinear on the uniform frequency lattice.
    f0 = freq_sorted[0][0]
    dxi = freq_sorted[0][1] - freq_sorted[0][0]
    n = len(freq_sorted[0])
    out_shape = points[0].shape
    gx = (points[0].ravel() - f0) / dxi
    gy = (points[1].ravel() - f0) / dxi
    ix = np.floor(gx).astype(int)
    iy = np.floor(gy).astype(int)
    fx = gx - ix
    fy = gy - iy
    valid = (ix >= 0) & (ix < n - 1) & (iy >= 0) & (iy < n - 1)
    ixc = np.clip(ix, 0, n - 2)
    iyc = np.clip(iy, 0, n - 2)
    v00 = mod_sorted[ixc, iyc]
    v10 = mod_sorted[ixc + 1, iyc]
    v01 = mod_sorted[ixc, iyc + 1]
    v11 = mod_sorted[ixc + 1, iyc + 1]
    vals = ((1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10
            + (1 - fx) * fy * v01 + fx * fy * v11)
    vals[~valid] = 0.0
    return vals.reshape(out_shape)


def asymptotic_profile_error(u, t, phi):
    """Relative L^2 mismatch between |u(t, x)| and the dispersive profile
    (2t)^{-d/2} |phi_hat(x/(2t))| of the candidate scattering state phi."""
    if t < 1.0:
        warnings.warn(f"asymptotic profile is not meaningful before t=1 (t={t})",
                      stacklevel=2)
    grid = u.grid
    u_norm = l2_norm(u.values, grid)
    phi_norm = l2_norm(phi.values, grid)
    if u_norm == 0.0:
        return 0.0 if phi_norm == 0.0 else 1.0
    if phi_norm == 0.0:
        return 1.0  # degenerate: profile vanishes, mismatch is all of u
    phi_hat = continuum_transform(phi)
    mod = np.abs(phi_hat)
    shift_axes = tuple(range(grid.dimension))
    mod_sorted = np.fft.fftshift(mod, axes=shift_axes)
    freq_sorted = tuple(np.fft.fftshift(f) for f in grid.freq_axes)
    points = tuple(x_j / (2.0 * t) for x_j in grid.x)
    profile = (2.0 * t) ** (-grid.dimension / 2.0) * _interp_modulus(
        grid, mod_sorted, freq_sorted, points)
    return l2_norm(np.abs(u.values) - profile, grid) / u_norm
