"""Acceptance gate: the eleven verification criteria this laboratory is built
to satisfy, each pinned at its stated tolerance.  One test per criterion, in
order, so `pytest -v` reports one pass/fail line for each.

The heavy criteria run their stock preset end to end through the runner (the
same path the CLI takes) and then re-assert the criterion's numbers directly,
so the tolerances are visible here rather than buried in the runner."""
import math

import numpy as np
import pytest

from dmnls.config import config_from_dict
from dmnls.diagnostics import PCE_VARIANTS, record
from dmnls.dynamics import (STATUS_COMPLETED, ModelParams, StepperConfig,
                            evolve)
from dmnls.exponents import exponent_report
from dmnls.ground_state import sgn_gradient, sgn_quotient
from dmnls.runner import run
from dmnls.spectral import ComplexField, inner, l2_norm, make_field, make_grid

# stock resolution for the in-test dynamics criteria
N_STOCK, L_STOCK = 2048, 256.0


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def _run_preset(preset, outdir, tag=None):
    config = config_from_dict({
        "preset": preset,
        "output_dir": str(outdir / (tag or preset)),
    })
    outcome = run(config)
    return outcome, {c.name: c for c in outcome.checks}


def test_criterion_01_integrator_order_on_closed_form_solution():
    # Single-mode data evolves as A exp(i(xi x - (xi^2 + kappa A^p) t)); the
    # integrator is exactly linear on it, so the dt=1e-3 error sits at
    # rounding level (far below the 1e-6 bound) and the fourth-order halving
    # ratio is measured at the coarsest steps that keep the dt^4 term above
    # that floor.
    g = make_grid(1, N_STOCK, L_STOCK)
    amp, mode, p, t_final = 0.5, 8, 4.0, 1.0
    xi = 2.0 * math.pi * mode / L_STOCK
    u0 = make_field(g, amp * np.exp(1j * xi * g.x[0]))
    params = ModelParams(dimension=1, p=p, sign="defocusing")

    def rel_err(dt):
        traj = evolve(u0, params, StepperConfig(dt=dt), t_final, (t_final,),
                      boundary_mass_threshold=1.0)
        t_k, u_k = traj.checkpoints[-1]
        exact = amp * np.exp(1j * (xi * g.x[0] - (xi ** 2 + amp ** p) * t_k))
        return l2_norm(u_k.values - exact, g) / l2_norm(exact, g)

    fine = rel_err(1e-3)
    ratio = rel_err(0.25) / rel_err(0.125)
    print(f"closed-form error at dt=1e-3: {fine:.3e}; "
          f"halving ratio {ratio:.2f}")
    assert fine < 1e-6
    assert 14.0 <= ratio <= 18.0


def test_criterion_02_mass_and_energy_conservation():
    g = make_grid(1, N_STOCK, L_STOCK)
    u0 = make_field(g, np.exp(-g.x[0] ** 2))
    params = ModelParams(dimension=1, p=6.0, sign="defocusing")
    cps = tuple(np.linspace(0.0, 10.0, 21))
    traj = evolve(u0, params, StepperConfig(dt=1e-2), 10.0, cps,
                  boundary_mass_threshold=1e-6)
    assert traj.status == STATUS_COMPLETED
    series = record(traj)
    mass_drift = float(np.max(np.abs(series.mass - series.mass[0]))
                       / series.mass[0])
    e = series.energy_defocusing
    energy_drift = float(np.max(np.abs(e - e[0])) / abs(e[0]))
    print(f"relative drifts over T=10: mass {mass_drift:.3e}, "
          f"energy {energy_drift:.3e}")
    assert mass_drift < 1e-8
    assert energy_drift < 1e-6


def test_criterion_03_energy_balance_variant_discrimination(outdir):
    outcome, checks = _run_preset("pce_check", outdir)
    better = checks["pce_better_variant_residual"].value
    separation = checks["pce_variant_separation"].value
    ratio = checks["pce_refinement_ratio"].value
    selected = outcome.summary["selected_variant"]
    print(f"selected variant {selected!r}: residual {better:.3e}, "
          f"separation {separation:.1f}x, refinement ratio {ratio:.2f}")
    assert outcome.status == "pass"
    assert better < 1e-3
    assert separation >= 10.0
    assert 3.0 <= ratio <= 5.0
    assert selected in PCE_VARIANTS


def test_criterion_04_dispersive_decay_rates(outdir):
    outcome, checks = _run_preset("decay_rates", outdir)
    ju = checks["ju_growth_slope"].value
    w = checks["w_decay_slope"].value
    print(f"log-log slopes on [5, 50]: vector-field norm {ju:+.3f} "
          f"(bound 0.6), averaged L^(p+2) power {w:+.3f} (bound -0.025)")
    assert outcome.status == "pass"
    assert ju <= 0.6
    assert w <= -0.025


def test_criterion_05_small_data_scattering_both_regimes(outdir):
    inter, inter_checks = _run_preset("small_data_scatter_intercritical",
                                      outdir)
    assert inter.status == "pass"
    for norm_name in ("L2", "H_sc"):
        assert inter_checks[f"cauchy_monotone_{norm_name}"].passed
        assert inter_checks[f"cauchy_final_{norm_name}"].value < 1e-3

    sub, sub_checks = _run_preset("small_data_scatter_subcritical", outdir)
    assert sub.status == "pass"
    for norm_name in ("L2", "FH_gamma"):
        assert sub_checks[f"cauchy_monotone_{norm_name}"].passed
        assert sub_checks[f"cauchy_final_{norm_name}"].value < 1e-3
    print("final relative free-frame differences: "
          f"intercritical L2 {inter_checks['cauchy_final_L2'].value:.2e}, "
          f"H_sc {inter_checks['cauchy_final_H_sc'].value:.2e}; "
          f"subcritical L2 {sub_checks['cauchy_final_L2'].value:.2e}, "
          f"FH_gamma {sub_checks['cauchy_final_FH_gamma'].value:.2e}")


def test_criterion_06_long_range_nonscattering_mechanism(outdir):
    outcome, checks = _run_preset("nonscattering", outdir)
    exponent = checks["overlap_derivative_exponent"].value
    print(f"overlap-derivative exponent on [10, 100]: {exponent:+.3f} "
          f"(theory -0.5, accepted [-0.65, -0.35])")
    assert outcome.status == "pass"
    assert -0.65 <= exponent <= -0.35
    assert checks["overlap_strictly_increasing"].passed


def test_criterion_07_modified_time_reversal(outdir):
    outcome, checks = _run_preset("time_reversal", outdir)
    field = checks["field_reversal_deviation"].value
    energy = checks["energy_reversal_deviation"].value
    print(f"max deviations over [0, 1]: field {field:.2e} (tol 1e-5), "
          f"energy {energy:.2e} (tol 1e-6)")
    assert outcome.status == "pass"
    assert field < 1e-5
    assert energy < 1e-6


def test_criterion_08_blowup_dichotomy_and_threshold_bracket(outdir):
    outcome, checks = _run_preset("blowup_dichotomy", outdir)
    grad = checks["small_lambda_gradient_bound"].value
    factor = checks["bracket_factor"].value
    print(f"small-amplitude gradient growth {grad:.2f}x (bound 10x); "
          f"instability bracketed within factor {factor:.2f}")
    assert outcome.status == "pass"
    assert checks["small_lambda_completes"].passed
    assert grad < 10.0
    assert checks["large_lambda_blowup_forward"].passed
    assert checks["large_lambda_blowup_backward"].passed
    assert factor <= 2.0 + 1e-12


def test_criterion_09_exponent_golden_values_and_scaling(outdir):
    assert exponent_report(1, 4.0).s_c == 0.0
    assert exponent_report(3, 4.0).s_c == 1.0
    assert exponent_report(1, 3.0).gamma == pytest.approx(1.0 / 6.0,
                                                          rel=1e-12)
    assert exponent_report(1, 6.0).p0 == \
        pytest.approx(3.0 + math.sqrt(5.0), rel=1e-12)
    assert exponent_report(1, 10.0).Q_threshold == \
        pytest.approx(10.0 / 3.0, rel=1e-12)
    assert exponent_report(1, 6.0).decay_c1 == pytest.approx(0.5, rel=1e-12)

    outcome, checks = _run_preset("exponents_table", outdir)
    print("golden values exact; full table "
          f"admissible ({checks['admissible_pairs'].detail}) and "
          f"scaling-consistent to 1e-12")
    assert outcome.status == "pass"
    assert checks["golden_values"].passed
    assert checks["admissible_pairs"].passed
    assert checks["scaling_relations"].passed


def test_criterion_10_variational_ground_state(outdir):
    outcome, checks = _run_preset("ground_state", outdir)
    assert checks["quotient_monotone"].passed
    assert checks["el_residual"].value < 1e-3
    assert checks["converged_both"].passed
    # Initialization agreement is a uniqueness observation, not a failure
    # condition (uniqueness of the optimizer is an open question).
    agreement = checks["init_agreement"].value
    note = "" if agreement < 1e-4 else "  [disagreement logged]"
    print(f"stationarity residual {checks['el_residual'].value:.2e} "
          f"(tol 1e-3); two-init quotient agreement {agreement:.2e}{note}")

    # analytic gradient vs central differences, ten probe directions; the
    # probe point carries a chirp so no symmetry annihilates any direction
    g = make_grid(1, 256, 32.0)
    x = g.x[0]
    phi = make_field(g, np.exp(-x ** 2) * (1.0 + 0.1 * x)
                     * np.exp(0.25j * x))
    grad = sgn_gradient(phi, 10.0, 4.0, 32)
    eps = 1e-5
    worst = 0.0
    for k, center in enumerate(np.linspace(-3.0, 3.0, 10)):
        eta = np.exp(-(x - center) ** 2 / (1.0 + 0.2 * k))
        if k % 2:
            eta = 1j * eta
        eta_f = make_field(g, eta)

        def log_j(shift):
            probe = ComplexField(g, phi.values + shift * eta_f.values)
            return math.log(sgn_quotient(probe, 10.0, 4.0, 32))

        fd = (log_j(eps) - log_j(-eps)) / (2.0 * eps)
        analytic = inner(grad, eta_f).real
        worst = max(worst, abs(fd - analytic) / max(abs(fd), abs(analytic)))
    print(f"worst gradient/finite-difference mismatch over 10 probes: "
          f"{worst:.2e} (tol 1e-4)")
    assert worst < 1e-4


def test_criterion_11_reruns_are_bit_identical(outdir):
    pairs = {
        "free_sanity": "time_series.csv",
        "exponents_table": "exponents.csv",
        "ground_state": "ground_state_profile.csv",
    }
    for preset, artifact in pairs.items():
        out_a, _ = _run_preset(preset, outdir, tag=f"det_a_{preset}")
        out_b, _ = _run_preset(preset, outdir, tag=f"det_b_{preset}")
        assert out_a.status == out_b.status
        body_a = (outdir / f"det_a_{preset}" / artifact).read_bytes()
        body_b = (outdir / f"det_b_{preset}" / artifact).read_bytes()
        assert body_a == body_b, f"{preset}: {artifact} differs between runs"
    print(f"byte-identical artifacts across reruns: "
          f"{', '.join(sorted(pairs))}")
