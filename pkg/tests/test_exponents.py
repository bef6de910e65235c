"""Exponent arithmetic: golden closed-form values, admissibility, and the
scaling relations every emitted pair must satisfy."""
import math

import pytest
from hypothesis import given, settings, strategies as st

from dmnls.exponents import P0, SNAP_TOL, admissible, exponent_report


class TestGoldenValues:
    def test_critical_index(self):
        assert exponent_report(1, 4.0).s_c == pytest.approx(0.0, abs=1e-15)
        assert exponent_report(3, 4.0).s_c == pytest.approx(1.0, abs=1e-15)
        assert exponent_report(1, 5.0).s_c == pytest.approx(0.1, abs=1e-15)

    def test_weighted_index(self):
        assert exponent_report(1, 3.0).gamma == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_scattering_power_threshold(self):
        assert P0 == pytest.approx(3.0 + math.sqrt(5.0), abs=1e-15)
        assert exponent_report(1, 6.0).one_d_scattering_ok is True
        assert exponent_report(1, 5.0).one_d_scattering_ok is False
        assert exponent_report(2, 6.0).one_d_scattering_ok is None

    def test_blowup_threshold_constant(self):
        assert exponent_report(1, 10.0).Q_threshold == pytest.approx(10.0 / 3.0,
                                                                     abs=1e-12)
        assert exponent_report(1, 5.0).Q_threshold == pytest.approx(40.0,
                                                                    abs=1e-12)
        # not defined at or below the mass-critical power
        assert exponent_report(1, 4.0).Q_threshold is None
        assert exponent_report(1, 2.0).Q_threshold is None

    def test_decay_constants(self):
        rep = exponent_report(1, 6.0)
        assert rep.decay_c1 == pytest.approx(0.5, abs=1e-15)
        assert rep.decay_rate_w == pytest.approx(-0.125, abs=1e-15)
        rep5 = exponent_report(1, 5.0)
        assert rep5.decay_c1 == pytest.approx(0.75, abs=1e-15)
        assert rep5.decay_rate_w == pytest.approx(-1.0 / 14.0, abs=1e-15)
        # above p = 8/d the x-weighted growth saturates
        rep10 = exponent_report(1, 10.0)
        assert rep10.decay_c1 == 0.0
        assert rep10.decay_rate_w == pytest.approx(-1.0 / 6.0, abs=1e-15)

    def test_intercritical_pair_values(self):
        rep = exponent_report(1, 5.0)
        q, r = rep.intercritical_pair
        assert q == pytest.approx(7.0, abs=1e-13)
        assert r == pytest.approx(14.0 / 3.0, abs=1e-13)
        assert rep.intercritical_r_c == pytest.approx(8.75, abs=1e-13)
        assert rep.subcritical_triple is None

    def test_subcritical_triple_values(self):
        rep = exponent_report(1, 3.0)
        q, r, r_c = rep.subcritical_triple
        assert q == pytest.approx(10.0, abs=1e-13)
        assert r == pytest.approx(10.0 / 3.0, abs=1e-13)
        assert r_c == pytest.approx(7.5, abs=1e-13)
        assert rep.intercritical_pair is None


class TestRegimes:
    @pytest.mark.parametrize("d,p,regime", [
        (1, 1.5, "long_range"),
        (1, 2.0, "long_range"),        # boundary included on the left side
        (1, 3.0, "mass_subcritical"),
        (1, 4.0, "mass_critical"),
        (1, 6.0, "intercritical"),
        (2, 2.0, "mass_critical"),
        (3, 4.0 / 3.0, "mass_critical"),
        (3, 2.0, "intercritical"),
        (3, 4.0, "energy_critical"),
        (3, 5.0, "supercritical"),
    ])
    def test_classification(self, d, p, regime):
        assert exponent_report(d, p).regime == regime

    def test_snap_onto_boundary(self):
        # a p within SNAP_TOL of the mass-critical power classifies as critical
        assert exponent_report(1, 4.0 + 1e-13).regime == "mass_critical"
        assert exponent_report(1, 4.0 + 1e-9).regime == "intercritical"

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            exponent_report(0, 4.0)
        with pytest.raises(ValueError):
            exponent_report(1, 0.0)
        with pytest.raises(ValueError):
            exponent_report(1, -2.0)


class TestAdmissibility:
    def test_endpoint_pairs(self):
        assert admissible(math.inf, 2.0, 1)
        assert admissible(4.0, math.inf, 1)
        assert admissible(2.0, 6.0, 3)  # the q=2 endpoint opens up in d >= 3
        # the forbidden two-dimensional endpoint
        assert not admissible(2.0, math.inf, 2)

    def test_scaling_line_violation(self):
        assert not admissible(8.0, 3.0, 1)  # 1/4 + 1/3 is off the line
        assert not admissible(4.0, 4.0, 1)
        assert not admissible(1.5, 12.0, 1)  # q below 2


def _power_strategy():
    return st.floats(min_value=0.05, max_value=12.0,
                     allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(d=st.integers(1, 3), p=_power_strategy())
def test_index_identities(d, p):
    rep = exponent_report(d, p)
    assert rep.s_c == pytest.approx(d / 2.0 - 2.0 / p, rel=1e-15)
    assert rep.gamma == pytest.approx(-rep.s_c, rel=1e-14, abs=1e-14)


@settings(max_examples=300, deadline=None)
@given(d=st.integers(1, 3), p=_power_strategy())
def test_emitted_pairs_admissible_and_on_critical_line(d, p):
    """Every (q, r) the report emits is admissible and its companion r_c
    satisfies 2/q + d/r_c = d/2 - s (s = s_c for the critical-regularity
    pair, s = gamma for the weighted-data triple)."""
    rep = exponent_report(d, p)
    if rep.intercritical_pair is not None:
        q, r = rep.intercritical_pair
        assert admissible(q, r, d)
        assert abs(2.0 / q + d / rep.intercritical_r_c
                   - (d / 2.0 - rep.s_c)) <= 1e-12
    if rep.subcritical_triple is not None:
        q, r, r_c = rep.subcritical_triple
        assert admissible(q, r, d)
        assert abs(2.0 / q + d / r_c - (d / 2.0 - rep.gamma)) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(d=st.integers(1, 3), p=_power_strategy())
def test_pair_domains_are_exclusive(d, p):
    """The two space-time constructions cover disjoint power ranges, and the
    threshold/decay constants exist exactly above the mass-critical power."""
    rep = exponent_report(d, p)
    assert not (rep.intercritical_pair is not None
                and rep.subcritical_triple is not None)
    above_mass = p > 4.0 / d + 1e-9
    if above_mass:
        assert rep.Q_threshold is not None and rep.Q_threshold > 0
        assert rep.decay_c1 is not None and 0.0 <= rep.decay_c1 <= 1.0
        assert rep.decay_rate_w is not None and rep.decay_rate_w < 0
    if p < 4.0 / d - 1e-9:
        assert rep.Q_threshold is None


@settings(max_examples=200, deadline=None)
@given(d=st.integers(1, 2), p=st.floats(0.3, 11.0))
def test_report_is_deterministic_and_serializable(d, p):
    a = exponent_report(d, p)
    b = exponent_report(d, p)
    assert a == b
    payload = a.to_dict()
    assert payload["d"] == d and payload["p"] == p
