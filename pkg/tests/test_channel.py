"""Tests for the analytic link model."""

import math

import pytest

from cave_sim.domain.channel import link_rate, path_loss_db, snr_db

EGO = (0.0, 0.0)
BANDWIDTH = 10e6
TX_POWER = 20.0


def rate_at(distance: float, flows: int = 1) -> float:
    return link_rate(EGO, (distance, 0.0), BANDWIDTH, TX_POWER, flows)


class TestPathLoss:
    def test_reference_distance(self):
        assert path_loss_db(1.0) == pytest.approx(32.4 + 20.0 * math.log10(3.5))

    def test_slope_per_decade(self):
        assert path_loss_db(100.0) - path_loss_db(10.0) == pytest.approx(21.0)

    def test_distance_is_clamped_to_one_meter(self):
        assert path_loss_db(0.0) == path_loss_db(1.0)
        assert rate_at(0.1) == rate_at(1.0)


class TestLinkRate:
    def test_flows_share_the_link_equally(self):
        assert rate_at(50.0, flows=2) == pytest.approx(rate_at(50.0) / 2)

    def test_no_flow_counts_as_one(self):
        assert rate_at(50.0, flows=0) == rate_at(50.0)

    def test_rate_falls_with_distance(self):
        rates = [rate_at(d) for d in (1.0, 10.0, 50.0, 100.0, 200.0, 300.0)]
        assert all(near > far for near, far in zip(rates, rates[1:]))

    def test_shannon_formula(self):
        snr = 10.0 ** (snr_db(100.0, BANDWIDTH, TX_POWER) / 10.0)
        assert rate_at(100.0) == pytest.approx(BANDWIDTH * math.log2(1.0 + snr))

    def test_only_the_distance_matters(self):
        assert link_rate((5.0, 5.0), (35.0, 45.0), BANDWIDTH, TX_POWER, 1) == pytest.approx(
            rate_at(50.0)
        )

    def test_excess_loss_lowers_the_snr_one_for_one(self):
        plain = snr_db(100.0, BANDWIDTH, TX_POWER)
        assert snr_db(100.0, BANDWIDTH, TX_POWER, 30.0) == pytest.approx(plain - 30.0)
        assert path_loss_db(100.0, 30.0) == pytest.approx(path_loss_db(100.0) + 30.0)

    def test_excess_loss_is_the_same_as_less_power(self):
        lossy = link_rate(EGO, (50.0, 0.0), BANDWIDTH, TX_POWER, 1, excess_loss_db=38.0)
        quiet = link_rate(EGO, (50.0, 0.0), BANDWIDTH, TX_POWER - 38.0, 1)
        assert lossy == pytest.approx(quiet)
        assert lossy < rate_at(50.0)
