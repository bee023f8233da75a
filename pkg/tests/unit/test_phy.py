"""Tests for propagation, rate selection and airtime."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wlan_mab.errors import ConfigError, InvalidInputError
from wlan_mab.phy import (
    PathLossParams,
    RateEntry,
    TimingParams,
    default_rate_table,
    frame_cost,
    frame_tx_time,
    legacy_rate_for,
    load_rate_table,
    path_loss,
    path_loss_array,
    required_airtime,
    sample_shadowing,
    select_rates,
)


def oracle_tx_time_us(data_rate: float, legacy_rate: float) -> Fraction:
    """Frame exchange time in microseconds, in exact arithmetic, for the default timing."""
    data_bps = Fraction(data_rate).limit_denominator(1000) * Fraction(16, 10**6)
    ack_bps = Fraction(legacy_rate).limit_denominator(1000) * Fraction(4, 10**6)
    data_symbols = math.ceil(Fraction(32 + 272 + 12000 + 6) / data_bps)
    ack_symbols = math.ceil(Fraction(32 + 112 + 6) / ack_bps)
    t_data = 52 + 16 * data_symbols
    t_ack = 20 + 4 * ack_symbols
    return Fraction(t_data + 16 + t_ack + 34 + 9)


class TestPathLoss:
    """Test the indoor path loss model."""

    def test_one_meter_is_intercept(self):
        """Test that at 1 m without walls only L0 remains."""
        params = PathLossParams(w_bar=0.0)
        assert path_loss(1.0, params) == pytest.approx(54.12)

    def test_ten_meters_without_walls(self):
        """Test the distance term at 10 m."""
        params = PathLossParams(w_bar=0.0)
        assert path_loss(10.0, params) == pytest.approx(74.7267)

    def test_ten_meters_with_walls_and_shadow(self):
        """Test wall attenuation and shadowing are added."""
        params = PathLossParams(w_bar=0.1, k_wall=5.25)
        assert path_loss(10.0, params, shadow=5.0) == pytest.approx(84.9767)

    def test_short_distance_is_clamped(self):
        """Test distances below 1 m behave like 1 m."""
        params = PathLossParams()
        assert path_loss(0.2, params) == path_loss(1.0, params)
        assert path_loss(0.0, params) == path_loss(1.0, params)

    @pytest.mark.parametrize("distance", [math.inf, -math.inf, math.nan])
    def test_non_finite_distance(self, distance):
        """Test non-finite distances are rejected."""
        with pytest.raises(InvalidInputError):
            path_loss(distance, PathLossParams())

    def test_array_matches_scalar(self):
        """Test the vectorised form agrees with the scalar one."""
        params = PathLossParams()
        distances = np.array([0.5, 1.0, 7.3, 40.0])
        shadow = np.array([0.0, 1.0, 2.5, 9.9])
        expected = [path_loss(d, params, s) for d, s in zip(distances, shadow)]
        assert path_loss_array(distances, params, shadow) == pytest.approx(expected, rel=1e-12)

    def test_array_rejects_non_finite(self):
        """Test the vectorised form rejects non-finite distances."""
        with pytest.raises(InvalidInputError):
            path_loss_array(np.array([1.0, np.nan]), PathLossParams(), np.zeros(2))

    @given(st.floats(1.0, 500.0), st.floats(0.01, 50.0))
    def test_strictly_increasing(self, distance, step):
        """Test path loss grows with distance beyond 1 m."""
        params = PathLossParams()
        assert path_loss(distance + step, params) > path_loss(distance, params)

    def test_invalid_params(self):
        """Test parameter bounds."""
        with pytest.raises(ValueError):
            PathLossParams(gamma=0)
        with pytest.raises(ValueError):
            PathLossParams(k_wall=-1)


class TestShadowing:
    """Test shadowing draws."""

    def test_disabled(self):
        """Test disabled shadowing returns zero."""
        params = PathLossParams(shadowing_enabled=False)
        rng = np.random.default_rng(0)
        assert sample_shadowing(rng, params) == 0.0
        assert np.all(sample_shadowing(rng, params, size=(3, 4)) == 0.0)

    def test_support_and_mean(self):
        """Test samples lie in [0, 10] dB with mean 5 dB."""
        samples = sample_shadowing(np.random.default_rng(1), PathLossParams(), size=(10**6,))
        assert samples.min() >= 0.0
        assert samples.max() <= 10.0
        assert samples.mean() == pytest.approx(5.0, abs=0.05)

    def test_scalar_draw(self):
        """Test a single draw is a float in range."""
        value = sample_shadowing(np.random.default_rng(2), PathLossParams())
        assert isinstance(value, float)
        assert 0.0 <= value <= 10.0


class TestRateSelection:
    """Test RSSI to rate mapping."""

    def test_default_lookup(self):
        """Test -68 dBm at 20 MHz selects the fifth entry."""
        table = default_rate_table(20)
        assert select_rates(-68.0, table) == (51.6e6, 24e6)

    def test_top_entry_boundary(self):
        """Test the threshold itself is included."""
        table = default_rate_table(20)
        top = table[-1]
        assert select_rates(top.min_rssi, table) == (top.data_rate, top.legacy_rate)

    def test_out_of_range(self):
        """Test RSSI below every threshold yields no rates."""
        assert select_rates(-90.0, default_rate_table(20)) is None

    def test_empty_table(self):
        """Test an empty table is a configuration error."""
        with pytest.raises(ConfigError):
            select_rates(-50.0, [])

    @given(st.floats(-100.0, -30.0), st.floats(0.0, 30.0))
    def test_monotone_in_rssi(self, rssi, delta):
        """Test a stronger signal never selects a lower data rate."""
        table = default_rate_table(40)
        low = select_rates(rssi, table)
        high = select_rates(rssi + delta, table)
        if low is not None:
            assert high is not None
            assert high[0] >= low[0]

    @pytest.mark.parametrize(("bandwidth", "lowest"), [(20, -82.0), (40, -79.0), (80, -76.0)])
    def test_default_tables(self, bandwidth, lowest):
        """Test default tables are sorted and shifted per bandwidth."""
        table = default_rate_table(bandwidth)
        assert len(table) == 12
        assert table[0].min_rssi == lowest
        assert [e.min_rssi for e in table] == sorted(e.min_rssi for e in table)
        assert [e.data_rate for e in table] == sorted(e.data_rate for e in table)

    def test_unknown_bandwidth(self):
        """Test there is no default table for 160 MHz."""
        with pytest.raises(ConfigError):
            default_rate_table(160)

    @pytest.mark.parametrize(("rssi", "rate"), [(-50.0, 24e6), (-70.0, 24e6), (-75.0, 12e6), (-80.0, 6e6)])
    def test_legacy_rate(self, rssi, rate):
        """Test legacy rate thresholds."""
        assert legacy_rate_for(rssi) == rate


class TestRateTableFile:
    """Test loading rate tables from CSV."""

    def test_load(self, tmp_path):
        """Test tables are grouped by bandwidth and sorted by threshold."""
        path = tmp_path / "rates.csv"
        path.write_text(
            "min_rssi_dbm,data_rate_mbps,legacy_rate_mbps,bandwidth_mhz\n"
            "-70,50,24,20\n"
            "-82,10,6,20\n"
            "-79,20,6,40\n"
        )
        tables = load_rate_table(path)
        assert sorted(tables) == [20, 40]
        assert [e.min_rssi for e in tables[20]] == [-82.0, -70.0]
        assert tables[20][1] == RateEntry(min_rssi=-70.0, data_rate=50e6, legacy_rate=24e6)

    def test_missing_column(self, tmp_path):
        """Test a missing column is reported."""
        path = tmp_path / "rates.csv"
        path.write_text("min_rssi_dbm,data_rate_mbps,bandwidth_mhz\n-82,10,20\n")
        with pytest.raises(ConfigError, match="legacy_rate_mbps"):
            load_rate_table(path)

    def test_decreasing_rates(self, tmp_path):
        """Test a rate that drops with RSSI is rejected."""
        path = tmp_path / "rates.csv"
        path.write_text(
            "min_rssi_dbm,data_rate_mbps,legacy_rate_mbps,bandwidth_mhz\n-82,50,6,20\n-70,10,24,20\n"
        )
        with pytest.raises(ConfigError):
            load_rate_table(path)

    def test_missing_file(self, tmp_path):
        """Test an unreadable file is a configuration error."""
        with pytest.raises(ConfigError):
            load_rate_table(tmp_path / "absent.csv")


class TestAirtime:
    """Test frame time and required airtime arithmetic."""

    @pytest.mark.parametrize("bandwidth", [20, 40, 80])
    def test_matches_exact_oracle(self, bandwidth):
        """Test every default entry against exact rational arithmetic."""
        timing = TimingParams()
        for entry in default_rate_table(bandwidth):
            expected_us = oracle_tx_time_us(entry.data_rate, entry.legacy_rate)
            assert frame_tx_time(12000, entry.data_rate, entry.legacy_rate, timing) == pytest.approx(
                float(expected_us * Fraction(1, 10**6)), rel=1e-12
            )
            expected_u = Fraction(4 * 10**6, 12000) * (expected_us + Fraction(675, 10)) / 10**6
            assert required_airtime(4e6, 12000, entry.data_rate, entry.legacy_rate, timing) == pytest.approx(
                float(expected_u), rel=1e-12
            )

    def test_lowest_entry_hand_value(self):
        """Test the lowest 20 MHz entry: 90 data symbols and 2 ACK symbols."""
        # 12310 bits / 137.6 bits per symbol -> 90 symbols
        assert frame_tx_time(12000, 8.6e6, 6e6, TimingParams()) == pytest.approx(
            (52 + 90 * 16 + 16 + 20 + 7 * 4 + 34 + 9) * 1e-6, rel=1e-12
        )

    @pytest.mark.parametrize(
        ("load", "data_rate", "legacy_rate", "airtime"),
        [
            (12e6, 21.5e6, 24e6, 0.7825),
            (15e6, 29e6, 24e6, 0.798125),
            (15e6, 21.5e6, 24e6, 0.978125),
            (12e6, 15e6, 6e6, 1.0585),
        ],
    )
    def test_toy_airtimes(self, load, data_rate, legacy_rate, airtime):
        """Test the required airtimes of the two-AP scenario links."""
        assert required_airtime(load, 12000, data_rate, legacy_rate, TimingParams()) == pytest.approx(
            airtime, rel=1e-12
        )

    def test_exact_division_does_not_round_up(self):
        """Test a payload that fills whole symbols costs no extra symbol."""
        timing = TimingParams(l_sf=8, l_mh=8, l_tb=8, l_ack=8)
        # 12024 data bits at 751.5 bits per symbol is exactly 16 symbols
        t = frame_tx_time(12000, 46.96875e6, 24e6, timing)
        assert t == pytest.approx((52 + 16 * 16 + 16 + 20 + 1 * 4 + 34 + 9) * 1e-6, rel=1e-12)

    def test_zero_load(self):
        """Test zero load needs no airtime."""
        assert required_airtime(0.0, 12000, 8.6e6, 6e6, TimingParams()) == 0.0

    @given(st.floats(0.0, 1e9, allow_nan=False))
    def test_linear_in_load(self, load):
        """Test doubling the load doubles the airtime."""
        timing = TimingParams()
        single = required_airtime(load, 12000, 51.6e6, 24e6, timing)
        assert required_airtime(2 * load, 12000, 51.6e6, 24e6, timing) == pytest.approx(2 * single, rel=1e-12)

    @given(st.sampled_from([e.data_rate for e in default_rate_table(20)]), st.sampled_from([6e6, 12e6, 24e6]))
    def test_faster_rates_never_slower(self, data_rate, legacy_rate):
        """Test frame time does not increase with either rate."""
        timing = TimingParams()
        base = frame_tx_time(12000, data_rate, legacy_rate, timing)
        assert frame_tx_time(12000, 2 * data_rate, legacy_rate, timing) <= base
        assert frame_tx_time(12000, data_rate, 2 * legacy_rate, timing) <= base

    def test_cost_adds_backoff(self):
        """Test the per-frame cost adds the mean backoff."""
        timing = TimingParams()
        assert frame_cost(12000, 21.5e6, 24e6, timing) == pytest.approx(782.5e-6, rel=1e-12)

    @pytest.mark.parametrize(("data_rate", "legacy_rate"), [(0.0, 6e6), (8.6e6, -1.0), (math.nan, 6e6)])
    def test_invalid_rates(self, data_rate, legacy_rate):
        """Test non-positive rates are rejected."""
        with pytest.raises(InvalidInputError):
            frame_tx_time(12000, data_rate, legacy_rate, TimingParams())

    def test_negative_load(self):
        """Test a negative load is rejected."""
        with pytest.raises(InvalidInputError):
            required_airtime(-1.0, 12000, 8.6e6, 6e6, TimingParams())
