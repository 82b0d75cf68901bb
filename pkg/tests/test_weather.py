import numpy as np
import pytest

from evtwin.weather import (
    STEPS_PER_DAY,
    WeatherError,
    WeatherSeries,
    load_weather,
    synth_weather,
)


def write_csv(path, rows, header="timestamp,ghi_w_m2,air_temp_c,wind_speed_m_s"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")


def iso(day, minute):
    h, m = divmod(minute, 60)
    return f"2024-01-{day:02d}T{h:02d}:{m:02d}:00"


class TestLoadWeather:
    def test_one_day_has_288_rows(self, tmp_path):
        rows = [f"{iso(1, 5 * i)},100,25,3" for i in range(STEPS_PER_DAY)]
        p = tmp_path / "w.csv"
        write_csv(p, rows)
        series = load_weather(p)
        assert len(series) == 288
        assert series.days == 1.0

    def test_duplicate_timestamp_identifies_row(self, tmp_path):
        rows = [f"{iso(1, 0)},100,25,3", f"{iso(1, 5)},100,25,3", f"{iso(1, 5)},90,25,3"]
        p = tmp_path / "w.csv"
        write_csv(p, rows)
        with pytest.raises(WeatherError, match=":4"):
            load_weather(p)

    def test_single_gap_interpolates_mean_of_neighbours(self, tmp_path):
        # one missing 5-minute step between 00:05 and 00:15
        rows = [f"{iso(1, 0)},100,20,2", f"{iso(1, 5)},200,22,3", f"{iso(1, 15)},300,26,5"]
        p = tmp_path / "w.csv"
        write_csv(p, rows)
        series = load_weather(p)
        assert len(series) == 4
        assert series.ghi[2] == pytest.approx((200 + 300) / 2)
        assert series.air_temp[2] == pytest.approx(24.0)
        assert series.wind_speed[2] == pytest.approx(4.0)

    def test_gap_of_two_steps_rejected(self, tmp_path):
        rows = [f"{iso(1, 0)},100,20,2", f"{iso(1, 20)},300,26,5"]
        p = tmp_path / "w.csv"
        write_csv(p, rows)
        with pytest.raises(WeatherError, match="gap"):
            load_weather(p)

    def test_negative_ghi_rejected(self, tmp_path):
        p = tmp_path / "w.csv"
        write_csv(p, [f"{iso(1, 0)},-5,20,2"])
        with pytest.raises(WeatherError, match="negative GHI"):
            load_weather(p)

    def test_bad_header_rejected(self, tmp_path):
        p = tmp_path / "w.csv"
        write_csv(p, [f"{iso(1, 0)},5,20,2"], header="time,ghi,temp,wind")
        with pytest.raises(WeatherError, match="header"):
            load_weather(p)

    def test_csv_round_trip(self, tmp_path):
        series = synth_weather(2, seed=9, days=1)
        p = tmp_path / "w.csv"
        series.write_csv(p)
        back = load_weather(p)
        assert np.allclose(back.ghi, series.ghi, atol=1e-3)
        assert np.allclose(back.wind_speed, series.wind_speed, atol=1e-3)


class TestSynthWeather:
    def test_deterministic_for_seed(self):
        a = synth_weather(3, seed=1, days=2)
        b = synth_weather(3, seed=1, days=2)
        assert np.array_equal(a.ghi, b.ghi)
        assert np.array_equal(a.air_temp, b.air_temp)
        assert np.array_equal(a.wind_speed, b.wind_speed)
        c = synth_weather(3, seed=2, days=2)
        assert not np.array_equal(a.ghi, c.ghi)

    def test_quarter3_at_least_20pct_sunnier_than_quarter1(self):
        for seed in range(5):
            q1 = synth_weather(1, seed=seed, days=5)
            q3 = synth_weather(3, seed=seed, days=5)
            assert q3.ghi.sum() >= 1.2 * q1.ghi.sum()

    @pytest.mark.parametrize("quarter", [1, 2, 3, 4])
    def test_night_is_dark(self, quarter):
        s = synth_weather(quarter, seed=4, days=2)
        hours = (np.arange(len(s)) % STEPS_PER_DAY) * 5 / 60.0
        night = (hours >= 20.0) | (hours < 4.0)
        assert np.all(s.ghi[night] == 0.0)

    def test_bad_quarter(self):
        with pytest.raises(WeatherError):
            synth_weather(5, seed=1)

    def test_wind_nonnegative_and_bounded(self):
        s = synth_weather(4, seed=3, days=4)
        assert np.all(s.wind_speed >= 0.0)
        assert s.wind_speed.max() < 25.0


class TestCyclicExtension:
    def test_extends_to_horizon_and_flags(self):
        one = synth_weather(2, seed=1, days=1)
        five = one.extend_cyclic(5)
        assert len(five) == 5 * STEPS_PER_DAY
        assert five.cyclic_extended
        assert np.array_equal(five.ghi[:288], five.ghi[288:576])

    def test_noop_when_long_enough(self):
        s = synth_weather(2, seed=1, days=3)
        assert s.extend_cyclic(2) is s
        assert not s.cyclic_extended
