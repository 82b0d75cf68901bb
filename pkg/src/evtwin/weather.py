"""Weather inputs: CSV loading, validation and synthetic quarterly profiles.

All series are 5-minute resolution (288 records per day). The CSV format is
fixed: header ``timestamp,ghi_w_m2,air_temp_c,wind_speed_m_s``, ISO-8601
timestamps, UTF-8, LF line endings.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

STEP_MINUTES = 5
STEPS_PER_DAY = 24 * 60 // STEP_MINUTES  # 288
CSV_HEADER = ["timestamp", "ghi_w_m2", "air_temp_c", "wind_speed_m_s"]

GHI_MAX = 1500.0

# Synthetic quarterly climate for a Hanoi-like site: (peak GHI W/m2,
# daylight half-width h, mean temp C, temp swing C, mean wind m/s at 10 m).
# Q3 (Jul-Sep) is the solar peak, Q1 (Jan-Mar) the trough; winter monsoon
# makes Q4/Q1 slightly windier.
_QUARTER_CLIMATE = {
    1: (560.0, 5.6, 18.0, 4.0, 4.0),
    2: (720.0, 6.3, 27.0, 5.0, 3.6),
    3: (840.0, 6.5, 30.0, 5.0, 3.4),
    4: (620.0, 5.9, 24.0, 4.5, 4.2),
}


class WeatherError(ValueError):
    """Raised for malformed or physically invalid weather input."""


@dataclass
class WeatherSeries:
    """Uniform 5-minute weather series.

    ``ghi`` in W/m2, ``air_temp`` in deg C, ``wind_speed`` in m/s at the
    reference height (10 m unless stated otherwise by the energy config).
    """

    start: datetime
    ghi: np.ndarray
    air_temp: np.ndarray
    wind_speed: np.ndarray
    cyclic_extended: bool = field(default=False)

    def __post_init__(self):
        self.ghi = np.asarray(self.ghi, dtype=float)
        self.air_temp = np.asarray(self.air_temp, dtype=float)
        self.wind_speed = np.asarray(self.wind_speed, dtype=float)
        n = len(self.ghi)
        if len(self.air_temp) != n or len(self.wind_speed) != n:
            raise WeatherError("ghi/air_temp/wind_speed lengths differ")

    def __len__(self) -> int:
        return len(self.ghi)

    @property
    def days(self) -> float:
        return len(self) / STEPS_PER_DAY

    def timestamp(self, i: int) -> datetime:
        return self.start + timedelta(minutes=STEP_MINUTES * i)

    def extend_cyclic(self, horizon_days: int) -> "WeatherSeries":
        """Repeat the series until it covers ``horizon_days`` full days.

        Returns self when already long enough. The result is flagged
        ``cyclic_extended`` so reports can disclose the repetition.
        """
        need = horizon_days * STEPS_PER_DAY
        n = len(self)
        if n >= need:
            return self
        if n == 0:
            raise WeatherError("cannot extend an empty series")
        reps = math.ceil(need / n)
        return WeatherSeries(
            start=self.start,
            ghi=np.tile(self.ghi, reps)[:need],
            air_temp=np.tile(self.air_temp, reps)[:need],
            wind_speed=np.tile(self.wind_speed, reps)[:need],
            cyclic_extended=True,
        )

    def daily_ghi_integral_kwh_m2(self, day: int = 0) -> float:
        """Integral of GHI over one day, in kWh/m2."""
        sl = slice(day * STEPS_PER_DAY, (day + 1) * STEPS_PER_DAY)
        return float(np.sum(self.ghi[sl]) * (STEP_MINUTES / 60.0) / 1000.0)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for i in range(len(self)):
                w.writerow(
                    [
                        self.timestamp(i).isoformat(),
                        f"{self.ghi[i]:.3f}",
                        f"{self.air_temp[i]:.3f}",
                        f"{self.wind_speed[i]:.3f}",
                    ]
                )


def load_weather(path: str | Path) -> WeatherSeries:
    """Load and validate a weather CSV.

    Gaps of exactly one missing step are filled by linear interpolation;
    anything larger is an error, as are non-monotone timestamps and
    negative GHI. Raises :class:`WeatherError` naming the offending row.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise WeatherError(f"{path}: empty file") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise WeatherError(
                f"{path}: bad header {header!r}, expected {','.join(CSV_HEADER)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise WeatherError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                ts = datetime.fromisoformat(row[0])
                vals = (float(row[1]), float(row[2]), float(row[3]))
            except ValueError as exc:
                raise WeatherError(f"{path}:{lineno}: {exc}") from None
            if vals[0] < 0:
                raise WeatherError(f"{path}:{lineno}: negative GHI {vals[0]}")
            if vals[0] > GHI_MAX:
                raise WeatherError(f"{path}:{lineno}: GHI {vals[0]} exceeds {GHI_MAX}")
            rows.append((lineno, ts, vals))

    if not rows:
        raise WeatherError(f"{path}: no data rows")

    step = timedelta(minutes=STEP_MINUTES)
    ghi, temp, wind = [], [], []
    for k, (lineno, ts, vals) in enumerate(rows):
        if k > 0:
            prev_ts = rows[k - 1][1]
            delta = ts - prev_ts
            if delta <= timedelta(0):
                raise WeatherError(
                    f"{path}:{lineno}: timestamp {ts.isoformat()} not after previous row"
                )
            if delta == step:
                pass
            elif delta == 2 * step:
                # one missing step: fill with the mean of the neighbours
                prev_vals = rows[k - 1][2]
                ghi.append((prev_vals[0] + vals[0]) / 2.0)
                temp.append((prev_vals[1] + vals[1]) / 2.0)
                wind.append((prev_vals[2] + vals[2]) / 2.0)
            else:
                raise WeatherError(
                    f"{path}:{lineno}: gap of {delta} exceeds one {STEP_MINUTES}-minute step"
                )
        ghi.append(vals[0])
        temp.append(vals[1])
        wind.append(vals[2])

    return WeatherSeries(
        start=rows[0][1],
        ghi=np.array(ghi),
        air_temp=np.array(temp),
        wind_speed=np.array(wind),
    )


def synth_weather(quarter: int, seed: int, days: int = 1) -> WeatherSeries:
    """Generate a deterministic synthetic series for one seasonal quarter.

    GHI follows a clamped-cosine diurnal bell (zero at night, daylight
    entirely inside 04:00-20:00) with seeded cloud attenuation; temperature
    is a sinusoid peaking mid-afternoon; wind is a mean-reverting process
    with a nocturnal peak (19:00-06:00), mirroring the site's observed
    pattern. The quarter-3 daily GHI integral exceeds quarter 1 by well
    over the 1.2x seasonal gap required of the profile.
    """
    if quarter not in _QUARTER_CLIMATE:
        raise WeatherError(f"quarter must be 1..4, got {quarter}")
    if days < 1:
        raise WeatherError("days must be >= 1")

    peak, half_width_h, t_mean, t_swing, wind_mean = _QUARTER_CLIMATE[quarter]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), quarter, 0x57EA]))

    n = days * STEPS_PER_DAY
    hours = (np.arange(n) % STEPS_PER_DAY) * STEP_MINUTES / 60.0

    # Diurnal bell centred on solar noon; cosine window keeps it exactly
    # zero outside [12 - hw, 12 + hw] which always lies inside 04:00-20:00.
    phase = (hours - 12.0) / half_width_h
    bell = np.clip(np.cos(np.clip(phase, -1.0, 1.0) * (math.pi / 2.0)), 0.0, None) ** 1.5
    bell[np.abs(phase) >= 1.0] = 0.0

    # Day-scale brightness plus slow cloud bands, both seeded.
    day_bright = np.repeat(1.0 - 0.25 * rng.random(days), STEPS_PER_DAY)
    cloud = np.ones(n)
    for d in range(days):
        n_bands = rng.integers(0, 3)
        for _ in range(n_bands):
            c = rng.uniform(7.0, 17.0)
            w = rng.uniform(0.5, 2.0)
            depth = rng.uniform(0.2, 0.6)
            idx = slice(d * STEPS_PER_DAY, (d + 1) * STEPS_PER_DAY)
            cloud[idx] *= 1.0 - depth * np.exp(-((hours[idx] - c) ** 2) / (2 * w * w))
    ghi = np.clip(peak * bell * day_bright * cloud, 0.0, GHI_MAX)

    # Temperature: minimum ~05:00, maximum ~15:00 local.
    temp = t_mean + t_swing * np.sin((hours - 9.0) / 24.0 * 2.0 * math.pi)
    temp += rng.normal(0.0, 0.3, n)

    # Wind: AR(1) around a diurnal mean that peaks overnight.
    night = 1.0 + 0.5 * np.cos((hours - 1.0) / 24.0 * 2.0 * math.pi)
    target = wind_mean * night
    wind = np.empty(n)
    level = target[0]
    shocks = rng.normal(0.0, 0.35, n)
    for i in range(n):
        level += 0.15 * (target[i] - level) + shocks[i]
        if level < 0.0:
            level = 0.0
        wind[i] = level

    start = datetime(2024, {1: 1, 2: 4, 3: 7, 4: 10}[quarter], 1)
    return WeatherSeries(start=start, ghi=ghi, air_temp=temp, wind_speed=wind)
