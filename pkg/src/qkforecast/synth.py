"""Seeded synthetic irradiance-like series for demos and self-tests.

The target stacks diurnal harmonics whose phase drifts as a slow random
walk and whose amplitudes breathe on multi-day scales, multiplied by a
regime-switching cloud attenuation (occasional abrupt banks, lightly
smoothed) plus observation noise.  Two auxiliary channels expose partial
information: the noiseless harmonic baseline and a noisy attenuation
estimate.
"""

from __future__ import annotations

import numpy as np

from .pipeline import StationSeries

STEPS_PER_DAY = 96  # 15-minute cadence
FEATURE_NAMES = ("irradiance", "clear_sky", "cloud_index")


def generate_synthetic_station(n_steps: int, seed: int = 0,
                               station_code: str = "SYN0",
                               koppen_class: str = "Cfa") -> StationSeries:
    """Build one synthetic station with the three standard channels."""
    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    rng = np.random.default_rng(seed)
    t = np.arange(n_steps, dtype=float)
    phase = 2.0 * np.pi * t / STEPS_PER_DAY + np.cumsum(rng.normal(0.0, 0.05, n_steps))
    amp2 = 1.0 + 0.6 * np.sin(2.0 * np.pi * t / 960.0 + 1.0)
    amp3 = 1.0 + 0.5 * np.sin(2.0 * np.pi * t / 1440.0 + 2.2)
    clear_sky = (420.0
                 + 300.0 * np.sin(phase)
                 + 90.0 * amp2 * np.sin(2.0 * phase + 0.7)
                 + 45.0 * amp3 * np.sin(3.0 * phase + 1.9)
                 + 25.0 * np.sin(5.0 * phase + 0.3))

    # cloud banks: attenuation holds its level until a new bank rolls in
    switches = rng.random(n_steps) < 0.01
    draws = rng.uniform(0.45, 1.0, n_steps)
    switches[0] = True
    draws[0] = 1.0
    last_switch = np.maximum.accumulate(np.where(switches, np.arange(n_steps), 0))
    attenuation = np.convolve(draws[last_switch], np.ones(5) / 5.0, mode="same")

    irradiance = clear_sky * attenuation + rng.normal(0.0, 12.0, n_steps)
    cloud_index = attenuation + rng.normal(0.0, 0.03, n_steps)

    return StationSeries(
        station_code=station_code,
        timestamps=np.arange(n_steps, dtype=np.int64) * 15,
        features={
            "irradiance": irradiance,
            "clear_sky": clear_sky,
            "cloud_index": cloud_index,
        },
        target_name="irradiance",
        koppen_class=koppen_class,
    )


def write_station_csv(path, series: StationSeries) -> None:
    """Write a series in the ingest layout: timestamp first, features after."""
    names = list(series.features)
    header = ",".join(["timestamp"] + names)
    cols = [series.timestamps.astype(float)] + [series.features[n] for n in names]
    table = np.column_stack(cols)
    np.savetxt(path, table, delimiter=",", header=header, comments="",
               fmt=["%d"] + ["%.10f"] * len(names))
