"""Synthetic station generator properties."""

import numpy as np

from qkforecast import synth


class TestGenerator:
    def test_shapes_and_columns(self):
        series = synth.generate_synthetic_station(500, seed=0)
        assert len(series) == 500
        assert tuple(series.features) == synth.FEATURE_NAMES
        assert series.station_code == "SYN0"
        assert series.koppen_class == "Cfa"
        # fifteen-minute cadence
        assert np.all(np.diff(series.timestamps) == 15)

    def test_deterministic_per_seed(self):
        a = synth.generate_synthetic_station(300, seed=9)
        b = synth.generate_synthetic_station(300, seed=9)
        c = synth.generate_synthetic_station(300, seed=10)
        for name in synth.FEATURE_NAMES:
            np.testing.assert_array_equal(a.features[name], b.features[name])
        assert not np.array_equal(a.features["irradiance"],
                                  c.features["irradiance"])

    def test_irradiance_is_attenuated_clear_sky(self):
        """Clear sky scaled by the cloud channel reconstructs the target."""
        series = synth.generate_synthetic_station(2000, seed=3)
        irr = series.features["irradiance"]
        clear = series.features["clear_sky"]
        cloud = series.features["cloud_index"]
        assert irr.mean() < clear.mean()
        reconstructed = clear * cloud
        assert np.corrcoef(reconstructed, irr)[0, 1] > 0.98

    def test_cloud_index_tracks_attenuation(self):
        """Away from the curve's zero crossings the ratio follows the index."""
        series = synth.generate_synthetic_station(3000, seed=4)
        clear = series.features["clear_sky"]
        mask = clear > 100.0
        ratio = series.features["irradiance"][mask] / clear[mask]
        corr = np.corrcoef(ratio, series.features["cloud_index"][mask])[0, 1]
        assert corr > 0.9

    def test_daily_periodicity(self):
        """Lag-96 autocorrelation of clear sky dominates other long lags."""
        series = synth.generate_synthetic_station(96 * 20, seed=5)
        clear = series.features["clear_sky"]
        clear = clear - clear.mean()

        def autocorr(lag):
            return float(np.dot(clear[:-lag], clear[lag:])
                         / np.dot(clear, clear))

        assert autocorr(96) > autocorr(48)
        assert autocorr(96) > 0.5


class TestCsvRoundTrip:
    def test_write_then_read_back(self, tmp_path):
        series = synth.generate_synthetic_station(200, seed=6)
        path = tmp_path / "syn.csv"
        synth.write_station_csv(path, series)
        lines = path.read_text().splitlines()
        assert lines[0] == "timestamp," + ",".join(synth.FEATURE_NAMES)
        assert len(lines) == 201
        first = lines[1].split(",")
        assert first[0] == "0"
        np.testing.assert_allclose(float(first[1]),
                                   series.features["irradiance"][0],
                                   atol=1e-9)
