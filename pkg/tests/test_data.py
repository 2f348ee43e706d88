import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from litehar.data import (
    CLASS_ORDER,
    SEVEN_CLASSES,
    SIX_CLASSES,
    DatasetConfig,
    SampleWindow,
    canonical_class_order,
    downsample,
    label_token,
    load_dataset,
    load_dataset_report,
    load_signals,
    normalize,
    parse_label,
    save_recordings_csv,
)


def small_config(channels=4, **kw):
    base = dict(
        class_set="seven",
        source_rate_hz=1000.0,
        target_rate_hz=500.0,
        amplitude_columns=(1, 1 + channels),
    )
    base.update(kw)
    return DatasetConfig(**base)


def write_recording(path, signals, rate=1000.0, timestamp=True):
    signals = np.asarray(signals, dtype=np.float64)
    m, length = signals.shape
    cols = [signals[i] for i in range(m)]
    if timestamp:
        cols = [np.arange(length) / rate] + cols
    np.savetxt(path, np.column_stack(cols), delimiter=",", fmt="%.17g")


class TestDownsample:
    def test_keeps_every_kth_value(self):
        x = np.arange(5.0)
        assert np.array_equal(downsample(x, 2), [0.0, 2.0, 4.0])

    def test_factor_one_is_identity(self):
        x = np.arange(7.0)
        assert np.array_equal(downsample(x, 1), x)

    def test_output_length_is_ceil(self):
        assert downsample(np.arange(6.0), 2).size == 3
        assert downsample(np.arange(7.0), 2).size == 4

    def test_rejects_bad_factor(self):
        with pytest.raises(ValueError, match="factor"):
            downsample(np.arange(4.0), 0)
        with pytest.raises(ValueError, match="factor"):
            downsample(np.arange(4.0), 2.5)


class TestNormalize:
    def test_constant_signal_becomes_zero(self):
        assert np.array_equal(normalize(np.full(6, 5.0)), np.zeros(6))

    def test_two_point_example(self):
        out = normalize(np.array([1.0, -1.0]))
        assert np.allclose(out, [1 / np.sqrt(2), -1 / np.sqrt(2)])

    @given(
        values=st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=2,
            max_size=64,
        ).filter(lambda v: max(v) - min(v) > 1e-6)
    )
    @settings(max_examples=80)
    def test_zero_mean_unit_norm(self, values):
        out = normalize(np.array(values))
        assert abs(out.mean()) < 1e-9
        assert abs(np.linalg.norm(out) - 1.0) < 1e-9

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="empty"):
            normalize(np.array([]))


class TestLabels:
    @pytest.mark.parametrize(
        "name,label",
        [
            ("input_161219_siamak_bed_1.csv", "Lie down"),
            ("input_liedown_2.csv", "Lie down"),
            ("input_fall_10.csv", "Fall"),
            ("input_walk_3.csv", "Walk"),
            ("input_run_1.csv", "Run"),
            ("input_sitdown_4.csv", "Sit down"),
            ("input_standup_9.csv", "Stand up"),
            ("input_pickup_2.csv", "Pick up"),
            ("INPUT_WALK_7.CSV", "Walk"),
            ("input_synth_class03_001.csv", "class03"),
        ],
    )
    def test_parse_label(self, name, label):
        assert parse_label(name) == label

    def test_unknown_token_is_an_error(self):
        with pytest.raises(ValueError, match="no activity token"):
            parse_label("input_jumping_1.csv")

    def test_label_token_inverts_parse(self):
        for label in SEVEN_CLASSES:
            assert parse_label(f"input_{label_token(label)}_0.csv") == label
        assert label_token("class12") == "class12"

    def test_class_sets(self):
        assert SIX_CLASSES == tuple(c for c in CLASS_ORDER if c != "Pick up")
        assert set(SEVEN_CLASSES) == set(CLASS_ORDER)

    def test_canonical_class_order(self):
        assert canonical_class_order(["Walk", "Fall"]) == ("Fall", "Walk")
        assert canonical_class_order(["class02", "Walk", "class01"]) == (
            "Walk",
            "class01",
            "class02",
        )


class TestConfigValidation:
    def test_rates_must_divide(self):
        with pytest.raises(ValueError, match="integer"):
            small_config(source_rate_hz=1000.0, target_rate_hz=300.0)

    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError, match="class_set"):
            small_config(class_set="five")
        with pytest.raises(ValueError, match="amplitude_columns"):
            small_config(amplitude_columns=(5, 2))
        with pytest.raises(ValueError, match="positive"):
            small_config(source_rate_hz=-1.0)
        with pytest.raises(ValueError, match="channels_per_antenna"):
            small_config(channels_per_antenna=0)

    def test_derived_properties(self):
        config = small_config(channels=6)
        assert config.decimation_factor == 2
        assert config.num_channels == 6

    def test_sample_window_validation(self):
        with pytest.raises(ValueError, match="signals"):
            SampleWindow(signals=np.zeros(5), label="Walk", sample_rate_hz=500.0, source_id="x")
        with pytest.raises(ValueError, match="positive"):
            SampleWindow(
                signals=np.zeros((2, 5)), label="Walk", sample_rate_hz=0.0, source_id="x"
            )
        w = SampleWindow(
            signals=np.zeros((3, 8)), label="Walk", sample_rate_hz=500.0, source_id="x"
        )
        assert w.num_channels == 3 and w.length == 8


class TestLoading:
    def _populate(self, root, lengths=(40, 40, 44), seed=0):
        rng = np.random.default_rng(seed)
        names = ["input_walk_1.csv", "input_run_1.csv", "input_walk_2.csv"]
        raw = {}
        for name, length in zip(names, lengths):
            signals = rng.normal(size=(4, length))
            write_recording(root / name, signals)
            raw[name] = signals
        return raw

    def test_shapes_decimation_and_order(self, tmp_path):
        self._populate(tmp_path)
        samples, report = load_dataset_report(tmp_path, small_config())
        assert [s.source_id for s in samples] == [
            "input_run_1.csv",
            "input_walk_1.csv",
            "input_walk_2.csv",
        ]
        assert samples[0].signals.shape == (4, 20)
        assert samples[2].signals.shape == (4, 22)
        assert samples[0].sample_rate_hz == 500.0
        assert report.per_class_counts == (("Walk", 2), ("Run", 1))
        assert report.files_found == 3 and report.files_loaded == 3
        assert not report.from_cache

    def test_rows_are_normalized(self, tmp_path):
        self._populate(tmp_path)
        samples = load_dataset(tmp_path, small_config())
        for s in samples:
            assert np.max(np.abs(s.signals.mean(axis=1))) < 1e-12
            assert np.allclose(np.linalg.norm(s.signals, axis=1), 1.0)

    def test_raw_passthrough_without_preprocessing(self, tmp_path):
        raw = self._populate(tmp_path)
        config = small_config(target_rate_hz=1000.0, normalize_signals=False)
        samples = load_dataset(tmp_path, config)
        by_id = {s.source_id: s for s in samples}
        for name, signals in raw.items():
            assert np.array_equal(by_id[name].signals, signals)

    def test_channels_follow_column_order(self, tmp_path):
        signals = np.vstack([np.full(20, float(j)) for j in range(4)])
        write_recording(tmp_path / "input_walk_1.csv", signals)
        config = small_config(target_rate_hz=1000.0, normalize_signals=False)
        sample = load_dataset(tmp_path, config)[0]
        for j in range(4):
            assert np.all(sample.signals[j] == float(j))

    def test_no_timestamp_column_layout(self, tmp_path):
        rng = np.random.default_rng(1)
        signals = rng.normal(size=(4, 30))
        write_recording(tmp_path / "input_fall_1.csv", signals, timestamp=False)
        config = small_config(
            amplitude_columns=(0, 4), has_timestamp_column=False,
            target_rate_hz=1000.0, normalize_signals=False,
        )
        sample = load_dataset(tmp_path, config)[0]
        assert np.array_equal(sample.signals, signals)

    def test_six_class_set_drops_pickup(self, tmp_path):
        self._populate(tmp_path)
        write_recording(tmp_path / "input_pickup_1.csv", np.zeros((4, 40)) + 1.0)
        samples, report = load_dataset_report(tmp_path, small_config(class_set="six"))
        assert report.dropped_by_class_filter == 1
        assert all(s.label != "Pick up" for s in samples)
        seven, _ = load_dataset_report(tmp_path, small_config())
        assert sum(s.label == "Pick up" for s in seven) == 1

    def test_only_filtered_files_is_an_error(self, tmp_path):
        write_recording(tmp_path / "input_pickup_1.csv", np.ones((4, 40)))
        with pytest.raises(ValueError, match="no samples loaded"):
            load_dataset(tmp_path, small_config(class_set="six"))

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="missing"):
            load_dataset(tmp_path / "missing", small_config())

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ValueError, match="no samples"):
            load_dataset(tmp_path, small_config())

    def test_unknown_activity_is_a_hard_error(self, tmp_path):
        self._populate(tmp_path)
        write_recording(tmp_path / "input_jumping_1.csv", np.ones((4, 40)))
        with pytest.raises(ValueError, match="jumping"):
            load_dataset(tmp_path, small_config())

    def test_column_mismatch_is_a_hard_error(self, tmp_path):
        self._populate(tmp_path)
        write_recording(tmp_path / "input_fall_1.csv", np.ones((3, 40)))
        with pytest.raises(ValueError, match="expected 5 columns"):
            load_dataset(tmp_path, small_config())

    def test_non_finite_cell_names_the_position(self, tmp_path):
        signals = np.ones((4, 40))
        signals[2, 7] = np.nan
        write_recording(tmp_path / "input_fall_1.csv", signals)
        with pytest.raises(ValueError, match=r"input_fall_1\.csv.*row 7, column 3"):
            load_dataset(tmp_path, small_config())

    def test_unparseable_file_is_skipped_with_warning(self, tmp_path, caplog):
        self._populate(tmp_path)
        (tmp_path / "input_walk_bad.csv").write_text("spam,eggs,a,b,c\n1,2,3,4,5\n")
        with caplog.at_level(logging.WARNING, logger="litehar.data"):
            samples, report = load_dataset_report(tmp_path, small_config())
        assert len(samples) == 3
        assert [rel for rel, _ in report.files_skipped] == ["input_walk_bad.csv"]
        assert any("input_walk_bad.csv" in r.message for r in caplog.records)
        assert "skipped" in report.summary()

    def test_nested_directories_are_globbed(self, tmp_path):
        sub = tmp_path / "siamak" / "day1"
        sub.mkdir(parents=True)
        write_recording(sub / "input_walk_1.csv", np.random.default_rng(2).normal(size=(4, 40)))
        samples = load_dataset(tmp_path, small_config())
        assert samples[0].source_id == "siamak/day1/input_walk_1.csv"

    def test_load_signals_single_recording(self, tmp_path):
        raw = self._populate(tmp_path)
        config = small_config(target_rate_hz=1000.0, normalize_signals=False)
        signals = load_signals(tmp_path / "input_walk_1.csv", config)
        assert np.array_equal(signals, raw["input_walk_1.csv"])
        with pytest.raises(FileNotFoundError, match="nope"):
            load_signals(tmp_path / "nope.csv", config)


class TestCache:
    def test_second_load_hits_the_cache(self, tmp_path):
        root = tmp_path / "data"
        root.mkdir()
        rng = np.random.default_rng(3)
        for i in range(3):
            write_recording(root / f"input_walk_{i}.csv", rng.normal(size=(4, 40)))
        cache = tmp_path / "cache"
        cache.mkdir()
        config = small_config()
        first, r1 = load_dataset_report(root, config, cache_dir=cache)
        second, r2 = load_dataset_report(root, config, cache_dir=cache)
        assert not r1.from_cache and r2.from_cache
        assert [s.label for s in first] == [s.label for s in second]
        for a, b in zip(first, second):
            assert a.source_id == b.source_id
            assert np.array_equal(a.signals, b.signals)

    def test_content_change_invalidates(self, tmp_path):
        root = tmp_path / "data"
        root.mkdir()
        write_recording(root / "input_walk_0.csv", np.random.default_rng(4).normal(size=(4, 40)))
        cache = tmp_path / "cache"
        cache.mkdir()
        config = small_config()
        load_dataset_report(root, config, cache_dir=cache)
        write_recording(root / "input_walk_0.csv", np.random.default_rng(5).normal(size=(4, 40)))
        _, report = load_dataset_report(root, config, cache_dir=cache)
        assert not report.from_cache

    def test_config_change_invalidates(self, tmp_path):
        root = tmp_path / "data"
        root.mkdir()
        write_recording(root / "input_walk_0.csv", np.random.default_rng(6).normal(size=(4, 40)))
        cache = tmp_path / "cache"
        cache.mkdir()
        load_dataset_report(root, small_config(), cache_dir=cache)
        _, report = load_dataset_report(
            root, small_config(normalize_signals=False), cache_dir=cache
        )
        assert not report.from_cache

    def test_corrupt_cache_falls_back_to_parsing(self, tmp_path):
        root = tmp_path / "data"
        root.mkdir()
        write_recording(root / "input_walk_0.csv", np.random.default_rng(7).normal(size=(4, 40)))
        cache = tmp_path / "cache"
        cache.mkdir()
        _, r1 = load_dataset_report(root, small_config(), cache_dir=cache)
        for f in cache.iterdir():
            f.write_bytes(b"garbage")
        samples, r2 = load_dataset_report(root, small_config(), cache_dir=cache)
        assert not r2.from_cache
        assert len(samples) == 1


class TestExport:
    def test_round_trip_is_bit_exact(self, tmp_path):
        src = tmp_path / "src"
        src.mkdir()
        rng = np.random.default_rng(8)
        for i, token in enumerate(["walk", "fall", "sitdown"]):
            write_recording(src / f"input_{token}_{i}.csv", rng.normal(size=(4, 40)))
        samples = load_dataset(src, small_config())

        out = tmp_path / "export"
        save_recordings_csv(samples, out, include_timestamp=True)
        reload_config = small_config(
            source_rate_hz=500.0, target_rate_hz=500.0, normalize_signals=False
        )
        back = load_dataset(out, reload_config)
        assert [s.source_id for s in back] == [s.source_id for s in samples]
        for a, b in zip(samples, back):
            assert a.label == b.label
            assert np.array_equal(a.signals, b.signals)

    def test_export_without_timestamp(self, tmp_path):
        window = SampleWindow(
            signals=np.random.default_rng(9).normal(size=(3, 10)),
            label="Walk",
            sample_rate_hz=500.0,
            source_id="input_walk_9.csv",
        )
        out = tmp_path / "export"
        save_recordings_csv([window], out, include_timestamp=False)
        config = DatasetConfig(
            class_set="seven",
            source_rate_hz=500.0,
            target_rate_hz=500.0,
            amplitude_columns=(0, 3),
            has_timestamp_column=False,
            normalize_signals=False,
        )
        back = load_dataset(out, config)
        assert np.array_equal(back[0].signals, window.signals)

    def test_names_are_prefixed_when_token_is_missing(self, tmp_path):
        window = SampleWindow(
            signals=np.zeros((2, 8)),
            label="Run",
            sample_rate_hz=500.0,
            source_id="trial 7 (copy).dat",
        )
        out = tmp_path / "export"
        save_recordings_csv([window], out)
        names = [p.name for p in out.iterdir()]
        assert len(names) == 1
        assert names[0].startswith("input_run_")
        assert parse_label(names[0]) == "Run"

    def test_duplicate_names_are_rejected(self, tmp_path):
        windows = [
            SampleWindow(
                signals=np.zeros((2, 8)), label="Run",
                sample_rate_hz=500.0, source_id="a/input_run_1.csv",
            ),
            SampleWindow(
                signals=np.zeros((2, 8)), label="Run",
                sample_rate_hz=500.0, source_id="b/input_run_1.csv",
            ),
        ]
        with pytest.raises(ValueError, match="duplicate"):
            save_recordings_csv(windows, tmp_path / "export")
