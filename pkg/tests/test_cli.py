import json
import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from igl.cli import (
    ExperimentConfig,
    augment_shift,
    load_config,
    load_idx,
    main,
    record_csv_rows,
    report_from_dir,
    run_experiment,
    write_idx,
)
from igl.core import RoundEntry, RunRecord


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv("IGL_SEED", raising=False)


def _write_images(path, pixel_rows, rows=2, cols=2, count=None, magic=2051):
    data = b"".join(bytes(p) for p in pixel_rows)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">iiii", magic, count if count is not None else len(pixel_rows), rows, cols))
        fh.write(data)


def _write_labels(path, labels, count=None, magic=2049):
    with open(path, "wb") as fh:
        fh.write(struct.pack(">ii", magic, count if count is not None else len(labels)))
        fh.write(bytes(labels))


class TestLoadIdx:
    def test_pixel_scaling(self, tmp_path):
        img = tmp_path / "img"
        lab = tmp_path / "lab"
        _write_images(img, [[0, 255, 128, 7]])
        _write_labels(lab, [5])
        images, labels = load_idx(str(img), str(lab))
        assert images.shape == (1, 4)
        assert np.array_equal(images[0], [0.0, 1.0, 128 / 255, 7 / 255])
        assert labels.dtype == np.int64

    def test_labels_read_in_order(self, tmp_path):
        img = tmp_path / "img"
        lab = tmp_path / "lab"
        _write_images(img, [[0] * 4, [1] * 4, [2] * 4])
        _write_labels(lab, [5, 0, 9])
        _, labels = load_idx(str(img), str(lab))
        assert np.array_equal(labels, [5, 0, 9])

    def test_count_mismatch(self, tmp_path):
        img = tmp_path / "img"
        lab = tmp_path / "lab"
        _write_images(img, [[0] * 4, [0] * 4])
        _write_labels(lab, [1, 2, 3])
        with pytest.raises(ValueError, match="count mismatch"):
            load_idx(str(img), str(lab))

    def test_bad_magic_names_offset(self, tmp_path):
        img = tmp_path / "img"
        lab = tmp_path / "lab"
        _write_images(img, [[0] * 4], magic=2049)
        _write_labels(lab, [1])
        with pytest.raises(ValueError, match="bad magic at offset 0"):
            load_idx(str(img), str(lab))

    def test_truncated_pixels_name_offset(self, tmp_path):
        img = tmp_path / "img"
        lab = tmp_path / "lab"
        _write_images(img, [[0] * 4], count=2)  # header promises 2 images
        _write_labels(lab, [1, 2])
        with pytest.raises(ValueError, match="truncated, expected 8 bytes at offset 16"):
            load_idx(str(img), str(lab))

    def test_truncated_header(self, tmp_path):
        img = tmp_path / "img"
        img.write_bytes(b"\x00\x00")
        with pytest.raises(ValueError, match="offset 0"):
            load_idx(str(img), str(img))

    def test_round_trip_exact(self, tmp_path):
        images = np.array([[0.0, 1.0, 128 / 255, 7 / 255], [1.0, 0.0, 0.0, 1.0]])
        labels = np.array([3, 8])
        write_idx(str(tmp_path / "i"), str(tmp_path / "l"), images, labels)
        loaded_images, loaded_labels = load_idx(str(tmp_path / "i"), str(tmp_path / "l"))
        assert np.array_equal(loaded_images, images)
        assert np.array_equal(loaded_labels, labels)

    @given(
        pixels=st.lists(
            st.lists(st.integers(0, 255), min_size=4, max_size=4), min_size=1, max_size=5
        ),
    )
    @settings(max_examples=30, deadline=None)
    def test_round_trip_any_uint8_grid(self, pixels, tmp_path_factory):
        tmp = tmp_path_factory.mktemp("idx")
        images = np.array(pixels, dtype=np.float64) / 255.0
        labels = np.arange(len(pixels)) % 10
        write_idx(str(tmp / "i"), str(tmp / "l"), images, labels)
        loaded, _ = load_idx(str(tmp / "i"), str(tmp / "l"))
        assert np.array_equal(loaded, images)


class _FixedShiftRng:
    def __init__(self, shift):
        self.shift = np.asarray(shift)

    def integers(self, low, high, size):
        return self.shift


class TestAugmentShift:
    def test_radius_zero_is_identity_copy(self, rng):
        image = rng.random(16)
        out = augment_shift(image, rng, 0)
        assert np.array_equal(out, image)
        assert out is not image

    def test_fixed_shift_moves_pixel(self):
        image = np.zeros(25)
        image[2 * 5 + 2] = 1.0
        out = augment_shift(image, _FixedShiftRng([1, 0]), 2)
        assert out[3 * 5 + 2] == 1.0
        assert out.sum() == 1.0

    def test_mass_never_increases(self, rng):
        image = rng.random(25)
        for _ in range(20):
            out = augment_shift(image, rng, 2)
            assert out.sum() <= image.sum() + 1e-12

    def test_negative_radius_rejected(self, rng):
        with pytest.raises(ValueError):
            augment_shift(np.zeros(4), rng, -1)

    def test_non_square_rejected(self, rng):
        with pytest.raises(ValueError):
            augment_shift(np.zeros(3), _FixedShiftRng([1, 0]), 1)


class TestLoadConfig:
    def test_defaults(self):
        assert load_config() == ExperimentConfig()

    def test_file_values(self, tmp_path):
        cfg_file = tmp_path / "exp.toml"
        cfg_file.write_text('env = "tab2x3"\nalgo = "e2g"\nseeds = [3, 4]\nrounds = 50\n')
        cfg = load_config(str(cfg_file))
        assert cfg.env == "tab2x3"
        assert cfg.algo == "e2g"
        assert cfg.seeds == (3, 4)
        assert cfg.rounds == 50

    def test_flag_overrides_beat_file(self, tmp_path):
        cfg_file = tmp_path / "exp.toml"
        cfg_file.write_text('algo = "e2g"\nsamples = 100\n')
        cfg = load_config(str(cfg_file), {"algo": "cb", "env": None})
        assert cfg.algo == "cb"  # flag wins
        assert cfg.samples == 100  # file value survives a None override
        assert cfg.env == "blob"

    def test_env_seed_wins_over_everything(self, tmp_path, monkeypatch):
        cfg_file = tmp_path / "exp.toml"
        cfg_file.write_text("seeds = [1, 2, 3]\n")
        monkeypatch.setenv("IGL_SEED", "77")
        cfg = load_config(str(cfg_file), {"seeds": (9,)})
        assert cfg.seeds == (77,)

    def test_unknown_key_rejected(self, tmp_path):
        cfg_file = tmp_path / "exp.toml"
        cfg_file.write_text("learning_rate = 0.1\n")
        with pytest.raises(ValueError, match="learning_rate"):
            load_config(str(cfg_file))


class TestExperimentConfigValidation:
    def test_bad_algo(self):
        with pytest.raises(ValueError):
            ExperimentConfig(algo="dqn")

    def test_empty_seeds(self):
        with pytest.raises(ValueError):
            ExperimentConfig(seeds=())

    def test_negative_counts(self):
        with pytest.raises(ValueError):
            ExperimentConfig(samples=-1)
        with pytest.raises(ValueError):
            ExperimentConfig(rounds=-1)


def _tab_cfg(**kw) -> ExperimentConfig:
    defaults = dict(env="tab2x3", algo="e2g", seeds=(7,), rounds=0)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def _read_dir(out_dir) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in out_dir.iterdir()}


class TestRunExperiment:
    def test_zero_rounds_single_seed(self):
        manifest, records = run_experiment(_tab_cfg())
        assert len(manifest.rows) == 1
        row = manifest.rows[0]
        assert row["error"] is None
        assert row["interactions"] == 0
        assert len(records[0]) == 0

    def test_one_run_csv_per_seed_and_table_mean(self, tmp_path):
        out = tmp_path / "exp"
        cfg = _tab_cfg(
            algo="igl-batch", seeds=(0, 1, 2), samples=1500, epochs=15, out_dir=str(out)
        )
        manifest, _ = run_experiment(cfg)
        for seed in (0, 1, 2):
            assert (out / f"run_{seed}.csv").exists()
        values = [r["final_value"] for r in manifest.rows]
        algo, mean, std, n = (out / "table.csv").read_text().splitlines()[1].split(",")
        assert algo == "igl-batch"
        assert int(n) == 3
        assert float(mean) == pytest.approx(float(np.mean(values)), abs=1e-12)
        assert float(std) == pytest.approx(float(np.std(values, ddof=1)), abs=1e-12)

    def test_rerun_is_byte_identical(self, tmp_path):
        out = tmp_path / "exp"
        cfg = _tab_cfg(algo="e2g", seeds=(0, 1), rounds=120, gap=1.0, update_every=40,
                       epochs=5, out_dir=str(out))
        run_experiment(cfg)
        first = _read_dir(out)
        run_experiment(cfg)
        assert _read_dir(out) == first

    def test_report_rebuild_is_idempotent(self, tmp_path):
        out = tmp_path / "exp"
        cfg = _tab_cfg(algo="e2g", seeds=(0, 1), rounds=120, gap=1.0, update_every=40,
                       epochs=5, out_dir=str(out))
        run_experiment(cfg)
        first = _read_dir(out)
        report_from_dir(str(out))
        assert _read_dir(out) == first

    def test_failing_seed_is_isolated(self):
        # the supervised arm needs a labeled context pool, which the
        # enumerable environment does not carry
        manifest, records = run_experiment(_tab_cfg(algo="sup", seeds=(0, 1)))
        assert records == []
        assert all(r["error"] is not None for r in manifest.rows)
        assert manifest.mean_value is None

    def test_batch_learner_solves_reference_env(self):
        manifest, _ = run_experiment(
            _tab_cfg(algo="igl-batch", seeds=(0, 1, 2), samples=2000, epochs=15)
        )
        assert manifest.mean_value is not None
        assert manifest.mean_value >= 0.9

    def test_summary_row_count_matches_seed_count(self, tmp_path):
        out = tmp_path / "exp"
        cfg = _tab_cfg(seeds=(5, 6, 7, 8), out_dir=str(out))
        run_experiment(cfg)
        data = json.loads((out / "summary.json").read_text())
        assert len(data["rows"]) == 4
        assert [r["seed"] for r in data["rows"]] == [5, 6, 7, 8]


class TestReportFiles:
    def test_run_csv_row_per_entry(self):
        entries = [
            RoundEntry(1, "explore", 0, 1.0, indicator=0.25),
            RoundEntry(2, "explore", 2, 0.0),
            RoundEntry(2, "exploit", 1, 1.0),
        ]
        record = RunRecord("e2g", 0, 3, entries, None, 1.0, None)
        rows = record_csv_rows(record)
        assert rows[0] == "round,mode,action,reward,cum_regret,indicator"
        assert len(rows) == 4
        assert rows[1] == "1,explore,0,1.0,0.0,0.25"
        assert rows[2] == "2,explore,2,0.0,1.0,"
        assert rows[3] == "2,exploit,1,1.0,1.0,"

    def test_empty_run_gets_header_only_curves(self, tmp_path):
        out = tmp_path / "exp"
        run_experiment(_tab_cfg(out_dir=str(out)))
        assert (out / "curves.csv").read_text() == "round,mean_cum_regret,mean_accuracy\n"
        assert (out / "table.csv").read_text() == "algo,mean,std,n\n"

    def test_curves_use_min_horizon(self, tmp_path):
        out = tmp_path / "exp"
        cfg = _tab_cfg(algo="e2g", seeds=(0, 1), rounds=60, gap=1.0, update_every=30,
                       epochs=3, out_dir=str(out))
        _, records = run_experiment(cfg)
        horizon = min(len(r) for r in records)
        lines = (out / "curves.csv").read_text().splitlines()
        assert len(lines) == horizon + 1
        assert lines[1].startswith("1,")


class TestMain:
    def test_run_exit_zero(self, capsys):
        code = main(["run", "--env", "tab2x3", "--algo", "e2g", "--rounds", "0", "--seed", "1"])
        assert code == 0
        assert "wall" in capsys.readouterr().out

    def test_run_exit_one_on_seed_failure(self, capsys):
        code = main(["run", "--env", "tab2x3", "--algo", "sup", "--seed", "1"])
        assert code == 1
        assert "ERROR" in capsys.readouterr().out

    def test_theory_prints_worked_example(self, capsys):
        code = main(["theory", "--n", "1000", "--k", "3", "--policy-size", "8"])
        out = capsys.readouterr().out
        assert code == 0
        assert "0.192590" in out
        assert "= 72" in out  # warmup_length(3, 0.5, 1)

    def test_check_env_reports_reference_world(self, capsys):
        code = main(["check-env", "--env", "tab2x3"])
        out = capsys.readouterr().out
        assert code == 0
        assert "feedback depends only on reward: True" in out
        assert "0.2000" in out

    def test_report_rebuilds_and_lists_files(self, tmp_path, capsys):
        out = tmp_path / "exp"
        run_experiment(_tab_cfg(seeds=(3,), out_dir=str(out)))
        code = main(["report", "--out", str(out)])
        printed = capsys.readouterr().out
        assert code == 0
        assert "summary.json" in printed
        assert "table.csv" in printed
