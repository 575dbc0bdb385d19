"""
Tests for the experiment runners and their configuration
"""

import csv
import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from config.experiment_configs import get_all_experiment_ids, get_all_experiments, get_experiment_config
from src.colorspace import rgb_to_hcl_array
from src.distance import DistanceKind
from src.error_recovery import DomainError, ImageIOError
from src.experiments import (
    DEVIATION_METRIC,
    DILATION_METHODS,
    ExperimentConfig,
    byte_deviation_pct,
    circular_mean_hue,
    run_closing_comparison,
    run_component_trace,
    run_dilation_comparison,
    run_double_closing_deviation,
    run_experiment,
    squared_deviation_pct,
    ssim_score,
)
from src.image_io import grid_image, random_binary_images, save_png
from src.morphology import METHODS, ColorImage

CONSTANT_RGB = (0.2, 0.6, 0.4)


def read_csv(path: Path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


# ============================================================================
# Configuration
# ============================================================================

def test_presets_cover_every_experiment():
    assert set(get_all_experiment_ids()) == {"dilation-cmp", "closing-cmp", "component-trace", "idempotence"}
    assert get_experiment_config("closing-cmp")["se_size"] == 9
    assert get_all_experiments()["idempotence"]["seed"] == 42


def test_dilation_methods_come_from_the_preset():
    assert DILATION_METHODS == tuple(get_experiment_config("dilation-cmp")["methods"])
    assert set(DILATION_METHODS) == set(METHODS)


def test_run_logs_the_preset_display_name(tmp_path, caplog):
    cfg = ExperimentConfig.from_preset("idempotence", tmp_path, count=1, size=6)
    with caplog.at_level("INFO", logger="src.experiments"):
        run_experiment(cfg)
    assert get_experiment_config("idempotence")["display_name"] in caplog.text


def test_get_experiment_config_returns_a_copy():
    preset = get_experiment_config("idempotence")
    preset["count"] = 1
    assert get_experiment_config("idempotence")["count"] == 100


def test_unknown_preset_lists_available_ones():
    with pytest.raises(KeyError, match="Available experiments"):
        get_experiment_config("top-hat")


def test_from_preset_applies_overrides(tmp_path):
    cfg = ExperimentConfig.from_preset("idempotence", tmp_path, count=5, size=None, kinds=("polar",))
    assert (cfg.seed, cfg.count, cfg.size, cfg.se_size) == (42, 5, 32, 3)
    assert cfg.kinds == (DistanceKind.POLAR,)
    assert not cfg.needs_input


@pytest.mark.parametrize("overrides", [
    {"se_size": 4},
    {"se_size": 0},
    {"count": 0},
    {"size": 0},
    {"workers": 0},
])
def test_config_validation(tmp_path, overrides):
    with pytest.raises(DomainError):
        ExperimentConfig.from_preset("idempotence", tmp_path, **overrides)


def test_config_requires_seed_or_input(tmp_path):
    with pytest.raises(DomainError):
        ExperimentConfig("component-trace", tmp_path)
    with pytest.raises(DomainError):
        ExperimentConfig.from_preset("dilation-cmp", tmp_path)
    with pytest.raises(DomainError):
        ExperimentConfig.from_preset("no-such-experiment", tmp_path)


# ============================================================================
# Metrics
# ============================================================================

def test_byte_deviation_pct():
    black = ColorImage.constant(2, 2, (0.0, 0.0, 0.0))
    white = ColorImage.constant(2, 2, (1.0, 1.0, 1.0))
    assert byte_deviation_pct(black, white) == pytest.approx(100.0)
    assert byte_deviation_pct(black, black) == 0.0
    one_channel = ColorImage.constant(2, 2, (1.0, 0.0, 0.0))
    assert byte_deviation_pct(black, one_channel) == pytest.approx(100.0 / 3.0)


def test_squared_deviation_pct():
    black = ColorImage.constant(2, 2, (0.0, 0.0, 0.0))
    assert squared_deviation_pct(black, ColorImage.constant(2, 2, (1.0, 1.0, 1.0))) == pytest.approx(100.0)
    assert squared_deviation_pct(black, black) == 0.0
    half_red = ColorImage.constant(2, 2, (0.5, 0.0, 0.0))
    assert squared_deviation_pct(black, half_red) == pytest.approx(100.0 * 0.25 / 3.0)
    assert squared_deviation_pct(half_red, black) == squared_deviation_pct(black, half_red)


def test_circular_mean_hue_wraps():
    wrapped = circular_mean_hue(np.array([0.95, 0.05]))
    assert min(wrapped, 1.0 - wrapped) <= 1e-12
    assert circular_mean_hue(np.array([0.2, 0.3])) == pytest.approx(0.25)
    assert 0.0 <= circular_mean_hue(np.array([1.0 - 1e-17, 0.0])) < 1.0


def test_ssim_score():
    image = ColorImage.constant(8, 8, CONSTANT_RGB)
    assert ssim_score(image, image) == pytest.approx(1.0)
    assert np.isnan(ssim_score(ColorImage.constant(2, 2, CONSTANT_RGB), ColorImage.constant(2, 2, CONSTANT_RGB)))


# ============================================================================
# Runners
# ============================================================================

def test_dilation_comparison_on_constant_and_binary_inputs(tmp_path):
    save_png(ColorImage.constant(8, 8, CONSTANT_RGB), tmp_path / "flat.png")
    save_png(random_binary_images(seed=3, count=1, size=16)[0], tmp_path / "binary.png")
    cfg = ExperimentConfig.from_preset(
        "dilation-cmp", tmp_path / "out", input_paths=(tmp_path / "flat.png", tmp_path / "binary.png")
    )
    outputs = run_dilation_comparison(cfg)

    flat = ColorImage.constant(8, 8, (51 / 255, 153 / 255, 102 / 255))
    assert all(image == flat for image in outputs["flat"].values())
    binary = outputs["binary"]
    for method in ("dles-mhyab", "dles-polar", "dles-1h"):
        assert binary[method] == binary["channelwise"]
    for method in DILATION_METHODS:
        assert (tmp_path / "out" / f"binary_dilate_{method}.png").exists()


def test_closing_comparison_removes_grid(tmp_path):
    save_png(grid_image(size=32, line_width=3, spacing=16), tmp_path / "grid.png")
    cfg = ExperimentConfig.from_preset("closing-cmp", tmp_path / "out", input_paths=(tmp_path / "grid.png",))
    outputs = run_closing_comparison(cfg)

    for kind, image in outputs["grid"].items():
        assert np.all(image.pixels == 1.0), kind
        assert (tmp_path / "out" / f"grid_close_{kind.value}.png").exists()


def test_runner_reports_missing_input(tmp_path):
    cfg = ExperimentConfig.from_preset("closing-cmp", tmp_path, input_paths=(tmp_path / "missing.png",))
    with pytest.raises(ImageIOError):
        run_closing_comparison(cfg)


def test_component_trace_of_constant_image(tmp_path):
    cfg = ExperimentConfig.from_preset("component-trace", tmp_path, count=1)
    image = ColorImage.constant(6, 6, CONSTANT_RGB)
    trace = run_component_trace(cfg, images=[image])

    h, c, lm = rgb_to_hcl_array(np.array(CONSTANT_RGB))
    assert len(trace.rows) == 3
    for row in trace.rows:
        assert (row.mean_h, row.mean_c, row.mean_lm) == pytest.approx((h, c, lm), abs=1e-12)


def test_component_trace_csv_has_one_row_per_image_and_kind(tmp_path):
    cfg = ExperimentConfig.from_preset("component-trace", tmp_path, seed=7, count=4, size=8)
    trace = run_experiment(cfg)

    rows = read_csv(tmp_path / "component_trace.csv")
    assert rows[0] == ["image_index", "kind", "mean_h", "mean_c", "mean_lm"]
    assert len(rows) == 1 + 4 * 3
    assert [row[1] for row in rows[1:4]] == ["mhyab", "polar", "1h"]
    for kind, (h, c, lm) in trace.grand_means.items():
        assert 0.0 <= h < 1.0
        assert 0.0 <= c <= 1.0
        assert -1.0 <= lm <= 1.0


def test_component_trace_polar_closing_is_at_least_as_light_as_mhyab(tmp_path):
    """Seed 42, 100 random 32x32 images, 3x3 SE."""
    trace = run_component_trace(ExperimentConfig.from_preset("component-trace", tmp_path))
    assert trace.grand_means[DistanceKind.POLAR][2] >= trace.grand_means[DistanceKind.MHYAB][2]


def test_deviation_is_zero_for_constant_images(tmp_path):
    cfg = ExperimentConfig.from_preset("idempotence", tmp_path, count=2, size=8)
    images = [ColorImage.constant(8, 8, CONSTANT_RGB), ColorImage.constant(8, 8, (1.0, 0.0, 0.5))]
    report = run_double_closing_deviation(cfg, images=images)

    assert all(value == 0.0 for value in report.mean_pct.values())
    assert report.control_pct == 0.0
    assert all(value == 0.0 for value in report.mean_abs_pct.values())
    assert report.mean_ssim[DistanceKind.MHYAB] == pytest.approx(1.0)


def test_deviation_outputs(tmp_path):
    cfg = ExperimentConfig.from_preset("idempotence", tmp_path, seed=5, count=3, size=12, workers=2)
    report = run_experiment(cfg)

    rows = read_csv(tmp_path / "deviation.csv")
    assert rows[0] == ["image_index", "kind", "deviation_pct", "abs_byte_pct", "ssim"]
    assert len(rows) == 1 + 3 * 4
    assert rows[4] == ["0", "channelwise", "0", "", ""]

    summary = json.loads((tmp_path / "deviation_summary.json").read_text(encoding="utf-8"))
    assert summary["metric"] == DEVIATION_METRIC
    assert summary["image_count"] == 3
    assert summary["mean_pct"]["polar"] == pytest.approx(report.mean_pct[DistanceKind.POLAR])
    assert summary["mean_abs_byte_pct"]["1h"] == pytest.approx(report.mean_abs_pct[DistanceKind.ONE_H])
    for kind in report.kinds:
        assert all(value >= 0.0 for value in report.per_image[kind])
        assert report.mean_pct[kind] == pytest.approx(np.mean(report.per_image[kind]))
        assert len(report.abs_per_image[kind]) == 3


def test_runs_are_reproducible(tmp_path):
    first = run_experiment(ExperimentConfig.from_preset("idempotence", tmp_path / "a", seed=9, count=2, size=10))
    second = run_experiment(ExperimentConfig.from_preset("idempotence", tmp_path / "b", seed=9, count=2, size=10))
    assert first.per_image == second.per_image
    assert (tmp_path / "a" / "deviation.csv").read_bytes() == (tmp_path / "b" / "deviation.csv").read_bytes()


def test_double_closing_deviation_on_random_images(tmp_path):
    """Seed 42, 100 random 32x32 images, 3x3 SE."""
    start = time.perf_counter()
    report = run_double_closing_deviation(ExperimentConfig.from_preset("idempotence", tmp_path))
    elapsed = time.perf_counter() - start

    means = report.mean_pct
    assert means[DistanceKind.MHYAB] <= means[DistanceKind.POLAR] <= means[DistanceKind.ONE_H]
    assert all(0.05 <= value <= 3.0 for value in means.values())
    assert report.control_pct == 0.0
    assert elapsed < 120.0
