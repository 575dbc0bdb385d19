"""
Experiment runners for the colour morphology harness

Handles:
- Dilation comparison (channel-wise, white reference, DLES under three distances)
- Closing comparison under the three distances
- Component trace: per-image hue/chroma/luminance means of closings (CSV)
- Double-closing deviation: how far a second closing moves from the first
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from skimage.metrics import mean_squared_error, structural_similarity

from config.experiment_configs import get_all_experiment_ids, get_experiment_config
from src.batch_processor import BatchProcessor
from src.colorspace import TWO_PI, rgb_to_hcl_array
from src.distance import DistanceKind, OneHWeight
from src.error_recovery import DomainError, MorphologyError
from src.image_io import load_png, random_images, save_png, write_csv, write_json
from src.morphology import (
    ColorImage,
    StructuringElement,
    apply_operation,
    channelwise_dilate,
    channelwise_erode,
    dles_close,
    make_square_se,
)

logger = logging.getLogger(__name__)

DEVIATION_METRIC = "mean_sq_pct"

DILATION_METHODS: Tuple[str, ...] = tuple(get_experiment_config("dilation-cmp")["methods"])

ALL_KINDS: Tuple[DistanceKind, ...] = (DistanceKind.MHYAB, DistanceKind.POLAR, DistanceKind.ONE_H)


@dataclass
class ExperimentConfig:
    """
    Validated parameters of one experiment run.

    Raises:
        DomainError: On an unknown experiment id, an even or non-positive SE
            size, count/size < 1, or a missing seed/input for the experiment
    """
    experiment_id: str
    output_dir: Path
    se_size: int = 3
    kinds: Tuple[DistanceKind, ...] = ALL_KINDS
    input_paths: Tuple[Path, ...] = ()
    seed: Optional[int] = None
    count: int = 100
    size: int = 32
    one_h_weight: OneHWeight = OneHWeight.DIFF
    workers: int = 1

    def __post_init__(self):
        if self.experiment_id not in get_all_experiment_ids():
            raise DomainError(
                f"Unknown experiment '{self.experiment_id}'. Available experiments: {get_all_experiment_ids()}"
            )
        self.output_dir = Path(self.output_dir)
        self.input_paths = tuple(Path(p) for p in self.input_paths)
        self.kinds = tuple(DistanceKind(k) for k in self.kinds)
        if not isinstance(self.se_size, int) or self.se_size < 1 or self.se_size % 2 == 0:
            raise DomainError(f"SE size must be a positive odd integer, got {self.se_size!r}")
        if self.count < 1 or self.size < 1:
            raise DomainError(f"count and size must be >= 1 (got count={self.count}, size={self.size})")
        if not self.kinds:
            raise DomainError("At least one distance kind is required")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.needs_input:
            if not self.input_paths:
                raise DomainError(f"Experiment '{self.experiment_id}' needs at least one --input image")
        elif self.seed is None:
            raise DomainError(f"Experiment '{self.experiment_id}' generates its inputs and needs a seed")

    @property
    def needs_input(self) -> bool:
        return bool(get_experiment_config(self.experiment_id)["needs_input"])

    @property
    def se(self) -> StructuringElement:
        return make_square_se(self.se_size)

    @classmethod
    def from_preset(cls, experiment_id: str, output_dir: Path, **overrides) -> "ExperimentConfig":
        """Preset values for experiment_id, with every non-None override applied on top."""
        try:
            preset = get_experiment_config(experiment_id)
        except KeyError as e:
            raise DomainError(str(e.args[0])) from e
        values = {
            "se_size": preset["se_size"],
            "kinds": tuple(preset["kinds"]),
        }
        for key in ("seed", "count", "size"):
            if key in preset:
                values[key] = preset[key]
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(experiment_id=experiment_id, output_dir=output_dir, **values)


@dataclass
class DeviationReport:
    """
    Per-kind deviation between first and second closing, in percent.

    `per_image[kind]` holds the mean squared difference (RGB in [0, 1], as a
    percentage) per image in index order and `mean_pct[kind]` is their
    arithmetic mean. `abs_per_image` and `ssim_per_image` carry the mean
    absolute byte difference and the structural similarity of the same pairs.
    """
    kinds: Tuple[DistanceKind, ...]
    per_image: Dict[DistanceKind, List[float]]
    abs_per_image: Dict[DistanceKind, List[float]]
    ssim_per_image: Dict[DistanceKind, List[float]]
    control_per_image: List[float]
    metric: str = DEVIATION_METRIC

    @property
    def mean_pct(self) -> Dict[DistanceKind, float]:
        return {kind: float(np.mean(self.per_image[kind])) for kind in self.kinds}

    @property
    def mean_abs_pct(self) -> Dict[DistanceKind, float]:
        return {kind: float(np.mean(self.abs_per_image[kind])) for kind in self.kinds}

    @property
    def mean_ssim(self) -> Dict[DistanceKind, float]:
        return {kind: float(np.mean(self.ssim_per_image[kind])) for kind in self.kinds}

    @property
    def control_pct(self) -> float:
        """Mean deviation of the channel-wise closing (0 for an idempotent closing)."""
        return float(np.mean(self.control_per_image))

    def to_dict(self) -> Dict[str, object]:
        return {
            "metric": self.metric,
            "image_count": len(self.control_per_image),
            "mean_pct": {kind.value: value for kind, value in self.mean_pct.items()},
            "mean_abs_byte_pct": {kind.value: value for kind, value in self.mean_abs_pct.items()},
            "mean_ssim": {kind.value: value for kind, value in self.mean_ssim.items()},
            "channelwise_control_pct": self.control_pct,
        }


@dataclass(frozen=True)
class TraceRow:
    image_index: int
    kind: DistanceKind
    mean_h: float
    mean_c: float
    mean_lm: float


@dataclass
class ComponentTrace:
    """Per-image component means of the closing results, one row per image and kind."""
    kinds: Tuple[DistanceKind, ...]
    rows: List[TraceRow] = field(default_factory=list)

    def rows_for(self, kind: DistanceKind) -> List[TraceRow]:
        return [row for row in self.rows if row.kind is kind]

    @property
    def grand_means(self) -> Dict[DistanceKind, Tuple[float, float, float]]:
        """(hue, chroma, luminance) over all images; hue averaged on the circle."""
        means = {}
        for kind in self.kinds:
            rows = self.rows_for(kind)
            means[kind] = (
                circular_mean_hue(np.array([row.mean_h for row in rows])),
                float(np.mean([row.mean_c for row in rows])),
                float(np.mean([row.mean_lm for row in rows])),
            )
        return means


# ============================================================================
# Metrics
# ============================================================================

def circular_mean_hue(h: np.ndarray) -> float:
    """Circular mean of hues given as fractions of a turn, result in [0, 1)."""
    angles = TWO_PI * np.asarray(h, dtype=np.float64).ravel()
    mean = np.arctan2(np.mean(np.sin(angles)), np.mean(np.cos(angles))) / TWO_PI
    mean = float(np.mod(mean, 1.0))
    # np.mod can round a tiny negative up to exactly 1.0
    return 0.0 if mean >= 1.0 else mean


def squared_deviation_pct(first: ColorImage, second: ColorImage) -> float:
    """Mean over pixels and channels of (delta RGB)^2 with RGB in [0, 1], in percent."""
    return float(mean_squared_error(first.pixels, second.pixels) * 100.0)


def byte_deviation_pct(first: ColorImage, second: ColorImage) -> float:
    """Mean over pixels of sum_channel |delta byte| / (3 * 255), in percent."""
    a = first.to_bytes().astype(np.int32)
    b = second.to_bytes().astype(np.int32)
    return float(np.mean(np.abs(a - b)) / 255.0 * 100.0)


def ssim_score(first: ColorImage, second: ColorImage) -> float:
    """SSIM on the byte images; NaN when the image is too small for a 3x3 window."""
    side = min(first.width, first.height)
    win_size = min(7, side if side % 2 else side - 1)
    if win_size < 3:
        return float("nan")
    return float(structural_similarity(
        first.to_bytes(), second.to_bytes(), channel_axis=2, data_range=255, win_size=win_size
    ))


def component_means(image: ColorImage) -> Tuple[float, float, float]:
    hcl = rgb_to_hcl_array(image.pixels)
    return (
        circular_mean_hue(hcl[..., 0]),
        float(np.mean(hcl[..., 1])),
        float(np.mean(hcl[..., 2])),
    )


# ============================================================================
# Runners
# ============================================================================

def _input_images(cfg: ExperimentConfig) -> List[Tuple[str, ColorImage]]:
    return [(path.stem, load_png(path)) for path in cfg.input_paths]


def _generated_images(cfg: ExperimentConfig, images: Optional[Sequence[ColorImage]]) -> List[ColorImage]:
    if images is not None:
        return list(images)
    return random_images(cfg.seed, cfg.count, cfg.size)


def _run_batch(cfg: ExperimentConfig, images: Sequence[ColorImage], func: Callable, description: str):
    processor = BatchProcessor(max_concurrent=cfg.workers, description=description)
    result = processor.process_batch(images, func)
    if result.failed:
        first_index, first_error = next(iter(result.errors.items()))
        raise MorphologyError(
            f"{result.failed}/{result.total_jobs} images failed in {description} "
            f"(first: image {first_index}: {first_error})"
        )
    return result.results


def dilation_comparison(
    image: ColorImage,
    se: StructuringElement,
    one_h_weight: OneHWeight = OneHWeight.DIFF,
    workers: int = 1
) -> Dict[str, ColorImage]:
    """Dilate one image with every comparison method, keyed by method name."""
    return {
        method: apply_operation("dilate", image, se, method, one_h_weight, workers)
        for method in DILATION_METHODS
    }


def run_dilation_comparison(cfg: ExperimentConfig) -> Dict[str, Dict[str, ColorImage]]:
    """
    Dilate each input with the five methods and save the results as
    `<stem>_dilate_<method>.png`.

    Returns:
        {input stem: {method: dilated image}}
    """
    logger.info(f"Running dilation comparison (SE {cfg.se_size}x{cfg.se_size}, {len(cfg.input_paths)} inputs)")
    outputs = {}
    for stem, image in _input_images(cfg):
        results = dilation_comparison(image, cfg.se, cfg.one_h_weight, cfg.workers)
        for method, result in results.items():
            save_png(result, cfg.output_dir / f"{stem}_dilate_{method}.png")
        outputs[stem] = results
        logger.info(f"✓ Dilation comparison done for {stem}")
    return outputs


def run_closing_comparison(cfg: ExperimentConfig) -> Dict[str, Dict[DistanceKind, ColorImage]]:
    """
    Close each input under every configured kind and save `<stem>_close_<kind>.png`.

    Returns:
        {input stem: {kind: closed image}}
    """
    logger.info(f"Running closing comparison (SE {cfg.se_size}x{cfg.se_size}, {len(cfg.input_paths)} inputs)")
    outputs = {}
    for stem, image in _input_images(cfg):
        results = {}
        for kind in cfg.kinds:
            results[kind] = dles_close(image, cfg.se, kind, cfg.one_h_weight, cfg.workers)
            save_png(results[kind], cfg.output_dir / f"{stem}_close_{kind.value}.png")
        outputs[stem] = results
        logger.info(f"✓ Closing comparison done for {stem}")
    return outputs


def run_component_trace(
    cfg: ExperimentConfig,
    images: Optional[Sequence[ColorImage]] = None
) -> ComponentTrace:
    """
    Close every image under each kind and record the component means of the
    result; writes `component_trace.csv` (image_index, kind, mean_h, mean_c, mean_lm).

    Args:
        cfg: Experiment configuration
        images: Inputs to use instead of the seeded random images
    """
    inputs = _generated_images(cfg, images)
    se = cfg.se
    logger.info(f"Running component trace ({len(inputs)} images, kinds={[k.value for k in cfg.kinds]})")

    def trace_image(index: int, image: ColorImage) -> List[TraceRow]:
        rows = []
        for kind in cfg.kinds:
            mean_h, mean_c, mean_lm = component_means(dles_close(image, se, kind, cfg.one_h_weight))
            rows.append(TraceRow(index, kind, mean_h, mean_c, mean_lm))
        return rows

    per_image = _run_batch(cfg, inputs, trace_image, "component trace")
    trace = ComponentTrace(kinds=cfg.kinds, rows=[row for rows in per_image for row in rows])
    write_trace_csv(trace, cfg.output_dir / "component_trace.csv")

    for kind, (h, c, lm) in trace.grand_means.items():
        logger.info(f"  {kind.value}: mean H={h:.4f}, mean C={c:.4f}, mean Lm={lm:.4f}")
    return trace


def run_double_closing_deviation(
    cfg: ExperimentConfig,
    images: Optional[Sequence[ColorImage]] = None
) -> DeviationReport:
    """
    Close every image twice under each kind and measure the squared deviation
    between first and second closing (plus the absolute byte deviation and
    SSIM); channel-wise closing runs alongside as a control. Writes `deviation.csv` and `deviation_summary.json`.

    Args:
        cfg: Experiment configuration
        images: Inputs to use instead of the seeded random images
    """
    inputs = _generated_images(cfg, images)
    se = cfg.se
    logger.info(f"Running double-closing deviation ({len(inputs)} images, SE {cfg.se_size}x{cfg.se_size})")

    def channelwise_close(image: ColorImage) -> ColorImage:
        return channelwise_erode(channelwise_dilate(image, se), se)

    def deviate_image(index: int, image: ColorImage) -> Tuple[Dict[DistanceKind, Tuple[float, float, float]], float]:
        values = {}
        for kind in cfg.kinds:
            first = dles_close(image, se, kind, cfg.one_h_weight)
            second = dles_close(first, se, kind, cfg.one_h_weight)
            values[kind] = (
                squared_deviation_pct(first, second),
                byte_deviation_pct(first, second),
                ssim_score(first, second),
            )
        first = channelwise_close(image)
        control = squared_deviation_pct(first, channelwise_close(first))
        return values, control

    per_image = _run_batch(cfg, inputs, deviate_image, "double closing")
    report = DeviationReport(
        kinds=cfg.kinds,
        per_image={kind: [values[kind][0] for values, _ in per_image] for kind in cfg.kinds},
        abs_per_image={kind: [values[kind][1] for values, _ in per_image] for kind in cfg.kinds},
        ssim_per_image={kind: [values[kind][2] for values, _ in per_image] for kind in cfg.kinds},
        control_per_image=[control for _, control in per_image],
    )
    write_deviation_csv(report, cfg.output_dir / "deviation.csv")
    write_json(cfg.output_dir / "deviation_summary.json", report.to_dict())

    for kind, value in report.mean_pct.items():
        logger.info(
            f"  {kind.value}: mean squared deviation {value:.4f} %, "
            f"abs {report.mean_abs_pct[kind]:.4f} %, SSIM {report.mean_ssim[kind]:.4f}"
        )
    logger.info(f"  channelwise control: {report.control_pct:.4f} %")
    return report


# ============================================================================
# CSV output
# ============================================================================

TRACE_HEADER = ("image_index", "kind", "mean_h", "mean_c", "mean_lm")
DEVIATION_HEADER = ("image_index", "kind", "deviation_pct", "abs_byte_pct", "ssim")


def write_trace_csv(trace: ComponentTrace, path: Path) -> Path:
    rows = [
        (row.image_index, row.kind.value, row.mean_h, row.mean_c, row.mean_lm)
        for row in trace.rows
    ]
    return write_csv(path, TRACE_HEADER, rows)


def write_deviation_csv(report: DeviationReport, path: Path) -> Path:
    """One row per image and kind; the channel-wise control uses kind 'channelwise'."""
    rows = []
    for index, control in enumerate(report.control_per_image):
        for kind in report.kinds:
            rows.append((
                index, kind.value, report.per_image[kind][index],
                report.abs_per_image[kind][index], report.ssim_per_image[kind][index],
            ))
        rows.append((index, "channelwise", control, "", ""))
    return write_csv(path, DEVIATION_HEADER, rows)


EXPERIMENT_RUNNERS: Dict[str, Callable[[ExperimentConfig], object]] = {
    "dilation-cmp": run_dilation_comparison,
    "closing-cmp": run_closing_comparison,
    "component-trace": run_component_trace,
    "idempotence": run_double_closing_deviation,
}


def run_experiment(cfg: ExperimentConfig):
    logger.info(f"Experiment {cfg.experiment_id}: {get_experiment_config(cfg.experiment_id)['display_name']}")
    return EXPERIMENT_RUNNERS[cfg.experiment_id](cfg)
