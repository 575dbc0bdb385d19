"""
Experiment presets for the colour morphology harness

Each preset fixes the structuring-element size, image source and distance
kinds of one experiment. CLI flags override individual fields.
"""

from typing import Any, Dict, List


EXPERIMENT_CONFIGS: Dict[str, Dict[str, Any]] = {
    "dilation-cmp": {
        "experiment_id": "dilation-cmp",
        "display_name": "Dilation: channel-wise, white reference and DLES",
        "needs_input": True,
        "se_size": 3,
        "kinds": ["mhyab", "polar", "1h"],
        "methods": ["channelwise", "white-ref", "dles-mhyab", "dles-polar", "dles-1h"]
    },

    "closing-cmp": {
        "experiment_id": "closing-cmp",
        "display_name": "Closing under the three distances",
        "needs_input": True,
        "se_size": 9,
        "kinds": ["mhyab", "polar", "1h"]
    },

    "component-trace": {
        "experiment_id": "component-trace",
        "display_name": "Per-image hue/chroma/luminance means of closings",
        "needs_input": False,
        "seed": 42,
        "count": 100,
        "size": 32,
        "se_size": 3,
        "kinds": ["mhyab", "polar", "1h"]
    },

    "idempotence": {
        "experiment_id": "idempotence",
        "display_name": "Deviation between first and second closing",
        "needs_input": False,
        "seed": 42,
        "count": 100,
        "size": 32,
        "se_size": 3,
        "kinds": ["mhyab", "polar", "1h"]
    }
}


def get_experiment_config(experiment_id: str) -> Dict[str, Any]:
    """
    Get the preset for one experiment.

    Args:
        experiment_id: Experiment identifier (e.g., 'idempotence')

    Returns:
        Copy of the preset dictionary

    Raises:
        KeyError: If experiment_id not found
    """
    if experiment_id not in EXPERIMENT_CONFIGS:
        raise KeyError(
            f"Experiment '{experiment_id}' not found. Available experiments: {list(EXPERIMENT_CONFIGS.keys())}"
        )

    return dict(EXPERIMENT_CONFIGS[experiment_id])


def get_all_experiment_ids() -> List[str]:
    return list(EXPERIMENT_CONFIGS.keys())


def get_all_experiments() -> Dict[str, Dict[str, Any]]:
    return {key: dict(value) for key, value in EXPERIMENT_CONFIGS.items()}
