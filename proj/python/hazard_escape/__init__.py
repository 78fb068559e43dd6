"""Danger fusion, survival-maximizing escape planning and Monte Carlo missions."""

from importlib import resources as _resources

from ._core import (
    DEFAULT_MASTER_SEED,
    EnvironmentGraph,
    HazardError,
    LikelihoodMatrix,
    cdf_at,
    compute_metrics,
    estimate_likelihood,
    full_knowledge_reference,
    fuse,
    generate_synthetic,
    map_estimate,
    mode_danger,
    path_survival,
    pmf_from_ratings,
    run_experiment,
    run_mission,
    safest_path,
)


def asset_path(name):
    """Path of a bundled asset such as ``school54.json``."""
    return str(_resources.files(__name__).joinpath("assets", name))


def school54():
    return EnvironmentGraph.load(asset_path("school54.json"))


def calibrated_models():
    """Bundled synthetic (vision, language) likelihood matrices."""
    return (
        LikelihoodMatrix.load(asset_path("vision_synth.json")),
        LikelihoodMatrix.load(asset_path("language_synth.json")),
    )


__all__ = [
    "DEFAULT_MASTER_SEED",
    "EnvironmentGraph",
    "HazardError",
    "LikelihoodMatrix",
    "asset_path",
    "calibrated_models",
    "cdf_at",
    "compute_metrics",
    "estimate_likelihood",
    "full_knowledge_reference",
    "fuse",
    "generate_synthetic",
    "map_estimate",
    "mode_danger",
    "path_survival",
    "pmf_from_ratings",
    "run_experiment",
    "run_mission",
    "safest_path",
    "school54",
]
