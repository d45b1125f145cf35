"""Experiment layer: configs, drivers, reports, CLI."""

from .config import Config, parse_config, parse_config_text, profile_from_text, resolve_config
from .experiments import convergence_study, geometry_check, run_experiment, stability_sweep
from .report import RateFit, fit_rate, svg_mesh, svg_plot, write_csv, write_json

__all__ = [
    "Config",
    "parse_config",
    "parse_config_text",
    "profile_from_text",
    "resolve_config",
    "run_experiment",
    "convergence_study",
    "stability_sweep",
    "geometry_check",
    "RateFit",
    "fit_rate",
    "write_csv",
    "write_json",
    "svg_plot",
    "svg_mesh",
]
