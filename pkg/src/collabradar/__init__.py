"""Distributed two-channel passive-radar detection with linear receiver collaboration."""

from .collab import CollabDesign, af_baseline, build_g_matrix, design_weights, variance_ratio
from .detect import calibrate_threshold, collaborate, estimate_roc, fuse, whitening_only_cc
from .experiments import ExperimentSpec, build_scenario, load_spec, standard_spec
from .kernels import BACKEND
from .model import (
    Alphabet,
    ConfigurationError,
    Hypothesis,
    NoiseModel,
    SubspaceModel,
    SystemConfig,
    Topology,
    derive_stream,
    validate_config,
)
from .moments import CcMoments, cc_moments_closed_form, fused_variance
from .signals import synthesize_batch, synthesize_trial, synthesize_waveform
from .subspace import CcKernel, build_kernel, cross_correlate

__all__ = [
    "Alphabet", "BACKEND", "CcKernel", "CcMoments", "CollabDesign", "ConfigurationError", "ExperimentSpec",
    "Hypothesis", "NoiseModel", "SubspaceModel", "SystemConfig", "Topology", "af_baseline", "build_g_matrix",
    "build_kernel", "build_scenario", "calibrate_threshold", "cc_moments_closed_form", "collaborate",
    "cross_correlate", "derive_stream", "design_weights", "estimate_roc", "fuse", "fused_variance", "load_spec",
    "standard_spec", "synthesize_batch", "synthesize_trial", "synthesize_waveform", "validate_config",
    "variance_ratio", "whitening_only_cc",
]

__version__ = "0.1.0"
