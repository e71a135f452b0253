from geocume.pointproc.correlation import estimate_correlation
from geocume.pointproc.gibbs import (
    GibbsSpec,
    McmcParams,
    hamiltonian,
    min_distance_constraint,
    sample_gibbs,
)
from geocume.pointproc.io import load_point_config, save_point_config
from geocume.pointproc.kernels import Envelope, KernelSpec, kernel_envelope_audit
from geocume.pointproc.params import (
    ProcessParams,
    edc_implies_bc,
    process_params_for,
    superpose_params,
)
from geocume.pointproc.samplers import (
    DppParams,
    attach_marks,
    sample_alpha_dpp,
    sample_dpp,
    sample_poisson,
)
from geocume.pointproc.window import PointConfig, Window, ball_volume

__all__ = [
    "DppParams",
    "Envelope",
    "GibbsSpec",
    "KernelSpec",
    "McmcParams",
    "PointConfig",
    "ProcessParams",
    "Window",
    "attach_marks",
    "ball_volume",
    "edc_implies_bc",
    "estimate_correlation",
    "hamiltonian",
    "kernel_envelope_audit",
    "load_point_config",
    "min_distance_constraint",
    "process_params_for",
    "sample_alpha_dpp",
    "sample_dpp",
    "sample_gibbs",
    "sample_poisson",
    "save_point_config",
    "superpose_params",
]
