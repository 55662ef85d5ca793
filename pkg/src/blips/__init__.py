"""Multicoil MRI reconstruction toolkit.

Blind dictionary-learning reconstruction, an unrolled supervised module
with a trainable residual denoiser, pipelines combining the two, and a
synthetic-data harness with deterministic experiments.
"""

from ._kernels import BACKEND as kernel_backend
from .blind import ReconConfig, blind_image_update, blind_recon, fixed_dict_recon
from .cg import CgReport, cg_solve
from .ctz import load_ctz, save_ctz
from .denoiser import (
    DenoiserConfig,
    DenoiserParams,
    NormContext,
    denoiser_backward,
    denoiser_forward,
    init_denoiser,
    load_params,
    norm_context,
    save_params,
)
from .errors import GenerationFailureError, InvalidArgumentError, NumericFailureError
from .experiment import ExperimentSpec, run_experiment
from .fourier import (
    CoilSet,
    MultiCoilSystem,
    SamplingMask,
    apply_adjoint,
    apply_forward,
    apply_normal,
    fft2c,
    ifft2c,
    zero_filled_recon,
)
from .masks import (
    EQUIDISTANT_1D,
    POISSON_DISK_2D,
    VARIABLE_DENSITY_1D,
    MaskSpec,
    generate_mask,
    mask_1d_variable_density,
    mask_equidistant,
    mask_poisson_disk_2d,
)
from .metrics import MetricReport, hfen, local_psnr, metric_report, psnr, ssim
from .patches import PatchConfig, aggregate_patches, extract_patches, init_overcomplete_idct
from .pdhg import cs_pdhg_recon, estimate_opnorm
from .phantom import (
    Feature,
    PhantomSpec,
    default_phantom_spec,
    make_coils,
    make_phantom,
    plant_features,
    simulate_kspace,
)
from .soupdil import dl_objective, soup_dil_inner_iteration
from .supervised import (
    PipelineSpec,
    SupervisedConfig,
    run_pipeline,
    supervised_iteration,
    supervised_iteration_backward,
)
from .training import Sample, TrainConfig, loss_cbeta, loss_cbeta_grad, train
from .wavelets import dwt2, idwt2

__version__ = "0.1.0"
