"""Tensor-based Bayesian joint activity detection and channel estimation
for LEO-satellite grant-free random access."""

from .baselines import AmpConfig, SompConfig, amp_mmv, somp
from .channel import (ChannelRealization, DeviceGeometry, LinkBudget,
                      antenna_gain, device_state_matrix, draw_channels,
                      large_scale_gain, sample_device_geometry, sample_rain_db)
from .config import ScenarioConfig, SweepSpec, load_config, make_sweep, parse_config
from .detection import DetectionResult, detect, error_probability, nmse, nmse_active
from .harness import TrialRecord, aggregate, run_sweep, run_trial, write_outputs
from .signals import (PreambleSet, assemble_preamble_matrix, gen_preambles,
                      snr_to_noise_variance, synthesize_received)
from .specfun import SignedLogValue, bessel_j, hyp1f1, ln_gamma_signed
from .tensors import (ComplexTensor, FactorMatrices, fold_last, hadamard,
                      khatri_rao, kron, kruskal, unfold_last)
from .vbi import (EngineConfig, EngineResult, PosteriorState, init_posterior,
                  inverse_mean_moments, precompute_gram, run, theorem1_moment,
                  update_qX, update_qbeta, update_qmu, update_qv)

__version__ = "0.1.0"
