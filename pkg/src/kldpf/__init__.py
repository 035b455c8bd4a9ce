"""Sample-size adaptive particle filters and a bearing-only tracking benchmark.

KLD-resampling chooses how many particles to draw while resampling the
weighted posterior, stopping once the Kullback-Leibler bound on the resampled
approximation is met. KLD-sampling (the same bound applied while sampling the
predictive distribution) and fixed-size multinomial resampling are provided
as baselines.
"""

from .errors import (
    ConfigError,
    ContractError,
    DegenerateWeightsError,
    DomainError,
    InfiniteDivergenceError,
)
from .filters import FilterState, step, step_fixed_or_kld_resampling, step_kld_sampling
from .particles import (
    BinConfig,
    BinGrid,
    ParticleSet,
    bin_index,
    bin_indices,
    normalize_weights,
    observe_cell,
    reset_uniform,
    weighted_mean,
)
from .resampling import (
    Fixed,
    KLDResampling,
    KLDSampling,
    fixed_resample,
    kld_resample,
    kld_sampling_predict,
    multinomial_draw,
)
from .sample_size import (
    DiscreteDistribution,
    SampleSizeBound,
    chi_square_quantile,
    kl_divergence,
    required_sample_size,
    std_normal_quantile,
    wilson_hilferty_size,
)

__version__ = "0.1.0"
