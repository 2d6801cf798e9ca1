"""Finite-rank correlation between high-dimensional Gaussian vectors.

Simulate paired data with a fixed number of population canonical correlation
"spikes", compute squared sample canonical correlations stably, evaluate the
deterministic limit theory (bulk law, detection threshold, outlier map), and
certify detected outliers against a finite-sample determinant identity.
"""

from .cca import (
    EigenReport,
    SampleCov,
    brute_force_ccs,
    empirical_cdf,
    sample_covariances,
    squared_canonical_correlations,
)
from .detverify import (
    DeterminantOracle,
    MnComparison,
    PerturbationFactors,
    build_factors,
    finite_n_det,
    mn_entry_convergence,
    phi_matrix,
)
from .errors import (
    BelowThresholdError,
    BranchError,
    ConfigurationError,
    DomainError,
    NumericalError,
    ResolventSingularityError,
    SingularityError,
    SpectrumRangeError,
    SpikeCcaError,
    UnsupportedModelError,
)
from .model import (
    CouplingConstants,
    DimensionRatios,
    EqualRatiosWarning,
    ModelConfig,
    SpikeSpectrum,
    coupling_constants,
    mixing_weights,
    ratios_from_dims,
    spike_to_t,
    t_to_spike,
)
from .rmt import (
    PhaseTransition,
    WachterLaw,
    bulk_mass,
    component_r_transform,
    component_stieltjes,
    critical_threshold,
    ell,
    f,
    gamma_inverse,
    gamma_map,
    h,
    limiting_det_factor,
    m1,
    m2,
    mp_stieltjes,
    varrho,
    wachter_cdf,
    wachter_density,
    wachter_edges,
)
from .sampler import (
    DataPair,
    Latent,
    coupling_product,
    replicate_rng,
    sample_coupled,
    sample_general,
    seeded_rng,
    standard_normal_matrix,
    subtract_means,
)

__version__ = "0.1.0"

__all__ = [
    "BelowThresholdError",
    "BranchError",
    "ConfigurationError",
    "CouplingConstants",
    "DataPair",
    "DeterminantOracle",
    "DimensionRatios",
    "DomainError",
    "EigenReport",
    "EqualRatiosWarning",
    "Latent",
    "MnComparison",
    "ModelConfig",
    "NumericalError",
    "PerturbationFactors",
    "PhaseTransition",
    "ResolventSingularityError",
    "SampleCov",
    "SingularityError",
    "SpectrumRangeError",
    "SpikeCcaError",
    "SpikeSpectrum",
    "UnsupportedModelError",
    "WachterLaw",
    "brute_force_ccs",
    "build_factors",
    "bulk_mass",
    "component_r_transform",
    "component_stieltjes",
    "coupling_constants",
    "coupling_product",
    "critical_threshold",
    "ell",
    "empirical_cdf",
    "f",
    "finite_n_det",
    "gamma_inverse",
    "gamma_map",
    "h",
    "limiting_det_factor",
    "m1",
    "m2",
    "mixing_weights",
    "mn_entry_convergence",
    "mp_stieltjes",
    "phi_matrix",
    "ratios_from_dims",
    "replicate_rng",
    "sample_coupled",
    "sample_covariances",
    "sample_general",
    "seeded_rng",
    "spike_to_t",
    "squared_canonical_correlations",
    "standard_normal_matrix",
    "subtract_means",
    "t_to_spike",
    "varrho",
    "wachter_cdf",
    "wachter_density",
    "wachter_edges",
]
