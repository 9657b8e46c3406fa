"""Time-frequency concentration operators, their spectra, and localized families."""
from .counts import SweepResult, count_above, fit_log, plunge_width, run_sweep, upper_bound_certificate
from .family import (
    FamilyParams,
    LocalizedFamily,
    build_block,
    construct_family,
    family_density,
    flat_completion,
    select_parameters,
)
from .gabor import GaborSetup, build_gabor_operator, gabor_kernel, hermite_oracle, stft
from .setgeom import Box, Disk, Grid, SetSpec, dilate, measure, select_nodes
from .spectral import (
    ConcentrationReport,
    EigensolverError,
    Spectrum,
    donoho_stark_check,
    eigendecompose,
    localization_residual,
    pseudo_eigen_check,
)
from .timeband import (
    BandSpec,
    DiscreteOperator,
    DpssSetup,
    NystromSetup,
    apply,
    build_dpss,
    build_nystrom,
    load_operator,
    save_operator,
)

__version__ = "0.1.0"
