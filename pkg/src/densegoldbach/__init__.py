"""Local solvers, prime subsets, and Fourier transference tools for four-prime representations."""

from .errors import (
    BoundViolation,
    DescriptorError,
    GoldbachError,
    HypothesisViolated,
    InternalContradiction,
    LengthMismatch,
    LimitTooSmall,
    NonCoprimeModuli,
    NonSquarefreeW,
    NoPrimeInRange,
    PreconditionViolated,
    RepresentationNotFound,
    SpectralPrecisionError,
)
from .local import (
    LocalInstance,
    LocalSolution,
    SumsetCoverReport,
    check_corollary1,
    check_sumset_cover,
    check_theorem2,
    solve_corollary1,
    solve_theorem2_bruteforce,
    solve_theorem2_structured,
    t_sequence,
    t_sequence_mod,
)
from .pipeline import (
    PipelineConfig,
    PipelineState,
    build_weighted_sets,
    choose_W,
    compute_kappa,
    level_set,
    run_pipeline,
    select_N,
    select_residues,
)
from .primes import (
    DensityEstimate,
    PrimeSubset,
    all_primes,
    density_estimate,
    empty_subset,
    lambda_weights,
    parse_subset,
    residue_class_subset,
    sieve,
    wtrick_statistics,
)
from .representation import QuadrupleDecoder, RepresentationFinder, find_representation_direct
from .residue import (
    FactoredModulus,
    ResidueFunction,
    crt_combine,
    crt_split,
    euler_phi,
    factorize,
    unit_mean,
    units,
)
from .rng import SplitMix64
from .spectral import (
    BohrSet,
    SpectralVector,
    bohr_set,
    convolve,
    count_solutions,
    dft,
    idft,
    large_spectrum,
    mollification_discrepancy,
    mollified_sup,
    mollify,
    sumset_count_check,
    uniform_measure,
)

__version__ = "0.1.0"
