"""Information-disturbance tradeoff for estimating a maximally entangled state."""

from metradeoff.linalg import (
    devectorize,
    hs_inner,
    kron,
    max_eig_herm,
    partial_trace,
    vectorize,
)
from metradeoff.haar import SeededStream, mc_average, sample_unitary
from metradeoff.instrument import (
    KrausInstrument,
    OptimalParams,
    Outcome,
    apply,
    b_from_a,
    covariant_kraus_at,
    covariantize,
    optimal_discrete_instrument,
    optimal_seed,
    weyl_basis,
)
from metradeoff.fidelity import (
    McEstimate,
    TradeoffPoint,
    closed_form_F,
    closed_form_G,
    mc_fidelities,
    tradeoff_curve,
    tradeoff_residuals,
    visibilities,
)
from metradeoff.choi import (
    ChiVector,
    ChoiOperator,
    build_RF,
    build_RG,
    chi_to_kraus,
    optimize,
    verify_tp,
)

__version__ = "0.1.0"
