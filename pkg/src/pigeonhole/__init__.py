"""Pre/post-selected three-photon ensembles, pointer measurements and a
linear-optics model of the quantum pigeonhole experiment."""

from .ensemble import (
    Ensemble,
    ExpansionReport,
    expansion_coefficients,
    paper_ensemble,
    success_probability,
    transition_ratio,
    verify_second_order_identity,
    weak_value,
)
from .quantum import (
    BipartitionCut,
    Ket,
    Operator,
    basis_ket,
    ghz_projector,
    inner,
    parity_projector,
    schmidt_rank,
    tensor,
)

__version__ = "0.1.0"
