"""kcones: k-minimal and k-maximal cones on matrix algebras.

Every membership verdict carries a certificate that can be re-checked
without repeating the search.
"""

from .choi import (
    ChannelRep,
    FunctionalRep,
    apply,
    choi_of_map,
    dual_channel,
    eval_compressed,
    gamma,
    pairing,
)
from .cones import (
    ConeQuery,
    ConeVerdict,
    in_kmax_cone,
    in_kmin_cone,
    in_qkmax_dual,
    make_qkmin_element,
    schmidt_number_bounds,
    verify_certificate,
)
from .kpeb import (
    KpebForm,
    build_kpeb,
    compose_state_channel,
    convert_form,
    is_k_separable_state,
    is_kpeb,
    kpeb_audit,
)
from .linalg import (
    BipartiteOperator,
    SchmidtDecomposition,
    assoc_matrix,
    block_congruence,
    is_psd,
    schmidt_decompose,
    schmidt_rank,
    unvec,
    vec,
)
from .maps import (
    PositivityVerdict,
    diagonalize_positive_map,
    is_cp,
    is_k_positive,
    kraus_from_choi,
    sample_unital_k_cp,
)
from .norms import NormEstimate, k_min_norm, order_norm_sa, positive_map_norm_check

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
