"""Coded caching schemes from injective arc colorings of regular digraphs."""

from .coloring import (
    cayley_strong_color,
    exact_min_injective_color,
    greedy_injective_color,
    merged_color_binary,
    partition_color,
    verify_injective,
    verify_strong_edge,
)
from .core import STAR, ArcColoring, ClassKey, Digraph, PdaArray, RadixSpec, SchemeParams
from .digraphs import (
    CayleyParams,
    GuardrailError,
    HammingFamilyParams,
    audit_digraph,
    build_hamming_digraph,
    build_unitary_cayley_digraph,
)
from .families import FAMILIES, FamilyError, closed_form, family_params
from .mds import MdsCodec
from .pda import (
    equivalent,
    format_pda,
    mn_pda,
    parse_pda,
    pda_from_coloring,
    useless_stars,
    verify_pda,
)
from .simulator import (
    DemandVector,
    FileStore,
    SimulationReport,
    decode_all,
    deliver,
    place_uncoded,
    run_coded_placement,
    run_uncoded,
)

__version__ = "0.1.0"
