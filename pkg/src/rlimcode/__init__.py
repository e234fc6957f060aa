"""Enumerative RLIM codes and a diffusion molecular-communication test bench."""

from .enumeration import (
    CodeParams,
    CountingTables,
    Mode,
    PrefixState,
    build_tables,
    count_with_zero,
    family_size,
    locate_layer,
    shortest_length,
)
from .codec import (
    BitWord,
    RlimCodec,
    correct,
    encode,
    oracle_codebook,
    project_decode,
    rank_word,
    selected_codebook_weight,
)

__version__ = "0.1.0"
