"""One-bit massive-MIMO precoding for frequency-selective channels."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Channel,
    SymbolBlock,
    SystemConfig,
    TransmitBlock,
    make_psk_symbol,
    min_margin_over_users,
    rotated_noiseless_signal,
    safety_margin,
)
from .precoders import PrecoderKind, precode_block, precode_slot  # noqa: F401
