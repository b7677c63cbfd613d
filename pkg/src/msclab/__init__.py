"""Short-block text transmission toolkit.

Sentences are carved into fixed-size segments, each protected by a short
linear block code over an AWGN channel.  On top of ordered-statistics
decoding the package layers segment-level confidence scoring, candidate
text repair from a pluggable language source, retransmission strategies,
and an experiment harness with finite-blocklength analysis baselines.
"""

__version__ = "0.1.0"

from .channel import SoftObservation, snr_db_to_sigma2, transmit_codeword
from .confidence import form_error_set, success_probability
from .gf2codes import LinearCode, extended_hamming_8_4, random_code
from .osd import decode as osd_decode
from .pipeline import PipelineConfig, decode_sentence, make_channels
from .textcodec import SentenceFrame, from_bits, segment, to_bits

__all__ = [
    "__version__",
    "LinearCode",
    "PipelineConfig",
    "SentenceFrame",
    "SoftObservation",
    "decode_sentence",
    "extended_hamming_8_4",
    "form_error_set",
    "from_bits",
    "make_channels",
    "osd_decode",
    "random_code",
    "segment",
    "snr_db_to_sigma2",
    "success_probability",
    "to_bits",
    "transmit_codeword",
]
