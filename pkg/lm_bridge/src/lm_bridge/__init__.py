"""External candidate provider: a character-level repair model behind the
NDJSON stdio protocol, plus its training script."""

__version__ = "0.1.0"

from .model import (CharSeq2Seq, ModelConfig, encode_text, decode_ids,
                    generate, load_checkpoint, save_checkpoint)

__all__ = [
    "CharSeq2Seq", "ModelConfig", "encode_text", "decode_ids", "generate",
    "load_checkpoint", "save_checkpoint", "__version__",
]
