from chartrole.model.config import EncoderConfig
from chartrole.model.vocab import Vocab
from chartrole.model.tokenizer import TokenizedSample, patchify, tokenize_blocks
from chartrole.model.net import RoleEncoder, collate, concat_fuse, layout_induced_fuse, encode_classify
from chartrole.model.checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "EncoderConfig", "Vocab", "TokenizedSample", "patchify", "tokenize_blocks",
    "RoleEncoder", "collate", "concat_fuse", "layout_induced_fuse", "encode_classify",
    "save_checkpoint", "load_checkpoint",
]
