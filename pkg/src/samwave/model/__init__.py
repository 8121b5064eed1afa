from .decoder import DecoderConfig, DecoderState, decoder_forward, pixel_shuffle
from .checkpoint import CheckpointError, load_encoder, load_model, save_encoder, save_model
from .encoder import EncoderConfig, EncoderState, block_forward, encoder_forward, patch_embed
from .train import (
    AdamW,
    AdaptResult,
    PretrainResult,
    SamwaveModel,
    TrainConfig,
    adapt_train,
    build_model,
    cosine_lr,
    evaluate,
    extract_features,
    predict_mask,
    pretrain_encoder,
)

__all__ = [
    "AdamW", "AdaptResult", "CheckpointError", "PretrainResult", "load_encoder", "load_model",
    "save_encoder", "save_model", "DecoderConfig", "DecoderState", "EncoderConfig", "EncoderState",
    "SamwaveModel", "TrainConfig", "adapt_train", "block_forward", "build_model", "cosine_lr",
    "decoder_forward", "encoder_forward", "evaluate", "extract_features", "patch_embed",
    "pixel_shuffle", "predict_mask", "pretrain_encoder",
]
