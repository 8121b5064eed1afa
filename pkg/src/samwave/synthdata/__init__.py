from .generators import (
    TASKS,
    SynthDataset,
    band_noise,
    blob_alpha,
    gen_blobs,
    gen_camouflage,
    gen_defocus,
    gen_shadow,
    generate,
    quantize,
    threshold_oracle_iou,
)
from .io import IntegrityError, load_dataset, save_dataset
from .rng import CounterRNG

__all__ = [
    "TASKS", "CounterRNG", "IntegrityError", "SynthDataset", "band_noise", "blob_alpha",
    "gen_blobs", "gen_camouflage", "gen_defocus", "gen_shadow", "generate", "load_dataset",
    "quantize", "save_dataset", "threshold_oracle_iou",
]
