"""Unified mixed-modality classifier and benchmark baselines."""
from .audio_encoder import (AudioEncoderParams, encode_audio,
                            init_audio_encoder, pool_time_windows)
from .baselines import (AudioOnlyModel, BottleneckFusion, CrossAttentionFusion,
                        MODEL_KINDS, SelfAttentionFusion, VideoOnlyModel,
                        build_model, mel_patchify)
from .config import ModelConfig, PROFILES, desk_profile, paper_profile
from .dropout import (DropoutConfig, FusedInput, MODES, apply_modality_dropout,
                      draw_mode)
from .uffia import UffiaModel, UffiaOutput, predict

__all__ = [
    "AudioEncoderParams", "AudioOnlyModel", "BottleneckFusion",
    "CrossAttentionFusion", "DropoutConfig", "FusedInput", "MODEL_KINDS",
    "MODES", "ModelConfig", "PROFILES", "SelfAttentionFusion", "UffiaModel",
    "UffiaOutput", "VideoOnlyModel", "apply_modality_dropout", "build_model",
    "desk_profile", "draw_mode", "encode_audio", "init_audio_encoder",
    "mel_patchify", "paper_profile", "pool_time_windows", "predict",
]
