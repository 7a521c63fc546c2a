"""Attention machinery: self/cross attention, bottleneck fusion, encoder."""
from .attention import (AttentionParams, cross_attention_layer, init_attention,
                        mha)
from .avblock import AvFusionParams, av_fusion_block, init_av_fusion
from .bottleneck import (BottleneckTokens, bottleneck_fusion_layer, fuse_half,
                         init_bottleneck)
from .encoder import (EncoderLayerParams, EncoderParams, FeedForwardParams,
                      LayerNormParams, apply_ffn, apply_norm, encoder_forward,
                      encoder_layer, init_encoder, init_encoder_layer,
                      init_ffn, init_layer_norm)

__all__ = [
    "AttentionParams", "AvFusionParams", "BottleneckTokens",
    "EncoderLayerParams", "EncoderParams", "FeedForwardParams",
    "LayerNormParams", "apply_ffn", "apply_norm", "av_fusion_block",
    "bottleneck_fusion_layer", "cross_attention_layer", "encoder_forward",
    "encoder_layer", "fuse_half", "init_attention", "init_av_fusion",
    "init_bottleneck", "init_encoder", "init_encoder_layer", "init_ffn",
    "init_layer_norm",
]
