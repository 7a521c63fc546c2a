"""Datasets: synthetic generation with labeling oracle, manifests, media."""
from .dataset import ManifestDataset, SyntheticDataset, SyntheticSpec
from .manifest import (load_manifest, make_splits, scan_class_directories,
                       write_manifest)
from .media import (export_clip, load_clip_media, load_frames,
                    load_frames_packed, load_frames_png, save_frames_packed,
                    save_frames_png)
from .records import CLASS_INDEX, CLASS_NAMES, SPLITS, ClipRecord
from .synth import (SynthParams, audio_coordinate, generate_clip,
                    measure_burst_count, measure_dispersion, oracle_label,
                    video_coordinate)

__all__ = [
    "CLASS_INDEX", "CLASS_NAMES", "ClipRecord", "ManifestDataset", "SPLITS",
    "SyntheticDataset", "SyntheticSpec", "SynthParams", "audio_coordinate",
    "export_clip", "generate_clip", "load_clip_media", "load_frames",
    "load_frames_packed", "load_frames_png", "load_manifest", "make_splits",
    "measure_burst_count", "measure_dispersion", "oracle_label",
    "save_frames_packed", "save_frames_png", "scan_class_directories",
    "video_coordinate", "write_manifest",
]
