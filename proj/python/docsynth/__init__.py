"""Domain-randomized synthetic document scenes: rendering, labels and datasets."""

import json
from pathlib import Path

from ._docsynth import (
    DEPTH_MISS_SENTINEL,
    Generator,
    RunSummary,
    __version__,
    decode_angle,
    encode_angle,
    generate,
    parameter_vocabulary,
    periodic_loss,
    preview,
    read_pfm,
    render_scene,
    wrap_angle,
)

__all__ = [
    "DEPTH_MISS_SENTINEL",
    "Generator",
    "RunSummary",
    "__version__",
    "decode_angle",
    "encode_angle",
    "generate",
    "load_manifest",
    "parameter_vocabulary",
    "periodic_loss",
    "preview",
    "read_pfm",
    "render_scene",
    "wrap_angle",
]


def load_manifest(path):
    """Returns (header, records) from a manifest.jsonl file."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty manifest")
    header = json.loads(lines[0])
    return header, [json.loads(line) for line in lines[1:] if line.strip()]
