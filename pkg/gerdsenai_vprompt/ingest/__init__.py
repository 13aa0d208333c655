"""
Corpus construction: annotation parsers, instruction templates, triple
builders, JSONL I/O and manifest-driven corpus builds.

Adapters bundled with the registry:
- canonical: canonical detection JSON -> box triples
- coco: COCO instance JSON -> box triples
- segmentation: class raster + legend -> patch point triples
- segmentation_k: class raster + legend -> K points per class
- captions: image-level captions / scene labels -> full-image triples
"""

from gerdsenai_vprompt.ingest.builders import (
    build_box_triples,
    build_image_level_triple,
    build_mask_point_triples,
    build_point_triples,
    format_answer,
)
from gerdsenai_vprompt.ingest.jsonl import loads_triples, read_triples, write_triples
from gerdsenai_vprompt.ingest.manifest import (
    BuildSettings,
    CorpusManifest,
    ManifestEntry,
    build_corpus,
    get_adapter,
    list_adapters,
    load_manifest,
    parse_manifest,
    register_adapter,
)
from gerdsenai_vprompt.ingest.parsers import (
    parse_canonical_detection,
    parse_coco_detection,
    parse_legend,
    parse_segmentation,
)
from gerdsenai_vprompt.ingest.templates import (
    DEFAULT_INSTRUCTIONS,
    TemplateSet,
    load_templates,
    render_question,
    select_instruction,
)

__all__ = [
    "build_box_triples",
    "build_image_level_triple",
    "build_mask_point_triples",
    "build_point_triples",
    "format_answer",
    "loads_triples",
    "read_triples",
    "write_triples",
    "BuildSettings",
    "CorpusManifest",
    "ManifestEntry",
    "build_corpus",
    "get_adapter",
    "list_adapters",
    "load_manifest",
    "parse_manifest",
    "register_adapter",
    "parse_canonical_detection",
    "parse_coco_detection",
    "parse_legend",
    "parse_segmentation",
    "DEFAULT_INSTRUCTIONS",
    "TemplateSet",
    "load_templates",
    "render_question",
    "select_instruction",
]
