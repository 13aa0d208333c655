"""
Corpus manifests and source adapters.

A manifest lists annotation sources, each tagged with a modality, a task
and the adapter that reads it:

    {
      "seed": 7,
      "output": "corpus.jsonl",
      "entries": [
        {"source": "sar_ships.json", "modality": "sar",
         "task": "referring_object_classification", "adapter": "canonical"},
        {"source": "masks/", "legend": "legend.json", "images": "rgb/",
         "modality": "optical", "task": "referring_object_classification",
         "adapter": "segmentation", "patch_px": 32}
      ]
    }

Relative paths resolve against the manifest's directory. Building is a
pure function of (manifest, seed, settings).
"""

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from gerdsenai_vprompt.core.model import Modality, TaskKind, Triple
from gerdsenai_vprompt.errors import SchemaError, VPromptError
from gerdsenai_vprompt.ingest.builders import (
    ROC,
    build_box_triples,
    build_image_level_triple,
    build_mask_point_triples,
    build_point_triples,
)
from gerdsenai_vprompt.ingest.parsers import (
    image_size_field,
    load_json_bytes,
    parse_canonical_detection,
    parse_coco_detection,
    parse_segmentation,
    require_field,
)
from gerdsenai_vprompt.ingest.templates import TemplateSet
from gerdsenai_vprompt.synth.prompts import DEFAULT_PATCH_PX, AugmentConfig
from gerdsenai_vprompt.synth.rng import Rng
from gerdsenai_vprompt.workers import run_items

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifestEntry:
    source: Path
    modality: Modality
    task: TaskKind
    adapter: str
    options: Dict[str, Any] = field(default_factory=dict)
    # namespaces triple ids and keys the entry's random stream
    name: str = ""


@dataclass(frozen=True)
class CorpusManifest:
    entries: Tuple[ManifestEntry, ...]
    seed: int = 0
    output: Optional[Path] = None
    base_dir: Path = Path(".")


@dataclass(frozen=True)
class BuildSettings:
    """Knobs shared by every adapter; entries may override alpha/patch_px/k."""

    templates: TemplateSet = field(default_factory=TemplateSet.default)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    patch_px: int = DEFAULT_PATCH_PX
    k: int = 4
    coords_in_text: bool = False

    def for_entry(self, entry: ManifestEntry) -> "BuildSettings":
        opts = entry.options
        settings = self
        if "alpha" in opts:
            settings = replace(settings, augment=replace(settings.augment, alpha=float(opts["alpha"])))
        if "patch_px" in opts:
            settings = replace(settings, patch_px=int(opts["patch_px"]))
        if "k" in opts:
            settings = replace(settings, k=int(opts["k"]))
        if "coords_in_text" in opts:
            settings = replace(settings, coords_in_text=bool(opts["coords_in_text"]))
        return settings


Adapter = Callable[[ManifestEntry, BuildSettings, Rng], List[Triple]]

_ADAPTERS: Dict[str, Adapter] = {}


def register_adapter(name: str) -> Callable[[Adapter], Adapter]:
    """Decorator adding an adapter to the registry under *name*."""

    def _register(func: Adapter) -> Adapter:
        _ADAPTERS[name] = func
        return func

    return _register


def get_adapter(name: str) -> Adapter:
    if name not in _ADAPTERS:
        raise SchemaError("adapter", f"unknown adapter {name!r}; known: {', '.join(list_adapters())}")
    return _ADAPTERS[name]


def list_adapters() -> List[str]:
    return sorted(_ADAPTERS)


# ── Manifest loading ──────────────────────────────────────────────


def _resolve(base: Path, value: Union[str, Path]) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def _entry_name(source: str) -> str:
    """`sar/train.json` -> `sar_train`."""
    stem = str(Path(source).with_suffix("")).strip("/")
    return re.sub(r"[^A-Za-z0-9_-]+", "_", stem) or "entry"


def load_manifest(path: Union[str, Path]) -> CorpusManifest:
    """Read and validate a manifest file."""
    path = Path(path)
    return parse_manifest(load_json_bytes(path.read_bytes(), str(path)), path.parent)


def parse_manifest(doc: Any, base_dir: Union[str, Path]) -> CorpusManifest:
    """Validate an in-memory manifest document; paths resolve against *base_dir*."""
    base = Path(base_dir)
    entries = []
    names = set()
    for i, raw in enumerate(require_field(doc, "entries", list, "$")):
        where = f"entries[{i}]"
        adapter = require_field(raw, "adapter", str, where)
        if adapter not in _ADAPTERS:
            raise SchemaError(f"{where}.adapter", f"unknown adapter {adapter!r}")
        try:
            modality = Modality(require_field(raw, "modality", str, where))
        except ValueError:
            raise SchemaError(f"{where}.modality", f"unknown modality {raw['modality']!r}") from None
        try:
            task = TaskKind(require_field(raw, "task", str, where))
        except ValueError:
            raise SchemaError(f"{where}.task", f"unknown task {raw['task']!r}") from None
        options = {
            k: v for k, v in raw.items() if k not in ("source", "modality", "task", "adapter", "name")
        }
        for key in ("legend", "images"):
            if key in options:
                options[key] = _resolve(base, options[key])
        source = require_field(raw, "source", str, where)
        name = raw.get("name") or _entry_name(source)
        if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z0-9_-]+", name):
            raise SchemaError(f"{where}.name", f"expected letters, digits, '_' or '-', got {name!r}")
        if name in names:
            raise SchemaError(
                f"{where}.name", f"entry name {name!r} already used; set a distinct \"name\""
            )
        names.add(name)
        entries.append(
            ManifestEntry(
                source=_resolve(base, source),
                modality=modality,
                task=task,
                adapter=adapter,
                options=options,
                name=name,
            )
        )
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise SchemaError("seed", "expected int")
    output = doc.get("output")
    return CorpusManifest(
        entries=tuple(entries),
        seed=seed,
        output=_resolve(base, output) if output else None,
        base_dir=base,
    )


def build_corpus(
    manifest: CorpusManifest,
    settings: BuildSettings,
    seed: Optional[int] = None,
    threads: int = 1,
) -> Tuple[List[Triple], List[str]]:
    """Run every manifest entry; returns (triples in entry order, error messages).

    Triple ids are prefixed with the entry name (`sar_train.17-box`), so
    they stay unique across sources that reuse image ids. A duplicate id
    inside one source is reported and the later triple dropped.
    """
    root = Rng(manifest.seed if seed is None else seed)

    def _run(entry: ManifestEntry) -> List[Triple]:
        adapter = get_adapter(entry.adapter)
        entry_rng = root.derive(f"{entry.adapter}:{entry.name}")
        triples = adapter(entry, settings.for_entry(entry), entry_rng)
        return [replace(t, id=f"{entry.name}.{t.id}") for t in triples]

    triples: List[Triple] = []
    errors: List[str] = []
    seen = set()
    for entry, (ok, value) in zip(manifest.entries, run_items(_run, manifest.entries, threads)):
        if not ok:
            errors.append(f"{entry.source}: {value}")
            continue
        for triple in value:
            if triple.id in seen:
                errors.append(f"{entry.source}: duplicate triple id {triple.id!r}, dropped")
                continue
            seen.add(triple.id)
            triples.append(triple)
    return triples, errors


# ── Bundled adapters ──────────────────────────────────────────────


def _require_task(entry: ManifestEntry, allowed) -> None:
    if entry.task not in allowed:
        names = ", ".join(sorted(t.value for t in allowed))
        raise SchemaError("task", f"adapter {entry.adapter!r} supports {names}, got {entry.task.value}")


@register_adapter("canonical")
def _canonical_adapter(entry: ManifestEntry, settings: BuildSettings, rng: Rng) -> List[Triple]:
    _require_task(entry, {ROC})
    records = parse_canonical_detection(entry.source.read_bytes(), str(entry.source))
    return build_box_triples(
        records, settings.templates, settings.augment, rng, entry.modality, settings.coords_in_text
    )


@register_adapter("coco")
def _coco_adapter(entry: ManifestEntry, settings: BuildSettings, rng: Rng) -> List[Triple]:
    _require_task(entry, {ROC})
    records = parse_coco_detection(entry.source.read_bytes(), str(entry.source))
    return build_box_triples(
        records, settings.templates, settings.augment, rng, entry.modality, settings.coords_in_text
    )


def _rasters(entry: ManifestEntry) -> List[Tuple[Path, Path]]:
    """(raster, image) pairs for a segmentation entry, in name order."""
    if "legend" not in entry.options:
        raise SchemaError("legend", f"segmentation entry {entry.source} needs a legend")
    images = entry.options.get("images")
    if entry.source.is_dir():
        rasters = sorted(entry.source.glob("*.png"))
    else:
        rasters = [entry.source]
    pairs = []
    for raster in rasters:
        if images is None:
            image = raster
        elif Path(images).is_dir() or entry.source.is_dir():
            image = Path(images) / raster.name
        else:
            image = Path(images)
        pairs.append((raster, image))
    return pairs


def _segmentation_triples(entry: ManifestEntry, settings: BuildSettings, rng: Rng, per_class: bool):
    _require_task(entry, {ROC})
    legend_bytes = Path(entry.options["legend"]).read_bytes()
    triples = []
    for raster, image in _rasters(entry):
        seg = parse_segmentation(raster.read_bytes(), legend_bytes, str(raster))
        kwargs = dict(
            image_path=str(image),
            image_id=raster.stem,
            modality=entry.modality,
            coords_in_text=settings.coords_in_text,
        )
        if per_class:
            triples.extend(build_mask_point_triples(seg, settings.templates, settings.k, rng, **kwargs))
        else:
            triples.extend(build_point_triples(seg, settings.templates, settings.patch_px, rng, **kwargs))
    return triples


@register_adapter("segmentation")
def _segmentation_adapter(entry: ManifestEntry, settings: BuildSettings, rng: Rng) -> List[Triple]:
    return _segmentation_triples(entry, settings, rng, per_class=False)


@register_adapter("segmentation_k")
def _segmentation_k_adapter(entry: ManifestEntry, settings: BuildSettings, rng: Rng) -> List[Triple]:
    return _segmentation_triples(entry, settings, rng, per_class=True)


@register_adapter("captions")
def _captions_adapter(entry: ManifestEntry, settings: BuildSettings, rng: Rng) -> List[Triple]:
    """Image-level sources: {"images": [{"id", "file", "width", "height", "text"}]}."""
    doc = load_json_bytes(entry.source.read_bytes(), str(entry.source))
    triples = []
    for i, image in enumerate(require_field(doc, "images", list, "$")):
        where = f"images[{i}]"
        file_name = require_field(image, "file", str, where)
        try:
            triples.append(
                build_image_level_triple(
                    image_size_field(image, where),
                    entry.modality,
                    entry.task,
                    require_field(image, "text", str, where),
                    settings.templates,
                    rng,
                    image_path=file_name,
                    image_id=str(image.get("id", file_name)),
                )
            )
        except VPromptError as e:
            logger.warning("%s %s: %s, skipped", entry.source, where, e)
    return triples
