"""
Subcommand implementations.

Each ``cmd_*`` takes the resolved CliConfig plus its own arguments,
prints one JSON document on stdout and returns the process exit code.
Per-item failures are logged and counted; they only fail the run under
``--strict``.
"""

import json
import logging
import sys
from collections import Counter
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from gerdsenai_vprompt.annotate import (
    AnnotationResult,
    build_request,
    get_template,
    make_provider,
    run_dispatch,
    write_results,
)
from gerdsenai_vprompt.cli.config import CliConfig
from gerdsenai_vprompt.core.model import Triple
from gerdsenai_vprompt.errors import UsageError
from gerdsenai_vprompt.ingest import (
    BuildSettings,
    TemplateSet,
    build_corpus,
    load_manifest,
    load_templates,
    read_triples,
    write_triples,
)
from gerdsenai_vprompt.kernel import KernelConfig, run_kernel_check
from gerdsenai_vprompt.metrics import (
    MetricConfig,
    evaluate,
    format_table,
    load_embeddings,
    load_records,
)
from gerdsenai_vprompt.render import RenderStyle, render_triple
from gerdsenai_vprompt.synth import AugmentConfig
from gerdsenai_vprompt.workers import run_items, summarize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def emit(doc: Dict[str, Any]) -> None:
    """Write the machine-readable result to stdout."""
    sys.stdout.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    sys.stdout.flush()


def _exit_code(cfg: CliConfig, failures: int) -> int:
    return EXIT_FAILED if cfg.strict and failures else EXIT_OK


def _image_path(triple: Triple, images: Optional[str]) -> Path:
    path = Path(triple.image_path)
    if images and not path.is_absolute():
        return Path(images) / path
    return path


def _tagged(triple_id: str, message: str) -> str:
    return message if message.startswith(triple_id) else f"{triple_id}: {message}"


# ── convert ───────────────────────────────────────────────────────


def cmd_convert(
    cfg: CliConfig,
    manifest_path: str,
    out: Optional[str] = None,
    templates_path: Optional[str] = None,
) -> int:
    manifest = load_manifest(manifest_path)
    output = Path(out) if out else manifest.output
    if output is None:
        raise UsageError("no output path: pass --out or set \"output\" in the manifest")

    settings = BuildSettings(
        templates=load_templates(templates_path) if templates_path else TemplateSet.default(),
        augment=AugmentConfig(alpha=cfg.alpha),
        patch_px=cfg.patch_px,
        k=cfg.k,
        coords_in_text=cfg.coords_in_text,
    )
    seed = manifest.seed if cfg.seed is None else cfg.seed
    triples, errors = build_corpus(manifest, settings, seed=seed, threads=cfg.threads)
    for message in errors:
        logger.warning("%s", message)

    count = write_triples(triples, output)
    logger.info("Wrote %d triples to %s", count, output)
    emit(
        {
            "command": "convert",
            "output": str(output),
            "seed": seed,
            "triples": count,
            "by_task": dict(sorted(Counter(t.task.value for t in triples).items())),
            "by_modality": dict(sorted(Counter(t.modality.value for t in triples).items())),
            "errors": errors,
        }
    )
    return _exit_code(cfg, len(errors))


# ── render ────────────────────────────────────────────────────────


def cmd_render(
    cfg: CliConfig,
    triples_path: str,
    out_dir: str,
    images: Optional[str] = None,
    style: Optional[RenderStyle] = None,
) -> int:
    triples = read_triples(triples_path, strict=cfg.strict)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def _render(triple: Triple) -> str:
        try:
            png = render_triple(triple, _image_path(triple, images).read_bytes(), style)
        except OSError as e:
            raise OSError(_tagged(triple.id, f"cannot read image: {e}")) from e
        target = out / f"{triple.id}.png"
        target.write_bytes(png)
        return str(target)

    results = run_items(_render, triples, cfg.threads)
    rendered, failures = summarize(results)
    emit(
        {
            "command": "render",
            "output": str(out),
            "rendered": rendered,
            "failed": len(failures),
            "errors": failures,
        }
    )
    return _exit_code(cfg, len(failures))


# ── annotate ──────────────────────────────────────────────────────


def cmd_annotate(
    cfg: CliConfig,
    triples_path: str,
    out: str,
    images: Optional[str] = None,
    style: Optional[RenderStyle] = None,
) -> int:
    triples = read_triples(triples_path, strict=cfg.strict)
    template = get_template(cfg.template)
    provider = make_provider(
        cfg.provider,
        endpoint=cfg.endpoint,
        token=cfg.token,
        timeout_s=cfg.timeout_s,
        attempts=cfg.retries,
    )

    def _request(triple: Triple):
        return build_request(triple, _image_path(triple, images).read_bytes(), template, style)

    built = run_items(_request, triples, cfg.threads)
    requests = []
    results: List[AnnotationResult] = []
    for triple, (ok, value) in zip(triples, built):
        if ok:
            requests.append(value)
        else:
            message = _tagged(triple.id, value)
            logger.warning("%s", message)
            results.append(
                AnnotationResult(triple_id=triple.id, text="", provider=provider.name, error=message)
            )

    outcomes = run_dispatch(requests, provider, limit=cfg.threads)
    results.extend(result for _, result in outcomes)
    write_results(results, out)

    failed = sum(1 for r in results if not r.ok)
    emit(
        {
            "command": "annotate",
            "output": str(out),
            "provider": provider.name,
            "template": template.task.value,
            "annotated": len(results) - failed,
            "failed": failed,
        }
    )
    return _exit_code(cfg, failed)


# ── eval ──────────────────────────────────────────────────────────


def cmd_eval(
    cfg: CliConfig,
    pred_path: str,
    gt_path: str,
    metrics: str,
    embeddings: Optional[str] = None,
    oov_policy: str = "zero_vector",
) -> int:
    table = load_embeddings(embeddings, oov_policy) if embeddings else None
    reports = evaluate(
        load_records(pred_path),
        load_records(gt_path, allow_refs=True),
        metrics,
        table=table,
        cfg=MetricConfig(tau=cfg.tau),
        strict=cfg.strict,
    )
    logger.info("Scores:\n%s", format_table(reports))
    emit(
        {
            "command": "eval",
            "tau": cfg.tau,
            "reports": [r.to_dict() for r in reports],
        }
    )
    return EXIT_OK


# ── kernel-check ──────────────────────────────────────────────────


def cmd_kernel_check(
    cfg: CliConfig,
    dims: KernelConfig,
    img_rows: int = 4,
    prompt_rows: int = 3,
    n_seeds: int = 5,
    inject_fault: bool = False,
) -> int:
    report = run_kernel_check(
        seed=cfg.run_seed,
        cfg=replace(dims, seed=cfg.run_seed),
        img_rows=img_rows,
        prompt_rows=prompt_rows,
        n_seeds=n_seeds,
        corrupt=inject_fault,
    )
    emit({"command": "kernel-check", **report})
    return EXIT_OK if report["passed"] else EXIT_FAILED
