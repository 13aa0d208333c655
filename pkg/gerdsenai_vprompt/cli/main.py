"""
vprompt: build, render, annotate and evaluate visual-prompt corpora.

JSON results go to stdout, logs to stderr. Exit codes: 0 success,
1 failure (strict-mode item errors, failed checks, bad input),
2 usage error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from gerdsenai_vprompt import __version__
from gerdsenai_vprompt.annotate import TEMPLATE_ALIASES
from gerdsenai_vprompt.cli import commands
from gerdsenai_vprompt.cli.config import apply_flags, load_config, setup_logging
from gerdsenai_vprompt.errors import InvalidArgumentError, UsageError, VPromptError
from gerdsenai_vprompt.kernel import KernelConfig
from gerdsenai_vprompt.metrics import METRIC_NAMES
from gerdsenai_vprompt.metrics.embeddings import OovPolicy
from gerdsenai_vprompt.render import RenderStyle

logger = logging.getLogger("gerdsenai_vprompt.cli")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, help="global seed (convert defaults to the manifest seed)")
    g.add_argument("--threads", type=int, help="worker threads / in-flight requests")
    g.add_argument("--strict", dest="strict", action="store_const", const=True,
                   help="fail the run on any item error")
    g.add_argument("--lenient", dest="strict", action="store_const", const=False,
                   help="skip bad items with a warning (default)")
    g.add_argument("--config", help="JSON config file (skips discovery)")
    g.add_argument("-v", "--verbose", action="count", default=0, help="debug logging")
    g.add_argument("-q", "--quiet", action="store_true", help="errors only")
    return common


def _style_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--images", help="directory that relative image paths resolve against")
    parser.add_argument("--stroke-width", type=int, dest="stroke_width")
    parser.add_argument("--label-scale", type=int, dest="label_scale")
    parser.add_argument("--point-radius", type=int, dest="point_radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vprompt",
        description="Visual-prompt remote sensing corpus toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("convert", parents=[common], help="build triples from a manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--out", help="output JSONL (default: manifest \"output\")")
    p.add_argument("--templates", help="JSON file of extra instruction variants")
    p.add_argument("--alpha", type=float, help="box jitter scale")
    p.add_argument("--patch-px", type=int, dest="patch_px", help="patch size for point sampling")
    p.add_argument("--k", type=int, help="points per class for segmentation_k entries")
    p.add_argument("--coords-in-text", dest="coords_in_text", action="store_const", const=True,
                   help="write box coordinates after region identifiers")

    p = sub.add_parser("render", parents=[common], help="draw Set-of-Marks overlays")
    p.add_argument("triples")
    p.add_argument("-o", "--out", required=True, help="output directory for PNGs")
    _style_options(p)

    p = sub.add_parser("annotate", parents=[common], help="request annotations for triples")
    p.add_argument("triples")
    p.add_argument("-o", "--out", required=True, help="output results JSONL")
    p.add_argument("--provider", choices=["mock", "http"])
    p.add_argument("--template", choices=sorted(TEMPLATE_ALIASES))
    p.add_argument("--endpoint", help="HTTP provider URL (env ANNOTATE_ENDPOINT)")
    p.add_argument("--timeout", type=float, dest="timeout_s", help="per-attempt timeout in seconds")
    p.add_argument("--retries", type=int, help="attempts per request")
    _style_options(p)

    p = sub.add_parser("eval", parents=[common], help="score predictions against ground truth")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--metrics", required=True, help=f"comma list of: {', '.join(METRIC_NAMES)}")
    p.add_argument("--embeddings", help="word-embedding text file")
    p.add_argument("--tau", type=float, help="semantic match threshold in (0, 1)")
    p.add_argument("--oov-policy", dest="oov_policy", default=OovPolicy.ZERO_VECTOR.value,
                   choices=[p.value for p in OovPolicy])

    p = sub.add_parser("kernel-check", parents=[common], help="verify the fusion kernel")
    p.add_argument("--d-v", type=int, dest="d_v", default=8)
    p.add_argument("--d-l", type=int, dest="d_l", default=12)
    p.add_argument("--d-ff", type=int, dest="d_ff", default=16)
    p.add_argument("--patch", type=int, default=4)
    p.add_argument("--views", type=int, dest="n_views", default=1, help="image views stacked row-wise")
    p.add_argument("--img-rows", type=int, dest="img_rows", default=4)
    p.add_argument("--prompt-rows", type=int, dest="prompt_rows", default=3)
    p.add_argument("--seeds", type=int, default=5, help="number of consecutive seeds")
    p.add_argument("--inject-fault", dest="inject_fault", action="store_true",
                   help="corrupt one gradient block to exercise the failure path")
    return parser


def _style(args: argparse.Namespace) -> RenderStyle:
    given = {
        k: getattr(args, k)
        for k in ("stroke_width", "label_scale", "point_radius")
        if getattr(args, k, None) is not None
    }
    try:
        return RenderStyle(**given)
    except InvalidArgumentError as e:
        raise UsageError(str(e)) from e


def _run(args: argparse.Namespace) -> int:
    try:
        cfg = apply_flags(load_config(args.config), vars(args))
    except InvalidArgumentError as e:
        raise UsageError(str(e)) from e
    if cfg.source:
        logger.debug("Using config %s", cfg.source)

    if args.command == "convert":
        return commands.cmd_convert(cfg, args.manifest, args.out, args.templates)
    if args.command == "render":
        return commands.cmd_render(cfg, args.triples, args.out, args.images, _style(args))
    if args.command == "annotate":
        return commands.cmd_annotate(cfg, args.triples, args.out, args.images, _style(args))
    if args.command == "eval":
        return commands.cmd_eval(
            cfg, args.pred, args.gt, args.metrics, args.embeddings, args.oov_policy
        )
    if args.command == "kernel-check":
        try:
            dims = KernelConfig(
                d_v=args.d_v, d_l=args.d_l, d_ff=args.d_ff, patch=args.patch, n_views=args.n_views
            )
        except InvalidArgumentError as e:
            raise UsageError(str(e)) from e
        return commands.cmd_kernel_check(
            cfg, dims, args.img_rows, args.prompt_rows, args.seeds, args.inject_fault
        )
    raise UsageError(f"unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(-1 if args.quiet else args.verbose)
    try:
        return _run(args)
    except UsageError as e:
        logger.error("%s", e)
        return commands.EXIT_USAGE
    except (VPromptError, OSError, ValueError) as e:
        logger.error("%s", e)
        return commands.EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
