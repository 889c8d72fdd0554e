"""Command-line entry point: ``savcd {decode,ablate,augment}``.

Exit codes: 0 ok, 2 configuration error, 3 backend error, 4 image I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import augment, harness
from .augment import AugmentationKind
from .backend import BackendError
from .engine import DecodingParams, Sampling, ThresholdMode
from .sas import TemplateId

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_CONFIG, EXIT_BACKEND, EXIT_IMAGE = 2, 3, 4

log = logging.getLogger("savcd")


class ConfigError(Exception):
    pass


class ImageIOError(Exception):
    pass


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _add_decoding_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML file whose keys mirror the long flags")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--threshold-mode", choices=[m.value for m in ThresholdMode])
    p.add_argument("--sampling", choices=[s.value for s in Sampling])
    p.add_argument("--seed", type=_u64)
    p.add_argument("--max-tokens", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="savcd", description="Self-augmented visual contrastive decoding")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decode", help="select an augmentation and run contrastive decoding")
    src = d.add_mutually_exclusive_group()
    src.add_argument("--backend", metavar="URL")
    src.add_argument("--script", metavar="PATH")
    d.add_argument("--image", metavar="PATH")
    d.add_argument("--query")
    d.add_argument("--prompt-tokens", type=_int_list, help="comma-separated prompt token ids")
    d.add_argument("--sas-template", choices=[t.value for t in TemplateId])
    d.add_argument("--no-sas", action="store_true", default=None)
    d.add_argument("--augmentation", metavar="KIND", help="override (with --no-sas) or parser fallback")
    d.add_argument("--trace", metavar="PATH")
    _add_decoding_flags(d)

    a = sub.add_parser("ablate", help="run a threshold grid over a benchmark suite, emit CSV")
    a.add_argument("--grid", metavar="PATH", help="TOML/JSON grid document")
    a.add_argument("--modes", type=lambda s: s.replace(",", " ").split())
    a.add_argument("--gammas", type=_float_list)
    a.add_argument("--betas", type=_float_list)
    a.add_argument("--suite", metavar="PATH", help="suite JSON (default: bundled hallucination-injection suite)")
    a.add_argument("--out", metavar="PATH", help="CSV path (default: stdout)")
    a.add_argument("--workers", type=int, default=1)
    _add_decoding_flags(a)

    g = sub.add_parser("augment", help="apply one augmentation to a PNG")
    g.add_argument("--image", required=True, metavar="PATH")
    g.add_argument("--kind", required=True)
    g.add_argument("--seed", type=_u64, default=0)
    g.add_argument("--out", required=True, metavar="PATH")
    return ap


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return {k.replace("-", "_"): v for k, v in raw.items()}


def _merged(args: argparse.Namespace) -> dict:
    """Config-file values, overridden by flags that were given."""
    merged = _load_config(getattr(args, "config", None))
    merged.update({k: v for k, v in vars(args).items() if v is not None})
    return merged


def _params(opts: dict, **defaults) -> DecodingParams:
    kw = dict(defaults)
    for key in ("alpha", "beta", "gamma", "threshold_mode", "sampling", "seed", "max_tokens"):
        if key in opts:
            kw[key] = opts[key]
    try:
        return DecodingParams(**kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _read_image(path) -> "augment.np.ndarray":
    try:
        return augment.load_png(path)
    except Exception as exc:
        raise ImageIOError(f"cannot read image {path}: {exc}") from exc


def cmd_decode(args) -> int:
    opts = _merged(args)
    if "backend" not in opts and "script" not in opts:
        raise ConfigError("one of --backend or --script is required")
    if "image" not in opts or "query" not in opts:
        raise ConfigError("--image and --query are required")
    script = opts.get("script")
    if script is not None and not Path(script).is_file():
        raise ConfigError(f"script not found: {script}")
    try:
        kind = AugmentationKind.parse(opts["augmentation"]) if "augmentation" in opts else None
        config = harness.RunConfig(
            query=opts["query"],
            image_path=opts["image"],
            script_path=script,
            backend_url=opts.get("backend"),
            params=_params(opts),
            use_sas=not opts.get("no_sas", False),
            sas_template=opts.get("sas_template", TemplateId.FULL),
            augmentation=kind,
            prompt_tokens=opts.get("prompt_tokens"),
            trace_path=opts.get("trace"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    image = _read_image(config.image_path)
    try:
        summary, _ = harness.run_pipeline(config, image)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps(summary.to_dict()))
    return 0


def cmd_ablate(args) -> int:
    opts = _merged(args)
    if "grid" in opts:
        gpath = Path(opts["grid"])
        try:
            text = gpath.read_text(encoding="utf-8")
            doc = json.loads(text) if gpath.suffix == ".json" else tomllib.loads(text)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read grid {gpath}: {exc}") from exc
    else:
        doc = {k: opts[k] for k in ("modes", "gammas", "betas") if k in opts}
    try:
        cells = harness.parse_grid(doc)
        base = _params(opts, sampling=Sampling.GREEDY)
        suite = harness.load_suite(opts.get("suite"))
        rows = harness.run_ablation(cells, suite, base, workers=int(opts.get("workers", 1)))
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    text = harness.rows_to_csv(rows)
    if "out" in opts:
        Path(opts["out"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_augment(args) -> int:
    try:
        kind = AugmentationKind.parse(args.kind)
    except ValueError as exc:
        raise ConfigError(f"unknown augmentation {args.kind!r}") from exc
    image = _read_image(args.image)
    try:
        augment.save_png(augment.apply(kind, image, seed=args.seed), args.out)
    except OSError as exc:
        raise ImageIOError(f"cannot write {args.out}: {exc}") from exc
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"decode": cmd_decode, "ablate": cmd_ablate, "augment": cmd_augment}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except BackendError as exc:
        log.error("backend error: %s", exc)
        return EXIT_BACKEND
    except ImageIOError as exc:
        log.error("image error: %s", exc)
        return EXIT_IMAGE


if __name__ == "__main__":
    sys.exit(main())
