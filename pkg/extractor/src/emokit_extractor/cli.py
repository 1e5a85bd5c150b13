"""Command-line front end: emokit-extract [--config file] [overrides].

Single-purpose tool mirroring the pipeline CLI's conventions: an
optional JSON config file with per-flag overrides, EMOKIT_WORKERS as
the default worker count, a JSON result on stdout, one-line JSON errors
on stderr, exit code 2 for validation/config/IO problems and 3 for
numerical ones.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ConfigError, NumericalError, ValidationError
from .jobs import ExtractionJob, extract

_DEFAULTS = {"stride": 5, "layer": "penultimate", "device": "cpu", "workers": 0}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emokit-extract",
        description="Decode media, run the fixed conv backbone, write VEF1 features plus a manifest.",
    )
    parser.add_argument("--config", default=None, help="JSON config file; flags override its fields")
    parser.add_argument("--media", nargs="+", default=None, help="input media files (videos or still images)")
    parser.add_argument("--out-dir", default=None, help="output directory for .vef files and manifest.json")
    parser.add_argument("--stride", type=int, default=None, help="keep every Nth frame (default 5)")
    parser.add_argument("--layer", default=None, help="backbone layer: penultimate or logits (default penultimate)")
    parser.add_argument("--device", default=None, help="device hint: cpu or auto (default cpu)")
    parser.add_argument("--workers", type=int, default=None, help="worker processes; 0 uses EMOKIT_WORKERS or cpu count")
    return parser


def _resolved_workers(workers: int) -> int:
    if workers > 0:
        return workers
    env = os.environ.get("EMOKIT_WORKERS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"EMOKIT_WORKERS={env!r} is not an integer") from exc
    return os.cpu_count() or 1


def _load_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    allowed = {"media", "out_dir", "stride", "layer", "device", "workers"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    return doc


def _resolve(args) -> ExtractionJob:
    cfg = dict(_DEFAULTS)
    if args.config is not None:
        cfg.update(_load_config(args.config))
    for key in ("media", "out_dir", "stride", "layer", "device", "workers"):
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    if not cfg.get("media"):
        raise ConfigError("no input media given (use --media or the config file)")
    if not cfg.get("out_dir"):
        raise ConfigError("no output directory given (use --out-dir or the config file)")
    return ExtractionJob(
        media_paths=tuple(cfg["media"]),
        out_dir=Path(cfg["out_dir"]),
        stride=int(cfg["stride"]),
        layer=str(cfg["layer"]),
        device=str(cfg["device"]),
        workers=_resolved_workers(int(cfg["workers"])),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        job = _resolve(args)
        result = extract(job)
    except NumericalError as exc:
        _emit_error(exc)
        return 3
    except ValidationError as exc:
        _emit_error(exc)
        return 2
    except OSError as exc:
        _emit_error(exc)
        return 2
    payload = {
        "out_dir": str(result.out_dir),
        "manifest": str(result.manifest_path),
        "feature_dim": result.feature_dim,
        "videos": len(result.records),
        "rows": result.total_rows,
        "failures": [{"path": p, "error": m} for p, m in result.failures],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _emit_error(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
