"""Command-line pipeline: emokit <command> [--config file] [overrides].

Commands: build-dict, encode, train, predict, eval, zsl, attribute,
summarize, synth, report. Every command validates its configuration
before writing anything, writes JSON artifacts with sorted keys (so a
fixed seed reproduces identical bytes), and reports errors as one JSON
object on stderr: exit 2 for validation problems, 3 for numerical ones.
"""

import argparse
import json
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import attribution as attr_mod
from . import synth as synth_mod
from . import zeroshot as zs
from .config import PipelineConfig, load_config
from .dataio import (
    check_zero_shot_pair,
    load_embeddings_text,
    load_manifest,
    read_feature_file,
)
from .dictionary import fit_spherical_kmeans, load_dictionary, save_dictionary
from .embeddings import lookup
from .encoding import EncodedVideo, encode_avgp, encode_video, load_encodings, save_encodings
from .errors import ConfigError, NumericalError, ValidationError
from .svm import classification_metrics, evaluate, load_model, predict_batch, save_model, train


def _write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _out_path(cfg: PipelineConfig, name: str, override=None) -> Path:
    path = Path(override) if override else Path(cfg.out_dir) / name
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _encode_records(records, cfg: PipelineConfig, dictionary):
    """EncodedVideo list for manifest records under the configured scheme."""
    encoded = []
    for rec in records:
        feats = rec.load_features()
        if cfg.encoding == "ite":
            enc = encode_video(
                feats,
                dictionary,
                _frame_knn_for(cfg, dictionary),
                video_id=rec.video_id,
                clamp_negative=cfg.clamp_negative,
                l1_normalize=cfg.normalize_s,
            )
        else:
            enc = EncodedVideo(s=encode_avgp(feats), K_used=0, source_video_id=rec.video_id)
        encoded.append(enc)
    return encoded


def _frame_knn_for(cfg: PipelineConfig, dictionary) -> int:
    if cfg.frame_knn > 0:
        return cfg.frame_knn
    return max(1, int(np.ceil(0.10 * dictionary.n_clusters)))


def cmd_build_dict(cfg: PipelineConfig, out=None) -> dict:
    cfg.validate(required_paths=("aux_features",))
    images = read_feature_file(cfg.aux_features)
    dictionary = fit_spherical_kmeans(
        images,
        cfg.n_clusters,
        seed=cfg.seed,
        max_iters=cfg.kmeans_iters,
        workers=cfg.resolved_workers(),
    )
    path = _out_path(cfg, "dictionary.vef", out)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_dictionary(path, dictionary)
    return {
        "command": "build-dict",
        "dictionary": str(path),
        "n_clusters": dictionary.n_clusters,
        "dim": dictionary.dim,
        "iterations": dictionary.iterations,
        "objective": dictionary.objective,
    }


def cmd_encode(cfg: PipelineConfig, out=None) -> dict:
    required = ("manifest",) if cfg.encoding == "avgp" else ("manifest", "dictionary")
    cfg.validate(required_paths=required)
    manifest = load_manifest(cfg.manifest)
    dictionary = load_dictionary(cfg.dictionary) if cfg.encoding == "ite" else None
    encoded = _encode_records(manifest.records, cfg, dictionary)
    labels = [r.label for r in manifest.records]
    path = _out_path(cfg, "encodings.json", out)
    save_encodings(
        path,
        encoded,
        labels=labels if all(v is not None for v in labels) else None,
        class_set=list(manifest.class_set),
        extra={
            "encoding": cfg.encoding,
            "normalize_s": cfg.normalize_s,
            "clamp_negative": cfg.clamp_negative,
            "split": manifest.split,
        },
    )
    return {
        "command": "encode",
        "encodings": str(path),
        "n_videos": len(encoded),
        "dim": int(encoded[0].s.shape[0]),
        "encoding": cfg.encoding,
    }


def cmd_train(cfg: PipelineConfig, out=None) -> dict:
    cfg.validate(required_paths=("encodings",))
    matrix, ids, index = load_encodings(cfg.encodings)
    labels = index.get("labels")
    if not labels:
        raise ValidationError(f"{cfg.encodings}: encoding archive carries no labels; cannot train")
    path = _out_path(cfg, "model.json", out)
    rel_archive = os.path.relpath(Path(cfg.encodings).resolve(), path.resolve().parent)
    model = train(
        matrix,
        labels,
        kernel=cfg.kernel,
        C=cfg.C,
        tol=cfg.tol,
        seed=cfg.seed,
        balanced=cfg.balanced,
        workers=cfg.resolved_workers(),
        training_archive=rel_archive,
    )
    save_model(model, path)
    return {
        "command": "train",
        "model": str(path),
        "classes": list(model.class_names),
        "n_train": model.n_train,
        "kernel": model.kernel,
        "iterations": [m.iterations for m in model.machines],
    }


def cmd_predict(cfg: PipelineConfig, out=None) -> dict:
    cfg.validate(required_paths=("model", "encodings"))
    model = load_model(cfg.model)
    matrix, ids, index = load_encodings(cfg.encodings)
    predicted, scores = predict_batch(model, matrix)
    labels = index.get("labels")
    rows = []
    for k, vid in enumerate(ids):
        row = {
            "video_id": vid,
            "predicted": predicted[k],
            "scores": {name: float(scores[k, c]) for c, name in enumerate(model.class_names)},
        }
        if labels:
            row["label"] = labels[k]
        rows.append(row)
    path = _out_path(cfg, "predictions.json", out)
    _write_json(path, {"kind": "predictions", "config": cfg.to_dict(), "predictions": rows})
    return {"command": "predict", "predictions": str(path), "n_videos": len(rows)}


def cmd_eval(cfg: PipelineConfig, out=None) -> dict:
    cfg.validate(required_paths=("model", "encodings"))
    model = load_model(cfg.model)
    matrix, _, index = load_encodings(cfg.encodings)
    labels = index.get("labels")
    if not labels:
        raise ValidationError(f"{cfg.encodings}: encoding archive carries no labels; cannot evaluate")
    metrics = evaluate(model, matrix, labels)
    path = _out_path(cfg, "metrics.json", out)
    _write_json(path, {"kind": "metrics", "task": "supervised", "config": cfg.to_dict(), "metrics": metrics})
    return {
        "command": "eval",
        "metrics": str(path),
        "overall_accuracy": metrics["overall_accuracy"],
        "mean_per_class_accuracy": metrics["mean_per_class_accuracy"],
    }


def cmd_zsl(cfg: PipelineConfig, out=None) -> dict:
    required = ["train_manifest", "test_manifest", "embeddings"]
    if cfg.encoding == "ite":
        required.append("dictionary")
    cfg.validate(required_paths=tuple(required))
    train_manifest = load_manifest(cfg.train_manifest)
    test_manifest = load_manifest(cfg.test_manifest)
    check_zero_shot_pair(train_manifest, test_manifest)
    space = load_embeddings_text(cfg.embeddings)
    dictionary = load_dictionary(cfg.dictionary) if cfg.encoding == "ite" else None

    train_enc = np.stack([e.s for e in _encode_records(train_manifest.records, cfg, dictionary)])
    test_enc = np.stack([e.s for e in _encode_records(test_manifest.records, cfg, dictionary)])
    train_labels = train_manifest.labels()
    test_labels = test_manifest.labels()

    targets = np.stack([lookup(space, v) for v in train_labels])
    hyper = {"C": cfg.C, "epsilon": cfg.epsilon} if cfg.regressor == "svr" else {"lam": cfg.ridge_lam}
    reg = zs.fit_regressor(
        train_enc, targets, kind=cfg.regressor, hyperparams=hyper, seed=cfg.seed, workers=cfg.resolved_workers()
    )
    projected = zs.project(reg, test_enc)

    unseen = sorted(test_manifest.class_set)
    raw = {name: lookup(space, name) for name in unseen}
    k_t1s = cfg.k_t1s if cfg.k_t1s > 0 else zs.default_k_t1s(projected.shape[0])
    if cfg.method == "t1s":
        protos = zs.t1s_smooth(raw, projected, k_t1s)
        predicted = zs.zsl_predict(protos, projected)
    else:
        protos = [zs.ClassPrototype(n, raw[n], raw[n].copy(), 0) for n in unseen]
        predicted = zs.dap_predict(raw, projected)
    metrics = classification_metrics(test_labels, predicted, unseen)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    zs.save_regressor(reg, out_dir / "regressor.json")
    zs.save_prototypes(protos, out_dir / "prototypes.txt")
    path = _out_path(cfg, "zsl_metrics.json", out)
    _write_json(
        path,
        {
            "kind": "metrics",
            "task": "zeroshot",
            "method": cfg.method,
            "encoding": cfg.encoding,
            "k_t1s": int(k_t1s),
            "config": cfg.to_dict(),
            "metrics": metrics,
        },
    )
    return {
        "command": "zsl",
        "metrics": str(path),
        "method": cfg.method,
        "encoding": cfg.encoding,
        "mean_per_class_accuracy": metrics["mean_per_class_accuracy"],
        "regressor": str(out_dir / "regressor.json"),
        "prototypes": str(out_dir / "prototypes.txt"),
    }


def cmd_attribute(cfg: PipelineConfig, out=None, video_id=None, csv=None) -> dict:
    cfg.validate(required_paths=("manifest", "dictionary"))
    manifest = load_manifest(cfg.manifest)
    dictionary = load_dictionary(cfg.dictionary)
    records = [r for r in manifest.records if video_id is None or r.video_id == video_id]
    if not records:
        raise ValidationError(f"video_id {video_id!r} not found in {cfg.manifest}")
    knn = _frame_knn_for(cfg, dictionary)
    videos = {}
    csv_rows = ["video_id,frame_index,score"]
    for rec in records:
        feats = rec.load_features()
        if rec.clips:
            result = attr_mod.attribute_clips(feats, dictionary, knn, rec.clips)
        else:
            result = attr_mod.attribute_frames(feats, dictionary, knn)
        videos[rec.video_id] = result.to_dict()
        for j, score in result.frame_scores:
            csv_rows.append(f"{rec.video_id},{j},{score!r}")
    path = _out_path(cfg, "attribution.json", out)
    _write_json(path, {"kind": "attribution", "config": cfg.to_dict(), "videos": videos})
    result = {"command": "attribute", "report": str(path), "n_videos": len(videos)}
    if csv:
        Path(csv).parent.mkdir(parents=True, exist_ok=True)
        Path(csv).write_text("\n".join(csv_rows) + "\n", encoding="utf-8")
        result["csv"] = str(csv)
    return result


def cmd_summarize(cfg: PipelineConfig, out=None, video_id=None, budget=None, csv=None) -> dict:
    cfg.validate(required_paths=("manifest", "dictionary"))
    manifest = load_manifest(cfg.manifest)
    dictionary = load_dictionary(cfg.dictionary)
    records = [r for r in manifest.records if video_id is None or r.video_id == video_id]
    if not records:
        raise ValidationError(f"video_id {video_id!r} not found in {cfg.manifest}")
    knn = _frame_knn_for(cfg, dictionary)
    videos = {}
    csv_rows = ["video_id,frame_index,order"]
    for rec in records:
        feats = rec.load_features()
        duration = feats.shape[0] / cfg.fps
        if budget is None:
            seconds = attr_mod.summary_budget_seconds(duration)
            n_key = max(1, min(feats.shape[0], int(seconds / cfg.clip_seconds)))
        else:
            n_key = budget
        selection = attr_mod.summarize(
            feats,
            dictionary,
            knn,
            trade_off=cfg.trade_off,
            budget=n_key,
            unnormalized=cfg.unnormalized_summary,
        )
        ranges = attr_mod.select_summary_clips(selection, cfg.clip_seconds, cfg.fps, duration)
        entry = selection.to_dict()
        entry["time_ranges"] = [[float(a), float(b)] for a, b in ranges]
        entry["duration_seconds"] = float(duration)
        videos[rec.video_id] = entry
        for order, j in enumerate(selection.selected):
            csv_rows.append(f"{rec.video_id},{j},{order}")
    path = _out_path(cfg, "summary.json", out)
    _write_json(path, {"kind": "summary", "config": cfg.to_dict(), "videos": videos})
    result = {"command": "summarize", "report": str(path), "n_videos": len(videos)}
    if csv:
        Path(csv).parent.mkdir(parents=True, exist_ok=True)
        Path(csv).write_text("\n".join(csv_rows) + "\n", encoding="utf-8")
        result["csv"] = str(csv)
    return result


def cmd_synth(cfg: PipelineConfig, kind="recognition", **params) -> dict:
    cfg.validate()
    clean = {k: v for k, v in params.items() if v is not None}
    if kind == "recognition":
        ds = synth_mod.generate_recognition(seed=cfg.seed, **clean)
        paths = synth_mod.write_recognition(ds, cfg.out_dir)
    elif kind == "zeroshot":
        ds = synth_mod.generate_zeroshot(seed=cfg.seed, **clean)
        paths = synth_mod.write_zeroshot(ds, cfg.out_dir)
    else:
        raise ConfigError(f"unknown synth kind {kind!r}; expected recognition or zeroshot")
    return {"command": "synth", "kind": kind, **paths}


def cmd_report(cfg: PipelineConfig, inputs=(), out=None) -> dict:
    if not inputs:
        raise ConfigError("report needs at least one --inputs file")
    sections = {}
    for item in inputs:
        p = Path(item)
        if not p.exists():
            raise ConfigError(f"report input {item!r} does not exist")
        try:
            sections[p.name] = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{item}: not valid JSON ({exc})") from exc
    path = _out_path(cfg, "report.json", out)
    _write_json(path, {"kind": "report", "config": cfg.to_dict(), "sections": sections})
    return {"command": "report", "report": str(path), "n_sections": len(sections)}


_CONFIG_FLAGS = {
    "aux_features": "--aux",
    "manifest": "--manifest",
    "train_manifest": "--train-manifest",
    "test_manifest": "--test-manifest",
    "embeddings": "--embeddings",
    "dictionary": "--dict",
    "model": "--model",
    "encodings": "--encodings",
    "out_dir": "--out-dir",
    "n_clusters": "--n-clusters",
    "frame_knn": "--frame-knn",
    "embed_dim": "--embed-dim",
    "C": "--C",
    "tol": "--tol",
    "epsilon": "--epsilon",
    "ridge_lam": "--ridge-lam",
    "trade_off": "--lambda",
    "k_t1s": "--k-t1s",
    "kmeans_iters": "--kmeans-iters",
    "seed": "--seed",
    "workers": "--workers",
    "kernel": "--kernel",
    "regressor": "--regressor",
    "encoding": "--encoding",
    "method": "--method",
    "clip_seconds": "--clip-seconds",
    "fps": "--fps",
}
_CONFIG_BOOL_FLAGS = ("normalize_s", "clamp_negative", "unnormalized_summary", "balanced")
_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _add_config_flags(parser: argparse.ArgumentParser, names) -> None:
    for name in names:
        if name in _CONFIG_BOOL_FLAGS:
            flag = "--" + name.replace("_", "-")
            parser.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
            continue
        caster = _FIELD_TYPES[name]
        if isinstance(caster, str):
            caster = {"int": int, "float": float, "str": str}[caster]
        parser.add_argument(_CONFIG_FLAGS[name], dest=name, type=caster, default=None)


_COMMON = ("out_dir", "seed", "workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emokit", description="video emotion pipeline")
    parser.add_argument("--config", default=None, help="JSON config file; flags override its fields")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dict", help="cluster auxiliary images into a dictionary")
    _add_config_flags(p, _COMMON + ("aux_features", "n_clusters", "kmeans_iters"))
    p.add_argument("--out", default=None, help="dictionary output path")

    p = sub.add_parser("encode", help="encode manifest videos to bag vectors")
    _add_config_flags(
        p, _COMMON + ("manifest", "dictionary", "encoding", "frame_knn", "normalize_s", "clamp_negative")
    )
    p.add_argument("--out", default=None, help="encoding archive output path")

    p = sub.add_parser("train", help="train the one-vs-rest recognizer")
    _add_config_flags(p, _COMMON + ("encodings", "kernel", "C", "tol", "balanced"))
    p.add_argument("--out", default=None, help="model output path")

    p = sub.add_parser("predict", help="predict classes for encoded videos")
    _add_config_flags(p, _COMMON + ("model", "encodings"))
    p.add_argument("--out", default=None, help="predictions output path")

    p = sub.add_parser("eval", help="evaluate the recognizer on labeled encodings")
    _add_config_flags(p, _COMMON + ("model", "encodings"))
    p.add_argument("--out", default=None, help="metrics output path")

    p = sub.add_parser("zsl", help="zero-shot pipeline: regress, smooth, predict")
    _add_config_flags(
        p,
        _COMMON
        + (
            "train_manifest",
            "test_manifest",
            "embeddings",
            "dictionary",
            "encoding",
            "method",
            "regressor",
            "frame_knn",
            "k_t1s",
            "C",
            "epsilon",
            "ridge_lam",
            "normalize_s",
            "clamp_negative",
        ),
    )
    p.add_argument("--out", default=None, help="metrics output path")

    p = sub.add_parser("attribute", help="score frames by emotion attribution")
    _add_config_flags(p, _COMMON + ("manifest", "dictionary", "frame_knn"))
    p.add_argument("--out", default=None)
    p.add_argument("--video-id", default=None)
    p.add_argument("--csv", default=None, help="also write per-frame scores as CSV")

    p = sub.add_parser("summarize", help="greedy key-frame summaries")
    _add_config_flags(
        p, _COMMON + ("manifest", "dictionary", "frame_knn", "trade_off", "clip_seconds", "fps", "unnormalized_summary")
    )
    p.add_argument("--out", default=None)
    p.add_argument("--video-id", default=None)
    p.add_argument("--budget", type=int, default=None, help="key-frame count; default derives from duration")
    p.add_argument("--csv", default=None)

    p = sub.add_parser("synth", help="generate planted-structure synthetic data")
    _add_config_flags(p, _COMMON)
    p.add_argument("--kind", choices=("recognition", "zeroshot"), default="recognition")
    p.add_argument("--n-classes", type=int, default=None)
    p.add_argument("--n-videos-per-class", type=int, default=None)
    p.add_argument("--n-frames", type=int, default=None)
    p.add_argument("--sparsity", type=float, default=None)
    p.add_argument("--n-patterns", type=int, default=None)
    p.add_argument("--n-aux-per-pattern", type=int, default=None)
    p.add_argument("--n-aux-per-attr", type=int, default=None)
    p.add_argument("--bg-magnitude", type=float, default=None)
    p.add_argument("--embed-dim-synth", type=int, default=None, help="prototype dimension for zeroshot data")

    p = sub.add_parser("report", help="bundle metric/report JSONs into one document")
    _add_config_flags(p, _COMMON)
    p.add_argument("--inputs", nargs="+", default=())
    p.add_argument("--out", default=None)

    return parser


def _merge_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    for name in _FIELD_TYPES:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def _dispatch(args: argparse.Namespace) -> dict:
    cfg = _merge_config(args)
    if args.command == "build-dict":
        return cmd_build_dict(cfg, out=args.out)
    if args.command == "encode":
        return cmd_encode(cfg, out=args.out)
    if args.command == "train":
        return cmd_train(cfg, out=args.out)
    if args.command == "predict":
        return cmd_predict(cfg, out=args.out)
    if args.command == "eval":
        return cmd_eval(cfg, out=args.out)
    if args.command == "zsl":
        return cmd_zsl(cfg, out=args.out)
    if args.command == "attribute":
        return cmd_attribute(cfg, out=args.out, video_id=args.video_id, csv=args.csv)
    if args.command == "summarize":
        return cmd_summarize(cfg, out=args.out, video_id=args.video_id, budget=args.budget, csv=args.csv)
    if args.command == "synth":
        params = {
            "n_classes": args.n_classes,
            "n_videos_per_class": args.n_videos_per_class,
            "n_frames": args.n_frames,
            "sparsity": args.sparsity,
            "n_patterns": args.n_patterns,
            "n_aux_per_pattern": args.n_aux_per_pattern,
            "bg_magnitude": args.bg_magnitude,
        }
        if args.kind == "zeroshot":
            params = {
                "n_videos_per_class": args.n_videos_per_class,
                "n_frames": args.n_frames,
                "sparsity": args.sparsity,
                "n_aux_per_attr": args.n_aux_per_attr,
                "bg_magnitude": args.bg_magnitude,
                "embed_dim": args.embed_dim_synth,
            }
        return cmd_synth(cfg, kind=args.kind, **params)
    if args.command == "report":
        return cmd_report(cfg, inputs=args.inputs, out=args.out)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = _dispatch(args)
    except NumericalError as exc:
        _emit_error(exc)
        return 3
    except ValidationError as exc:
        _emit_error(exc)
        return 2
    except OSError as exc:
        _emit_error(exc)
        return 2
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def _emit_error(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
