"""Batch command-line front end.

Subcommands:
    mask    segment images and write <stem>_mask.png files
    eval    score prediction masks against ground-truth masks
    bench   run several methods over a corpus and emit one combined table
    serve   start the mask-review HTTP service

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import dataset as ds
from . import evaluation as ev
from . import io as tio
from . import methods as me
from . import preprocess as pp
from .errors import InvalidParamError, TissueMaskError


def _parse_params(pairs):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise InvalidParamError(f"--param expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _collect_inputs(paths):
    files = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            files.extend(
                f for f in sorted(path.iterdir())
                if f.suffix.lower() in ds.IMAGE_EXTENSIONS
                and not f.stem.endswith(ds.MASK_SUFFIX)
            )
        elif path.is_file():
            files.append(path)
        else:
            raise FileNotFoundError(f"no such input: {path}")
    return files


def _load_config(path):
    """Optional key = value config file; flags win over config entries."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParamError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _segment_one(path, spec, out_dir, no_pad):
    img = tio.read_image(path)
    if not no_pad:
        img, _ = pp.normalize(img)
    result = me.segment(img, spec)
    out_path = Path(out_dir) / f"{path.stem}{ds.MASK_SUFFIX}.png"
    tio.write_mask(out_path, result.mask)
    return path.stem, result.elapsed_seconds


def cmd_mask(args) -> int:
    spec = me.make_spec(args.method, _parse_params(args.param))
    files = _collect_inputs(args.inputs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        futures = {
            pool.submit(_segment_one, f, spec, out_dir, args.no_pad): f
            for f in files
        }
        for future, path in futures.items():
            try:
                stem, elapsed = future.result()
                print(f"{stem}\t{elapsed:.3f}s")
            except Exception as exc:
                failures += 1
                print(f"error: {path}: {exc}", file=sys.stderr)
                if not args.keep_going:
                    for other in futures:
                        other.cancel()
                    return 1
    return 1 if failures else 0


def _evaluate_pairs(pred_dir, gt_dir, mask_suffix, folds, seed, method_id):
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    records = []
    gt_items = {
        p.name[: -len(mask_suffix + ".png")]: p
        for p in sorted(gt_dir.iterdir())
        if p.name.endswith(mask_suffix + ".png")
    }
    assignment = None
    if folds:
        assignment = ds.assign_folds(sorted(gt_items), k=folds, seed=seed)
    for item_id, gt_path in sorted(gt_items.items()):
        pred_path = pred_dir / f"{item_id}{mask_suffix}.png"
        if not pred_path.exists():
            continue
        pred = tio.read_mask(pred_path)
        gt = tio.read_mask(gt_path)
        counts = ev.confusion(pred, gt)
        records.append(
            ev.EvalRecord(
                item_id=item_id,
                method_id=method_id,
                counts=counts,
                metrics=ev.metrics(counts),
                fold=assignment.mapping[item_id] if assignment else None,
            )
        )
    return records


def _write_reports(records, out_dir, folds):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grouping = "perFold" if folds else "overall"
    report = ev.aggregate(records, grouping)
    (out_dir / "report.txt").write_text(ev.render_table(report, "text"))
    (out_dir / "report.csv").write_text(ev.render_table(report, "csv"))
    (out_dir / "records.csv").write_text(ev.records_csv(records))
    (out_dir / "boxplot.csv").write_text(ev.export_boxplot_data(records))
    return report


def cmd_eval(args) -> int:
    records = _evaluate_pairs(
        args.pred, args.gt, args.mask_suffix, args.folds, args.seed, "external"
    )
    if not records:
        print("error: no overlapping prediction/ground-truth pairs",
              file=sys.stderr)
        return 1
    report = _write_reports(records, args.out, args.folds)
    print(ev.render_table(report, "text"))
    return 0


def cmd_bench(args) -> int:
    files = _collect_inputs([args.inputs])
    gt_dir = Path(args.gt) if args.gt else None
    records = []
    for method in args.methods:
        spec = me.make_spec(method, _parse_params(args.param))
        for path in files:
            img = tio.read_image(path)
            if not args.no_pad:
                img, _ = pp.normalize(img)
            result = me.segment(img, spec)
            gt = None
            if gt_dir is not None:
                gt_path = gt_dir / f"{path.stem}{args.mask_suffix}.png"
                if gt_path.exists():
                    gt = tio.read_mask(gt_path)
                    if not args.no_pad:
                        gt = pp.normalize(gt, pad_value=0)[0]
            if gt is not None:
                counts = ev.confusion(result.mask, gt)
            else:
                counts = ev.ConfusionCounts(0, 0, 0, 0)
            records.append(
                ev.EvalRecord(
                    item_id=path.stem,
                    method_id=method,
                    counts=counts,
                    metrics=ev.metrics(counts),
                    elapsed_seconds=result.elapsed_seconds,
                )
            )
            print(f"{method}\t{path.stem}\t{result.elapsed_seconds:.2f}s")
    report = _write_reports(records, args.out, folds=None)
    print(ev.render_table(report, "text"))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    corpus = Path(args.corpus)
    if not corpus.is_dir():
        print(f"error: corpus directory not found: {corpus}", file=sys.stderr)
        return 1
    app = create_app(corpus, static_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tissuemask",
        description="Tissue segmentation toolkit for histopathology thumbnails",
    )
    parser.add_argument("--config", help="key = value config file; flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask", help="segment images into binary masks")
    p.add_argument("inputs", nargs="+", help="image files or directories")
    p.add_argument("--method", required=True, choices=me.METHOD_IDS)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", required=True)
    p.add_argument("--no-pad", action="store_true",
                   help="skip fit-within-1024 + pad-to-square preprocessing")
    p.add_argument("--keep-going", action="store_true")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask-suffix", default=ds.MASK_SUFFIX)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run methods over a corpus, one table")
    p.add_argument("inputs", help="image directory")
    p.add_argument("--methods", nargs="+", required=True, choices=me.METHOD_IDS)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--gt", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--no-pad", action="store_true")
    p.add_argument("--mask-suffix", default=ds.MASK_SUFFIX)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="start the mask-review service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="static directory with the UI bundle")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        defaults = _load_config(args.config)
        for key, value in defaults.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and parser.get_default(attr) == getattr(args, attr):
                setattr(args, attr, value)
    try:
        return args.func(args)
    except InvalidParamError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (TissueMaskError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
