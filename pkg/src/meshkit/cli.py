"""meshkit command line: decimate, train, eval, bench, synth."""
import argparse
import json
import logging
import os
import sys
import time

import numpy as np
import pandas as pd
from tqdm import tqdm

from meshkit.decimation.hierarchy import METHODS, make_decimator
from meshkit.decimation.iterative_qem import IterativeQEMDecimator
from meshkit.decimation.single_pass import QuadricDecimator
from meshkit.errors import ArgumentError, DivergenceError, MeshkitError, ParseError, StructuralError
from meshkit.helpers.data_loader import load_manifest, load_mesh, write_manifest, write_mesh
from meshkit.helpers.utility import configure_logging, parallel_map, set_threads
from meshkit.network.checkpoint import load_checkpoint
from meshkit.network.config import NetworkConfig, TrainConfig, load_config
from meshkit.network.model import build_model
from meshkit.network.train import evaluate, make_samples, predict, train
from meshkit.preprocess.preprocess import AugmentConfig
from meshkit.preprocess.synthetic import random_grid_mesh, synth_engraved_cubes

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_FLAGS = 3
EXIT_NUMERIC = 4


class FlagError(MeshkitError):
    """Invalid command-line flags."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise FlagError(message)


def _int_list(text):
    try:
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def write_cluster_map(path, cmap):
    """One `cluster_id io_index` row per input vertex."""
    np.savetxt(path, np.stack([cmap.vcluster, cmap.iomap], axis=1), fmt="%d")


def _print_records(table):
    """Human table, then one JSON object per row."""
    print(table.to_string(index=False))
    for record in table.to_dict(orient="records"):
        print(json.dumps({k: (v.item() if hasattr(v, "item") else v) for k, v in record.items()}))


def cmd_decimate(args):
    if args.method == "voxel" and args.grid is None:
        raise FlagError("--method voxel needs --grid")
    if args.method != "voxel" and args.target is None and args.stride is None:
        raise FlagError("give --target or --stride")
    loaded = load_mesh(args.inp)
    mesh = loaded.mesh
    decimator = make_decimator(args.method, args.iters, args.grid)
    target = args.target
    if target is None and args.stride is not None:
        if args.stride < 1:
            raise FlagError("--stride must be >= 1")
        target = max(1, int(np.ceil(mesh.n_vertices / args.stride - 1e-9)))
    start = time.perf_counter()
    result = decimator.decimate(mesh, target_vertices=target if args.method != "voxel" else None)
    elapsed = time.perf_counter() - start
    write_mesh(args.out, result.mesh)
    if args.clusters:
        write_cluster_map(args.clusters, result.cluster_map)
    table = pd.DataFrame(
        [
            {
                "n_in": mesh.n_vertices,
                "n_out": result.mesh.n_vertices,
                "removed": result.removed_count,
                "cost": result.cost,
                "seconds": elapsed,
            }
        ]
    )
    _print_records(table)
    return EXIT_OK


def _load_settings(args):
    if args.config:
        network, training, augmenting = load_config(args.config)
    else:
        network, training, augmenting = NetworkConfig(), TrainConfig(), AugmentConfig()
    if args.seed is not None:
        training.seed = args.seed
    if getattr(args, "epochs", None) is not None:
        training.epochs = args.epochs
    if args.batch_size is not None:
        training.batch_size = args.batch_size
    return network, training, augmenting


def _load_dataset(manifest_path, with_height):
    manifest = load_manifest(manifest_path)
    meshes = parallel_map(lambda p: load_mesh(p).mesh, list(manifest["path"]))
    samples = make_samples(zip(meshes, manifest["label"].tolist()), with_height)
    return manifest, samples


def cmd_train(args):
    network, training, augmenting = _load_settings(args)
    _, samples = _load_dataset(args.data, training.with_height)
    n_classes = max(s.label for s in samples) + 1
    if n_classes > network.n_classes:
        raise ArgumentError(f"manifest has {n_classes} classes, the network config only {network.n_classes}")
    network.in_features = samples[0].geometrics.shape[1]
    network.validate()
    model = build_model(network, np.random.default_rng(training.seed))
    logger.info("training %d parameters on %d samples", model.param_count(), len(samples))
    result = train(model, samples, training, augmenting, args.ckpt, args.log, progress=args.verbose)
    _print_records(result.log)
    return EXIT_OK


def cmd_eval(args):
    model, epoch = load_checkpoint(args.ckpt)
    manifest, samples = _load_dataset(args.data, model.config.in_features == 12)
    batch_size = args.batch_size or 8
    metrics = evaluate(model, samples, batch_size)
    rows = [{"metric": k, "value": float(v)} for k, v in metrics.items() if np.ndim(v) == 0]
    if "iou" in metrics:
        rows += [{"metric": f"iou_{c}", "value": float(v)} for c, v in enumerate(metrics["iou"])]
    _print_records(pd.DataFrame(rows))
    if args.export:
        export_predictions(args.export, model, manifest, samples, batch_size)
    return EXIT_OK


def export_predictions(folder, model, manifest, samples, batch_size):
    """Write every evaluated mesh as PLY with a predicted label per vertex."""
    os.makedirs(folder, exist_ok=True)
    predictions = predict(model, samples, batch_size)
    config = model.config
    cursor = 0
    for path, sample in zip(manifest["path"], samples):
        if config.task == "classification":
            labels = np.full(sample.mesh.n_vertices, predictions[cursor])
            cursor += 1
        elif config.predict_on == "facet":
            facet_labels = predictions[cursor:cursor + sample.mesh.n_facets]
            cursor += sample.mesh.n_facets
            # a vertex takes the label of its first incident facet
            labels = np.zeros(sample.mesh.n_vertices, dtype=np.int64)
            labels[sample.mesh.facets[::-1].ravel()] = np.repeat(facet_labels[::-1], 3)
        else:
            labels = predictions[cursor:cursor + sample.mesh.n_vertices]
            cursor += sample.mesh.n_vertices
        name = os.path.splitext(os.path.basename(path))[0] + ".ply"
        write_mesh(os.path.join(folder, name), sample.mesh, labels=labels)
    logger.info("exported %d prediction meshes to %s", len(samples), folder)


def _best_time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def cmd_bench(args):
    rng = np.random.default_rng(args.seed or 0)
    rows = []
    for size in tqdm(args.sizes, disable=not args.verbose, desc="bench"):
        mesh = random_grid_mesh(size, rng)
        target = max(1, mesh.n_vertices // 2)
        ours = _best_time(lambda: QuadricDecimator(args.iters).decimate(mesh, target_vertices=target), args.repeats)
        baseline = _best_time(lambda: IterativeQEMDecimator().decimate(mesh, target_vertices=target), args.repeats)
        rows.append(
            {
                "size": size,
                "edges": len(mesh.edges()),
                "ours_ms": 1000.0 * ours,
                "baseline_ms": 1000.0 * baseline,
                "ratio": ours / baseline,
            }
        )
    _print_records(pd.DataFrame(rows))
    return EXIT_OK


def cmd_synth(args):
    per_class = args.per_class + args.test_per_class
    dataset = synth_engraved_cubes(args.classes, per_class, args.seed or 0, progress=args.verbose)
    os.makedirs(args.out, exist_ok=True)
    train_entries, test_entries = [], []
    for index, (mesh, label) in enumerate(dataset):
        path = os.path.join(args.out, f"cube_{label}_{index % per_class:04d}.off")
        write_mesh(path, mesh)
        (train_entries if index % per_class < args.per_class else test_entries).append((path, label))
    write_manifest(os.path.join(args.out, "train.tsv"), train_entries)
    if args.test_per_class:
        write_manifest(os.path.join(args.out, "test.tsv"), test_entries)
    print(json.dumps({"meshes": len(dataset), "train": len(train_entries), "test": len(test_entries)}))
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="meshkit", description=__doc__)
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default $MESHKIT_THREADS or cpu count)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("decimate", help="simplify one mesh")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--target", type=int)
    group.add_argument("--stride", type=float)
    p.add_argument("--iters", type=int, default=1)
    p.add_argument("--method", choices=METHODS, default="qem")
    p.add_argument("--grid", type=float)
    p.add_argument("--clusters", help="write the cluster map sidecar here")
    p.set_defaults(func=cmd_decimate)

    for name, func in (("train", cmd_train), ("eval", cmd_eval)):
        p = sub.add_parser(name)
        p.add_argument("--data", required=True, help="manifest of path<TAB>label lines")
        p.add_argument("--ckpt", required=True)
        p.add_argument("--batch-size", type=int, default=None)
        if name == "train":
            p.add_argument("--config")
            p.add_argument("--log")
            p.add_argument("--epochs", type=int)
        else:
            p.add_argument("--export", help="folder for PLY files with predicted labels")
        p.set_defaults(func=func)

    p = sub.add_parser("bench", help="time single-pass against iterative decimation")
    p.add_argument("--sizes", type=_int_list, default=[10000, 20000])
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--iters", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write engraved cubes and a manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--test-per-class", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.verbose)
        set_threads(args.threads)
        if getattr(args, "repeats", 1) < 1:
            raise FlagError("--repeats must be >= 1")
        return args.func(args)
    except (ParseError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_PARSE
    except (FlagError, ArgumentError, StructuralError) as exc:
        logger.error("%s", exc)
        return EXIT_FLAGS
    except DivergenceError as exc:
        logger.error("%s (last finite checkpoint: %s)", exc, exc.checkpoint)
        return EXIT_NUMERIC
    finally:
        set_threads(None)


if __name__ == "__main__":
    sys.exit(main())
