"""Training loop, evaluation and the harmonic-degree sweep."""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from meshkit.errors import ArgumentError, DivergenceError
from meshkit.helpers.batching import Sample, concat_batch, sample_hierarchies
from meshkit.helpers.utility import parallel_map
from meshkit.network.checkpoint import save_checkpoint
from meshkit.network.functional import softmax_cross_entropy
from meshkit.network.metrics import summarize
from meshkit.network.model import build_model
from meshkit.network.optim import Adam, learning_rate
from meshkit.network.tape import GradTape
from meshkit.preprocess.preprocess import augment, normalize_shape

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["epoch", "lr", "loss", "accuracy"]


def make_samples(labelled_meshes, with_height=False, normalize=True):
    """Samples from (mesh, label) pairs, computing facet geometrics in parallel."""
    def build(item):
        mesh, label = item
        return Sample.from_mesh(normalize_shape(mesh) if normalize else mesh, label, with_height=with_height)

    return parallel_map(build, list(labelled_meshes))


def batch_targets(batch, config):
    if batch.labels is None:
        raise ArgumentError("training and evaluation need labelled samples")
    if config.task == "classification":
        if batch.dense:
            raise ArgumentError("classification needs one label per sample")
        return batch.labels
    rows = batch.mesh.n_facets if config.predict_on == "facet" else batch.mesh.n_vertices
    if not batch.dense or len(batch.labels) != rows:
        raise ArgumentError(f"dense labelling needs one label per {config.predict_on}")
    return batch.labels


def _batches(order, batch_size):
    return [order[k:k + batch_size] for k in range(0, len(order), batch_size)]


@dataclass
class TrainingResult:
    model: object
    log: pd.DataFrame
    checkpoint: Optional[str] = None


class Trainer:
    """Adam on softmax cross-entropy with an exponentially decaying learning rate.

    Mesh pyramids are cached per sample when no augmentation is active.
    """

    def __init__(self, model, train_config, augment_config=None, checkpoint_path=None, log_path=None, progress=False):
        self.model = model
        self.config = train_config
        self.augment = augment_config
        self.checkpoint_path = checkpoint_path
        self.log_path = log_path
        self.progress = progress
        self.optimizer = Adam(
            model.params.values(), train_config.beta1, train_config.beta2, train_config.eps, train_config.weight_decay
        )
        self.hierarchies = {}

    def _augmenting(self):
        return self.augment is not None and self.augment.enabled

    def _prepare(self, samples, indices, epoch):
        model_config = self.model.config
        if self._augmenting():
            seed = self.config.seed
            samples = [
                augment(samples[i], self.augment, np.random.default_rng(np.random.SeedSequence([seed, epoch, int(i)])))
                for i in indices
            ]
            return self.model.prepare(concat_batch(samples))
        missing = [int(i) for i in indices if int(i) not in self.hierarchies]
        if missing:
            built = sample_hierarchies(
                [samples[i].mesh for i in missing], model_config.strides, model_config.max_iters, model_config.decimation
            )
            self.hierarchies.update(zip(missing, built))
        cache = [self.hierarchies[int(i)] for i in indices]
        return self.model.prepare(concat_batch([samples[i] for i in indices]), cache)

    def step(self, prepared, lr):
        """One forward/backward/update; returns (loss, predictions)."""
        model = self.model
        targets = batch_targets(prepared.batch, model.config)
        model.zero_grad()
        # running statistics are updated in place by the forward pass
        buffers = {name: b.copy() for name, b in model.buffers.items()}
        tape = GradTape()
        logits = model.forward(prepared, tape, training=True)
        loss = softmax_cross_entropy(tape, logits, targets)
        value = float(loss.value)
        if np.isfinite(value):
            tape.backward(loss)
            if all(p.grad is None or np.all(np.isfinite(p.grad)) for p in model.params.values()):
                self.optimizer.step(lr)
                return value, np.argmax(logits.value, axis=1)
            value = float("nan")
        for name, saved in buffers.items():
            model.buffers[name][...] = saved
        return value, None

    def _diverged(self, epoch):
        path = None
        if self.checkpoint_path is not None:
            path = save_checkpoint(self.checkpoint_path, self.model, epoch)
        raise DivergenceError(f"non-finite loss in epoch {epoch}", checkpoint=path)

    def fit(self, samples, epochs=None):
        if not samples:
            raise ArgumentError("cannot train on an empty dataset")
        epochs = self.config.epochs if epochs is None else epochs
        rng = np.random.default_rng(self.config.seed)
        rows = []
        for epoch in tqdm(range(epochs), disable=not self.progress, desc="epochs"):
            lr = learning_rate(epoch, self.config.lr, self.config.lr_decay)
            losses, correct, seen = [], 0, 0
            for indices in _batches(rng.permutation(len(samples)), self.config.batch_size):
                prepared = self._prepare(samples, indices, epoch)
                loss, predictions = self.step(prepared, lr)
                if predictions is None:
                    self._diverged(epoch)
                targets = batch_targets(prepared.batch, self.model.config)
                losses.append(loss * len(targets))
                correct += int(np.sum(predictions == targets))
                seen += len(targets)
            row = {"epoch": epoch, "lr": lr, "loss": float(np.sum(losses) / seen), "accuracy": correct / seen}
            rows.append(row)
            logger.info("epoch %d lr %.6g loss %.4f accuracy %.3f", epoch, lr, row["loss"], row["accuracy"])
            if self.checkpoint_path is not None:
                save_checkpoint(self.checkpoint_path, self.model, epoch)
            if self.log_path is not None:
                pd.DataFrame(rows, columns=LOG_COLUMNS).to_json(self.log_path, orient="records", lines=True)
        return TrainingResult(self.model, pd.DataFrame(rows, columns=LOG_COLUMNS), self.checkpoint_path)


def train(model, samples, train_config, augment_config=None, checkpoint_path=None, log_path=None, progress=False):
    """Train in place; returns the model, the per-epoch log and the checkpoint path."""
    trainer = Trainer(model, train_config, augment_config, checkpoint_path, log_path, progress)
    return trainer.fit(samples)


def predict(model, samples, batch_size=8):
    """Predicted labels per sample (classification) or per entity, concatenated in sample order."""
    predictions = []
    for k in range(0, len(samples), batch_size):
        prepared = model.prepare(concat_batch(samples[k:k + batch_size]))
        predictions.append(model.predict(prepared))
    return np.concatenate(predictions) if predictions else np.zeros(0, dtype=np.int64)


def evaluate(model, samples, batch_size=8):
    """Accuracy for classification; OA, mAcc, per-class IoU and mIoU for dense labelling."""
    if not samples:
        raise ArgumentError("cannot evaluate on an empty dataset")
    config = model.config
    labels = []
    for k in range(0, len(samples), batch_size):
        labels.append(batch_targets(concat_batch(samples[k:k + batch_size]), config))
    labels = np.concatenate(labels)
    if labels.max() >= config.n_classes:
        raise ArgumentError(f"label {labels.max()} exceeds the model's {config.n_classes} classes")
    return summarize(labels, predict(model, samples, batch_size), config.n_classes, config.task)


def degree_sweep(degrees, network_config, train_config, train_samples, test_samples, progress=False):
    """Train one model per harmonic degree; returns a table of degree, parameters and test accuracy."""
    rows = []
    for degree in degrees:
        config = dataclasses.replace(network_config, degree=degree)
        model = build_model(config, np.random.default_rng(train_config.seed))
        train(model, train_samples, train_config, progress=progress)
        metrics = evaluate(model, test_samples, train_config.batch_size)
        score = metrics["accuracy"] if config.task == "classification" else metrics["miou"]
        rows.append({"degree": degree, "params": model.param_count(), "score": score})
        logger.info("degree %d: %d parameters, score %.3f", degree, rows[-1]["params"], score)
    return pd.DataFrame(rows, columns=["degree", "params", "score"])
