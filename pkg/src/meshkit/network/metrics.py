"""Confusion-matrix metrics: overall accuracy, mean class accuracy, IoU."""
import numpy as np

from meshkit.errors import ArgumentError


def confusion_matrix(labels, predictions, n_classes):
    """Counts C[true, predicted]."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    predictions = np.asarray(predictions, dtype=np.int64).ravel()
    if labels.shape != predictions.shape:
        raise ArgumentError(f"{len(labels)} labels but {len(predictions)} predictions")
    for name, values in (("label", labels), ("prediction", predictions)):
        if values.size and (values.min() < 0 or values.max() >= n_classes):
            raise ArgumentError(f"{name} outside [0, {n_classes})")
    return np.bincount(labels * n_classes + predictions, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def overall_accuracy(confusion):
    total = confusion.sum()
    return float(np.trace(confusion) / total) if total else float("nan")


def class_accuracy(confusion):
    support = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(support > 0, np.diag(confusion) / np.maximum(support, 1), np.nan)


def mean_accuracy(confusion):
    """Mean recall over classes that occur in the labels."""
    return float(np.nanmean(class_accuracy(confusion)))


def intersection_over_union(confusion):
    """TP / (TP + FP + FN) per class; nan for classes absent from labels and predictions."""
    tp = np.diag(confusion).astype(np.float64)
    denom = confusion.sum(axis=0) + confusion.sum(axis=1) - tp
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, tp / np.maximum(denom, 1), np.nan)


def summarize(labels, predictions, n_classes, task="classification"):
    confusion = confusion_matrix(labels, predictions, n_classes)
    if task == "classification":
        return {"accuracy": overall_accuracy(confusion), "confusion": confusion}
    iou = intersection_over_union(confusion)
    return {
        "oa": overall_accuracy(confusion),
        "macc": mean_accuracy(confusion),
        "iou": iou,
        "miou": float(np.nanmean(iou)),
        "confusion": confusion,
    }
