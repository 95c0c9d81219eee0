"""Network, training and augmentation settings and their `key = value` config files."""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

from configobj import ConfigObj, ConfigObjError

from meshkit.errors import ArgumentError, ParseError
from meshkit.preprocess.preprocess import AugmentConfig

logger = logging.getLogger(__name__)

TASKS = ("classification", "dense")
PREDICT_ON = ("vertex", "facet")


@dataclass
class NetworkConfig:
    """Encoder widths per resolution T^0..T^D-1 and strides between consecutive resolutions.

    channels[0] is the width of the initial layer on T^0; every later level k
    runs repeats[k-1] encoder units. Dual levels are resolution indices whose
    units add a point convolution of the matching radius.
    """

    channels: tuple = (16, 16, 32, 48, 64)
    strides: tuple = (1, 2, 2, 2)
    repeats: tuple = (2, 2, 2, 2)
    degree: int = 3
    dual_levels: tuple = (4,)
    dual_radii: tuple = (0.5,)
    decoder_channels: tuple = (48, 32, 16, 16)
    task: str = "classification"
    n_classes: int = 4
    predict_on: str = "vertex"
    in_features: int = 9
    textured: bool = False
    fc_hidden: Optional[int] = None
    pooling: str = "max"
    decimation: str = "qem"
    max_iters: int = 8

    def __post_init__(self):
        for name in ("channels", "strides", "repeats", "dual_levels", "dual_radii", "decoder_channels"):
            setattr(self, name, tuple(getattr(self, name)))
        self.validate()

    @property
    def depth(self):
        return len(self.channels)

    def validate(self):
        depth = self.depth
        if depth < 1 or any(c < 1 for c in self.channels):
            raise ArgumentError(f"channels must be a non-empty list of positive widths, got {self.channels}")
        if len(self.strides) != depth - 1:
            raise ArgumentError(f"{depth} resolutions need {depth - 1} strides, got {len(self.strides)}")
        if any(s < 1 for s in self.strides):
            raise ArgumentError(f"strides must be >= 1, got {self.strides}")
        if len(self.repeats) != depth - 1 or any(r < 1 for r in self.repeats):
            raise ArgumentError(f"need {depth - 1} positive repeat counts, got {self.repeats}")
        if self.degree < 0:
            raise ArgumentError(f"degree must be >= 0, got {self.degree}")
        if len(self.dual_radii) != len(self.dual_levels):
            raise ArgumentError("dual_radii needs one radius per dual level")
        if any(not 1 <= level < depth for level in self.dual_levels):
            raise ArgumentError(f"dual levels must lie in [1, {depth - 1}], got {self.dual_levels}")
        if any(not r > 0 for r in self.dual_radii):
            raise ArgumentError(f"dual radii must be > 0, got {self.dual_radii}")
        if self.task not in TASKS:
            raise ArgumentError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.predict_on not in PREDICT_ON:
            raise ArgumentError(f"predict_on must be one of {PREDICT_ON}, got {self.predict_on!r}")
        if self.task == "dense" and len(self.decoder_channels) != depth - 1:
            raise ArgumentError(f"dense labelling needs {depth - 1} decoder widths, got {len(self.decoder_channels)}")
        if self.n_classes < 2:
            raise ArgumentError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.in_features < 1:
            raise ArgumentError("in_features must be >= 1")
        if self.pooling not in ("max", "avg"):
            raise ArgumentError(f"pooling must be max or avg, got {self.pooling!r}")
        if self.decimation not in ("qem", "iterative"):
            raise ArgumentError(f"network decimation must be qem or iterative, got {self.decimation!r}")
        if self.max_iters < 1:
            raise ArgumentError(f"max_iters must be >= 1, got {self.max_iters}")

    def radius_of(self, level):
        return dict(zip(self.dual_levels, self.dual_radii)).get(level)


def full_scale_config(**overrides):
    """Six resolutions, widths 32..256, strides 4,3,3,2,2 and point convolutions on the three coarsest."""
    settings = dict(
        channels=(32, 64, 96, 128, 192, 256),
        strides=(4, 3, 3, 2, 2),
        repeats=(2, 2, 4, 4, 4),
        degree=3,
        dual_levels=(3, 4, 5),
        dual_radii=(0.2, 0.4, 0.8),
        decoder_channels=(128, 128, 96, 96, 96),
    )
    settings.update(overrides)
    return NetworkConfig(**settings)


@dataclass
class TrainConfig:
    epochs: int = 60
    batch_size: int = 8
    lr: float = 0.001
    lr_decay: float = 0.98
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    with_height: bool = False

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ArgumentError("epochs must be >= 0 and batch_size >= 1")
        if not self.lr > 0 or not 0 < self.lr_decay <= 1:
            raise ArgumentError("lr must be > 0 and lr_decay in (0, 1]")
        if self.weight_decay < 0:
            raise ArgumentError("weight_decay must be >= 0")


_INT_LISTS = {"channels", "strides", "repeats", "dual_levels", "decoder_channels"}
_FLOAT_LISTS = {"dual_radii", "scale"}
_INTS = {"degree", "n_classes", "in_features", "fc_hidden", "max_iters", "epochs", "batch_size", "seed"}
_FLOATS = {"lr", "lr_decay", "weight_decay", "beta1", "beta2", "eps", "shift", "vertex_dropout", "facet_dropout", "color_jitter"}
_BOOLS = {"textured", "with_height", "flip"}


def _read_value(section, key):
    if key in _INT_LISTS:
        return tuple(int(v) for v in section.as_list(key))
    if key in _FLOAT_LISTS:
        return tuple(float(v) for v in section.as_list(key))
    if key in _INTS:
        return section.as_int(key)
    if key in _FLOATS:
        return section.as_float(key)
    if key in _BOOLS:
        return section.as_bool(key)
    value = section[key]
    return None if value in ("none", "None", "") else value


def _collect(section, fields, where):
    values = {}
    for key in section.scalars:
        if key not in fields:
            continue
        try:
            values[key] = _read_value(section, key)
        except (ValueError, TypeError) as exc:
            raise ArgumentError(f"{where}: bad value for {key!r}: {exc}")
    return values


def load_config(path):
    """Read (NetworkConfig, TrainConfig, AugmentConfig) from a ConfigObj file.

    Keys may sit in [network], [train] and [augment] sections or at top level;
    top-level keys go to whichever settings object has a field of that name.
    """
    try:
        config = ConfigObj(path, file_error=True)
    except (ConfigObjError, OSError) as exc:
        raise ParseError(str(exc), path)
    result = []
    for section_name, cls in (("network", NetworkConfig), ("train", TrainConfig), ("augment", AugmentConfig)):
        fields = {f.name for f in dataclasses.fields(cls)}
        values = _collect(config, fields, path)
        if section_name in config.sections:
            values.update(_collect(config[section_name], fields, f"{path} [{section_name}]"))
        result.append(cls(**values))
    known = set().union(*({f.name for f in dataclasses.fields(c)} for c in (NetworkConfig, TrainConfig, AugmentConfig)))
    unknown = [k for k in config.scalars if k not in known]
    for name in config.sections:
        unknown += [f"{name}.{k}" for k in config[name].scalars if k not in known]
    if unknown:
        logger.warning("%s: ignoring unknown keys %s", path, unknown)
    return tuple(result)
