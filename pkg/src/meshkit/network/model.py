"""Encoder/decoder mesh network assembled from the meshkit ops."""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from meshkit.conv.adjacency import VertexFacetAdjacency
from meshkit.conv.pcloud import batched_radius_search
from meshkit.errors import ArgumentError
from meshkit.harmonics.basis import basis_size
from meshkit.helpers.batching import batch_hierarchy
from meshkit.mesh.core import compute_normals_areas
from meshkit.network import functional as fn
from meshkit.network.tape import Parameter, Tensor

logger = logging.getLogger(__name__)


class ParameterStore:
    """Named parameters (trainable) and buffers (batch-norm running statistics)."""

    def __init__(self, rng):
        self.rng = rng
        self.params = {}
        self.buffers = {}

    def add(self, name, value, group):
        if name in self.params:
            raise ArgumentError(f"duplicate parameter name {name!r}")
        self.params[name] = Parameter(value, name, group)
        return self.params[name]

    def buffer(self, name, value):
        self.buffers[name] = np.asarray(value, dtype=np.float64)
        return self.buffers[name]

    def dense(self, name, c_in, c_out, group, bias=False):
        weight = self.add(f"{name}.weight", self.rng.normal(0.0, np.sqrt(2.0 / c_in), (c_in, c_out)), group)
        b = self.add(f"{name}.bias", np.zeros(c_out), group) if bias else None
        return weight, b

    def harmonic(self, name, degree, channels, group):
        size = basis_size(degree)
        shape = (size,) + tuple(np.atleast_1d(channels))
        fan = size * int(np.prod(shape[1:-1])) if len(shape) > 2 else size
        return self.add(name, self.rng.normal(0.0, np.sqrt(4.0 * np.pi / fan), shape), group)


class BatchNorm:
    def __init__(self, store, name, channels, group):
        self.gamma = store.add(f"{name}.gamma", np.ones(channels), group)
        self.beta = store.add(f"{name}.beta", np.zeros(channels), group)
        self.running_mean = store.buffer(f"{name}.running_mean", np.zeros(channels))
        self.running_var = store.buffer(f"{name}.running_var", np.ones(channels))

    def __call__(self, tape, x, training):
        return fn.batch_norm(tape, x, self.gamma, self.beta, self.running_mean, self.running_var, training)


class ConvBlock:
    """1x1 convolution followed by batch norm and ReLU."""

    def __init__(self, store, name, c_in, c_out, group):
        self.weight, _ = store.dense(name, c_in, c_out, group)
        self.bn = BatchNorm(store, f"{name}.bn", c_out, group)

    def __call__(self, tape, x, training):
        return fn.relu(tape, self.bn(tape, fn.dense(tape, x, self.weight), training))


@dataclass
class LevelGeometry:
    """Everything the convolutions of one resolution need, built once per batch."""

    mesh: object
    vertex_offsets: np.ndarray
    adjacency: VertexFacetAdjacency
    normals: np.ndarray
    neighbors: object = None


@dataclass
class PreparedBatch:
    batch: object
    levels: list = field(default_factory=list)
    cluster_maps: list = field(default_factory=list)

    @property
    def depth(self):
        return len(self.levels)


class EncoderUnit:
    """Pointwise, depth-wise vertex2vertex (plus a point convolution at dual levels), pointwise."""

    def __init__(self, store, name, c_in, channels, degree, radius=None):
        self.pre = ConvBlock(store, f"{name}.pre", c_in, channels, "encoder")
        self.v2f = store.harmonic(f"{name}.v2v.v2f", degree, channels, "encoder")
        self.bn_facet = BatchNorm(store, f"{name}.v2v.bn_facet", channels, "encoder")
        self.f2v = store.harmonic(f"{name}.v2v.f2v", degree, channels, "encoder")
        self.bn_vertex = BatchNorm(store, f"{name}.v2v.bn_vertex", channels, "encoder")
        self.radius = radius
        if radius is not None:
            self.pcloud = store.harmonic(f"{name}.pcloud.coefficients", degree, channels, "dual")
            self.c0 = store.add(f"{name}.pcloud.c0", np.ones(channels), "dual")
            self.bn_pcloud = BatchNorm(store, f"{name}.pcloud.bn", channels, "dual")
        self.post = ConvBlock(store, f"{name}.post", channels, channels, "encoder")

    def __call__(self, tape, x, level, training):
        h = self.pre(tape, x, training)
        facet = fn.vertex2facet(tape, level.mesh.facets, h, self.v2f)
        facet = fn.relu(tape, self.bn_facet(tape, facet, training))
        mesh_branch = fn.facet2vertex(tape, level.adjacency, facet, level.normals, self.f2v)
        out = fn.relu(tape, self.bn_vertex(tape, mesh_branch, training))
        if self.radius is not None:
            point = fn.pcloud_conv(tape, level.neighbors, h, self.pcloud, self.c0, self.radius)
            out = fn.add(tape, out, fn.relu(tape, self.bn_pcloud(tape, point, training)))
        return self.post(tape, out, training)


class EncoderLevel:
    """Repeated units with concatenation skips, closed by a 1x1 transition."""

    def __init__(self, store, index, c_in, channels, repeats, degree, radius=None):
        self.units = []
        width = c_in
        for k in range(repeats):
            self.units.append(EncoderUnit(store, f"encoder.L{index}.unit{k}", width, channels, degree, radius))
            width += channels
        self.transition = ConvBlock(store, f"encoder.L{index}.transition", width, channels, "encoder")

    def __call__(self, tape, x, level, training):
        features = [x]
        for unit in self.units:
            stacked = features[0] if len(features) == 1 else fn.concat(tape, features)
            features.append(unit(tape, stacked, level, training))
        return self.transition(tape, fn.concat(tape, features), training)


class InitialLayer:
    """dense(H_G) on facets, plus facet2facet on textures when given, carried to vertices by facet2vertex."""

    def __init__(self, store, in_features, channels, degree, textured):
        self.weight, _ = store.dense("initial.dense", in_features, channels, "initial")
        self.kernel = store.harmonic("initial.facet2facet", degree, (3, channels), "initial") if textured else None
        self.f2v = store.harmonic("initial.facet2vertex", degree, channels, "initial")

    def __call__(self, tape, geometrics, texture, level):
        if geometrics is None:
            raise ArgumentError("the initial layer needs facet geometrics")
        facet = fn.dense(tape, geometrics, self.weight)
        if self.kernel is not None and texture is not None:
            facet = fn.add(tape, facet, fn.facet2facet(tape, texture, self.kernel))
        return fn.facet2vertex(tape, level.adjacency, facet, level.normals, self.f2v)


class MeshNet:
    """Encoder over a mesh pyramid with a classification head or a dense-labelling decoder."""

    def __init__(self, config, rng):
        config.validate()
        self.config = config
        store = ParameterStore(rng)
        self.store = store
        channels = config.channels
        self.initial = InitialLayer(store, config.in_features, channels[0], config.degree, config.textured)
        self.initial_bn = BatchNorm(store, "initial.bn", channels[0], "initial")
        self.encoder = [
            EncoderLevel(
                store, k, channels[k - 1], channels[k], config.repeats[k - 1], config.degree, config.radius_of(k)
            )
            for k in range(1, config.depth)
        ]
        if config.task == "classification":
            hidden = config.fc_hidden or channels[-1]
            self.fc1 = store.dense("head.fc1", channels[-1], hidden, "head", bias=True)
            self.fc2 = store.dense("head.fc2", hidden, config.n_classes, "head", bias=True)
        else:
            self.decoder = []
            width = channels[-1]
            for j, out in zip(range(config.depth - 1, 0, -1), config.decoder_channels):
                self.decoder.append(ConvBlock(store, f"decoder.L{j - 1}", width + channels[j - 1], out, "decoder"))
                width = out
            self.facet_filter = None
            if config.predict_on == "facet":
                self.facet_filter = store.harmonic("head.vertex2facet", config.degree, width, "head")
            self.classifier = store.dense("head.classifier", width, config.n_classes, "head", bias=True)

    @property
    def params(self):
        return self.store.params

    @property
    def buffers(self):
        return self.store.buffers

    def param_count(self):
        return int(sum(p.size for p in self.params.values()))

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def prepare(self, batch, hierarchy_cache=None):
        """Decimate the batch sample by sample and precompute per-level adjacency and normals."""
        config = self.config
        pyramid = batch_hierarchy(batch, config.strides, config.max_iters, config.decimation, hierarchy_cache)
        levels = []
        for k, (mesh, offsets) in enumerate(zip(pyramid.meshes, pyramid.vertex_offsets)):
            radius = config.radius_of(k)
            neighbors = batched_radius_search(mesh.vertices, offsets, radius) if radius is not None else None
            levels.append(
                LevelGeometry(
                    mesh,
                    offsets,
                    VertexFacetAdjacency.from_facets(mesh.facets, mesh.n_vertices),
                    compute_normals_areas(mesh).normals,
                    neighbors,
                )
            )
        return PreparedBatch(batch, levels, pyramid.cluster_maps)

    def forward(self, prepared, tape=None, training=False):
        """Logits per sample (classification) or per vertex/facet of T^0 (dense)."""
        batch, levels = prepared.batch, prepared.levels
        config = self.config
        x = self.initial(tape, Tensor(batch.geometrics), batch.texture, levels[0])
        x = fn.relu(tape, self.initial_bn(tape, x, training))
        skips = [x]
        for k, level_block in enumerate(self.encoder, start=1):
            x = fn.pool(tape, x, prepared.cluster_maps[k - 1], config.pooling)
            x = level_block(tape, x, levels[k], training)
            skips.append(x)

        if config.task == "classification":
            x = fn.global_average_pool(tape, x, levels[-1].vertex_offsets)
            weight, bias = self.fc1
            x = fn.relu(tape, fn.dense(tape, x, weight, bias))
            weight, bias = self.fc2
            return fn.dense(tape, x, weight, bias)

        for block, j in zip(self.decoder, range(config.depth - 1, 0, -1)):
            x = fn.unpool(tape, x, prepared.cluster_maps[j - 1])
            x = block(tape, fn.concat(tape, [x, skips[j - 1]]), training)
        if self.facet_filter is not None:
            x = fn.vertex2facet(tape, levels[0].mesh.facets, x, self.facet_filter)
        weight, bias = self.classifier
        return fn.dense(tape, x, weight, bias)

    def predict(self, prepared):
        return np.argmax(self.forward(prepared, None, training=False).value, axis=1)


def build_model(config, rng=None):
    if rng is None:
        rng = np.random.default_rng(0)
    model = MeshNet(config, rng)
    logger.debug("built %s model with %d parameters", config.task, model.param_count())
    return model


def initial_layer(model, prepared, tape=None, geometrics=None):
    """Vertex features of the initial layer before its batch norm."""
    batch = prepared.batch
    if geometrics is None:
        geometrics = Tensor(batch.geometrics)
    return model.initial(tape, geometrics, batch.texture, prepared.levels[0])


def parameter_groups(model):
    """Parameter names by block: initial, encoder, dual, decoder, head."""
    groups = {}
    for name, p in model.params.items():
        groups.setdefault(p.group, []).append(name)
    return groups
