from meshkit.network.config import NetworkConfig, TrainConfig, full_scale_config, load_config
from meshkit.network.model import MeshNet, build_model, initial_layer, parameter_groups
from meshkit.network.tape import GradTape, Parameter, Tensor
from meshkit.network.train import degree_sweep, evaluate, train
