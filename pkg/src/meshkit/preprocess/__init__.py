from meshkit.preprocess.preprocess import AugmentConfig, augment, normalize_shape
from meshkit.preprocess.synthetic import icosphere, random_grid_mesh, synth_engraved_cubes
