from meshkit.harmonics.angles import barycentric_to_angles, direction_to_angles
from meshkit.harmonics.basis import basis_size, real_sh_basis
from meshkit.harmonics.filters import HarmonicFilter, eval_filter, eval_radial_filter
from meshkit.harmonics.legendre import assoc_legendre
