"""
Computed tomography: analytic phantoms, sinograms and sparse-view
inpainting with integral networks.
"""
from autoint.domains.ct.phantom import Ellipse, Phantom, ray_point, radon_oracle
from autoint.domains.ct.sinogram import Sinogram, make_sinogram, subsample_angles
from autoint.domains.ct.inpaint import ct_spec, train_ct, inpaint_sinogram, masked_psnr, \
    nonlinearity_sweep

__all__ = [
    'Ellipse', 'Phantom', 'ray_point', 'radon_oracle',
    'Sinogram', 'make_sinogram', 'subsample_angles',
    'ct_spec', 'train_ct', 'inpaint_sinogram', 'masked_psnr', 'nonlinearity_sweep',
]
