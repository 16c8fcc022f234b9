"""
Neural volume rendering with piecewise AutoInt integrals.
"""
from autoint.domains.nvr.scene import AnalyticScene, Blob, ConstantScene
from autoint.domains.nvr.camera import Camera, Ray, sphere_poses
from autoint.domains.nvr.sampling import SamplingNet, stratified_samples
from autoint.domains.nvr.render import (PiecewiseRenderConfig, RadianceModel, reference_render,
                                        reference_image, RenderReport, piecewise_render_quadrature,
                                        autoint_render, render_image)

__all__ = [
    'AnalyticScene', 'Blob', 'ConstantScene',
    'Camera', 'Ray', 'sphere_poses',
    'SamplingNet', 'stratified_samples',
    'PiecewiseRenderConfig', 'RadianceModel', 'reference_render', 'reference_image', 'RenderReport',
    'piecewise_render_quadrature', 'autoint_render', 'render_image',
]
