"""
.. py:module:: io
    :platform: Unix

Artifact files: sinograms as 16-bit PGM, rendered images as binary PPM
(written with OpenCV), float images in a raw little-endian format, and CSV
and JSON tables.

The raw float format is a 16-byte header ``{magic "AINT", width u32,
height u32, channels u32}`` followed by ``height * width * channels``
little-endian float32 values in row-major order.
"""
import csv
import json
import os
import struct

import cv2
import numpy as np

from autoint.errors import MissingArtifactError

__all__ = ['write_pgm16', 'read_pgm16', 'write_ppm', 'read_ppm', 'write_raw', 'read_raw',
           'write_csv', 'write_json', 'read_json']

RAW_MAGIC = b'AINT'
RAW_HEADER = struct.Struct('<4sIII')


def _ensure_folder(path):
    folder = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(folder):
        os.makedirs(folder)


def _imwrite(path, img):
    _ensure_folder(path)
    if not cv2.imwrite(path, img):
        raise IOError("Could not write image '{}'.".format(path))


def _imread(path):
    if not os.path.exists(path):
        raise MissingArtifactError("Image '{}' does not exist.".format(path))
    return cv2.imread(path, cv2.IMREAD_UNCHANGED)


def write_pgm16(path, grid, peak=None):
    """Save a non-negative 2-D grid as a 16-bit PGM image.

    Values are scaled so that *peak* (default: the grid maximum) maps to
    65535; negative values are clipped to 0.

    :returns: the peak used for scaling
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise ValueError("PGM images need a 2-D grid, got shape {}.".format(grid.shape))
    if peak is None:
        peak = float(grid.max()) if grid.size else 0.0
    scaled = np.zeros_like(grid) if peak <= 0 else np.clip(grid / peak, 0.0, 1.0)
    _imwrite(path, np.round(scaled * 65535).astype(np.uint16))
    return peak


def read_pgm16(path, peak=1.0):
    """Load a 16-bit PGM image as floats in ``[0, peak]``."""
    return _imread(path).astype(float) / 65535 * peak


def write_ppm(path, rgb):
    """Save an RGB image with values in ``[0, 1]`` as a binary PPM (P6).

    Values are clamped to ``[0, 1]`` here and nowhere else.
    """
    rgb = np.asarray(rgb, dtype=float)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("PPM images need shape (height, width, 3), got {}.".format(rgb.shape))
    img = np.round(np.clip(rgb, 0.0, 1.0) * 255).astype(np.uint8)
    _imwrite(path, cv2.cvtColor(img, cv2.COLOR_RGB2BGR))


def read_ppm(path):
    """Load a PPM image as RGB floats in ``[0, 1]``."""
    img = _imread(path)
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB).astype(float) / 255


def write_raw(path, image):
    """Save a float image ``(height, width[, channels])`` in the raw format."""
    image = np.asarray(image, dtype='<f4')
    if image.ndim == 2:
        image = image[:, :, None]
    if image.ndim != 3:
        raise ValueError("Raw images need 2 or 3 dimensions, got {}.".format(image.ndim))
    h, w, c = image.shape
    _ensure_folder(path)
    with open(path, 'wb') as f:
        f.write(RAW_HEADER.pack(RAW_MAGIC, w, h, c))
        f.write(np.ascontiguousarray(image).tobytes())


def read_raw(path):
    """Load an image written by :func:`write_raw`.

    :returns: float32 array ``(height, width, channels)``
    """
    if not os.path.exists(path):
        raise MissingArtifactError("Image '{}' does not exist.".format(path))
    with open(path, 'rb') as f:
        magic, w, h, c = RAW_HEADER.unpack(f.read(RAW_HEADER.size))
        if magic != RAW_MAGIC:
            raise ValueError("'{}' is not a raw AutoInt image.".format(path))
        data = np.frombuffer(f.read(), dtype='<f4')
    return data.reshape(h, w, c)


def write_csv(path, header, rows):
    """Write *rows* under *header*. Floats use their round-trip repr."""
    _ensure_folder(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])


def write_json(path, obj):
    """Write *obj* as JSON with sorted keys."""
    _ensure_folder(path)
    with open(path, 'w') as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write('\n')


def read_json(path):
    if not os.path.exists(path):
        raise MissingArtifactError("File '{}' does not exist.".format(path))
    with open(path) as f:
        return json.load(f)
