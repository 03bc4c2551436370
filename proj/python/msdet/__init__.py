"""Multispectral detection toolkit.

Thin Python layer over the native module: box-ensemble fusion of two
detectors' outputs, COCO-style detection metrics, homography registration,
RGB/IR image blending, and the synthetic benchmark generator.
"""

from ._msdet import *  # noqa: F401,F403
from ._msdet import __version__  # noqa: F401
