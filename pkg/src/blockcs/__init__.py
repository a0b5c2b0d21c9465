"""Block compressive sensing toolkit.

Acquisition with classical or learned block sensing matrices, linear and
iterative reconstruction, an octave U-net refinement network trained by
hand-written backpropagation, and sensing-matrix diagnostics (coherence,
spark, restricted-isometry constants) verifiable at desk scale.
"""

from . import analysis, dataset, imageio, metrics, net, nn, recon, sensing
from .image import GrayImage

__version__ = "0.1.0"

__all__ = [
    "GrayImage",
    "analysis",
    "dataset",
    "imageio",
    "metrics",
    "net",
    "nn",
    "recon",
    "sensing",
    "__version__",
]
