"""Small target detection in single infrared frames by weighted low-rank plus sparse patch-tensor separation."""
from .detect import DetectionConfig, DetectionResult, RIPTDetector, detect, segment
from .patches import PatchLayout, image_to_tensor, make_layout, tensor_to_image
from .solver import SolverConfig, SolverResult, TensorRPCA, solve

__all__ = [
    "DetectionConfig",
    "DetectionResult",
    "PatchLayout",
    "RIPTDetector",
    "SolverConfig",
    "SolverResult",
    "TensorRPCA",
    "detect",
    "image_to_tensor",
    "make_layout",
    "segment",
    "solve",
    "tensor_to_image",
]

__version__ = "0.1.0"
