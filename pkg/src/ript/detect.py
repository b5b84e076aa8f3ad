"""End-to-end single-frame small target detection."""
from dataclasses import dataclass, field, fields

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_image
from .metrics import components
from .patches import image_to_tensor, make_layout, tensor_to_image
from .solver import SolverConfig, solve
from .structure import edge_feature, structure_field, weight_image


@dataclass
class DetectionConfig:
    patch: int = 50
    step: int = 10
    sigma: float = 3.0
    alpha: float = 0.5
    h: float = 10.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    k_seg: float = 5.0
    v_min: float = 0.0

    def validate(self):
        if self.patch < 1 or self.step < 1:
            raise ValueError("patch and step must be positive")
        if not (self.sigma > 0 and self.alpha > 0 and self.h > 0):
            raise ValueError("sigma, alpha and h must be positive")
        if self.k_seg < 0 or self.v_min < 0:
            raise ValueError("k_seg and v_min must be non-negative")
        self.solver.validate()
        return self


@dataclass
class DetectionResult:
    target_image: np.ndarray
    background_image: np.ndarray
    mask: np.ndarray
    detections: list
    threshold: float
    weight_image: np.ndarray
    iterations: int
    stop_reason: str
    trace: list


def normalize(img, top=255.0):
    """Scale a non-negative image so its maximum equals `top`."""
    peak = float(np.max(img, initial=0.0))
    if peak <= 0:
        return np.zeros_like(img, dtype=float)
    return img * (top / peak)


def segment(target_img, k_seg=5.0, v_min=0.0):
    """Adaptive threshold ``max(v_min, mean + k_seg * std)``.

    Only strictly positive pixels can enter the mask, so an all-zero target
    image never produces a detection.

    Returns
    -------
    mask : ndarray of bool
    detections : list of Detection
    threshold : float
    """
    if k_seg < 0 or v_min < 0:
        raise ValueError("k_seg and v_min must be non-negative")
    target_img = np.asarray(target_img, dtype=float)
    t_up = max(v_min, float(target_img.mean() + k_seg * target_img.std()))
    mask = (target_img >= t_up) & (target_img > 0)
    return mask, components(mask, target_img), t_up


def detect(image, cfg=None):
    """Run the full pipeline on one grayscale frame.

    1. edge feature map and local structure weight
    2. patch-tensors of the frame and the weight
    3. low-rank / sparse separation
    4. uniform-average reconstruction of background and target
    5. adaptive-threshold segmentation of the max-normalized target image
    """
    cfg = (cfg or DetectionConfig()).validate()
    image = check_image(image)
    m, n = image.shape
    if min(m, n) < cfg.patch:
        raise ValueError(f"image {m}x{n} is smaller than the {cfg.patch}px patch")
    layout = make_layout(m, n, cfg.patch, cfg.patch, cfg.step)

    weights = weight_image(edge_feature(structure_field(image, cfg.sigma, cfg.alpha)), cfg.h)
    F = image_to_tensor(image, layout)
    W_LS = image_to_tensor(weights, layout)
    result = solve(F, W_LS, cfg.solver)

    background = tensor_to_image(result.B, layout)
    target = np.maximum(tensor_to_image(result.T, layout), 0.0)
    mask, detections, t_up = segment(normalize(target), cfg.k_seg, cfg.v_min)
    return DetectionResult(
        target_image=target,
        background_image=background,
        mask=mask,
        detections=detections,
        threshold=t_up,
        weight_image=weights,
        iterations=result.iterations,
        stop_reason=result.stop_reason,
        trace=result.trace,
    )


class RIPTDetector(BaseEstimator, TransformerMixin):
    """Estimator interface to :func:`detect`.

    The model is fit per frame, so ``fit`` only validates parameters.
    ``transform`` returns the separated target image, ``predict`` the binary
    detection mask, and ``detect`` the full :class:`DetectionResult`.
    """

    def __init__(self, patch=50, step=10, sigma=3.0, alpha=0.5, h=10.0, L=1.0,
                 c_mu=5.0, rho=1.05, eps_w=0.01, tol=1e-7, max_iter=500,
                 mode="ript", k_seg=5.0, v_min=0.0):
        self.patch = patch
        self.step = step
        self.sigma = sigma
        self.alpha = alpha
        self.h = h
        self.L = L
        self.c_mu = c_mu
        self.rho = rho
        self.eps_w = eps_w
        self.tol = tol
        self.max_iter = max_iter
        self.mode = mode
        self.k_seg = k_seg
        self.v_min = v_min

    def to_config(self):
        solver_names = {f.name for f in fields(SolverConfig)}
        solver = SolverConfig(**{k: v for k, v in self.get_params().items()
                                 if k in solver_names})
        top = {f.name for f in fields(DetectionConfig)} - {"solver"}
        cfg = DetectionConfig(solver=solver,
                              **{k: v for k, v in self.get_params().items() if k in top})
        return cfg.validate()

    def fit(self, X=None, y=None):
        self.config_ = self.to_config()
        return self

    def detect(self, X):
        if not hasattr(self, "config_"):
            raise NotFittedError("call fit before using this detector")
        return detect(X, self.config_)

    def transform(self, X):
        return self.detect(X).target_image

    def predict(self, X):
        return self.detect(X).mask
