"""Model registry: ``euclidean(n)``, ``sphere(n)``, ``rproj(n)``, ``cproj(1)``."""

import re

from .errors import UnsupportedModelError
from .euclidean import EuclideanModel
from .stenzel import StenzelModel

__all__ = ["load_model", "MODEL_NAMES"]

MODEL_NAMES = ("euclidean(2)", "euclidean(3)", "euclidean(4)", "sphere(2)", "sphere(3)",
               "sphere(4)", "rproj(2)", "rproj(3)", "rproj(4)", "cproj(1)")


def load_model(name, radius=1.0):
    m = re.fullmatch(r"\s*euclidean\s*\(\s*(\d+)\s*\)\s*", str(name).lower())
    if m:
        return EuclideanModel(int(m.group(1)))
    try:
        return StenzelModel(name, radius=radius)
    except UnsupportedModelError:
        raise UnsupportedModelError(f"unsupported model: {name!r}") from None
