from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ArgumentError, DomainError

SCALE_TAGS = ("original", "frechet2_unit", "preprocessed")


@dataclass(frozen=True)
class Series:
    """Ordered observations tagged with the marginal scale they live on.

    ``scale_tag`` is one of ``original`` (raw data), ``frechet2_unit``
    (after the tail-index-2 marginal transform) or ``preprocessed``
    (mean-shifted and clamped at zero).
    """

    values: np.ndarray
    scale_tag: str = "original"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ArgumentError(f"Series values must be 1-D, got shape {arr.shape}")
        if arr.size < 1:
            raise ArgumentError("Series must hold at least one observation")
        if not np.all(np.isfinite(arr)):
            raise DomainError("Series values must be finite")
        if self.scale_tag not in SCALE_TAGS:
            raise ArgumentError(f"unknown scale_tag {self.scale_tag!r}; expected one of {SCALE_TAGS}")
        if self.scale_tag != "original" and np.any(arr < 0):
            raise DomainError(f"{self.scale_tag} series must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def with_values(self, values, scale_tag=None, **metadata):
        meta = {**self.metadata, **metadata}
        return replace(self, values=np.asarray(values, dtype=np.float64),
                       scale_tag=scale_tag or self.scale_tag, metadata=meta)


def as_series(data, scale_tag="original"):
    if isinstance(data, Series):
        return data
    return Series(np.asarray(data, dtype=np.float64), scale_tag=scale_tag)
