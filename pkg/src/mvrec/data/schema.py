"""Dataset schema: per-view records, object metadata, image sets, index.

Arrays use numpy conventions: color is (H, W, 3) float in [0, 1], depth is
(H, W) float meters, mask is (H, W) bool. On disk, color and mask are 8-bit
PNG and depth is 16-bit integer millimeters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import IntegrityError

SPLITS = ("train", "val", "test")

# Real-scale plausibility bounds: parts fit 350x450x300 mm and weigh < 15 kg.
MAX_WEIGHT_KG = 15.0
MAX_PACKAGE_MM = (350.0, 450.0, 300.0)


@dataclass
class ObjectMeta:
    class_id: int
    super_class_id: int
    weight_kg: float
    package_lwh_mm: tuple[float, float, float]
    nl_tags: list[str] = field(default_factory=list)
    name: str = ""

    def validate(self) -> None:
        if self.weight_kg <= 0:
            raise IntegrityError(f"class {self.class_id}: weight must be positive, got {self.weight_kg}")
        if any(d <= 0 for d in self.package_lwh_mm):
            raise IntegrityError(f"class {self.class_id}: package dimensions must be positive")
        if self.super_class_id < 0:
            raise IntegrityError(f"class {self.class_id}: negative super class id")


@dataclass
class ViewRecord:
    view_id: int
    color: np.ndarray
    depth: np.ndarray
    mask: np.ndarray
    hha: np.ndarray | None = None
    mean_color: np.ndarray | None = None
    mean_depth: np.ndarray | None = None

    def validate(self) -> None:
        h, w = self.mask.shape[:2]
        if self.color.shape[:2] != (h, w) or self.depth.shape[:2] != (h, w):
            raise IntegrityError(
                f"view {self.view_id}: color {self.color.shape[:2]}, depth {self.depth.shape[:2]}, "
                f"mask {(h, w)} sizes differ"
            )
        if not self.mask.any():
            raise IntegrityError(f"view {self.view_id}: mask has no foreground pixels")
        if not np.isfinite(self.depth).all() or (self.depth < 0).any():
            raise IntegrityError(f"view {self.view_id}: depth must be finite and >= 0")

    @property
    def effective_mean_color(self) -> np.ndarray:
        """Temporally averaged color; falls back to the instant image."""
        return self.mean_color if self.mean_color is not None else self.color

    @property
    def effective_mean_depth(self) -> np.ndarray:
        return self.mean_depth if self.mean_depth is not None else self.depth


@dataclass
class ImageSet:
    set_id: str
    rotation_id: int
    lay_position_id: int
    views: list[ViewRecord]
    meta: ObjectMeta
    split: str

    def validate(self) -> None:
        ids = [v.view_id for v in self.views]
        if len(set(ids)) != len(ids):
            raise IntegrityError(f"set {self.set_id}: duplicate view ids {ids}")
        if self.split not in SPLITS:
            raise IntegrityError(f"set {self.set_id}: unknown split {self.split!r}")
        for v in self.views:
            try:
                v.validate()
            except IntegrityError as exc:
                raise IntegrityError(f"set {self.set_id}: {exc}") from exc

    def view_by_id(self, view_id: int) -> ViewRecord:
        for v in self.views:
            if v.view_id == view_id:
                return v
        raise KeyError(f"set {self.set_id} has no view {view_id}")


@dataclass(frozen=True)
class SetRef:
    """Lightweight pointer into the on-disk layout; pixel data loads lazily."""

    set_id: str
    class_id: int
    split: str
    path: Path
    rotation_id: int = 0
    lay_position_id: int = 0
    n_views: int = 0


@dataclass
class DatasetIndex:
    root: Path
    classes: dict[int, ObjectMeta]
    sets: list[SetRef]
    split_counts: dict[str, int]
    tag_vocabulary: list[str] = field(default_factory=list)
    intrinsics: np.ndarray | None = None
    gravity: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def sets_for_split(self, split: str) -> list[SetRef]:
        return [s for s in self.sets if s.split == split]

    def validate(self) -> None:
        seen: dict[str, str] = {}
        for ref in self.sets:
            if ref.set_id in seen:
                raise IntegrityError(f"set id {ref.set_id} appears in splits {seen[ref.set_id]} and {ref.split}")
            seen[ref.set_id] = ref.split
        per_class: dict[int, set[str]] = {}
        for ref in self.sets:
            per_class.setdefault(ref.class_id, set()).add(ref.split)
        for cid, splits in per_class.items():
            missing = set(SPLITS) - splits
            if missing:
                raise IntegrityError(f"class {cid} has no sets in splits {sorted(missing)}")
