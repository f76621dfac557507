"""Rigid poses and the small amount of shared vector geometry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-9


class PoseError(ValueError):
    """Rotation failed the orthonormality / determinant check."""


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform mapping local to world: x_w = R @ x_l + t.

    The rotation must be orthonormal with det +1, both within 1e-9;
    construction raises PoseError otherwise.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        R = np.array(self.rotation, dtype=float)
        t = np.array(self.translation, dtype=float).reshape(3)
        if R.shape != (3, 3):
            raise PoseError(f"rotation must be 3x3, got shape {R.shape}")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(t))):
            raise PoseError("pose entries must be finite")
        if float(np.max(np.abs(R.T @ R - np.eye(3)))) > ORTHO_TOL:
            raise PoseError("rotation is not orthonormal within 1e-9")
        if abs(float(np.linalg.det(R)) - 1.0) > ORTHO_TOL:
            raise PoseError("rotation determinant is not +1 within 1e-9")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_yaw(yaw: float, translation=(0.0, 0.0, 0.0)) -> "Pose":
        """Pose rotated by `yaw` radians about +z (x-forward convention)."""
        c, s = np.cos(yaw), np.sin(yaw)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return Pose(R, np.asarray(translation, dtype=float))

    @property
    def yaw(self) -> float:
        """Heading of the local +x axis in the world x/y plane, radians."""
        return float(np.arctan2(self.rotation[1, 0], self.rotation[0, 0]))

    def compose(self, other: "Pose") -> "Pose":
        """This pose applied after `other`: (self * other)(x) = self(other(x))."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)

    def inverse(self) -> "Pose":
        return Pose(self.rotation.T, -(self.rotation.T @ self.translation))

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Apply to (..., 3) local points."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def world_to_ego_xy(self, points_xy: np.ndarray) -> np.ndarray:
        """Project world x/y points into this pose's ground-plane frame.

        The local frame is x-forward / y-left, taken from the pose's yaw;
        accepts (2,) or (N, 2) arrays.
        """
        p = np.atleast_2d(np.asarray(points_xy, dtype=float))
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        d = p - self.translation[:2]
        out = np.stack([c * d[:, 0] + s * d[:, 1],
                        -s * d[:, 0] + c * d[:, 1]], axis=-1)
        return out[0] if np.asarray(points_xy).ndim == 1 else out

    def to_dict(self) -> dict:
        return {"rotation": [float(v) for v in self.rotation.ravel()],
                "translation": [float(v) for v in self.translation]}

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(np.asarray(d["rotation"], dtype=float).reshape(3, 3),
                    np.asarray(d["translation"], dtype=float))


def rotation_from_euler_deg(yaw: float, pitch: float, roll: float) -> np.ndarray:
    """Z-Y-X Euler rotation (degrees): R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    y, p, r = np.radians([yaw, pitch, roll])

    def rz(a):
        c, s = np.cos(a), np.sin(a)
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])

    def ry(a):
        c, s = np.cos(a), np.sin(a)
        return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])

    def rx(a):
        c, s = np.cos(a), np.sin(a)
        return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])

    return rz(y) @ ry(p) @ rx(r)


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize a vector; raises on (near-)zero input."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise ValueError("cannot normalize a zero vector")
    return v / n
