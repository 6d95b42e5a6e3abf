"""Scene/correspondence interchange: the "p1ac-scene/1" JSON document.

Layout: arrays of reference poses (rotation as row-major 9-tuple, translation
3-tuple), oriented points (x: 2, d: 1, n: 3), correspondences (x: 2, y: 2,
A: row-major 4-tuple, reference index), an optional query truth pose, and an
optional ground-truth inlier mask.  Oriented point i belongs to
correspondence i.
"""

from __future__ import annotations

import json

import numpy as np

from .geometry import AffineCorrespondence, OrientedPoint, Pose
from .localize import Correspondence, CorrespondenceSet, Scene

SCENE_VERSION = "p1ac-scene/1"


def _pose_to_obj(pose: Pose) -> dict:
    return {"rotation": [float(v) for v in pose.R.reshape(-1)],
            "translation": [float(v) for v in pose.t]}


def _pose_from_obj(obj: dict) -> Pose:
    rotation = np.array(obj["rotation"], dtype=np.float64)
    translation = np.array(obj["translation"], dtype=np.float64)
    if rotation.shape != (9,) or translation.shape != (3,):
        raise ValueError("pose needs a 9-entry rotation and 3-entry translation")
    return Pose(rotation.reshape(3, 3), translation)


def scene_to_document(scene: Scene, corrs: CorrespondenceSet) -> dict:
    doc = {
        "version": SCENE_VERSION,
        "reference_poses": [_pose_to_obj(p) for p in scene.reference_poses],
        "oriented_points": [
            {"x": [float(v) for v in c.op.x], "d": float(c.op.d),
             "n": [float(v) for v in c.op.n]}
            for c in corrs.items
        ],
        "correspondences": [
            {"x": [float(v) for v in c.ac.x], "y": [float(v) for v in c.ac.y],
             "A": [float(v) for v in c.ac.A.reshape(-1)],
             "ref_index": int(c.ref_index)}
            for c in corrs.items
        ],
    }
    if scene.query_truth is not None:
        doc["query_truth"] = _pose_to_obj(scene.query_truth)
    if corrs.inlier_mask is not None:
        doc["inlier_mask"] = [bool(v) for v in corrs.inlier_mask]
    return doc


def scene_from_document(doc: dict):
    if not isinstance(doc, dict):
        raise ValueError("scene document must be a JSON object")
    version = doc.get("version")
    if version != SCENE_VERSION:
        raise ValueError(f"unsupported scene version {version!r}, "
                         f"expected {SCENE_VERSION!r}")
    for key in ("reference_poses", "oriented_points", "correspondences"):
        if key not in doc:
            raise ValueError(f"scene document missing {key!r}")
    refs = tuple(_pose_from_obj(o) for o in doc["reference_poses"])
    points = doc["oriented_points"]
    raw_corrs = doc["correspondences"]
    if len(points) != len(raw_corrs):
        raise ValueError("oriented_points and correspondences must pair up")
    items = []
    for o, c in zip(points, raw_corrs):
        ref_index = int(c["ref_index"])
        if not (0 <= ref_index < len(refs)):
            raise ValueError(f"reference index {ref_index} out of range")
        op = OrientedPoint(x=np.array(o["x"], dtype=np.float64),
                           d=float(o["d"]),
                           n=np.array(o["n"], dtype=np.float64))
        A = np.array(c["A"], dtype=np.float64)
        if A.shape != (4,):
            raise ValueError("affine matrix needs 4 row-major entries")
        ac = AffineCorrespondence(x=np.array(c["x"], dtype=np.float64),
                                  y=np.array(c["y"], dtype=np.float64),
                                  A=A.reshape(2, 2))
        items.append(Correspondence(ac=ac, op=op, ref_index=ref_index))
    truth = _pose_from_obj(doc["query_truth"]) if doc.get("query_truth") else None
    mask = np.array(doc["inlier_mask"], dtype=bool) if doc.get("inlier_mask") is not None else None
    scene = Scene(reference_poses=refs, query_truth=truth)
    return scene, CorrespondenceSet(items=tuple(items), inlier_mask=mask)


def save_scene(path, scene: Scene, corrs: CorrespondenceSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_document(scene, corrs), fh, indent=1)
        fh.write("\n")


def load_scene(path):
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_document(json.load(fh))
