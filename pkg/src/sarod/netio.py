"""File formats: network JSON, measurement JSON, result CSV, report JSON.

Network schema: {"vertices": [{"id": int, "attr": "A"|"D",
"pos": [x, y], "anchor": bool}, ...], "edges": [[i, j], ...]} with the edge
list order defining the canonical edge index.  Measurement schema:
{"sa": [{"apex": i, "j": j, "k": k, "value": radians}, ...],
"rod": [{"apex": i, "j": j, "k": k, "value": ratio}, ...]}.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .geometry import Framework, MeasurementSet
from .graph import Bipartition, Graph

__all__ = [
    "network_to_dict",
    "network_from_dict",
    "save_network",
    "load_network",
    "measurements_to_dict",
    "measurements_from_dict",
    "save_measurements",
    "load_measurements",
    "write_result_csv",
    "write_report",
]


def network_to_dict(fw: Framework, anchors=(), construction=None) -> dict:
    anchor_set = set(anchors)
    data = {
        "vertices": [
            {
                "id": v,
                "attr": fw.bipartition.attr(v),
                "pos": [float(fw.points[v - 1, 0]), float(fw.points[v - 1, 1])],
                "anchor": v in anchor_set,
            }
            for v in range(1, fw.n + 1)
        ],
        "edges": [[int(i), int(j)] for (i, j) in fw.graph.edges],
    }
    if construction is not None:
        data["construction"] = construction
    return data


def network_from_dict(data: dict):
    """Returns (framework, anchors) from the network schema."""
    try:
        vertices = data["vertices"]
        edges = data["edges"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"network JSON missing field: {exc}") from exc
    by_id = {}
    for rec in vertices:
        try:
            by_id[int(rec["id"])] = rec
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad vertex record {rec!r}: {exc}") from exc
    n = len(by_id)
    if sorted(by_id) != list(range(1, n + 1)):
        raise ValueError("vertex ids must be exactly 1..n")
    attrs = []
    points = np.zeros((n, 2))
    anchors = []
    for v in range(1, n + 1):
        rec = by_id[v]
        attr = rec.get("attr")
        if attr not in ("A", "D"):
            raise ValueError(f"vertex {v}: attr must be 'A' or 'D', got {attr!r}")
        pos = rec.get("pos")
        if not isinstance(pos, (list, tuple)) or len(pos) != 2:
            raise ValueError(f"vertex {v}: pos must be [x, y]")
        attrs.append(attr)
        points[v - 1] = [float(pos[0]), float(pos[1])]
        if rec.get("anchor", False):
            anchors.append(v)
    fw = Framework(Graph.from_edges(n, edges), Bipartition(tuple(attrs)), points)
    return fw, tuple(anchors)


def save_network(path, fw: Framework, anchors=(), construction=None):
    with open(path, "w") as fh:
        json.dump(network_to_dict(fw, anchors, construction), fh, indent=1)
        fh.write("\n")


def load_network(path):
    with open(path) as fh:
        data = json.load(fh)
    return network_from_dict(data)


def measurements_to_dict(ms: MeasurementSet) -> dict:
    return {
        "sa": [{"apex": t[0], "j": t[1], "k": t[2], "value": float(v)} for t, v in sorted(ms.sa.items())],
        "rod": [{"apex": t[0], "j": t[1], "k": t[2], "value": float(v)} for t, v in sorted(ms.rod.items())],
    }


def measurements_from_dict(data: dict) -> MeasurementSet:
    def unpack(records, kind):
        out = {}
        for rec in records:
            try:
                t = (int(rec["apex"]), int(rec["j"]), int(rec["k"]))
                out[t] = float(rec["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad {kind} measurement record {rec!r}: {exc}") from exc
        return out

    return MeasurementSet(unpack(data.get("sa", []), "sa"), unpack(data.get("rod", []), "rod"))


def save_measurements(path, ms: MeasurementSet):
    with open(path, "w") as fh:
        json.dump(measurements_to_dict(ms), fh, indent=1)
        fh.write("\n")


def load_measurements(path) -> MeasurementSet:
    with open(path) as fh:
        return measurements_from_dict(json.load(fh))


def write_result_csv(path, truth: np.ndarray, estimate: np.ndarray):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex_id", "true_x", "true_y", "est_x", "est_y", "err"])
        for v in range(truth.shape[0]):
            err = float(np.linalg.norm(estimate[v] - truth[v]))
            writer.writerow([v + 1, truth[v, 0], truth[v, 1], estimate[v, 0], estimate[v, 1], err])


def write_report(path, report: dict):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")
