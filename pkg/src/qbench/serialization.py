"""JSON schemas for circuits and shot tables.

Circuit documents are flat: {"n_qubits", "ops": [{"kind", "qubits",
"angle_rad"?, "duration_ns"?}], "label"}.  Angles survive a round trip
exactly because floats serialize via their shortest exact decimal
representation (up to 17 significant digits).
"""
from __future__ import annotations

from .circuits import Circuit, Gate
from .simulator import ShotTable


def circuit_to_dict(circuit: Circuit) -> dict:
    ops = []
    for g in circuit.ops:
        op: dict = {"kind": g.kind, "qubits": list(g.qubits)}
        if g.angle_rad is not None:
            op["angle_rad"] = g.angle_rad
        if g.duration_ns is not None:
            op["duration_ns"] = g.duration_ns
        ops.append(op)
    return {"n_qubits": circuit.n_qubits, "ops": ops, "label": circuit.label}


def circuit_from_dict(doc: dict) -> Circuit:
    ops = tuple(
        Gate(
            kind=op["kind"],
            qubits=tuple(op.get("qubits", ())),
            angle_rad=op.get("angle_rad"),
            duration_ns=op.get("duration_ns"),
        )
        for op in doc["ops"]
    )
    return Circuit(int(doc["n_qubits"]), ops, label=doc.get("label", ""))


def shot_table_to_dict(table: ShotTable) -> dict:
    return {
        "counts": dict(table.counts),
        "shots": table.shots,
        "seed": table.seed,
        "n_qubits": table.n_qubits,
    }


def shot_table_from_dict(doc: dict) -> ShotTable:
    return ShotTable(
        counts={k: int(v) for k, v in doc["counts"].items()},
        shots=int(doc["shots"]),
        seed=int(doc.get("seed", -1)),
        n_qubits=int(doc["n_qubits"]),
    )
