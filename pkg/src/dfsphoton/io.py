"""CSV/JSON serialization with deterministic formatting."""

import csv
import json
from pathlib import Path

import numpy as np

from .emission import Wavepacket
from .errors import InputError
from .hilbert import named_state

FLOAT_FMT = "%.12g"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


def write_csv(path, rows, columns=None, units=""):
    """Write dict rows with a ``#`` units comment line and a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with path.open("w", newline="") as fh:
        fh.write(f"# units: {units or 'canonical (gamma0 = 1, times 1/gamma0, positions lambda0)'}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
    return path


def read_csv(path):
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return list(reader)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (complex, np.complexfloating)):
        return [float(o.real), float(o.imag)]
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    return o


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_wavepacket(path, wp, complex_columns=None):
    """Two-column ``(t, Re)`` for real packets, three-column ``(t, Re, Im)`` otherwise."""
    if complex_columns is None:
        complex_columns = bool(np.max(np.abs(wp.samples.imag)) > 0)
    cols = ["t", "re", "im"] if complex_columns else ["t", "re"]
    rows = [
        dict(zip(cols, (t, v.real, v.imag)))
        for t, v in zip(wp.times, wp.samples)
    ]
    return write_csv(path, rows, cols, units="t in 1/gamma0, amplitude in gamma0^(1/2)")


def read_wavepacket(path):
    """Load a wavepacket written by :func:`write_wavepacket` (uniform grid required)."""
    rows = read_csv(path)
    if len(rows) < 2:
        raise InputError("wavepacket file needs at least two samples")
    t = np.array([float(r["t"]) for r in rows])
    re = np.array([float(r["re"]) for r in rows])
    im = np.array([float(r.get("im") or 0.0) for r in rows])
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(dt[0])) * len(t):
        raise InputError("wavepacket grid is not uniform")
    return Wavepacket(float(t[0]), float((t[-1] - t[0]) / (len(t) - 1)), re + 1j * im)


def write_trajectory(path, traj, observables="populations"):
    """Export a trajectory: collective populations or flattened entries."""
    states = np.asarray(traj.states)
    rows = []
    if observables == "populations":
        cols = ["t", "P_G", "P_D", "P_A", "P_B"]
        vecs = {k: named_state(k) for k in "GDAB"}
        for t, s in zip(traj.times, states):
            if s.ndim == 2:
                pops = {k: float(np.real(v.conj() @ s @ v)) for k, v in vecs.items()}
            else:
                pops = {k: float(abs(np.vdot(v, s)) ** 2) for k, v in vecs.items()}
            rows.append({"t": t, **{f"P_{k}": pops[k] for k in "GDAB"}})
    else:
        flat = states.reshape(len(states), -1)
        cols = ["t"] + [f"{p}{i}" for i in range(flat.shape[1]) for p in ("re", "im")]
        for t, f in zip(traj.times, flat):
            row = {"t": t}
            for i, v in enumerate(f):
                row[f"re{i}"] = v.real
                row[f"im{i}"] = v.imag
            rows.append(row)
    return write_csv(path, rows, cols)
