"""Command-line entry point: ``dfsphoton <task> --config <path>``.

Exit status: 0 success, 2 invalid configuration, 3 numerical-regime error,
4 I/O error.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import __version__
from .config import TASKS, RunConfig, json_schema
from .errors import NUMERICAL_ERRORS, InputError
from .geometry import EmitterArray, coupling_matrices, jump_operator

OUT_ENV = "DFSPHOTON_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("dfsphoton")


@contextmanager
def worker_pool(threads):
    if threads <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=threads) as ex:
        yield ex.map


def _array(cfg):
    a = cfg.array
    if a.positions is None:
        return EmitterArray.mirror(3, a.gamma0, a.gamma_prime)
    return EmitterArray(tuple(a.positions), a.gamma0, a.gamma_prime)


def _packet(pc, default_dt=None):
    from .emission import constant_J_wavepacket, gaussian_wavepacket
    from .io import read_wavepacket
    from .scattering import packet_for_bandwidth

    dt = pc.dt if default_dt is None else default_dt
    if pc.kind == "file":
        return read_wavepacket(pc.path)
    if pc.bandwidth is not None:
        return packet_for_bandwidth(pc.bandwidth, pc.kind, dt=dt)
    if pc.kind == "gaussian":
        return gaussian_wavepacket(pc.tau if pc.tau is not None else 1.75, dt=dt)
    return constant_J_wavepacket(pc.Jtilde, dt=dt)


def task_couplings(cfg, out, mapper):
    from .io import write_csv, write_json

    arr = _array(cfg)
    cm = coupling_matrices(arr)
    rows = [
        {"n": i + 1, "m": j + 1, "J": cm.J[i, j], "Gamma": cm.Gamma[i, j]}
        for i in range(arr.n)
        for j in range(arr.n)
    ]
    _, rate = jump_operator(arr)
    return [
        write_csv(out / "couplings.csv", rows, units="J and Gamma in gamma0"),
        write_json(out / "couplings.json", {"array": arr.to_dict(), "Gamma_B": rate}),
    ]


def task_gate(cfg, out, mapper):
    from .gates import GateSpec, predicted_error_model, simulate_gate
    from .io import write_json

    g = cfg.gate
    spec = GateSpec(**g.model_dump())
    res = simulate_gate(spec, _array(cfg), dt=cfg.numerics.dt)
    data = res.to_dict()
    if spec.kind == "R_DG" and spec.rabi() > 0:
        gd, dd, F = predicted_error_model(spec.rabi(), spec.J, cfg.array.gamma0)
        data["model"] = {"gamma_d": gd, "delta_d": dd, "F_leading": F}
    return [write_json(out / "gate.json", data)]


def task_emit(cfg, out, mapper):
    from .emission import emit, optimal_coupling_sequence
    from .io import write_csv, write_json, write_wavepacket

    target = _packet(cfg.emit.target)
    a = cfg.array
    seq = optimal_coupling_sequence(target, a.gamma0)
    d0 = cfg.emit.d0
    a0 = 1j * cfg.emit.a0_imag
    if abs(abs(d0) ** 2 + abs(a0) ** 2 - 1) > 1e-9:
        raise InputError("emit: |d0|^2 + |a0|^2 must equal 1")
    res = emit(d0, a0, seq, a.gamma0, a.gamma_prime)
    unit = emit(0.0, -1j, seq, a.gamma0, a.gamma_prime)
    fid = target.fidelity(unit.wavepacket) / target.norm()
    t = seq.dt * np.arange(len(seq.values))
    return [
        write_wavepacket(out / "wavepacket.csv", res.wavepacket),
        write_wavepacket(out / "target.csv", target),
        write_csv(out / "coupling.csv", [{"t": ti, "J": v} for ti, v in zip(t, seq.values)], units="t in 1/gamma0, J in gamma0"),
        write_json(out / "emit.json", {
            "target_fidelity": fid,
            "photon_norm": res.photon_norm,
            "final_amplitudes": {"d": res.d, "a": res.a, "b": res.b},
            "phase_D": res.phase_D,
            "T_em": seq.duration,
        }),
    ]


def task_cz(cfg, out, mapper):
    from .io import write_json
    from .scattering import cz_fidelity, cz_floor, cz_floor_quoted

    wp = _packet(cfg.cz.packet)
    res = cz_fidelity(wp, cfg.cz.J, cfg.array.gamma0, pad=cfg.cz.padding)
    B, kind = wp.bandwidth()
    data = res.to_dict()
    data.update({"bandwidth": B, "bandwidth_definition": kind, "floor": cz_floor(cfg.cz.J),
                 "floor_quoted": cz_floor_quoted(cfg.cz.J)})
    return [write_json(out / "cz.json", data)]


def task_protocol(cfg, out, mapper):
    from .io import write_json
    from .protocol import NoiseModel, ProtocolSpec, apply_sequence

    p = cfg.protocol
    noise = NoiseModel(**p.noise.model_dump(), dt=cfg.numerics.dt, packet_dt=cfg.numerics.dt)
    spec = ProtocolSpec(p.kind, m=p.m, M=p.M, N=p.N, gate_model=p.gate_model, noise=noise)
    res = apply_sequence(spec)
    return [write_json(out / "protocol.json", res.to_dict())]


def task_fig3a(cfg, out, mapper):
    from .io import write_csv
    from .sweeps import sweep_gate_infidelity

    c = cfg.fig3a
    rows = []
    for gp in c.gamma_prime:
        rows += sweep_gate_infidelity(c.T.array(), [c.J], gp, cfg.numerics.dt, mapper)
    return [write_csv(out / "sweep_fig3a.csv", rows, units="T in 1/gamma0; J, omega, gamma_prime in gamma0")]


def task_fig3b(cfg, out, mapper):
    from .io import write_csv
    from .sweeps import sweep_gate_infidelity

    c = cfg.fig3b
    rows = []
    for gp in c.gamma_prime:
        rows += sweep_gate_infidelity([c.T], c.J.array(), gp, cfg.numerics.dt, mapper)
    return [write_csv(out / "sweep_fig3b.csv", rows, units="T in 1/gamma0; J, omega, gamma_prime in gamma0")]


def task_fig3c(cfg, out, mapper):
    from .io import write_csv
    from .sweeps import sweep_cz_bandwidth

    c = cfg.fig3c
    rows = sweep_cz_bandwidth(c.B.array(), c.J, tuple(c.kinds), c.dt, mapper=mapper)
    return [write_csv(out / "sweep_fig3c.csv", rows, units="B and J in gamma0; bandwidth = 1/tau")]


def task_figS1(cfg, out, mapper):
    from .io import write_csv
    from .sweeps import sweep_robustness

    c = cfg.figS1
    rows = sweep_robustness(c.epsilon.array(), tuple(c.modes), c.gate_realizations, c.emission_realizations,
                            c.seed, cfg.numerics.dt, mapper=mapper)
    cols = ["observable", "mode", "epsilon", "realizations", "mean_infidelity", "stderr"]
    return [write_csv(out / "sweep_figS1.csv", rows, cols, units="epsilon dimensionless")]


TASK_FUNCS = {
    "couplings": task_couplings,
    "gate": task_gate,
    "emit": task_emit,
    "cz": task_cz,
    "protocol": task_protocol,
    "sweep-fig3a": task_fig3a,
    "sweep-fig3b": task_fig3b,
    "sweep-fig3c": task_fig3c,
    "sweep-figS1": task_figS1,
}


def _parser():
    p = argparse.ArgumentParser(prog="dfsphoton", description=__doc__.splitlines()[0])
    p.add_argument("task", choices=TASKS + ("schema",))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--dt", type=float, help="override numerics.dt")
    p.add_argument("--seed", type=int, help="override figS1.seed")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(args):
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    raw.setdefault("task", args.task)
    if raw["task"] != args.task:
        raise InputError(f"config task {raw['task']!r} does not match command {args.task!r}")
    if args.dt is not None:
        raw.setdefault("numerics", {})["dt"] = args.dt
    if args.seed is not None:
        raw.setdefault("figS1", {})["seed"] = args.seed
    return RunConfig.model_validate(raw)


def config_hash(cfg):
    canon = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def run(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.task == "schema":
        print(json.dumps(json_schema(), indent=2))
        return EXIT_OK
    try:
        cfg = load_config(args)
    except (ValidationError, InputError, json.JSONDecodeError) as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    if cfg.output_prefix:
        out = out / cfg.output_prefix
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        with worker_pool(args.threads) as mapper:
            artifacts = TASK_FUNCS[cfg.task](cfg, out, mapper)
        from .io import write_json

        write_json(out / "manifest.json", {
            "task": cfg.task,
            "config_sha256": config_hash(cfg),
            "version": __version__,
            "wall_time_s": time.perf_counter() - t0,
            "artifacts": [str(Path(a).name) for a in artifacts],
            "config": cfg.model_dump(mode="json"),
        })
    except NUMERICAL_ERRORS as e:
        print(f"error: numerical regime: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InputError as e:
        print(f"error: invalid input: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: I/O: {e}", file=sys.stderr)
        return EXIT_IO
    for a in artifacts:
        print(a)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
