"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 input/validation error,
3 runtime integrity failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import decision_tree as dt
from .config import default_config_path, load_config
from .dynamics import TimeGrid, basis_state, evolve_coherence, evolve_density
from .errors import ConfigError, DiamondSimError, IntegrityError
from .lie_algebra import (GeneratorSet, build_generators, decompose, structure_constants, verify_algebra,
                          write_dump)
from .model import compare_paper_blocks, default_schedule

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INTEGRITY = 0, 1, 2, 3

_COHERENCE_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def csv_header():
    cols = ["t", "alpha1", "beta1", "alpha2", "beta2"]
    cols += [f"rho{i}{i}" for i in range(4)]
    for j, k in _COHERENCE_PAIRS:
        cols += [f"re_rho{j}{k}", f"im_rho{j}{k}"]
    cols += [f"G{a}" for a in range(1, 16)]
    return cols


def _fmt(x):
    return f"{x:.17g}"


def write_trajectory_csv(traj, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(csv_header())
        pops = traj.populations
        for i, t in enumerate(traj.times):
            row = [t, *traj.pulse_samples[i], *pops[i]]
            for j, k in _COHERENCE_PAIRS:
                z = traj.rho[i, j, k]
                row += [z.real, z.imag]
            row += list(traj.coherence[i])
            w.writerow([_fmt(float(x)) for x in row])


def _resolve(path, base):
    p = Path(path)
    return p if p.is_absolute() or base is None else Path(base) / p


def simulate(cfg):
    return evolve_density(cfg.rho0, cfg.schedule, cfg.grid, cfg.dissipation)


def summarize(cfg, traj):
    return {
        "samples": {s.name: {"t": s.t, "populations": dt.populations_at(traj, s.t).tolist()}
                    for s in cfg.samples},
        "final_purity": float(traj.purities[-1]),
        "trace_drift": float(np.max(np.abs(traj.traces - 1))),
        "min_eigenvalue": float(np.min(traj.min_eigenvalues)),
        "n_samples": len(traj),
    }


def run_simulate(config_path, output_dir=None, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_INPUT
    try:
        traj = simulate(cfg)
    except IntegrityError as exc:
        print(f"integrity failure: {exc}", file=err)
        print(json.dumps(exc.diagnostics), file=err)
        return EXIT_INTEGRITY
    summary = summarize(cfg, traj)
    csv_path = _resolve(cfg.outputs.get("csv", "trajectory.csv"), output_dir)
    summary_path = _resolve(cfg.outputs.get("summary", "summary.json"), output_dir)
    try:
        write_trajectory_csv(traj, csv_path)
        summary_path.write_text(json.dumps(summary, indent=2), encoding="utf-8")
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=err)
        return EXIT_INPUT
    print(f"wrote {len(traj)} samples to {csv_path}", file=out)
    for name, s in summary["samples"].items():
        pops = ", ".join(f"{p:.4f}" for p in s["populations"])
        print(f"  {name} (t={s['t']:.4g}): {pops}", file=out)
    print(f"  final purity {summary['final_purity']:.4f}, trace drift {summary['trace_drift']:.4g}, "
          f"min eigenvalue {summary['min_eigenvalue']:.4g}", file=out)
    return EXIT_OK


def picture_deviation(sched=None, grid=None, gens=None, f=None):
    """Max elementwise |rho_coherence - rho_density| from |0><0|."""
    sched = sched or default_schedule()
    grid = grid or TimeGrid(0.0, 10.0, 1e-3)
    gens = gens or build_generators(4)
    f = f or structure_constants(gens)
    rho0 = basis_state(0)
    a = evolve_density(rho0, sched, grid, gens=gens)
    b = evolve_coherence(decompose(rho0, gens)[1], sched, grid, gens, f)
    return float(np.max(np.abs(a.rho - b.rho)))


def run_verify(out=None, flip_generator=None):
    """Run the mandatory algebra and dynamics checks.

    ``flip_generator`` negates one SU(4) generator (1-based label) before the
    checks; it exists so tests can confirm that a corrupted basis fails.
    """
    out = out or sys.stdout
    ok = True
    for n in (2, 3, 4):
        gens = build_generators(n)
        if n == 4 and flip_generator is not None:
            arr = gens.generators.copy()
            arr[flip_generator - 1] *= -1
            arr.setflags(write=False)
            gens = GeneratorSet(4, arr)
        f = structure_constants(gens)
        rep = verify_algebra(gens, f)
        for line in rep.lines():
            print(line, file=out)
        print(f"  -> {'PASS' if rep.passed else 'FAIL'}", file=out)
        ok &= rep.passed
        if n == 4:
            gens4, f4 = gens, f

    dev = picture_deviation(gens=gens4, f=f4)
    eq_ok = dev <= 1e-8
    ok &= eq_ok
    print(f"picture equivalence max deviation {dev:.4g} -> {'PASS' if eq_ok else 'FAIL'}", file=out)

    sched = default_schedule()
    for t in (sched.alpha1.center, sched.alpha2.center):
        diffs = compare_paper_blocks(sched, t, f4, gens4)
        print(f"printed-block comparison at t={t:.4g}: {len(diffs)} differing entries (informational)", file=out)
        for d in diffs:
            print(f"  g[{d.row},{d.col}] derived {d.derived:.4f} printed {d.printed:.4f}", file=out)
    print("ALL CHECKS PASSED" if ok else "VERIFICATION FAILED", file=out)
    return EXIT_OK if ok else EXIT_VERIFY


def _parse_vec(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise dt.NormalizationError(f"cannot parse probability vector {text!r}") from None


def run_tree(config_path=None, layer1=None, layer2=None, json_path=None, dot_path=None,
             out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    if (config_path is None) == (layer1 is None or layer2 is None):
        print("give either --from-simulation or both --layer1 and --layer2", file=err)
        return EXIT_INPUT
    try:
        if config_path is not None:
            cfg = load_config(config_path)
            if len(cfg.samples) < 2:
                raise ConfigError("samples", "tree construction needs two named sample instants")
            traj = simulate(cfg)
            tree = dt.tree_from_trajectory(traj, cfg.samples[0].t, cfg.samples[1].t,
                                          root=int(np.argmax(cfg.rho0.diagonal().real)))
            json_path = json_path or cfg.outputs.get("tree_json")
            dot_path = dot_path or cfg.outputs.get("tree_dot")
        else:
            tree = dt.build_tree(_parse_vec(layer1), _parse_vec(layer2))
    except IntegrityError as exc:
        print(f"integrity failure: {exc}", file=err)
        return EXIT_INTEGRITY
    except DiamondSimError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    json_path = Path(json_path or "tree.json")
    dot_path = Path(dot_path or "tree.dot")
    json_path.write_text(tree.to_json(indent=1), encoding="utf-8")
    dot_path.write_text(tree.to_dot(), encoding="utf-8")
    for k in range(4):
        print(f"P({tree.root}→…→{k}) = {dt.return_probability(tree, k):.4f}", file=out)
    print(f"wrote {json_path} and {dot_path}", file=out)
    return EXIT_OK


def run_dump(n, output=None, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    if n < 2:
        print(f"error: dimension must be >= 2, got {n}", file=err)
        return EXIT_INPUT
    path = Path(output or f"su{n}_algebra.json")
    doc = write_dump(n, path)
    print(f"wrote {len(doc['generators'])} generators and {len(doc['structure_constants'])} "
          f"structure constants to {path}", file=out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="diamondsim", description="Four-level diamond system simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a config and write CSV + JSON summary")
    s.add_argument("config", nargs="?", default=None, help="config JSON (default: bundled config)")
    s.add_argument("--output-dir", default=None, help="directory for relative output paths")

    v = sub.add_parser("verify", help="run the algebra and picture-equivalence checks")
    v.add_argument("--flip-generator", type=int, default=None, help=argparse.SUPPRESS)

    t = sub.add_parser("tree", help="build the two-layer decision tree")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--from-simulation", metavar="CONFIG")
    g.add_argument("--layer1", metavar="A,B,C,D")
    t.add_argument("--layer2", metavar="A,B,C,D")
    t.add_argument("--json", default=None)
    t.add_argument("--dot", default=None)

    d = sub.add_parser("dump", help="write SU(N) generators and structure constants as JSON")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--output", default=None)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "simulate":
        return run_simulate(args.config or default_config_path(), args.output_dir)
    if args.command == "verify":
        return run_verify(flip_generator=args.flip_generator)
    if args.command == "tree":
        return run_tree(args.from_simulation, args.layer1, args.layer2, args.json, args.dot)
    return run_dump(args.n, args.output)


if __name__ == "__main__":
    sys.exit(main())
