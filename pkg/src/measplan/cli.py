"""``measplan`` command line: ingest, group, synth, plan, scaling, simulate."""
from __future__ import annotations

import argparse
import glob
import io
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import formats
from .clifford import SynthesisError, conjugate_sum, gate_counts, synthesize
from .fermion import FcidumpError, qubit_hamiltonian, read_fcidump
from .grouping import sorted_insertion, validate_partition
from .metrics import DEFAULT_P_VALUES, PRESETS, NoiseParams, estimator_variance, fragment_moments
from .pauli import PauliError, PauliSum, sum_square_coeffs
from .planner import evaluate, plan_measurements, state_moments
from .state import (MAX_QUBITS, ConvergenceError, QubitCapError, apply_clifford, ground_state,
                    sample_noisy_measurement)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_INTEGRITY = 4
EXIT_CAP = 5
SIMULATE_MAX_QUBITS = 12
REFERENCE_FIT = {"slope": 0.72, "intercept": 21.0, "r2": 0.997}

log = logging.getLogger("measplan")


class InputError(ValueError):
    pass


class IntegrityError(RuntimeError):
    pass


def load_hamiltonian(path: str, mapping: str = "bk") -> tuple[PauliSum, dict]:
    """Read a Hamiltonian file, or encode an FCIDUMP on the fly."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"{path}: no such file")
    if p.suffix.lower() == ".fcidump" or p.name.upper().startswith("FCIDUMP"):
        h = qubit_hamiltonian(read_fcidump(p), mapping)
        return h, {"mapping": mapping, "source": "fcidump", "spin_orbitals": "interleaved alpha/beta"}
    return formats.read_hamiltonian(p)


def _require_terms(h: PauliSum) -> None:
    if not h.split_identity()[1].terms:
        raise InputError("no terms: the Hamiltonian has no non-identity terms")


def _noise_list(args) -> list[tuple[str, float, float]]:
    out = []
    for name in args.preset:
        if name == "custom":
            if not args.fidelities:
                raise InputError("--preset custom needs --fidelities f1,f2")
            try:
                f1, f2 = (float(t) for t in args.fidelities.split(","))
            except ValueError:
                raise InputError(f"bad --fidelities {args.fidelities!r}; expected f1,f2") from None
        else:
            f1, f2 = PRESETS[name]
        out.append((name, f1, f2))
    return out


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------

def cmd_ingest(args) -> int:
    mi = read_fcidump(args.fcidump)
    h = qubit_hamiltonian(mi, args.mapping)
    meta = {
        "mapping": args.mapping,
        "spin_orbitals": "interleaved alpha/beta (alpha 2p, beta 2p+1)",
        "n_orbitals": mi.n_orbitals,
        "n_electrons": mi.n_electrons,
        "source_sha256": formats.sha256_of(args.fcidump),
    }
    _emit(formats.format_hamiltonian(h, meta), args.output)
    return EXIT_OK


def cmd_group(args) -> int:
    h, _ = load_hamiltonian(args.input, args.mapping)
    _require_terms(h)
    fs = sorted_insertion(h, args.mode)
    rep = validate_partition(fs, h)
    if not rep.ok:
        raise IntegrityError("; ".join(rep.violations[:5]))
    if args.format == "csv":
        buf = io.StringIO()
        rows = [{"index": k, "size": len(f), "sum_sq": sum_square_coeffs(f)}
                for k, f in enumerate(fs.fragments)]
        formats.write_csv(rows, buf)
        _emit(buf.getvalue(), args.output)
    else:
        _emit(formats.dumps(formats.fragments_to_dict(fs)), args.output)
    return EXIT_OK


def cmd_synth(args) -> int:
    h, _ = load_hamiltonian(args.input, args.mapping)
    _require_terms(h)
    fs = sorted_insertion(h, args.mode)
    if not 0 <= args.fragment < fs.n_fragments:
        raise InputError(f"fragment index {args.fragment} out of range (0..{fs.n_fragments - 1})")
    frag = fs.fragments[args.fragment]
    circ = synthesize(frag, fs.mode)
    ising = conjugate_sum(circ, frag)
    if not ising.is_ising():
        raise IntegrityError(f"fragment {args.fragment}: conjugated sum is not in Ising form")
    g1, g2 = gate_counts(circ, args.y_cost)
    if fs.mode == "QWC" and g2:
        raise IntegrityError("QWC circuit contains two-qubit gates")
    _emit(formats.circuit_text(circ), args.output)
    sys.stderr.write(f"fragment {args.fragment} ({fs.mode}, {len(frag)} terms): G1={g1} G2={g2}\n")
    return EXIT_OK


def run_plan(h: PauliSum, *, modes, noises, p_values, epsilon, seed, y_cost, max_qubits, tol=1e-8):
    """Shared pipeline for ``plan``: returns ``(energy, per-mode plans, report rows, ratios)``."""
    plans = {m: plan_measurements(h, m, y_cost) for m in modes}
    energy, v = ground_state(h, tol, seed=seed, max_qubits=max_qubits)
    moments = {m: state_moments(plans[m], v) for m in modes}
    reports, ratios = [], []
    for p in p_values:
        for name, f1, f2 in noises:
            noise = NoiseParams(f1, f2, p)
            by_mode = {}
            for m in modes:
                r = evaluate(plans[m], moments[m], noise, epsilon)
                by_mode[m] = r
                reports.append({
                    "mode": m, "preset": name, "f1": f1, "f2": f2, "p": p,
                    "n_m": r.n_m, "n_m_approx_p": r.n_m_approx_p, "approx_defined": r.approx_defined,
                    "n_fragments": len(r.fragments), "mean_gates": plans[m].mean_gates(),
                    "shares": r.shares,
                    "fragments": [vars(fm) for fm in r.fragments],
                })
            if len(modes) == 2:
                q, f = by_mode["QWC"].n_m, by_mode["FC"].n_m
                ratios.append({"preset": name, "p": p, "n_m_qwc": q, "n_m_fc": f,
                               "ratio": q / f if f > 0 else math.nan})
    return energy, plans, reports, ratios


def cmd_plan(args) -> int:
    h, meta = load_hamiltonian(args.input, args.mapping)
    _require_terms(h)
    if args.epsilon <= 0:
        raise InputError("--epsilon must be positive")
    modes = ["QWC", "FC"] if args.mode == "both" else [args.mode.upper()]
    noises = _noise_list(args)
    energy, plans, reports, ratios = run_plan(
        h, modes=modes, noises=noises, p_values=args.p, epsilon=args.epsilon,
        seed=args.seed, y_cost=args.y_cost, max_qubits=args.max_qubits)
    config = {
        "input": args.input, "mode": args.mode, "epsilon": args.epsilon,
        "presets": [{"name": n, "f1": a, "f2": b} for n, a, b in noises],
        "p": list(args.p), "seed": args.seed, "y_cost": args.y_cost, "mapping": args.mapping,
        "state": "exact ground state (Lanczos)",
    }
    doc = {
        "schema": formats.SCHEMA, "command": "plan", "config": config, "seed": args.seed,
        "inputs": formats.provenance([args.input]), "input_meta": meta,
        "n_qubits": h.n_qubits, "n_terms": len(h), "energy": energy,
        "constant": h.split_identity()[0],
        "reports": reports, "ratios": ratios,
    }
    if args.format == "csv":
        buf = io.StringIO()
        rows = ratios if ratios else reports
        cols = (["preset", "p", "n_m_qwc", "n_m_fc", "ratio"] if ratios else
                ["mode", "preset", "f1", "f2", "p", "n_m", "n_m_approx_p", "n_fragments", "mean_gates"])
        formats.write_csv(rows, buf, cols)
        _emit(buf.getvalue(), args.output)
    else:
        _emit(formats.dumps(doc), args.output)
    for r in ratios:
        log.info("%s p=%g ratio %.4f", r["preset"], r["p"], r["ratio"])
    return EXIT_OK


def scaling_rows(paths, mapping="bk", y_cost=2):
    rows = []
    for path in paths:
        h, _ = load_hamiltonian(path, mapping)
        plan = plan_measurements(h, "FC", y_cost)
        nq = h.n_qubits
        rows.append({"input": str(path), "n_qubits": nq, "x": nq * nq / math.log10(nq),
                     "mean_gates": plan.mean_gates(), "n_fragments": len(plan.fragments)})
    return rows


def fit_line(x, y) -> dict:
    """Ordinary least squares ``y = slope x + intercept`` with R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def cmd_scaling(args) -> int:
    paths = sorted({p for pattern in args.inputs for p in (glob.glob(pattern) or [pattern])})
    rows = scaling_rows(paths, args.mapping, args.y_cost)
    # keep one row per width; fixtures sharing N_q are averaged
    by_n: dict[int, list[float]] = {}
    for r in rows:
        by_n.setdefault(r["n_qubits"], []).append(r["mean_gates"])
    if len(by_n) < 3:
        raise InputError(f"scaling needs at least 3 distinct qubit counts, got {sorted(by_n)}")
    ns = sorted(by_n)
    xs = [n * n / math.log10(n) for n in ns]
    ys = [float(np.mean(by_n[n])) for n in ns]
    fit = fit_line(xs, ys)
    buf = io.StringIO()
    formats.write_csv(rows, buf, ["input", "n_qubits", "x", "mean_gates", "n_fragments"])
    buf.write(f"# fit: slope={fit['slope']:.6g} intercept={fit['intercept']:.6g} r2={fit['r2']:.6f}\n")
    buf.write(f"# reference fit (not asserted): slope={REFERENCE_FIT['slope']} "
              f"intercept={REFERENCE_FIT['intercept']} r2={REFERENCE_FIT['r2']}\n")
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def simulate_rows(h: PauliSum, mode: str, noise: NoiseParams, shots: int, seed: int, y_cost: int = 2):
    """Empirical vs analytic mean and variance of the rescaled estimator per fragment."""
    plan = plan_measurements(h, mode, y_cost)
    _, v = ground_state(h, seed=seed, max_qubits=SIMULATE_MAX_QUBITS)
    seeds = np.random.SeedSequence(seed).spawn(len(plan.fragments))
    rows = []
    for fp, ss in zip(plan.fragments, seeds):
        F = noise.p * noise.f1 ** fp.G1 * noise.f2 ** fp.G2
        phi = apply_clifford(fp.circuit, v)
        out = sample_noisy_measurement(fp.ising, phi, F, shots, int(ss.generate_state(1)[0])) / F
        rows.append(compare_samples(fp.index, out, fp.terms, v, F))
    return rows


def compare_samples(index, samples, fragment, v, F):
    """z-scores of the sample mean and variance of ``samples`` (already divided by F)."""
    mean, h2 = fragment_moments(fragment, v)
    var_psi = max(h2 - mean * mean, 0.0)
    var_bar = estimator_variance(var_psi, h2, sum_square_coeffs(fragment), F)
    n = len(samples)
    emp_mean = float(samples.mean())
    emp_var = float(samples.var(ddof=1))
    se_mean = math.sqrt(var_bar / n)
    m4 = float(((samples - emp_mean) ** 4).mean())
    se_var = math.sqrt(max(m4 - emp_var ** 2, 0.0) / n)
    return {
        "fragment": index, "F": F, "shots": n,
        "mean_empirical": emp_mean, "mean_exact": mean,
        "z_mean": (emp_mean - mean) / se_mean if se_mean > 0 else 0.0,
        "var_empirical": emp_var, "var_bar": var_bar,
        "z_var": (emp_var - var_bar) / se_var if se_var > 0 else 0.0,
    }


def cmd_simulate(args) -> int:
    h, _ = load_hamiltonian(args.input, args.mapping)
    _require_terms(h)
    if h.n_qubits > SIMULATE_MAX_QUBITS:
        raise QubitCapError(f"simulate is limited to {SIMULATE_MAX_QUBITS} qubits, input has {h.n_qubits}")
    name, f1, f2 = _noise_list(args)[0]
    noise = NoiseParams(f1, f2, args.p)
    rows = simulate_rows(h, args.mode, noise, args.shots, args.seed, args.y_cost)
    buf = io.StringIO()
    formats.write_csv(rows, buf)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="measplan", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, mode_choices=("fc", "qwc")):
        p.add_argument("input", help="Hamiltonian file or .fcidump")
        p.add_argument("--mode", choices=mode_choices, default=mode_choices[0])
        p.add_argument("--mapping", choices=("bk", "jw"), default="bk",
                       help="encoding used when the input is an FCIDUMP")
        p.add_argument("--y-cost", type=int, choices=(1, 2), default=2,
                       help="1-qubit gates charged for a Y-basis rotation")
        p.add_argument("-o", "--output")

    def noise(p, multi=True):
        p.add_argument("--preset", nargs="+" if multi else None, choices=("ideal", "C", "F", "custom"),
                       default=["ideal", "C", "F"] if multi else ["ideal"])
        p.add_argument("--fidelities", help="f1,f2 for --preset custom")

    p = sub.add_parser("ingest", help="FCIDUMP to Hamiltonian file")
    p.add_argument("fcidump")
    p.add_argument("--mapping", choices=("bk", "jw"), default="bk")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("group", help="Sorted Insertion fragments")
    common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("synth", help="diagonalizing circuit for one fragment")
    common(p)
    p.add_argument("--fragment", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("plan", help="measurement counts and QWC/FC ratios")
    common(p, ("both", "fc", "qwc"))
    noise(p)
    p.add_argument("--p", type=float, nargs="+", default=list(DEFAULT_P_VALUES))
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=7, help="Lanczos start-vector seed")
    p.add_argument("--max-qubits", type=int, default=MAX_QUBITS)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("scaling", help="mean FC gate count versus N_q^2/log10 N_q")
    p.add_argument("inputs", nargs="+", help="files or glob patterns")
    p.add_argument("--mapping", choices=("bk", "jw"), default="bk")
    p.add_argument("--y-cost", type=int, choices=(1, 2), default=2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("simulate", help="Monte Carlo check of the noisy estimator")
    common(p)
    noise(p, multi=False)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "preset", None) and isinstance(args.preset, str):
        args.preset = [args.preset]
    try:
        return args.func(args)
    except QubitCapError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CAP
    except (InputError, formats.FormatError, FcidumpError, PauliError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONVERGENCE
    except (IntegrityError, SynthesisError) as exc:
        sys.stderr.write(f"integrity failure: {exc}\n")
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
