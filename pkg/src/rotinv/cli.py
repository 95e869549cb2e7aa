"""Command-line front end.

Every run is a pure function of (inputs, seed): reports embed the seed,
tolerance, and package version, and identical invocations produce identical
bytes.  Exit codes: 0 success / all checks passed, 1 a verification check
failed, 2 usage or schema error, 3 capacity exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import __version__, jsonio
from .errors import CapacityError, DecodeError, SchemaError
from .halfint import HalfInteger
from .ham_model import (
    hamiltonian_to_json,
    is_rotation_invariant,
    is_translation_invariant,
    load_hamiltonian,
    save_hamiltonian,
)
from .ri_encode import encode_hamiltonian, encode_state, decode_state, load_encoding, save_encoding
from .spectral_engine import eigensolve, evolve, partition_function
from .spin_core import (
    admissible_spins,
    decompose,
    largest_multiplicity_sector,
    total_spin_projector,
    validate_spin,
)
from .tri_flags import (
    body_size,
    build_tri_hamiltonian,
    degeneracy_count,
    flag_projector,
    flag_rank,
    flag_spec_to_json,
    make_flag_spec,
    save_flag_spec,
    verify_flag_overlaps,
)


def _run_block(args) -> dict:
    return {
        "command": args.command,
        "seed": args.seed,
        "tol": args.tol,
        "version": __version__,
    }


def _emit(args, doc: dict, text_lines):
    """Write the JSON record to --out (or stdout with --json), else text."""
    if args.out:
        jsonio.dump_json(doc, args.out)
        if not args.json:
            for line in text_lines:
                print(line)
        return
    if args.json:
        sys.stdout.write(jsonio.canonical_dumps(doc))
    else:
        for line in text_lines:
            print(line)


def _parse_j(args, r: int) -> HalfInteger:
    if args.twice_j is None:
        j, _ = largest_multiplicity_sector(r)
        return j
    return validate_spin(r, HalfInteger(args.twice_j))


# ---------------------------------------------------------------------------
# subcommands


def cmd_decompose(args) -> int:
    if args.r < 1:
        raise SchemaError(f"--r must be a positive qubit count, got {args.r}")
    dec = decompose(args.r)
    rows = [(str(j), dim, mult) for j, dim, mult in dec.sectors]
    checksum = sum(dim * mult for _, dim, mult in rows)
    doc = {
        "run": _run_block(args),
        "r": args.r,
        "sectors": [{"j": s, "twice_j": d - 1, "dim": d, "multiplicity": m}
                    for s, d, m in rows],
        "checksum": checksum,
    }
    lines = [f"total-spin sectors of r = {args.r} qubits:"]
    lines += [f"  j = {s:>4}   dim {d:>3}   multiplicity {m}" for s, d, m in rows]
    lines.append(f"checksum sum_j dim*mult = {checksum} (2^r = {2 ** args.r})")
    _emit(args, doc, lines)
    return 0


def cmd_projector(args) -> int:
    if args.r < 1:
        raise SchemaError(f"--r must be a positive qubit count, got {args.r}")
    j = _parse_j(args, args.r)
    p = total_spin_projector(args.r, j)
    idem = float(np.max(np.abs(p @ p - p)))
    herm = float(np.max(np.abs(p - p.conj().T)))
    doc = {
        "run": _run_block(args),
        "r": args.r,
        "twice_j": j.twice_value,
        "dim": p.shape[0],
        "rank": int(round(np.trace(p).real)),
        "idempotence_residual": idem,
        "hermiticity_residual": herm,
        "matrix": jsonio.matrix_to_json(p),
    }
    lines = [
        f"P^({args.r},{j}) on {p.shape[0]} dimensions: rank {doc['rank']}",
        f"idempotence {idem:.2e}, hermiticity {herm:.2e}",
    ]
    _emit(args, doc, lines)
    return 0


def cmd_encode(args) -> int:
    h1 = load_hamiltonian(args.input)
    j = _parse_j(args, args.r)
    try:
        h2, enc = encode_hamiltonian(h1, args.r, j, penalty_strength=args.penalty)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    h2.metadata["run"] = _run_block(args)
    if args.out:
        save_hamiltonian(h2, args.out)
    if args.encoding_out:
        save_encoding(enc, args.encoding_out)
    doc = hamiltonian_to_json(h2)
    lines = [
        f"encoded {h1.label or 'model'}: {h1.n_sites} sites -> {h2.n_sites} qubits",
        f"k' = {args.r * h1.k}, J = {enc.penalty_strength}",
    ]
    _emit(args, doc, lines)
    return 0


def cmd_flags(args) -> int:
    j = _parse_j(args, args.r)
    try:
        spec = make_flag_spec(args.r, j, args.variant)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    reports = verify_flag_overlaps(spec, n_cells=args.cells, seed=args.seed,
                                   tol=args.tol)
    ok = sum(r.passed for r in reports)
    doc = {
        "run": _run_block(args),
        "spec": flag_spec_to_json(spec),
        "rank": flag_rank(spec),
        "body_size_k2": body_size(spec, 2),
        "offsets_annihilated": ok,
        "offsets_total": len(reports),
        "overlaps": [r.as_json() for r in reports],
    }
    if args.out:
        save_flag_spec(spec, args.out)
    lines = [
        f"{args.variant} flags for r={args.r}, j={j}: m={spec.m}, F={spec.F}, "
        f"cell={spec.cell}, rank(P^F)={flag_rank(spec)}",
        f"misaligned offsets annihilated: {ok}/{len(reports)}",
        f"k' preview for k=2: {body_size(spec, 2)}",
    ]
    _emit(args, doc, lines)
    return 0 if ok == len(reports) else 1


def cmd_build_tri(args) -> int:
    h1 = load_hamiltonian(args.input)
    j = _parse_j(args, args.r)
    try:
        spec = make_flag_spec(args.r, j, args.variant)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    gen = _uniform_generator(h1)
    try:
        h2 = build_tri_hamiltonian(gen.matrix, gen.k, h1.n_sites, spec,
                                   penalty_strength=args.penalty,
                                   local_dim=h1.local_dim,
                                   source_label=h1.label)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    h2.metadata["run"] = _run_block(args)
    if args.out:
        save_hamiltonian(h2, args.out)
    md = h2.metadata["tri"]
    doc = hamiltonian_to_json(h2)
    lines = [
        f"built {spec.variant} invariant model: {h1.n_sites} sites -> "
        f"{h2.n_sites} qubits, k' = {md['body_size']}",
        f"J' = {md['J_prime']}, formatted-sector offset = {md['penalty_offset']}",
        f"flag degeneracy count = {degeneracy_count(spec, h1.n_sites)}",
    ]
    _emit(args, doc, lines)
    return 0


def _uniform_generator(h1):
    """The repeated term of a translation-uniform chain, or SchemaError."""
    if not h1.terms:
        raise SchemaError("input model has no terms to transcribe")
    first = h1.terms[0]
    base = np.asarray(first.matrix.toarray() if hasattr(first.matrix, "toarray")
                      else first.matrix)
    for term in h1.terms:
        mat = np.asarray(term.matrix.toarray() if hasattr(term.matrix, "toarray")
                         else term.matrix)
        width = [(s - term.support[0]) % h1.n_sites for s in term.support]
        if width != list(range(term.k)) or mat.shape != base.shape \
                or not np.allclose(mat, base, atol=1e-12):
            raise SchemaError(
                "input model must consist of translated copies of one "
                "contiguous generator term"
            )
    return first


def cmd_verify(args) -> int:
    h = load_hamiltonian(args.input)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    known = {"ri", "ti", "spectrum", "flags"}
    bad = set(checks) - known
    if bad or not checks:
        raise SchemaError(f"unknown checks {sorted(bad)}; pick from {sorted(known)}")
    reports = []
    for check in checks:
        if check == "ri":
            reports.append(is_rotation_invariant(h, tol=args.tol, seed=args.seed))
        elif check == "ti":
            reports.append(is_translation_invariant(h, period=args.period,
                                                    tol=args.tol, seed=args.seed))
        elif check == "spectrum":
            reports.append(_spectrum_report(h, args))
        elif check == "flags":
            reports.extend(_flags_report(h, args))
    doc = {
        "run": _run_block(args),
        "label": h.label,
        "reports": [r.as_json() for r in reports],
        "passed": all(r.passed for r in reports),
    }
    lines = [f"{r.check}: {'pass' if r.passed else 'FAIL'} "
             f"(residual {r.residual:.2e}, tol {r.tolerance:g})" for r in reports]
    lines.append("all checks passed" if doc["passed"] else "verification FAILED")
    _emit(args, doc, lines)
    return 0 if doc["passed"] else 1


def _spectrum_report(h, args):
    from .ham_model import InvarianceReport

    if not args.reference:
        raise SchemaError("spectrum check needs --reference <hamiltonian.json>")
    ref = load_hamiltonian(args.reference)
    res_h = eigensolve(h, mode="dense")
    res_ref = eigensolve(ref, mode="dense")
    offset = float(h.metadata.get("tri", {}).get("penalty_offset", 0.0))
    d_ground = abs((res_h.ground_energy - offset) - res_ref.ground_energy)
    gaps = [res_h.gap, res_ref.gap]
    d_gap = abs(gaps[0] - gaps[1]) if None not in gaps else 0.0
    residual = max(d_ground, d_gap)
    return InvarianceReport(
        check="spectrum_vs_reference",
        residual=float(residual),
        tolerance=args.tol,
        passed=bool(residual <= args.tol),
        details={
            "ground_energy": res_h.ground_energy,
            "penalty_offset_subtracted": offset,
            "reference_ground_energy": res_ref.ground_energy,
            "gap": res_h.gap,
            "reference_gap": res_ref.gap,
        },
    )


def _flags_report(h, args):
    md = h.metadata.get("tri")
    if not md:
        raise SchemaError("flags check needs a model built by build-tri "
                          "(missing 'tri' metadata)")
    spec = make_flag_spec(int(md["r"]), HalfInteger(int(md["twice_j"])),
                          str(md["variant"]))
    return verify_flag_overlaps(spec, n_cells=2, seed=args.seed, tol=args.tol)


def cmd_spectrum(args) -> int:
    h = load_hamiltonian(args.input)
    result = eigensolve(h, count=args.count, mode=args.mode, seed=args.seed)
    doc = {"run": _run_block(args), "label": h.label}
    doc.update(result.as_json())
    lines = [
        f"method {result.method}: ground energy {result.ground_energy!r}, "
        f"gap {result.gap!r}",
        "lowest levels: " + ", ".join(
            f"{e:.10g} (x{c})" for e, c in result.degeneracies[:6]),
    ]
    _emit(args, doc, lines)
    return 0


def cmd_dynamics(args) -> int:
    h1 = load_hamiltonian(args.input)
    enc = load_encoding(args.encoding)
    if h1.local_dim != enc.d:
        raise SchemaError(
            f"encoding is for {enc.d}-level sites, model has {h1.local_dim}")
    h2, _ = encode_hamiltonian(h1, enc.r, enc.j, penalty_strength=enc.penalty_strength)
    times = _parse_floats(args.times, "--times")
    rng = np.random.default_rng(args.seed)
    dim = h1.local_dim ** h1.n_sites
    worst = 0.0
    for _ in range(args.states):
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        big = encode_state(psi, enc)
        for t in times:
            direct = evolve(h1, psi, t)
            lifted = evolve(h2, big, t)
            decoded, _ = decode_state(lifted, enc)
            dev = np.linalg.norm(decoded - direct / np.linalg.norm(direct))
            worst = max(worst, float(dev))
    doc = {
        "run": _run_block(args),
        "label": h1.label,
        "times": times,
        "states": args.states,
        "max_deviation": worst,
        "passed": bool(worst <= args.tol),
    }
    lines = [f"max dynamics deviation over {args.states} states x "
             f"{len(times)} times: {worst:.3e} "
             f"({'pass' if doc['passed'] else 'FAIL'} at tol {args.tol:g})"]
    _emit(args, doc, lines)
    return 0 if doc["passed"] else 1


def cmd_thermal(args) -> int:
    h1 = load_hamiltonian(args.h1)
    h2 = load_hamiltonian(args.h2)
    betas = _parse_floats(args.beta, "--beta")
    rows = []
    for beta in betas:
        log1 = partition_function(h1, beta)
        log2 = partition_function(h2, beta)
        row = {"beta": beta, "log_z1": log1, "log_z2": log2,
               "ratio": float(np.exp(log1 - log2))}
        if args.closed_form:
            b, j = args.closed_form
            from .spectral_engine import suppression_ratio_field_model
            row["closed_form"] = suppression_ratio_field_model(
                b, beta, j, h1.n_sites)
        rows.append(row)
    header = list(rows[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{row[k]:.15g}" if isinstance(row[k], float) else row[k]
                         for k in header])
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_floats(raw: str, flag: str):
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise SchemaError(f"{flag} expects comma-separated numbers, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotinv",
        description="construct and verify rotation/translation invariant "
                    "spin-chain encodings",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="seed for all sampling")
        p.add_argument("--tol", type=float, default=1e-10,
                       help="tolerance for checks")
        p.add_argument("--out", default=None, help="write JSON/CSV here")
        p.add_argument("--json", action="store_true",
                       help="print canonical JSON to stdout")

    p = sub.add_parser("decompose", help="total-spin sector table of r qubits")
    p.add_argument("--r", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("projector", help="total-spin projector and residuals")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--twice-j", type=int, default=None, dest="twice_j")
    common(p)
    p.set_defaults(func=cmd_projector)

    p = sub.add_parser("encode", help="rotation-invariant lift of a chain model")
    p.add_argument("input", help="source Hamiltonian JSON")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--twice-j", type=int, default=None, dest="twice_j")
    p.add_argument("--penalty", type=float, default=None,
                   help="override the penalty strength J")
    p.add_argument("--encoding-out", default=None, dest="encoding_out",
                   help="write the encoding (isometry) JSON here")
    common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("flags", help="flag layout and misalignment report")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--twice-j", type=int, default=None, dest="twice_j")
    p.add_argument("--variant", default="general",
                   choices=("general", "improved", "small_r"))
    p.add_argument("--cells", type=int, default=2,
                   help="ring cells used by the misalignment check")
    common(p)
    p.set_defaults(func=cmd_flags)

    p = sub.add_parser("build-tri",
                       help="translation+rotation invariant lift of a chain model")
    p.add_argument("input", help="source Hamiltonian JSON (uniform chain)")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--twice-j", type=int, default=None, dest="twice_j")
    p.add_argument("--variant", default="general",
                   choices=("general", "improved", "small_r"))
    p.add_argument("--penalty", type=float, default=None,
                   help="override the penalty strength J'")
    common(p)
    p.set_defaults(func=cmd_build_tri)

    p = sub.add_parser("verify", help="run invariance/spectrum checks")
    p.add_argument("input", help="Hamiltonian JSON")
    p.add_argument("--checks", default="ri,ti",
                   help="comma list from ri,ti,spectrum,flags")
    p.add_argument("--period", type=int, default=1,
                   help="translation period for the ti check")
    p.add_argument("--reference", default=None,
                   help="reference Hamiltonian for the spectrum check")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectrum", help="lowest eigenvalues of a model")
    p.add_argument("input", help="Hamiltonian JSON")
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--mode", default="auto", choices=("auto", "dense", "iterative"))
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("dynamics",
                       help="encoded-evolution deviation from direct evolution")
    p.add_argument("input", help="source Hamiltonian JSON")
    p.add_argument("encoding", help="encoding JSON from `encode --encoding-out`")
    p.add_argument("--times", default="0.1,1.0")
    p.add_argument("--states", type=int, default=3)
    common(p)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("thermal", help="partition-function comparison as CSV")
    p.add_argument("--h1", required=True, help="reference Hamiltonian JSON")
    p.add_argument("--h2", required=True, help="comparison Hamiltonian JSON")
    p.add_argument("--beta", default="0.5,1.0,2.0")
    p.add_argument("--closed-form", type=float, nargs=2, default=None,
                   metavar=("B", "J"), dest="closed_form",
                   help="add the field-model closed-form column for B and J")
    common(p)
    p.set_defaults(func=cmd_thermal)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, DecodeError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
