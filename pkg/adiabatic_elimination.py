#!/usr/bin/env python3
"""
adiabatic_elimination.py  -  effective ground-state operators from the command line

Reads a system document (see spec_document.py) or builds a preset, then:

  validate   check every structural assumption, print the report
  derive     print H_eff, every L_eff with its rates, the propagator table
             and the identity residuals
  simulate   integrate the full or an effective master equation to CSV
  compare    integrate both on one grid, write agreement metrics as JSON
  preset     list the built-in systems or export one as a document

Exit codes: 0 success, 1 validation/derivation failure, 2 parse error,
3 integration failure.

Examples
--------
python adiabatic_elimination.py preset export four-level --out four_level.json
python adiabatic_elimination.py validate four_level.json
python adiabatic_elimination.py derive --preset raman --variant basic --variant dressed
python adiabatic_elimination.py simulate --preset four-level --generator full --t-end 4000 --dt 0.1 \
    --sample-every 100 --out four_level_full.csv
python adiabatic_elimination.py compare --preset four-level -p omega=0.05 --t-end 800 --dt 0.1 \
    --out four_level_compare.json
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Optional, Sequence

from dynamics import compare, integrate, pure_state, resolve_step
from effective_ops import (
    EffectiveModel, FieldEffectiveModel, Variant, derive, effective_nh_hamiltonian,
    effective_rate, excited_propagator_elements, lindblad_sum_residual, nh_identity_residual,
)
from errors import AdiabaticEliminationError, InvalidParameter, ParseError, SingularPropagator, StepTooLarge
from linalg_core import frobenius_distance
from scenarios import PRESETS, get_preset
from spec_document import SpecDocument, dump, encode_matrix, load
from system_model import SystemSpec, partition, validate
from utils import format_complex, format_matrix, save_json, write_trajectory_csv

logger = logging.getLogger("adiabatic_elimination")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_INTEGRATION = 3

DEFAULT_TOLERANCE = 0.02

# ---------- input ----------

def parse_params(items: Optional[Sequence[str]]) -> Dict[str, str]:
    params: Dict[str, str] = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InvalidParameter(f"expected NAME=VALUE, got {item!r}")
        params[name.strip()] = value.strip()
    return params


def preset_document(name: str, overrides: Dict[str, str]) -> SpecDocument:
    preset = get_preset(name)
    params = preset.parameters(overrides)
    metadata = {
        "preset": preset.name,
        "parameters": params,
        "initial_index": preset.initial_index,
        "variant": preset.variant,
    }
    return SpecDocument(preset.build(**params), metadata)


def load_input(args) -> SpecDocument:
    if args.preset and args.spec:
        raise InvalidParameter("give either a document path or --preset, not both")
    if args.preset:
        logger.debug("building preset %s with %s", args.preset, args.param)
        return preset_document(args.preset, parse_params(args.param))
    if args.param:
        raise InvalidParameter("-p/--param only applies to --preset")
    if not args.spec:
        raise ParseError("no input: give a document path or --preset NAME")
    logger.debug("reading %s", args.spec)
    return load(args.spec)


def initial_index(args, doc: SpecDocument) -> int:
    if args.initial is not None:
        return args.initial
    if doc.initial_index is not None:
        return doc.initial_index
    return doc.spec.ground_indices[0]


def default_variant(doc: SpecDocument) -> str:
    value = doc.metadata.get("variant", Variant.BASIC.value)
    try:
        return Variant(value).value
    except ValueError:
        raise ParseError(f"unknown variant {value!r}", field="metadata.variant") from None


# ---------- validate ----------

def cmd_validate(args) -> int:
    doc = load_input(args)
    spec = doc.spec
    report = validate(spec)
    for v in report.violations:
        print(f"[validate] violation {v}")
    for a in report.advisories:
        print(f"[validate] advisory {a}")
    if not report.ok:
        print(f"[validate] {len(report.violations)} violation(s)")
        return EXIT_INVALID
    print(f"[validate] OK: dimension {spec.dim}, ground {list(spec.ground_indices)}, "
          f"{len(spec.jumps)} jump(s), {len(spec.fields)} field(s)")
    return EXIT_OK


# ---------- derive ----------

def _rates(spec: SystemSpec, model: EffectiveModel) -> Dict[str, float]:
    out = {}
    for j in model.l_eff:
        for src in spec.ground_indices:
            for dst in spec.ground_indices:
                key = f"{j.label}:{spec.label_of(src)}->{spec.label_of(dst)}"
                out[key] = effective_rate(model, j.label, src, dst)
    return out


def _print_propagators(spec: SystemSpec, model) -> None:
    print("[derive] effective complex detunings / couplings 1/<e_i|H_NH^-1|e_j>:")
    try:
        elements = excited_propagator_elements(model.h_nh, spec.excited_indices)
    except SingularPropagator:
        print("  H_NH is singular on the excited block (no decay, no detuning)")
        return
    for el in elements:
        print(f"  {spec.label_of(el.row)},{spec.label_of(el.col)}: {format_complex(el.effective)}")


def _print_snapshot(spec: SystemSpec, model: EffectiveModel) -> Dict[str, Any]:
    labels = [spec.label_of(i) for i in range(spec.dim)]
    ground = spec.ground_indices
    when = f" at t={model.time:g}" if model.time is not None else ""
    print(f"[derive] variant {model.variant.value}{when}")
    print("[derive] H_eff (ground block):")
    print(format_matrix(model.h_eff, labels, rows=ground))
    for j in model.l_eff:
        print(f"[derive] L_eff[{j.label}] (ground block):")
        print(format_matrix(j.op, labels, rows=ground))
    rates = _rates(spec, model)
    for key, rate in rates.items():
        print(f"  rate {key} = {rate:.6g}")
    _print_propagators(spec, model)

    out: Dict[str, Any] = {
        "variant": model.variant.value,
        "time": model.time,
        "h_eff": encode_matrix(model.h_eff),
        "l_eff": {j.label: encode_matrix(j.op) for j in model.l_eff},
        "rates": rates,
    }
    if model.variant is Variant.BASIC and model.time is None:
        out["lindblad_sum_residual"] = lindblad_sum_residual(model)
        out["nh_identity_residual"] = nh_identity_residual(model)
        print(f"[derive] Lindblad-sum identity residual {out['lindblad_sum_residual']:.3g}")
        print(f"[derive] no-jump identity residual {out['nh_identity_residual']:.3g}")
    else:
        print("[derive] identity residuals: n/a (basic variant only)")
    if model.time is None:
        h_nh = effective_nh_hamiltonian(model)
        print("[derive] no-jump Hamiltonian H_eff - (i/2) sum L_eff^dagger L_eff:")
        print(format_matrix(h_nh, labels, rows=ground))
        out["h_eff_nh"] = encode_matrix(h_nh)
    return out


def _print_field_blocks(spec: SystemSpec, model: FieldEffectiveModel) -> Dict[str, Any]:
    labels = [spec.label_of(i) for i in range(spec.dim)]
    print(f"[derive] variant {model.variant.value}: static blocks A_f (pass --t for a snapshot)")
    blocks = {}
    for label, omega, a in model.static_blocks():
        print(f"[derive] A[{label}] at omega={omega:g}:")
        print(format_matrix(a, labels))
        blocks[label] = {"omega": omega, "a": encode_matrix(a)}
    rates = {}
    for j in model.jumps:
        for src in spec.ground_indices:
            for dst in spec.ground_indices:
                key = f"{j.label}:{spec.label_of(src)}->{spec.label_of(dst)}"
                rates[key] = model.time_averaged_rate(j.label, src, dst)
                print(f"  time-averaged rate {key} = {rates[key]:.6g}")
    _print_propagators(spec, model)
    return {"variant": model.variant.value, "blocks": blocks, "time_averaged_rates": rates}


def cmd_derive(args) -> int:
    doc = load_input(args)
    spec = doc.spec
    part = partition(spec)
    names = args.variant or [default_variant(doc)]

    results: Dict[str, Any] = {}
    snapshots: Dict[str, EffectiveModel] = {}
    for name in names:
        variant = Variant(name)
        if spec.fields and variant in (Variant.BASIC, Variant.DRESSED):
            print(f"[derive] note: the {variant.value} variant ignores {len(spec.fields)} field(s)")
        model = derive(part, spec.jumps, variant, spec.fields)
        if isinstance(model, FieldEffectiveModel):
            if args.t is None:
                results[name] = _print_field_blocks(spec, model)
                continue
            model = model.at(args.t)
        results[name] = _print_snapshot(spec, model)
        snapshots[name] = model

    if len(snapshots) > 1:
        first, *rest = snapshots
        for other in rest:
            d = frobenius_distance(snapshots[first].h_eff, snapshots[other].h_eff)
            print(f"[derive] |H_eff({first}) - H_eff({other})|_F = {d:.6g}")

    if args.out:
        save_json({"metadata": doc.metadata, "models": results}, args.out)
        print(f"[derive] wrote -> {args.out}")
    return EXIT_OK


# ---------- simulate / compare ----------

def _effective_model(doc: SpecDocument, variant: str):
    spec = doc.spec
    return derive(partition(spec), spec.jumps, Variant(variant), spec.fields)


def cmd_simulate(args) -> int:
    doc = load_input(args)
    spec = doc.spec
    kind, _, variant = args.generator.partition(":")
    if kind == "full":
        source = spec
    elif kind == "effective":
        source = _effective_model(doc, variant or default_variant(doc))
    else:
        raise InvalidParameter(f"generator must be 'full' or 'effective[:variant]', got {args.generator!r}")

    rho0 = pure_state(spec.dim, initial_index(args, doc))
    traj = integrate(source, rho0, args.t_end, dt=args.dt, sample_every=args.sample_every)
    n = write_trajectory_csv(args.out, traj)
    print(f"[simulate] {args.generator}: {n} rows up to t={traj.times[-1]:g} (dt={traj.dt:.6g}, "
          f"trace drift {traj.trace_drift:.3g}) -> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    doc = load_input(args)
    spec = doc.spec
    variant = args.variant or default_variant(doc)
    model = _effective_model(doc, variant)
    rho0 = pure_state(spec.dim, initial_index(args, doc))
    dt = resolve_step(spec, args.dt)

    with ThreadPoolExecutor(max_workers=2) as pool:
        full_job = pool.submit(integrate, spec, rho0, args.t_end, dt, args.sample_every)
        eff_job = pool.submit(integrate, model, rho0, args.t_end, dt, args.sample_every)
        full, eff = full_job.result(), eff_job.result()

    metrics = compare(full, eff)
    agree = metrics.max_population_deviation <= args.tolerance
    data: Dict[str, Any] = {
        "variant": variant,
        "t_end": args.t_end,
        "dt": full.dt,
        "samples": int(full.times.size),
        **metrics.as_dict(),
        "trace_drift_full": full.trace_drift,
        "trace_drift_effective": eff.trace_drift,
        "min_eigenvalue_full": full.min_eigenvalue,
        "min_eigenvalue_effective": eff.min_eigenvalue,
        "tolerance": args.tolerance,
        "agree": agree,
    }
    save_json(data, args.out)
    verdict = "agree" if agree else "DEVIATE"
    print(f"[compare] full vs effective ({variant}): max population deviation "
          f"{metrics.max_population_deviation:.4g} vs tolerance {args.tolerance:g}: {verdict} -> {args.out}")
    return EXIT_OK


# ---------- presets ----------

def cmd_preset_list(args) -> int:
    for p in PRESETS.values():
        params = ", ".join(f"{k}={v}" for k, v in p.defaults.items())
        print(f"[preset] {p.name:<13} {p.description}")
        print(f"[preset] {'':<13} variant={p.variant} initial={p.initial_index} {params}")
    return EXIT_OK


def cmd_preset_export(args) -> int:
    doc = preset_document(args.name, parse_params(args.param))
    dump(doc.spec, args.out, doc.metadata)
    print(f"[preset] wrote {args.name} -> {args.out}")
    return EXIT_OK


# ---------- CLI ----------

def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("spec", nargs="?", help="Path to a system document (JSON)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="Use a built-in system instead of a document")
    p.add_argument("-p", "--param", action="append", default=[], metavar="NAME=VALUE",
                   help="Override a preset parameter (repeatable)")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-end", type=float, required=True, help="Final time")
    p.add_argument("--dt", type=float, default=None,
                   help="Step size (default: $ADIABATIC_ELIM_DT, else min(0.01/gamma_max, 0.01/|H|_max))")
    p.add_argument("--sample-every", type=int, default=1, help="Record every N-th step (default: 1)")
    p.add_argument("--initial", type=int, default=None,
                   help="Initial basis state index (default: document metadata, else first ground state)")
    p.add_argument("--out", required=True, help="Output path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="Adiabatic elimination of excited states in open quantum systems")
    ap.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = ap.add_subparsers(dest="cmd", required=True)

    ap_v = sub.add_parser("validate", help="Check a system against every structural assumption")
    _add_input_args(ap_v)
    ap_v.set_defaults(handler=cmd_validate)

    variants = [v.value for v in Variant]
    ap_d = sub.add_parser("derive", help="Derive effective operators")
    _add_input_args(ap_d)
    ap_d.add_argument("--variant", action="append", choices=variants,
                      help="basic|dressed|fields|general (repeatable; default: document metadata, else basic)")
    ap_d.add_argument("--t", type=float, default=None, help="Evaluation time for the fields/general variants")
    ap_d.add_argument("--out", default=None, help="Optional JSON output")
    ap_d.set_defaults(handler=cmd_derive)

    ap_s = sub.add_parser("simulate", help="Integrate one master equation to CSV")
    _add_input_args(ap_s)
    ap_s.add_argument("--generator", default="full", help="full | effective[:variant] (default: full)")
    _add_run_args(ap_s)
    ap_s.set_defaults(handler=cmd_simulate)

    ap_c = sub.add_parser("compare", help="Integrate full and effective dynamics and compare")
    _add_input_args(ap_c)
    ap_c.add_argument("--variant", choices=variants, default=None,
                      help="Effective variant (default: document metadata, else basic)")
    ap_c.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                      help=f"Verdict threshold on the max population deviation (default: {DEFAULT_TOLERANCE})")
    _add_run_args(ap_c)
    ap_c.set_defaults(handler=cmd_compare)

    ap_p = sub.add_parser("preset", help="Built-in systems")
    psub = ap_p.add_subparsers(dest="preset_cmd", required=True)
    ap_pl = psub.add_parser("list", help="List presets and their default parameters")
    ap_pl.set_defaults(handler=cmd_preset_list)
    ap_pe = psub.add_parser("export", help="Write a preset as a system document")
    ap_pe.add_argument("name", choices=sorted(PRESETS))
    ap_pe.add_argument("-p", "--param", action="append", default=[], metavar="NAME=VALUE")
    ap_pe.add_argument("--out", required=True, help="Output document path")
    ap_pe.set_defaults(handler=cmd_preset_export)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="[%(name)s] %(levelname)s %(message)s")
    tag = f"[{args.cmd}]"
    try:
        return args.handler(args)
    except ParseError as e:
        print(f"{tag} parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"{tag} cannot read input: {e}", file=sys.stderr)
        return EXIT_PARSE
    except StepTooLarge as e:
        print(f"{tag} integration failed: {e}", file=sys.stderr)
        return EXIT_INTEGRATION
    except AdiabaticEliminationError as e:
        print(f"{tag} {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
