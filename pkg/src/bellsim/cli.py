"""Command-line front end: reproducible batch experiments emitting CSV + JSON.

Subcommands: simulate-lhv, simulate-quantum, feasibility, violation-curve,
weak-bvalues.  Every simulation requires an explicit --seed (no wall-clock
default), every output embeds the resolved spec, seed, and package version,
and re-running a spec reproduces all files byte for byte.

Exit codes: 0 success/feasible, 1 runtime error, 2 configuration error,
3 infeasible (feasibility subcommand only).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Any

from . import __version__
from .behaviors import behavior_from_bundle, behavior_s
from .core import b_statistic, s_statistic
from .errors import BellSimError, ConfigError, DomainError, NumericError
from .fileio import (
    read_behavior,
    read_bundle_csv,
    read_density,
    read_keyvalue,
    read_model,
    write_bundle_csv,
)
from .lhv import (
    LhvModel,
    boundary_mixture_model,
    deterministic_model,
    exact_lhv_s,
    sample_bundle,
    sample_counterfactual_table,
    sign_cosine_model,
)
from .quantum import (
    TSIRELSON_ANGLES,
    TSIRELSON_BOUND,
    AngleQuadruple,
    DensityMatrix,
    maximally_mixed,
    s_quantum,
    sample_bundle_quantum,
    singlet,
)
from .feasibility import FeasibilityResult, ReshuffleProblem, fine_feasible_lp, reshuffle_feasible
from .rng import derive_seed
from .stats import (
    BundleGenerator,
    generator_from_behavior,
    generator_from_lhv,
    generator_from_quantum,
    significance_curve,
    standard_error_s,
)
from .weak import PointerConfig, exceedance_fraction, per_pair_b_values_calibrated, per_pair_b_values_lhv

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def _spec_hash(spec: dict[str, Any]) -> str:
    canonical = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _write_json(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _run_record(command: str, spec: dict[str, Any]) -> dict[str, Any]:
    return {
        "command": command,
        "spec": spec,
        "spec_hash": _spec_hash(spec),
        "version": __version__,
    }


def _csv_preamble(spec: dict[str, Any]) -> dict[str, Any]:
    return {"bellsim-version": __version__, "spec-hash": _spec_hash(spec)}


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _lhv_model_from_args(args: argparse.Namespace) -> LhvModel:
    if getattr(args, "model", None):
        return read_model(Path(args.model))
    variant = getattr(args, "variant", None)
    if variant == "deterministic":
        if args.outcomes is None:
            raise ConfigError("deterministic variant needs --outcomes o1 o2 o3 o4")
        return deterministic_model(*args.outcomes)
    if variant == "sign_cosine":
        if args.angles is None:
            raise ConfigError("sign_cosine variant needs --angles a1 a2 b1 b2")
        return sign_cosine_model(*args.angles, bob_sign=args.bob_sign)
    if variant == "boundary_mixture":
        return boundary_mixture_model()
    raise ConfigError("specify an LHV model via --model FILE or --variant NAME")


def _state_from_args(args: argparse.Namespace) -> tuple[DensityMatrix, str]:
    if getattr(args, "rho", None):
        return read_density(Path(args.rho)), f"file:{args.rho}"
    if args.state == "singlet":
        return singlet(), "singlet"
    if args.state == "mixed":
        return maximally_mixed(), "mixed"
    raise ConfigError(f"unknown state {args.state!r}")


def _angles_from_args(args: argparse.Namespace) -> AngleQuadruple:
    if args.angles is None:
        return TSIRELSON_ANGLES
    return AngleQuadruple(*args.angles)


def cmd_simulate_lhv(args: argparse.Namespace) -> int:
    model = _lhv_model_from_args(args)
    spec = {
        "subcommand": "simulate-lhv",
        "model": model.name,
        "n_per_context": args.n,
        "seed": args.seed,
    }
    out = _out_dir(args)
    bundle = sample_bundle(model, args.n, args.seed)
    s_hat = s_statistic(bundle)
    exact = exact_lhv_s(model)
    write_bundle_csv(out / "bundle.csv", bundle, {**_csv_preamble(spec), "seed": args.seed})
    summary = {
        "s_hat": s_hat,
        "standard_error": standard_error_s(bundle) if args.n >= 2 else None,
        "exact_s": exact,
        "n_per_context": args.n,
        "seed": args.seed,
        **_run_record("simulate-lhv", spec),
    }
    _write_json(out / "summary.json", summary)
    _write_json(out / "run.json", _run_record("simulate-lhv", spec))
    return EXIT_OK


def cmd_simulate_quantum(args: argparse.Namespace) -> int:
    rho, state_label = _state_from_args(args)
    angles = _angles_from_args(args)
    spec = {
        "subcommand": "simulate-quantum",
        "state": state_label,
        "angles": list(angles.as_tuple()),
        "convention": args.convention,
        "n_per_context": args.n,
        "seed": args.seed,
    }
    out = _out_dir(args)
    bundle = sample_bundle_quantum(rho, angles, args.n, args.seed, args.convention)
    exact = s_quantum(rho, angles, args.convention)
    s_hat = s_statistic(bundle)
    write_bundle_csv(out / "bundle.csv", bundle, {**_csv_preamble(spec), "seed": args.seed})
    summary = {
        "s_hat": s_hat,
        "standard_error": standard_error_s(bundle) if args.n >= 2 else None,
        "exact_s": exact,
        "tsirelson_margin": TSIRELSON_BOUND - abs(exact),
        "n_per_context": args.n,
        "seed": args.seed,
        **_run_record("simulate-quantum", spec),
    }
    _write_json(out / "summary.json", summary)
    _write_json(out / "run.json", _run_record("simulate-quantum", spec))
    return EXIT_OK


def _feasibility_payload(result: FeasibilityResult) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "status": result.status,
        "residual": result.residual,
    }
    if result.witness is not None:
        payload["witness_weights"] = [float(w) for w in result.witness.weights]
    if result.witness_counts is not None:
        payload["witness_counts"] = [float(w) for w in result.witness_counts]
    if result.integrality is not None:
        payload["integrality"] = result.integrality
    if result.certificate is not None:
        payload["certificate"] = {
            "kind": result.certificate.kind,
            "value": result.certificate.value,
            "signs": list(result.certificate.signs) if result.certificate.signs else None,
            "description": result.certificate.describe(),
        }
    return payload


def cmd_feasibility(args: argparse.Namespace) -> int:
    if (args.behavior is None) == (args.bundle is None):
        raise ConfigError("provide exactly one of --behavior FILE or --bundle FILE")
    if args.behavior:
        source = {"behavior_file": args.behavior}
        behavior = read_behavior(Path(args.behavior))
        level = args.level or ("counts" if args.slack > 0 else "distribution")
    else:
        source = {"bundle_file": args.bundle}
        bundle = read_bundle_csv(Path(args.bundle))
        behavior = behavior_from_bundle(bundle)
        level = args.level or "counts"
    if level == "counts":
        if behavior.counts is None:
            raise ConfigError("count-level feasibility needs counts (bundle input or a behavior file with counts)")
        result = reshuffle_feasible(ReshuffleProblem(behavior.counts, args.slack))
    else:
        result = fine_feasible_lp(behavior)
    spec = {"subcommand": "feasibility", **source, "level": level, "slack": args.slack}
    out = _out_dir(args)
    payload = {
        "behavior_s": behavior_s(behavior),
        **_feasibility_payload(result),
        **_run_record("feasibility", spec),
    }
    _write_json(out / "result.json", payload)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def _generator_from_args(args: argparse.Namespace) -> tuple[BundleGenerator, dict[str, Any]]:
    name = args.generator
    if name == "model":
        if not args.model:
            raise ConfigError("--generator model needs --model FILE")
        model = read_model(Path(args.model))
        return generator_from_lhv(model), {"generator": "model", "model": model.name}
    if name == "behavior":
        if not args.behavior:
            raise ConfigError("--generator behavior needs --behavior FILE")
        behavior = read_behavior(Path(args.behavior))
        return generator_from_behavior(behavior), {"generator": "behavior", "file": args.behavior}
    if name == "boundary_mixture":
        return generator_from_lhv(boundary_mixture_model()), {"generator": "boundary_mixture"}
    if name == "deterministic":
        if args.outcomes is None:
            raise ConfigError("--generator deterministic needs --outcomes o1 o2 o3 o4")
        model = deterministic_model(*args.outcomes)
        return generator_from_lhv(model), {"generator": "deterministic", "outcomes": args.outcomes}
    if name == "sign_cosine":
        if args.angles is None:
            raise ConfigError("--generator sign_cosine needs --angles a1 a2 b1 b2")
        model = sign_cosine_model(*args.angles, bob_sign=args.bob_sign)
        spec = {"generator": "sign_cosine", "angles": args.angles, "bob_sign": args.bob_sign}
        return generator_from_lhv(model), spec
    if name in ("singlet", "mixed"):
        rho = singlet() if name == "singlet" else maximally_mixed()
        angles = _angles_from_args(args)
        spec = {"generator": name, "angles": list(angles.as_tuple())}
        return generator_from_quantum(rho, angles), spec
    raise ConfigError(f"unknown generator {name!r}")


_STUDY_SPEC_KEYS = {
    "generator", "model", "behavior", "angles", "outcomes", "bob_sign",
    "n", "trials", "threshold", "mode", "seed",
}


def _apply_study_spec(args: argparse.Namespace) -> None:
    """Fill violation-curve arguments from a 'key = value' study spec file."""
    mapping = read_keyvalue(Path(args.spec))
    unknown = set(mapping) - _STUDY_SPEC_KEYS
    if unknown:
        raise ConfigError(f"{args.spec}: unknown study keys {sorted(unknown)}")
    if "generator" in mapping:
        args.generator = mapping["generator"]
    if args.generator is None:
        raise ConfigError(f"{args.spec}: study spec must name a generator")
    for key in ("model", "behavior", "mode"):
        if mapping.get(key):
            setattr(args, key, mapping[key])
    if "angles" in mapping:
        args.angles = [float(v) for v in mapping["angles"].replace(",", " ").split()]
    if "outcomes" in mapping:
        args.outcomes = [int(v) for v in mapping["outcomes"].replace(",", " ").split()]
    if "bob_sign" in mapping:
        args.bob_sign = float(mapping["bob_sign"])
    if "n" in mapping:
        args.n = [int(v) for v in mapping["n"].replace(",", " ").split()]
    for key in ("trials", "seed"):
        if key in mapping:
            setattr(args, key, int(mapping[key]))
    if "threshold" in mapping:
        args.threshold = float(mapping["threshold"])


def cmd_violation_curve(args: argparse.Namespace) -> int:
    if args.spec:
        _apply_study_spec(args)
    for field, label in ((args.generator, "--generator"), (args.n, "--n"),
                         (args.trials, "--trials"), (args.seed, "--seed")):
        if field is None:
            raise ConfigError(f"{label} is required (on the command line or in --spec)")
    generator, generator_spec = _generator_from_args(args)
    n_values = sorted(set(args.n))
    spec = {
        "subcommand": "violation-curve",
        **generator_spec,
        "n_values": n_values,
        "trials": args.trials,
        "threshold": args.threshold,
        "mode": args.mode,
        "seed": args.seed,
    }
    result = significance_curve(
        generator, n_values, args.trials, args.seed, threshold=args.threshold, mode=args.mode
    )
    out = _out_dir(args)
    preamble = {**_csv_preamble(spec), "seed": args.seed, "exact-s": generator.exact_s}
    lines = [f"# {k}: {v}" for k, v in preamble.items()]
    lines.append("n,trials,frequency,ci_lo,ci_hi,mean_s,sd_s,z")
    for row in result.rows:
        lines.append(
            f"{row.n},{row.trials},{row.frequency!r},{row.ci_lo!r},{row.ci_hi!r},"
            f"{row.mean_s!r},{row.sd_s!r},{row.z!r}"
        )
    (out / "curve.csv").write_text("\n".join(lines) + "\n")
    record = _run_record("violation-curve", spec)
    record["exact_s"] = generator.exact_s
    record["final_frequency"] = result.violation_frequency
    record["final_ci95"] = list(result.frequency_ci95)
    _write_json(out / "run.json", record)
    return EXIT_OK


def cmd_weak_bvalues(args: argparse.Namespace) -> int:
    config = PointerConfig(args.g, args.sigma)
    if args.source == "calibrated":
        if args.target_s is None:
            raise ConfigError("--source calibrated needs --target-s")
        run = per_pair_b_values_calibrated(args.target_s, config, args.n, args.seed)
        source_spec: dict[str, Any] = {"source": "calibrated", "target_s": args.target_s}
        reference = args.target_s
    else:
        model = _lhv_model_from_args(args)
        table = sample_counterfactual_table(model, args.n, derive_seed(args.seed, "weak-source"))
        run = per_pair_b_values_lhv(table, config, args.seed)
        source_spec = {"source": "lhv", "model": model.name}
        reference = b_statistic(table)
    spec = {
        "subcommand": "weak-bvalues",
        **source_spec,
        "n": args.n,
        "g": args.g,
        "sigma": args.sigma,
        "seed": args.seed,
    }
    out = _out_dir(args)
    lines = [f"# {k}: {v}" for k, v in {**_csv_preamble(spec), "seed": args.seed}.items()]
    lines.append("trial,rA1,rA2,rB1,rB2,bvalue")
    for k in range(len(run)):
        r = [float(v) for v in run.readings[k]]
        lines.append(f"{k},{r[0]!r},{r[1]!r},{r[2]!r},{r[3]!r},{float(run.b_values[k])!r}")
    (out / "records.csv").write_text("\n".join(lines) + "\n")
    b = run.b_values
    summary = {
        "mean_b": float(b.mean()),
        "sd_b": float(b.std(ddof=1)) if len(b) > 1 else 0.0,
        "exceedance_2": exceedance_fraction(b, 2.0),
        "exceedance_tsirelson": exceedance_fraction(b, TSIRELSON_BOUND),
        "reference_value": reference,
        "source_description": run.description,
        **_run_record("weak-bvalues", spec),
    }
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def _add_seed_out(parser: argparse.ArgumentParser, seed_required: bool = True) -> None:
    parser.add_argument("--seed", type=int, required=seed_required, help="master seed (required; no wall-clock default)")
    parser.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellsim", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate-lhv", help="sample a four-context bundle from an LHV model")
    p.add_argument("--model", help="model specification file")
    p.add_argument("--variant", choices=["deterministic", "sign_cosine", "boundary_mixture"])
    p.add_argument("--outcomes", type=int, nargs=4, metavar=("A1", "A2", "B1", "B2"))
    p.add_argument("--angles", type=float, nargs=4, metavar=("A1", "A2", "B1", "B2"))
    p.add_argument("--bob-sign", type=float, default=-1.0, choices=[-1.0, 1.0])
    p.add_argument("--n", type=int, required=True, help="pairs per context")
    _add_seed_out(p)
    p.set_defaults(func=cmd_simulate_lhv)

    p = sub.add_parser("simulate-quantum", help="sample a bundle from a two-qubit state")
    p.add_argument("--state", choices=["singlet", "mixed"], default="singlet")
    p.add_argument("--rho", help="density matrix file (16 're im' lines)")
    p.add_argument("--angles", type=float, nargs=4, metavar=("A1", "A2", "B1", "B2"),
                   help="setting angles in radians (default: Tsirelson-optimal)")
    p.add_argument("--convention", choices=["spin", "photon"], default="spin")
    p.add_argument("--n", type=int, required=True)
    _add_seed_out(p)
    p.set_defaults(func=cmd_simulate_quantum)

    p = sub.add_parser("feasibility", help="joint-distribution feasibility of a behavior or bundle")
    p.add_argument("--behavior", help="behavior file")
    p.add_argument("--bundle", help="bundle CSV file")
    p.add_argument("--level", choices=["distribution", "counts"],
                   help="default: distribution for --behavior, counts for --bundle")
    p.add_argument("--slack", type=float, default=0.0, help="per-context L1 slack in counts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("violation-curve", help="violation frequency and z-score per sample size")
    p.add_argument("--spec", help="study spec file ('key = value'); its values take precedence over flags")
    p.add_argument("--generator",
                   choices=["boundary_mixture", "sign_cosine", "deterministic", "model",
                            "behavior", "singlet", "mixed"])
    p.add_argument("--model", help="model file for --generator model")
    p.add_argument("--behavior", help="behavior file for --generator behavior")
    p.add_argument("--outcomes", type=int, nargs=4)
    p.add_argument("--angles", type=float, nargs=4)
    p.add_argument("--bob-sign", type=float, default=-1.0, choices=[-1.0, 1.0])
    p.add_argument("--n", type=int, nargs="+", help="per-context sample sizes")
    p.add_argument("--trials", type=int)
    p.add_argument("--threshold", type=float, default=2.0)
    p.add_argument("--mode", choices=["signed", "absolute"], default="signed")
    p.add_argument("--seed", type=int, help="master seed (here or in --spec; no wall-clock default)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_violation_curve)

    p = sub.add_parser("weak-bvalues", help="per-pair pointer B-values and exceedance fractions")
    p.add_argument("--source", choices=["calibrated", "lhv"], required=True)
    p.add_argument("--target-s", type=float, help="symmetry center for the calibrated source")
    p.add_argument("--model", help="LHV model file for --source lhv")
    p.add_argument("--variant", choices=["deterministic", "sign_cosine", "boundary_mixture"])
    p.add_argument("--outcomes", type=int, nargs=4)
    p.add_argument("--angles", type=float, nargs=4)
    p.add_argument("--bob-sign", type=float, default=-1.0, choices=[-1.0, 1.0])
    p.add_argument("--n", type=int, required=True, help="number of pairs")
    p.add_argument("--g", type=float, default=1.0, help="readout gain")
    p.add_argument("--sigma", type=float, default=1.0, help="pointer spread per reading")
    _add_seed_out(p)
    p.set_defaults(func=cmd_weak_bvalues)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"bellsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, BellSimError) as exc:
        print(f"bellsim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"bellsim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
