"""Command line entry point ``qproc``.

Exit codes: 0 success, 1 validation or contract failure, 2 usage or parse error.

CSV outputs (comma separated, header row, ``\\n`` line ends):
  eigenvalues.csv     n,index,value            (toeplitz-eigs, figure 2)
  entropy_curve.csv   n,H_n,increment,integral_target   (fermion-entropy)
  figure1.csv         theta,T                  (figure 1)
  szego.csv           n,average,increment,target        (szego-demo)
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import QprocError
from .serialize import decode, decode_real, dumps

SUBCOMMANDS = (
    "validate",
    "markov",
    "hmm-entropy",
    "davies-check",
    "fcs-su2",
    "fermion-entropy",
    "szego-demo",
    "toeplitz-eigs",
    "report",
    "figure",
)


class UsageError(Exception):
    """Bad input file or configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    subcommand: str = ""
    input: str | None = None
    output: str | None = None
    seed: int = 0
    tol: float | None = None
    n: int | None = None
    nmax: int | None = None
    samples: int | None = None
    burn_in: int | None = None
    chains: int | None = None
    mode: str | None = None
    alpha: float | None = None
    mu: float | None = None
    nu: float | None = None
    eta: float | None = None
    points: int | None = None
    figure: int | None = None
    sdp: bool = False

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - names)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**obj)


# -- io helpers ----------------------------------------------------------------------------


def load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def emit(text: str, output: str | None, default_name: str | None = None):
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    if path.is_dir() and default_name:
        path = path / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def emit_json(obj, output=None, default_name=None):
    emit(dumps(obj) + "\n", output, default_name)


def _require_input(cfg: RunConfig):
    if not cfg.input:
        raise UsageError(f"{cfg.subcommand} needs --input")
    return load_json(cfg.input)


# -- spec parsing --------------------------------------------------------------------------


def _only(obj, allowed, kind):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise UsageError(f"unknown keys in {kind} spec: {', '.join(unknown)}")


def detect_kind(obj) -> str:
    if not isinstance(obj, dict):
        raise UsageError("spec must be a JSON object")
    keys = set(obj)
    if "E" in keys:
        return "hmm"
    if {"T", "D"} <= keys:
        return "davies"
    if "T" in keys:
        return "markov"
    if {"A", "B"} <= keys:
        return "fermion"
    if {"alpha", "mu"} <= keys:
        return "su2"
    raise UsageError(f"cannot tell the spec kind from keys {sorted(keys)}")


def parse_hmm(obj):
    from .hmm import HmmSpec

    _only(obj, ("E", "mu", "seed"), "hmm")
    E = obj["E"]
    if isinstance(E, dict):
        try:
            order = sorted(E, key=int)
        except ValueError:
            raise UsageError("keys of E must be symbol indices") from None
        if [int(k) for k in order] != list(range(len(order))):
            raise UsageError("keys of E must be 0..d_obs-1")
        mats = [decode_real(E[k], name=f"E[{k}]") for k in order]
    else:
        mats = list(decode_real(E, ndim=3, name="E"))
    mu = decode_real(obj["mu"], ndim=1, name="mu") if "mu" in obj else None
    return HmmSpec(np.array(mats), mu=mu), obj.get("seed")


def parse_markov(obj):
    _only(obj, ("T", "mu"), "markov")
    T = decode_real(obj["T"], name="T")
    mu = decode_real(obj["mu"], ndim=1, name="mu") if "mu" in obj else None
    return T, mu


def parse_davies(obj):
    _only(obj, ("T", "D", "mu"), "davies")
    T = decode_real(obj["T"], name="T")
    D = decode_real(obj["D"], name="D")
    mu = decode_real(obj["mu"], ndim=1, name="mu") if "mu" in obj else None
    return T, D, mu


def parse_su2(obj):
    from .su2 import Su2Params

    _only(obj, ("alpha", "mu", "nu", "eta"), "su2")
    return Su2Params(float(obj["alpha"]), float(obj["mu"]), float(obj.get("eta", 0.0)),
                     None if obj.get("nu") is None else float(obj["nu"]))


# -- validate ------------------------------------------------------------------------------


def _validate(obj, tol) -> dict:
    kind = detect_kind(obj)
    failures: list[str] = []
    details: dict = {}
    try:
        if kind == "markov":
            from .classical import check_stochastic, invariant_measure

            T, mu = parse_markov(obj)
            check_stochastic(T)
            if mu is None:
                mu = invariant_measure(T)
            dev = float(np.abs(mu @ T - mu).sum())
            details["stationarity_deviation"] = dev
            if dev > (tol or 1e-12) * T.shape[0]:
                failures.append("stationarity: mu T != mu")
        elif kind == "hmm":
            spec, _ = parse_hmm(obj)
            details.update(d_obs=spec.d_obs, d_hidden=spec.d_hidden)
        elif kind == "davies":
            from .channels import davies_validate

            T, D, mu = parse_davies(obj)
            rep = davies_validate(T, D, mu, **({"tol": tol} if tol else {}))
            details = rep.as_dict()
            lim = tol or 1e-10
            if rep.detailed_balance_residual > lim:
                failures.append("detailed_balance")
            if rep.triangle_residual > lim:
                failures.append("triangle")
            if not rep.davies_cp:
                failures.append("davies_matrix_psd")
            if not rep.choi_cp:
                failures.append("choi_psd")
        elif kind == "fermion":
            from .fermion import spec_from_dict

            spec = spec_from_dict(obj)
            details["Q"] = spec.Q
        elif kind == "su2":
            from .su2 import region_check

            rc = region_check(parse_su2(obj))
            details = rc._asdict()
            if rc.linear_slack < -1e-12:
                failures.append("linear")
            if rc.quadratic_slack < -1e-12:
                failures.append("quadratic")
            if not rc.choi_psd:
                failures.append("choi_psd")
    except QprocError as exc:
        failures.append(f"{type(exc).__name__}: {exc}")
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed {kind} spec: {exc}") from None
    return {"kind": kind, "ok": not failures, "failures": failures, "details": details}


def cmd_validate(cfg: RunConfig) -> int:
    out = _validate(_require_input(cfg), cfg.tol)
    emit_json(out, cfg.output)
    return 0 if out["ok"] else 1


# -- pipelines -----------------------------------------------------------------------------


def cmd_markov(cfg):
    from .classical import block_entropies, entropy_rate_classical, invariant_measure, markov_joint

    T, mu = parse_markov(_require_input(cfg))
    if mu is None:
        mu = invariant_measure(T)
    rate = entropy_rate_classical(T, mu)
    n = cfg.n if cfg.n is not None else 4
    H = block_entropies(markov_joint(T, mu, n))
    emit_json(
        {"mu": mu, "h": rate.h, "h_min": rate.h_min, "block_entropies": H, "increments": np.diff(H)},
        cfg.output,
    )
    return 0


def cmd_hmm_entropy(cfg):
    from .hmm import blackwell_entropy, hmm_increments

    spec, file_seed = parse_hmm(_require_input(cfg))
    seed = cfg.seed if cfg.seed or file_seed is None else int(file_seed)
    res = blackwell_entropy(
        spec,
        samples=cfg.samples or 100_000,
        burn_in=cfg.burn_in if cfg.burn_in is not None else 1_000,
        seed=seed,
        chains=cfg.chains or 1,
    )
    n = cfg.n if cfg.n is not None else min(8, max(1, int(20 / max(np.log2(spec.d_obs), 1))))
    emit_json(
        {
            "h": res.h,
            "std_err": res.std_err,
            "samples": res.samples,
            "restarts": res.restarts,
            "increments": hmm_increments(spec, n),
            "seed": seed,
        },
        cfg.output,
    )
    return 0


def cmd_davies_check(cfg):
    from .channels import davies_validate

    T, D, mu = parse_davies(_require_input(cfg))
    rep = davies_validate(T, D, mu, **({"tol": cfg.tol} if cfg.tol else {}))
    emit_json(rep.as_dict(), cfg.output)
    return 0 if rep.agree else 1


def cmd_fcs_su2(cfg):
    from .fcs import fcs_entropy_sequence
    from .su2 import Su2Params, optimize_singlet, region_check, singlet_expectation, su2_map_build

    if cfg.mode and cfg.mode != "point":
        r = optimize_singlet(cfg.mode, seed=cfg.seed)
        emit_json({"mode": cfg.mode, "value": r.value, "argmax": r.argmax, "region_check": r.region_check}, cfg.output)
        return 0
    if cfg.alpha is None or cfg.mu is None:
        raise UsageError("fcs-su2 needs --mode or both --alpha and --mu")
    p = Su2Params(cfg.alpha, cfg.mu, cfg.eta or 0.0, cfg.nu)
    rc = region_check(p)
    out = {"mode": "point", "argmax": {"alpha": p.alpha, "mu": p.mu, "nu": p.nu_eff, "eta": p.eta},
           "region_check": rc._asdict()}
    spec = su2_map_build(p)
    out["value"] = singlet_expectation(spec)
    if cfg.nmax:
        seq = fcs_entropy_sequence(spec, cfg.nmax)
        out["entropies"] = seq.entropies
        out["increments"] = seq.increments
    emit_json(out, cfg.output)
    return 0


def _fermion_spec(cfg):
    from .fermion import sample_specs, spec_from_dict

    if cfg.input:
        obj = _require_input(cfg)
        if not isinstance(obj, dict):
            raise UsageError("fermion spec must be a JSON object")
        return spec_from_dict(obj)
    specs = sample_specs()
    name = cfg.mode or "scalar"
    if name not in specs:
        raise UsageError(f"unknown sample spec {name!r}; choose from {sorted(specs)}")
    return specs[name]


def cmd_fermion_entropy(cfg):
    from .fermion import entropy_rate_integral, entropy_rate_truncation

    spec = _fermion_spec(cfg)
    nmax = cfg.nmax or cfg.n or 50
    target = entropy_rate_integral(spec, cfg.points).value
    tr = entropy_rate_truncation(spec, nmax)
    rows = [(int(n), h, inc, target) for n, h, inc in zip(tr.ns, tr.H, tr.increments)]
    emit(csv_text(["n", "H_n", "increment", "integral_target"], rows), cfg.output, "entropy_curve.csv")
    return 0


def _toeplitz_symbol(cfg):
    from .toeplitz import fermion_symbol, figure1_symbol

    if cfg.input or (cfg.mode and cfg.mode != "figure1"):
        return fermion_symbol(_fermion_spec(cfg))
    return figure1_symbol()


def cmd_szego_demo(cfg):
    from .toeplitz import binary_entropy_fn, szego_check

    f = {"linear": lambda x: x, "square": lambda x: x**2, "entropy": binary_entropy_fn}
    which = "entropy" if (cfg.input or (cfg.mode and cfg.mode not in ("figure1",))) else "square"
    T = _toeplitz_symbol(cfg)
    nmax = cfg.nmax or cfg.n or 64
    ns = sorted({1 << k for k in range(0, int(np.log2(nmax)) + 1)} | {nmax})
    rows = szego_check(T, f[which], ns)
    emit(csv_text(["n", "average", "increment", "target"], [tuple(r) for r in rows]), cfg.output, "szego.csv")
    return 0


def cmd_toeplitz_eigs(cfg):
    from .toeplitz import toeplitz_eigs

    n = cfg.n or 100
    ev = toeplitz_eigs(_toeplitz_symbol(cfg), n)
    emit(csv_text(["n", "index", "value"], [(n, i, float(v)) for i, v in enumerate(ev)]), cfg.output,
         "eigenvalues.csv")
    return 0


def figure_csv(which: int) -> tuple[str, str]:
    from .toeplitz import figure1_rows, figure2_rows

    if which == 1:
        return "figure1.csv", csv_text(["theta", "T"], figure1_rows())
    if which == 2:
        return "figure2.csv", csv_text(["n", "index", "value"], figure2_rows())
    raise UsageError(f"figure must be 1 or 2, got {which}")


def cmd_figure(cfg):
    name, text = figure_csv(cfg.figure or cfg.n or 1)
    emit(text, cfg.output, name)
    return 0


def cmd_report(cfg):
    from .report import full_report

    rep = full_report(seed=cfg.seed, include_sdp=cfg.sdp)
    if cfg.output:
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(rep) + "\n")
        for k in (1, 2):
            name, text = figure_csv(k)
            (out / name).write_text(text)
    else:
        sys.stdout.write(dumps(rep) + "\n")
    return 0


HANDLERS = {
    "validate": cmd_validate,
    "markov": cmd_markov,
    "hmm-entropy": cmd_hmm_entropy,
    "davies-check": cmd_davies_check,
    "fcs-su2": cmd_fcs_su2,
    "fermion-entropy": cmd_fermion_entropy,
    "szego-demo": cmd_szego_demo,
    "toeplitz-eigs": cmd_toeplitz_eigs,
    "report": cmd_report,
    "figure": cmd_figure,
}


# -- argument parsing ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qproc",
        description="Entropy rates and positivity checks for stationary classical and quantum processes.",
        epilog=__doc__.split("\n\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", required=True)
    helps = {
        "validate": "check a JSON spec (Markov, HMM, Davies, fermion or SU(2)) and list failed invariants",
        "markov": "entropy rate and block entropies of a stationary Markov chain",
        "hmm-entropy": "Blackwell Monte Carlo entropy rate and exact increments of an HMM",
        "davies-check": "Davies map validation report",
        "fcs-su2": "singlet-fraction optimum (--mode) or one SU(2) process (--alpha/--mu/...)",
        "fermion-entropy": "entropy_curve.csv for a fermionic process (--input or --mode sample name)",
        "szego-demo": "szego.csv: finite-section averages and increments against the angular mean",
        "toeplitz-eigs": "eigenvalues.csv of the n-th principal section",
        "report": "all reference numbers as JSON; with --output also writes figure1.csv and figure2.csv",
        "figure": "figure1.csv (theta, T) or figure2.csv (n, index, value)",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        p.add_argument("--input", help="JSON spec file")
        p.add_argument("--output", help="output file or directory (default stdout)")
        p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--nmax", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--burn-in", dest="burn_in", type=int)
        p.add_argument("--chains", type=int)
        p.add_argument("--mode")
        p.add_argument("--points", type=int, help="fixed quadrature points")
        if name == "fcs-su2":
            for par in ("alpha", "mu", "nu", "eta"):
                p.add_argument(f"--{par}", type=float)
        if name == "figure":
            p.add_argument("figure", type=int, choices=(1, 2), nargs="?")
        if name == "report":
            p.add_argument("--sdp", action="store_true", default=None,
                           help="add the semidefinite damping comparison (needs cvxpy)")
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if getattr(args, "config", None):
        base = load_json(args.config)
        if not isinstance(base, dict):
            raise UsageError("config must be a JSON object")
        base.pop("subcommand", None)
    cfg = RunConfig.from_dict(base)
    cfg.subcommand = args.subcommand
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and f.name != "subcommand":
            setattr(cfg, f.name, v)
    if cfg.seed is None:
        cfg.seed = 0
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return HANDLERS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"qproc {args.subcommand}: {exc}", file=sys.stderr)
        return 2
    except (QprocError, ValueError, ArithmeticError) as exc:
        print(f"qproc {args.subcommand}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
