"""Command-line front end.

Every subcommand reads its parameters from ``--config`` (JSON object) and
``--set key=value`` overrides, runs one library pipeline and emits a
:func:`run report <make_report>`.  Exit status: 0 success, 1 validation or
precondition failure (including a failed check), 2 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import __version__
from . import io as qio
from .channel import CQChannel, WordDistribution, all_words, holevo_capacity, holevo_quantity
from .core import POM, eigvalsh, product_basis_pom, trivial_pom, von_neumann_entropy
from .errors import InvariantViolation, ParseError, PreconditionError, QidlabError, ValidationError
from .families import FamilyParams, build_family_greedy, lemma_bound, verify_family
from .idcodes import (
    build_simultaneous_id_code,
    id_error_level,
    proposition_error_bounds,
    size_bound_proposition,
    verify_id_code,
)
from .resolvability import (
    id_separation_check,
    information_density_enumerate,
    mean_one_residuals,
    random_selection_resolve,
    sup_information_rate_estimate,
)
from .rng import PRNG_CONTRACT
from .settings import DEFAULT, Settings, override
from .transmission import build_code_exhaustive, build_code_random_coding, verify_qcode

# ------------------------------------------------------------------ configs

COMMON = {"channel", "tolerance"}
PARAMS: dict[str, set[str]] = {
    "validate-channel": {"channel"},
    "capacity": {"channel", "grid_steps", "max_iter", "starts"},
    "build-tx-code": {
        "channel", "n", "M", "eps", "method", "rate", "gamma", "alpha",
        "input", "pom", "retries", "distinct",
    },
    "build-family": {"M", "a", "eps", "lam", "n_target", "order", "max_candidates", "require_precondition"},
    "build-id-code": {
        "channel", "n", "M", "lam1", "lam2", "a", "eps", "code_file", "order",
        "n_target", "max_candidates", "require_precondition", "capacity_estimate", "delta",
    },
    "verify-id-code": {"channel", "id_code", "full_matrix", "sampled_pairs"},
    "resolvability": {"channel", "n", "input", "inputs", "pom", "ladder", "trials", "deltas"},
    "info-density": {"channel", "n", "input", "inputs", "pom", "deltas"},
    "separation": {"channel", "id_code", "lam1", "lam2", "pom"},
}

RANGES: dict[str, Callable[[Any], bool]] = {
    "n": lambda v: isinstance(v, int) and v >= 1,
    "M": lambda v: isinstance(v, int) and v >= 1,
    "a": lambda v: isinstance(v, int) and v >= 1,
    "trials": lambda v: isinstance(v, int) and v >= 1,
    "eps": lambda v: 0 <= v < 1,
    "lam": lambda v: 0 < v < 1,
    "lam1": lambda v: 0 <= v < 1,
    "lam2": lambda v: 0 <= v < 1,
    "gamma": lambda v: v > 0,
    "alpha": lambda v: 0 < v <= 1,
    "rate": lambda v: v >= 0,
    "delta": lambda v: v >= 0,
    "deltas": lambda v: all(0 < d < 1 for d in v),
    "ladder": lambda v: all(isinstance(m, int) and m >= 1 for m in v),
    "order": lambda v: v in ("lexicographic", "random"),
    "method": lambda v: v in ("exhaustive", "random"),
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    out: str | None = None
    tolerances: dict = field(default_factory=dict)

    def validate(self) -> None:
        allowed = PARAMS[self.command] | COMMON
        unknown = set(self.params) - allowed
        if unknown:
            raise PreconditionError(f"unknown config key(s) for {self.command}: {sorted(unknown)}")
        for k, v in self.params.items():
            check = RANGES.get(k)
            if check is not None and v is not None:
                try:
                    ok = check(v)
                except TypeError:
                    ok = False
                if not ok:
                    raise PreconditionError(f"parameter {k}={v!r} outside its documented range")
        if not 0 <= self.seed < 2**64:
            raise PreconditionError("seed must be an unsigned 64-bit integer")
        if self.threads < 1:
            raise PreconditionError("threads must be >= 1")

    def get(self, key: str, default=None):
        v = self.params.get(key)
        return default if v is None else v

    def need(self, key: str):
        if self.params.get(key) is None:
            raise PreconditionError(f"{self.command} needs parameter {key!r}")
        return self.params[key]

    def settings(self) -> Settings:
        base = DEFAULT.replace(threads=self.threads)
        tol = dict(self.params.get("tolerance") or {})
        tol.update(self.tolerances)
        try:
            return base.replace(**tol) if tol else base
        except KeyError as exc:
            raise PreconditionError(str(exc)) from exc


class StageError(QidlabError):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage
        self.cause = exc


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, tp, exc, tb):
        if exc is not None and isinstance(exc, QidlabError) and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


# ------------------------------------------------------------------ helpers


class Run:
    """Mutable bookkeeping for one command execution."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.inputs: dict[str, str] = {}
        self.artifacts: list[str] = []
        self.status = "ok"

    def channel(self) -> CQChannel:
        path = self.cfg.need("channel")
        ch = qio.load_channel(path)
        self.inputs[path] = qio.file_sha256(path)
        return ch

    def sibling(self, suffix: str) -> str | None:
        if not self.cfg.out:
            return None
        stem = self.cfg.out[:-5] if self.cfg.out.endswith(".json") else self.cfg.out
        return f"{stem}.{suffix}"

    def write_artifact(self, suffix: str, doc: Any) -> str | None:
        path = self.sibling(suffix)
        if path:
            qio.write_json(path, doc)
            self.artifacts.append(os.path.basename(path))
        return path


def _input_distribution(cfg: ExperimentConfig, ch: CQChannel, n: int, spec=None) -> WordDistribution:
    spec = cfg.get("input", "uniform") if spec is None else spec
    if spec == "uniform":
        return WordDistribution.uniform(all_words(ch.alphabet_size, n))
    if isinstance(spec, dict):
        return qio.distribution_from_json(spec)
    if isinstance(spec, list):
        masses = [Fraction(m) if isinstance(m, str) else m for m in spec]
        return WordDistribution.product(masses, n)
    raise PreconditionError(f"input must be 'uniform', a list of letter masses or a word distribution, got {spec!r}")


def _pom(run: Run, ch: CQChannel, n: int) -> POM:
    spec = run.cfg.get("pom", "basis")
    if spec == "basis":
        return product_basis_pom(ch.dim, n)
    if spec == "trivial":
        return trivial_pom(ch.dim**n)
    E = qio.pom_from_json(qio.read_json(spec), spec)
    run.inputs[spec] = qio.file_sha256(spec)
    return E


# ----------------------------------------------------------------- commands


def cmd_validate_channel(run: Run) -> dict:
    ch = run.channel()
    signals = []
    for k, s in enumerate(ch.signals, start=1):
        ev = eigvalsh(s.matrix)
        signals.append(
            {
                "letter": k,
                "trace": float(np.trace(s.matrix).real),
                "min_eigenvalue": float(ev[0]),
                "purity": float(np.einsum("ij,ji->", s.matrix, s.matrix).real),
                "entropy": von_neumann_entropy(s),
            }
        )
    return {"alphabet_size": ch.alphabet_size, "dim": ch.dim, "signals": signals}


def cmd_capacity(run: Run) -> dict:
    ch = run.channel()
    res = holevo_capacity(
        ch,
        grid_steps=run.cfg.get("grid_steps"),
        max_iter=run.cfg.get("max_iter"),
        starts=run.cfg.get("starts", 4),
    )
    payload = {
        "capacity": res.value,
        "distribution": list(res.distribution),
        "grid_steps": res.grid_steps,
        "grid_mesh": 1.0 / res.grid_steps,
        "grid_points": res.grid_points,
        "grid_value": res.grid_value,
        "refinement_iterations": res.iterations,
        "starts": res.starts,
    }
    if ch.alphabet_size == 2:
        p = np.linspace(0.0, 1.0, 201)
        chi = [holevo_quantity(ch, [1 - x, x]) for x in p]
        path = run.sibling("profile.png")
        if path:
            from .plotting import plot_capacity_profile

            plot_capacity_profile(p, chi, path, res.value)
            run.artifacts.append(os.path.basename(path))
    return payload


def cmd_build_tx_code(run: Run) -> dict:
    cfg = run.cfg
    ch = run.channel()
    n = cfg.need("n")
    method = cfg.get("method", "exhaustive")
    if method == "exhaustive":
        M, eps = cfg.need("M"), cfg.need("eps")
        code = build_code_exhaustive(ch, n, M, eps)
        ver = verify_qcode(ch, code)
        payload = {"method": method, "n": n, "M": M, "eps_target": eps}
    else:
        E = _pom(run, ch, n)
        P = _input_distribution(cfg, ch, n)
        res = build_code_random_coding(
            ch, n, E, P,
            rate=cfg.need("rate"), gamma=cfg.need("gamma"), alpha=cfg.need("alpha"),
            seed=cfg.seed, retries=cfg.get("retries"), distinct=cfg.get("distinct", True),
        )
        code = res.code
        ver = verify_qcode(ch, code)
        if abs(ver.eps_hat - res.eps_hat) > 1e-9:
            raise InvariantViolation(f"construction bookkeeping {res.eps_hat} != verified {ver.eps_hat}")
        payload = {
            "method": method,
            "n": n,
            "M": res.M,
            "threshold": res.threshold,
            "good_words": len(res.good_words),
            "good_mass": res.good_mass,
            "attempt_eps_hat": [a.eps_hat for a in res.attempts],
            "best_attempt": res.best_attempt,
        }
    payload.update(
        eps_hat=ver.eps_hat,
        successes=list(ver.successes),
        codewords=[list(c) for c in code.codewords],
        has_fail=code.has_fail,
    )
    run.write_artifact("code.json", qio.code_to_json(code, {"builder": method, "seed": cfg.seed}))
    return payload


def _family_params(cfg: ExperimentConfig, M: int, lam: float) -> FamilyParams:
    if cfg.get("a") is not None:
        return FamilyParams.create(M, cfg.get("a"), lam, cfg.get("eps"))
    return FamilyParams.from_eps(M, cfg.need("eps"), lam)


def _family_payload(family, params) -> dict:
    bound = lemma_bound(params)
    check = verify_family(family)
    if not check.ok:
        raise InvariantViolation("greedy family failed verification")
    return {
        "M": params.M,
        "a": params.a,
        "lam": params.lam,
        "eps": params.eps,
        "intersection_cap": params.cap,
        "precondition_value": params.precondition_value,
        "precondition_ok": params.precondition_ok,
        "guaranteed_size": bound.n_guaranteed,
        "conflict_count": bound.S,
        "counting_bound": bound.counting_bound,
        "N": family.N,
        "certified_maximal": family.certified_maximal,
        "target_reached": family.target_reached,
        "candidates_scanned": family.candidates_scanned,
        "max_intersection": check.max_intersection,
    }


def cmd_build_family(run: Run) -> dict:
    cfg = run.cfg
    params = _family_params(cfg, cfg.need("M"), cfg.need("lam"))
    if cfg.get("require_precondition", False) and not params.precondition_ok:
        raise PreconditionError(f"lam*log2(1/eps - 1) = {params.precondition_value:.6g} is not > 2")
    family = build_family_greedy(
        params, cfg.get("n_target"), cfg.get("order", "lexicographic"), cfg.seed, cfg.get("max_candidates")
    )
    payload = _family_payload(family, params)
    payload["sets"] = [list(s) for s in family.sets]
    run.write_artifact("family.json", qio.family_to_json(family, {"seed": cfg.seed}))
    return payload


def cmd_build_id_code(run: Run) -> dict:
    cfg = run.cfg
    lam1, lam2 = cfg.need("lam1"), cfg.need("lam2")
    lam = id_error_level(lam1, lam2)
    with _Stage("load_channel"):
        ch = run.channel()
    with _Stage("transmission_code"):
        if cfg.get("code_file"):
            path = cfg.get("code_file")
            code = qio.code_from_json(qio.read_json(path), path)
            run.inputs[path] = qio.file_sha256(path)
        else:
            code = build_code_exhaustive(ch, cfg.need("n"), cfg.need("M"), lam)
        tx = verify_qcode(ch, code)
        if tx.eps_hat > lam + 1e-9:
            raise PreconditionError(f"transmission code error {tx.eps_hat} exceeds lam = {lam}")
    with _Stage("family_params"):
        params = _family_params(cfg, code.M, lam)
        if cfg.get("require_precondition", False) and not params.precondition_ok:
            raise PreconditionError(f"lam*log2(1/eps - 1) = {params.precondition_value:.6g} is not > 2")
    with _Stage("build_family"):
        family = build_family_greedy(
            params, cfg.get("n_target"), cfg.get("order", "lexicographic"), cfg.seed, cfg.get("max_candidates")
        )
        fam = _family_payload(family, params)
    with _Stage("build_id_code"):
        idc = build_simultaneous_id_code(code, family)
    with _Stage("verify_id_code"):
        ver = verify_id_code(ch, idc)
    b1, b2 = proposition_error_bounds(lam)
    tol = 1e-9
    if ver.lam1_hat > b1 + tol or ver.lam2_hat > b2 + tol:
        raise InvariantViolation(f"ID code errors ({ver.lam1_hat}, {ver.lam2_hat}) exceed ({b1}, {b2})")
    payload = {
        "n": code.n,
        "M": code.M,
        "lam": lam,
        "tx_eps_hat": tx.eps_hat,
        "family": fam,
        "N": idc.N,
        "lam1_hat": ver.lam1_hat,
        "lam2_hat": ver.lam2_hat,
        "worst_pair": list(ver.worst_pair) if ver.worst_pair else None,
        "lam1_bound": b1,
        "lam2_bound": b2,
        "N_exceeds_M": idc.N > code.M,
    }
    with _Stage("size_bound"):
        cap = cfg.get("capacity_estimate")
        if cap is None:
            cap = holevo_capacity(ch).value
        sb = size_bound_proposition(code.n, cap, cfg.get("delta", 0.0), params.eps)
    payload["capacity_estimate"] = cap
    payload["size_bound_exponent"] = sb.exponent
    payload["size_bound_trivial"] = sb.trivial
    code_path = run.write_artifact("code.json", qio.code_to_json(code, {"builder": "exhaustive"}))
    fam_path = run.write_artifact("family.json", qio.family_to_json(family, {"seed": cfg.seed}))
    if code_path and fam_path:
        run.write_artifact(
            "idcode.json",
            qio.idcode_to_json(
                idc,
                refs={"code_file": os.path.basename(code_path), "family_file": os.path.basename(fam_path)},
                metadata={"lam1_hat": ver.lam1_hat, "lam2_hat": ver.lam2_hat, "N": idc.N},
            ),
        )
    return payload


def _load_idcode(run: Run):
    path = run.cfg.need("id_code")
    code, hashes = qio.load_idcode(path)
    run.inputs.update(hashes)
    return code


def cmd_verify_id_code(run: Run) -> dict:
    ch = run.channel()
    code = _load_idcode(run)
    ver = verify_id_code(
        ch, code, full_matrix=run.cfg.get("full_matrix", False),
        sampled_pairs=run.cfg.get("sampled_pairs"), seed=run.cfg.seed,
    )
    payload = {
        "N": code.N,
        "lam1_hat": ver.lam1_hat,
        "lam2_hat": ver.lam2_hat,
        "worst_pair": list(ver.worst_pair) if ver.worst_pair else None,
        "sampled": ver.sampled,
        "pairs_checked": ver.pairs_checked,
    }
    if ver.matrix is not None:
        payload["matrix"] = ver.matrix.tolist()
    return payload


def _density_block(run: Run, ch: CQChannel, n: int, P: WordDistribution, E: POM) -> tuple[dict, list]:
    samples = information_density_enumerate(ch, P, E)
    deltas = run.cfg.get("deltas", [0.05])
    estimates = {str(d): sup_information_rate_estimate(samples, d) for d in deltas}
    residuals = mean_one_residuals(samples, n)
    dens = [s.density for s in samples]
    block = {
        "samples": len(samples),
        "sup_rate_estimates": estimates,
        "mean_one_max_residual": max(abs(r) for r in residuals.values()),
        "density_min": min(dens),
        "density_max": max(dens),
        "density_mean": math.fsum(s.density * s.mass for s in samples),
    }
    if block["mean_one_max_residual"] > 1e-8:
        raise InvariantViolation(f"mean-one identity off by {block['mean_one_max_residual']}")
    sweep = run.cfg.get("inputs")
    if sweep:
        # worst case over a user-supplied list of inputs, per tail mass
        rows = []
        for spec in sweep:
            Pk = _input_distribution(run.cfg, ch, n, spec)
            sk = information_density_enumerate(ch, Pk, E)
            rows.append({str(d): sup_information_rate_estimate(sk, d) for d in deltas})
        block["input_sweep"] = rows
        block["sweep_max"] = {str(d): max(r[str(d)] for r in rows) for d in deltas}
    return block, samples


def cmd_info_density(run: Run) -> dict:
    cfg = run.cfg
    ch = run.channel()
    n = cfg.need("n")
    P = _input_distribution(cfg, ch, n)
    E = _pom(run, ch, n)
    block, samples = _density_block(run, ch, n, P, E)
    payload = {"n": n, "outcomes": len(E), "support": len(P), **block}
    csv_path = run.sibling("densities.csv")
    if csv_path:
        qio.write_density_csv(csv_path, samples)
        run.artifacts.append(os.path.basename(csv_path))
        from .plotting import plot_density_histogram

        png = run.sibling("densities.png")
        quantiles = {float(k): v for k, v in block["sup_rate_estimates"].items()}
        plot_density_histogram([s.density for s in samples], [s.mass for s in samples], png, quantiles)
        run.artifacts.append(os.path.basename(png))
    return payload


def cmd_resolvability(run: Run) -> dict:
    cfg = run.cfg
    ch = run.channel()
    n = cfg.need("n")
    P = _input_distribution(cfg, ch, n)
    E = _pom(run, ch, n)
    block, _ = _density_block(run, ch, n, P, E)
    trials = cfg.get("trials", 32)
    ladder = []
    for M in cfg.get("ladder", [16, 64, 256, 1024, 4096]):
        rep = random_selection_resolve(ch, P, E, M, trials, cfg.seed)
        ladder.append(
            {
                "M": M,
                "rate": rep.rate,
                "mean": rep.mean,
                "min": rep.min,
                "max": rep.max,
                "std": rep.std,
                "stderr": rep.stderr,
                "max_reduced_resolution": max(rep.resolutions),
                "distances": list(rep.distances),
            }
        )
    means = [row["mean"] for row in ladder]
    payload = {
        "n": n,
        "trials": trials,
        "prng": PRNG_CONTRACT,
        "information_spectrum": block,
        "ladder": ladder,
        "monotone_nonincreasing": all(b <= a for a, b in zip(means, means[1:])),
    }
    csv_path = run.sibling("ladder.csv")
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write("M,rate,mean,stderr,min,max\n")
            for row in ladder:
                fh.write(",".join("%.17g" % row[k] for k in ("M", "rate", "mean", "stderr", "min", "max")) + "\n")
        run.artifacts.append(os.path.basename(csv_path))
        from .plotting import plot_resolvability_ladder

        png = run.sibling("ladder.png")
        plot_resolvability_ladder(ladder, png)
        run.artifacts.append(os.path.basename(png))
    return payload


def cmd_separation(run: Run) -> dict:
    cfg = run.cfg
    ch = run.channel()
    code = _load_idcode(run)
    pom_spec = cfg.get("pom", "base")
    if pom_spec == "base":
        pom = None
    elif pom_spec == "trivial":
        pom = "trivial"
    else:
        pom = qio.pom_from_json(qio.read_json(pom_spec), pom_spec)
        run.inputs[pom_spec] = qio.file_sha256(pom_spec)
    res = id_separation_check(ch, code, cfg.need("lam1"), cfg.need("lam2"), pom)
    if not res.ok:
        run.status = "failed"
    return {
        "pom": pom_spec,
        "min_distance": res.min_distance,
        "threshold": res.threshold,
        "margin": res.margin,
        "ok": res.ok,
        "worst_pair": list(res.worst_pair) if res.worst_pair else None,
        "lam1_hat": res.lam1_hat,
        "lam2_hat": res.lam2_hat,
    }


COMMANDS: dict[str, Callable[[Run], dict]] = {
    "validate-channel": cmd_validate_channel,
    "capacity": cmd_capacity,
    "build-tx-code": cmd_build_tx_code,
    "build-family": cmd_build_family,
    "build-id-code": cmd_build_id_code,
    "verify-id-code": cmd_verify_id_code,
    "resolvability": cmd_resolvability,
    "info-density": cmd_info_density,
    "separation": cmd_separation,
}


# -------------------------------------------------------------------- runner


def make_report(run: Run, payload: dict | None, settings: Settings, wall: float, error: Exception | None = None) -> dict:
    report = {
        "command": run.cfg.command,
        "config": run.cfg.params,
        "seed": run.cfg.seed,
        "threads": run.cfg.threads,
        "tool_version": __version__,
        "prng": PRNG_CONTRACT,
        "settings": settings.as_dict(),
        "settings_hash": settings.digest(),
        "inputs": dict(sorted(run.inputs.items())),
        "artifacts": run.artifacts,
        "wall_time": wall,
        "status": run.status if error is None else "error",
        "payload": payload,
        "payload_sha256": qio.payload_digest(payload) if payload is not None else None,
    }
    if error is not None:
        report["error"] = {
            "type": type(getattr(error, "cause", error)).__name__,
            "stage": getattr(error, "stage", None),
            "message": str(error),
        }
    return report


def execute(cfg: ExperimentConfig) -> tuple[int, dict]:
    """Run one configured command; returns ``(exit status, report)``."""
    run = Run(cfg)
    start = time.perf_counter()
    settings = DEFAULT
    try:
        cfg.validate()
        settings = cfg.settings()
        with override(settings):
            payload = COMMANDS[cfg.command](run)
    except QidlabError as exc:
        root = getattr(exc, "cause", exc)
        code = 2 if isinstance(root, InvariantViolation) else 1
        return code, make_report(run, None, settings, time.perf_counter() - start, exc)
    report = make_report(run, payload, settings, time.perf_counter() - start)
    return (0 if run.status == "ok" else 1), report


def _parse_assignment(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def build_parser() -> argparse.ArgumentParser:
    # flags are accepted before or after the subcommand; SUPPRESS keeps the
    # subcommand parser from overwriting values given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with command parameters")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed (default 0)")
    common.add_argument("--out", help="report path; artifacts and figures are written next to it")
    common.add_argument("--threads", type=int, help="worker cap (results do not depend on it)")
    common.add_argument(
        "--tolerance", action="append", type=_parse_assignment, metavar="NAME=VALUE",
        help="override a settings field, e.g. validation_tol=1e-10",
    )
    common.add_argument(
        "--set", dest="overrides", action="append", type=_parse_assignment, metavar="KEY=VALUE",
        help="override a config parameter (value parsed as JSON when possible)",
    )
    common.add_argument("--channel", help="channel JSON file")

    parser = argparse.ArgumentParser(prog="qidlab", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "validate-channel":
            p.add_argument("path", nargs="?", help="channel JSON file")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    opt = vars(args)
    params: dict = {}
    seed, threads, out = 0, 1, None
    if opt.get("config"):
        doc = qio.read_json(opt["config"])
        if not isinstance(doc, dict):
            raise ParseError(f"{opt['config']}: config must be a JSON object")
        doc = dict(doc)
        seed = doc.pop("seed", seed)
        threads = doc.pop("threads", threads)
        out = doc.pop("out", out)
        doc.pop("command", None)
        params.update(doc)
    params.update(dict(opt.get("overrides", [])))
    if opt.get("channel"):
        params["channel"] = opt["channel"]
    if opt.get("path"):
        params["channel"] = opt["path"]
    return ExperimentConfig(
        command=args.command,
        params=params,
        seed=opt.get("seed", seed),
        threads=opt.get("threads", threads),
        out=opt.get("out", out),
        tolerances=dict(opt.get("tolerance", [])),
    )


def _summary(report: dict) -> str:
    lines = [f"command\t{report['command']}", f"status\t{report['status']}"]
    payload = report.get("payload") or {}
    for k, v in payload.items():
        if isinstance(v, (int, float, str, bool)) or v is None:
            lines.append(f"{k}\t{v}")
    if "error" in report:
        lines.append(f"error\t{report['error']['message']}")
    lines.append(f"payload_sha256\t{report['payload_sha256']}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (QidlabError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    status, report = execute(cfg)
    if cfg.out:
        qio.write_json(cfg.out, report)
    print(_summary(report))
    if "error" in report:
        print(f"error: {report['error']['message']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
