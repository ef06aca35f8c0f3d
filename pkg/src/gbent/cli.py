"""Command line entry point: analyze, verify, charsum, sbox.

Exit codes: 0 completed (whatever the verdict), 2 input error, 3 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Optional

from . import adic, charsum, crypto
from .errors import HypothesisNotMet, PreconditionError, TheoremViolation
from .gbf import GBF, classify

STRATEGIES = ("binary", "onehot", "affine", "basis", "sparsity", "necessity")


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    hex: Optional[str] = None
    preset: Optional[str] = None
    l: Optional[int] = None
    m: Optional[int] = None
    s: Optional[int] = None
    strategy: Optional[str] = None
    seed: int = 0
    budget: int = 256
    exhaustive: bool = False
    out: Optional[str] = None
    format: str = "json"

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        fields = cls.__dataclass_fields__
        return cls(**{k: v for k, v in vars(ns).items() if k in fields})


class InputError(ValueError):
    pass


def _load_gbf(cfg: RunConfig) -> GBF:
    if cfg.hex:
        s = crypto.SboxFixture.from_hex(cfg.hex)
        return s.as_gbf()
    if cfg.preset:
        return crypto.preset(cfg.preset).as_gbf()
    if not cfg.input:
        raise InputError("one of --input, --hex or --preset is required")
    try:
        return GBF.load(cfg.input)
    except FileNotFoundError as exc:
        raise InputError(f"cannot read {cfg.input}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{cfg.input} is not valid JSON: {exc}") from exc


def _envelope(cfg: RunConfig, body: dict) -> dict:
    return {"command": cfg.command, "seed": cfg.seed, "version": _version(), **body}


def _choose_l(f: GBF, cfg: RunConfig) -> int:
    if cfg.l is not None:
        return cfg.l
    return 2 if f.k % 2 == 0 and f.k >= 4 else f.k


def cmd_analyze(cfg: RunConfig) -> dict:
    f = _load_gbf(cfg)
    rep = classify(f)
    body = {"input": f.to_json(), "report": rep.to_dict()}
    if cfg.l is not None:
        d = adic.decompose(f, cfg.l)
        body["decomposition"] = d.to_json()
        if d.r >= 2:
            body["partition"] = adic.partition_coefficients(d).to_json()
    return _envelope(cfg, body)


def _run_strategy(f: GBF, cfg: RunConfig) -> adic.Verdict:
    st = cfg.strategy
    if st not in STRATEGIES:
        raise InputError(f"unknown strategy {st!r}; choose from {', '.join(STRATEGIES)}")
    if st == "binary":
        return adic.binary_char_oracle(f, budget=cfg.budget, seed=cfg.seed, exhaustive=cfg.exhaustive or None)
    l = _choose_l(f, cfg)
    d = adic.decompose(f, l)
    if st == "onehot":
        return adic.verify_sufficiency_onehot(d, cfg.m if cfg.m is not None else l)
    if st == "affine":
        return adic.verify_plateaued_common_arg(d, cfg.s or 0)
    if st == "basis":
        return adic.verify_basis_test(d)
    if st == "sparsity":
        levels = {1 << (f.n + (cfg.s or 0))}
        return adic.sparsity_check(adic.partition_coefficients(d), levels)
    rep = adic.check_necessity(d, samples=cfg.budget, seed=cfg.seed)
    return adic.Verdict(
        "necessity", adic.PASS if rep.ok else adic.FAIL, rep.betas_checked + rep.F_checked, None,
        rep.violations[0] if rep.violations else None,
        "derived magnitudes match" if rep.ok else "derived magnitudes differ",
        rep.to_dict(),
    )


def cmd_verify(cfg: RunConfig) -> dict:
    f = _load_gbf(cfg)
    if cfg.strategy is None:
        raise InputError("--strategy is required")
    v = _run_strategy(f, cfg)
    body = {"input": f.to_json(), "verdict": v.to_dict()}
    if cfg.strategy != "binary":
        body["l"] = _choose_l(f, cfg)
    return _envelope(cfg, body)


def cmd_charsum(cfg: RunConfig) -> dict:
    if not cfg.input:
        raise InputError("--input is required")
    try:
        ws = charsum.WeightedSupport.load(cfg.input)
    except FileNotFoundError as exc:
        raise InputError(f"cannot read {cfg.input}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{cfg.input} is not valid JSON: {exc}") from exc
    if len(ws) == 0:
        raise InputError("the instance has empty support")
    cv = charsum.fourier(ws)
    lv = charsum.magnitude_levels(cv)
    body: dict = {
        "instance": ws.to_json(),
        "mode": "exact" if ws.exact else "float",
        "magnitudes": [float(m) for m in cv.magnitudes()],
        "levels": {"kind": lv.kind, "nonzero": [_num(v) for v in lv.nonzero], "has_zero": lv.has_zero},
        "common_argument": charsum.common_argument(ws.weights),
    }
    if len(ws) == 2:
        tp = charsum.two_point_analysis(ws.group, ws.points[0], ws.points[1], *ws.weights)
        body["two_point"] = {"r": tp.r, "case": tp.case, "magnitudes": [float(x) for x in tp.magnitudes]}
    u = charsum.uncertainty_check(ws)
    body["uncertainty"] = {
        "support": u.support, "fourier_support": u.fourier_support, "order": u.order,
        "refined_bound": u.refined, "equality": u.equality, "subgroup_form": u.subgroup_form,
    }
    try:
        cert = charsum.certify_overconstrained(ws) if lv.kind == "two-level" else charsum.certify_multilevel(ws)
        body["certificate"] = cert.to_dict()
    except HypothesisNotMet as exc:
        body["hypothesis_not_met"] = {"failed": exc.failed, "detail": exc.detail}
        if exc.report is not None:
            body["diagnostics"] = exc.report.to_dict()
    if lv.kind == "two-level":
        nr = charsum.numerology_check(ws)
        body["numerology"] = {"N": nr.N, "A2": _num(nr.A2), "support_lower_bound": nr.support_lower_bound}
    return _envelope(cfg, body)


def _num(v):
    from .cyclotomic import CycInt

    if isinstance(v, CycInt):
        r = v.as_rational_integer()
        return r if r is not None else {"cyc_k": v.k, "coeffs": list(v.coeffs), "approx": v.to_complex().real}
    return v


def cmd_sbox(cfg: RunConfig) -> dict:
    if cfg.hex:
        s = crypto.SboxFixture.from_hex(cfg.hex)
    elif cfg.preset:
        s = crypto.preset(cfg.preset)
    elif cfg.input:
        try:
            s = crypto.SboxFixture.from_json(json.loads(Path(cfg.input).read_text()))
        except FileNotFoundError as exc:
            raise InputError(f"cannot read {cfg.input}") from exc
    else:
        raise InputError("one of --hex, --preset or --input is required")
    l = cfg.l if cfg.l is not None else 2
    return _envelope(cfg, {"audit": crypto.sbox_audit(s, l=l, seed=cfg.seed, samples=min(cfg.budget, 64))})


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "charsum": cmd_charsum, "sbox": cmd_sbox}


def _text(result: dict) -> str:
    cmd = result["command"]
    head = f"{cmd} (seed {result['seed']}, version {result['version']})"
    if cmd == "analyze":
        rep = result["report"]
        lines = [head, f"n={rep['n']} k={rep['k']} verdict: {rep['verdict']}"]
        for row in rep["spectrum"]:
            lines.append(f"  u={row['u']:>4}  |W|={row['magnitude']:.6f}  |W|^2={row['squared']}")
        lines.append(f"distinct magnitudes: {rep['distinct_magnitudes']}")
        return "\n".join(lines)
    if cmd == "verify":
        v = result["verdict"]
        budget = "n/a" if v["budget"] is None else v["budget"]
        return "\n".join([
            head,
            f"strategy {v['strategy']}: {v['verdict']}",
            f"checks {v['checks']} (budget {budget})",
            f"reason: {v['reason']}",
            f"witness: {v['witness']}",
        ])
    if cmd == "sbox":
        return head + "\n" + crypto.audit_text(result["audit"])
    lines = [head, f"levels: {result['levels']}", f"common argument: {result['common_argument']}"]
    if "certificate" in result:
        c = result["certificate"]
        lines.append(f"certificate: |S'|={len(c['S_bar'])} |H|={len(c['H'])} cosets={len(c['cosets'])}")
    if "hypothesis_not_met" in result:
        lines.append(f"hypothesis not met: {result['hypothesis_not_met']}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gbent", description="Exact analysis of generalized Boolean functions.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("analyze", "Walsh spectrum and classification of a truth table"),
        ("verify", "run one verification strategy"),
        ("charsum", "character-sum structure certificates"),
        ("sbox", "spectral and differential S-box audit"),
    ]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--input", help="JSON input file")
        sp.add_argument("--hex", help="4-bit lookup table as a hex string")
        sp.add_argument("--preset", help="bundled S-box name (present, gift, prince, skinny)")
        sp.add_argument("--l", type=int, help="digit size exponent l (l divides k)")
        sp.add_argument("--m", type=int, help="probe exponent m, 2 <= m <= l")
        sp.add_argument("--s", type=int, help="plateau parameter s")
        sp.add_argument("--strategy", help="|".join(STRATEGIES))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=int, default=256, help="sample budget for randomized checks")
        sp.add_argument("--exhaustive", action="store_true")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "text"), default="json")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig.from_args(ns)
    try:
        if cfg.l is not None and cfg.l < 1:
            raise InputError("--l must be positive")
        result = COMMANDS[cfg.command](cfg)
    except TheoremViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 3
    except (InputError, PreconditionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(result, indent=2, default=_num) if cfg.format == "json" else _text(result)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
