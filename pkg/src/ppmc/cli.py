"""Command-line entry point: ``ppmc {verify,table,sum,selftest}``.

Exit status 0 means the results agree with the theorem (ppmc iff every k is 1)
or, for ``selftest``, that every invariant held. Status 1 is disagreement or a
failed check, 2 a usage error, 3 a write failure.
"""

from __future__ import annotations

import argparse
import contextlib
import contextvars
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .geometry import INNER_PRODUCT_LABEL, EmbeddingSpec, PpmcReport, expected_verdict, ppmc_verdict, term_record
from .oracle import OracleConfig, direct_sum_residuals, norm, oracle_checks, random_frame
from .reduced import injected_fault

EXACT_K_CEILING = 12
NUMERIC_K_CEILING = 6
NUMERIC_N_CEILING = 3
OUTPUT_DIR_ENV = "PPMC_OUTPUT_DIR"
TABLE_HEADER = ["k", "c11", "c00", "c20", "nabla21", "nabla10", "residual_zero"]

EXIT_OK, EXIT_DISAGREE, EXIT_USAGE, EXIT_WRITE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 1
    k_min: int = 1
    k_max: int = 1
    terms: str = ""
    mode: str = "exact"
    seed: int = 0
    output_path: str | None = None
    format: str = "json"
    inject_fault: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.n < 1:
            raise UsageError("--n must be at least 1")
        if self.command in ("verify", "table", "selftest"):
            if self.k_min < 1:
                raise UsageError("k must be at least 1 (k = 0 is constant, not an embedding)")
            if self.k_max < self.k_min:
                raise UsageError("empty k range")
            ceiling = EXACT_K_CEILING if self.mode == "exact" else NUMERIC_K_CEILING
            if self.k_max > ceiling:
                raise UsageError(f"k up to {ceiling} in {self.mode} mode")
        if self.mode != "exact" and self.n > NUMERIC_N_CEILING:
            raise UsageError(f"numeric mode supports n <= {NUMERIC_N_CEILING}")
        if self.command == "sum" and not self.terms.strip():
            raise UsageError("sum needs --terms k:a_k,...")

    @property
    def ks(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1))


def parse_range(text: str) -> tuple[int, int]:
    """``"3"`` -> (3, 3); ``"2..6"`` -> (2, 6)."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise UsageError(f"bad k range {text!r}; use a or a..b") from None


def parallel_map(fn, items):
    items = list(items)
    with ThreadPoolExecutor() as pool:
        futures = [pool.submit(contextvars.copy_context().run, fn, it) for it in items]
        return [f.result() for f in futures]


# --- numeric verdicts -----------------------------------------------------------------

def _numeric_term(n: int, k: int, a: Fraction, config: OracleConfig) -> dict:
    from .oracle import fd_alpha, fd_nabla_alpha11_diagonal
    import numpy as np

    spec = EmbeddingSpec(n, ((k, a),))
    frame = random_frame(n, np.random.default_rng(config.seed))
    res = norm(spec, fd_nabla_alpha11_diagonal(spec, frame, config))
    scale = norm(spec, fd_alpha(spec, np.array(frame.u), np.array(frame.w), config))
    rel = res / scale
    return {"k": k, "a_k": f"{a.numerator}/{a.denominator}", "residual_zero": bool(rel < 1e-6),
            "residual_norm": float(f"{res:.6e}"), "residual_rel": float(f"{rel:.6e}")}


def _report_json(spec: EmbeddingSpec, cfg: RunConfig) -> dict:
    oracle_cfg = OracleConfig(seed=cfg.seed, sample_count=10)
    if cfg.mode == "numeric":
        terms = parallel_map(lambda t: _numeric_term(spec.n, t[0], t[1], oracle_cfg), spec.terms)
        verdict = "ppmc" if all(t["residual_zero"] for t in terms) else "not_ppmc"
        return {"spec": spec.to_json(), "innerProduct": INNER_PRODUCT_LABEL, "mode": "numeric",
                "terms": terms, "verdict": verdict, "version": __version__}
    report: PpmcReport = ppmc_verdict(spec, map_fn=parallel_map)
    out = report.to_json()
    out["mode"] = cfg.mode
    if cfg.mode == "both":
        checks = []
        for k, a in spec.terms:
            single = EmbeddingSpec(spec.n, ((k, a),))
            checks += [dict(c.to_json(), name=f"{c.name}_k{k}") for c in oracle_checks(single, oracle_cfg)]
        if len(spec.terms) > 1:
            checks += _direct_sum_checks(spec, oracle_cfg)
        out["oracle"] = checks
    return out


def _direct_sum_checks(spec: EmbeddingSpec, config: OracleConfig) -> list[dict]:
    import numpy as np

    frame = random_frame(spec.n, np.random.default_rng(config.seed))
    res = direct_sum_residuals(spec, frame, config)
    out = [{"name": "direct_sum_concatenated_residual_norm", "value": float(f"{norm(spec, res.concatenated):.6e}"),
            "tolerance": None,
            "pass": bool((norm(spec, res.concatenated) > 1e-6) == (expected_verdict(spec) == "not_ppmc"))}]
    for (k, a), comp, alone in zip(spec.terms, res.components, res.standalone):
        single = EmbeddingSpec(spec.n, ((k, a),))
        scale = max(norm(single, alone), 1e-300)
        diff = norm(single, comp - alone)
        rel = diff / scale if k != 1 else diff
        tol = 1e-3 if k != 1 else 1e-6
        out.append({"name": f"direct_sum_component_k{k}_vs_standalone", "value": float(f"{rel:.6e}"),
                    "tolerance": tol, "pass": bool(rel < tol)})
    return out


def _oracle_ok(payload: dict) -> bool:
    return all(c["pass"] for c in payload.get("oracle", []))


# --- commands --------------------------------------------------------------------------

def run_verify(cfg: RunConfig) -> tuple[dict, int]:
    reports = [_report_json(EmbeddingSpec(cfg.n, ((k, 1),)), cfg) for k in cfg.ks]
    agree = all(r["verdict"] == ("ppmc" if r["spec"]["terms"][0]["k"] == 1 else "not_ppmc") for r in reports)
    agree = agree and all(_oracle_ok(r) for r in reports)
    payload = {"command": "verify", "n": cfg.n, "k": [cfg.k_min, cfg.k_max], "mode": cfg.mode, "seed": cfg.seed,
               "innerProduct": INNER_PRODUCT_LABEL, "version": __version__, "agreement": agree, "reports": reports}
    return payload, EXIT_OK if agree else EXIT_DISAGREE


def table_rows(n: int, ks: list[int]) -> list[dict]:
    rows = []
    for rec in parallel_map(lambda k: term_record(n, k, 1), ks):
        k = rec.k
        rows.append({
            "k": k,
            "c11": _num(rec.alpha11[(1, 1)]),
            "c00": _num(rec.alpha11[(0, 0)]),
            "c20": _num(rec.alpha[(2, 0)]) if k >= 2 else "0",
            "nabla21": _num(rec.nabla_literal[(2, 1)]) if k >= 2 else "0",
            "nabla10": _num(rec.nabla_literal[(1, 0)]),
            "residual_zero": rec.residual_zero,
        })
    return rows


def _num(c) -> str:
    if c.im != 0:
        return c.serialize()
    return str(c.re)


def run_table(cfg: RunConfig) -> tuple[dict, int]:
    rows = table_rows(cfg.n, cfg.ks)
    agree = all(r["residual_zero"] == (r["k"] == 1) for r in rows)
    payload = {"command": "table", "n": cfg.n, "innerProduct": INNER_PRODUCT_LABEL, "version": __version__,
               "agreement": agree, "rows": rows}
    return payload, EXIT_OK if agree else EXIT_DISAGREE


def run_sum(cfg: RunConfig) -> tuple[dict, int]:
    try:
        spec = EmbeddingSpec.parse_terms(cfg.n, cfg.terms)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --terms: {exc}") from None
    if cfg.mode != "exact" and max(k for k, _ in spec.terms) > NUMERIC_K_CEILING:
        raise UsageError(f"k up to {NUMERIC_K_CEILING} in {cfg.mode} mode")
    report = _report_json(spec, cfg)
    agree = report["verdict"] == expected_verdict(spec) and _oracle_ok(report)
    payload = {"command": "sum", "n": cfg.n, "mode": cfg.mode, "seed": cfg.seed, "version": __version__,
               "agreement": agree, "report": report}
    return payload, EXIT_OK if agree else EXIT_DISAGREE


def run_selftest(cfg: RunConfig) -> tuple[dict, int]:
    from .selftest import run_selftest as suite

    ns = cfg.extra.get("ns") or [1, 2]
    guard = injected_fault() if cfg.inject_fault else contextlib.nullcontext()
    with guard:
        results = suite(ns, cfg.ks, seed=cfg.seed, oracle=cfg.mode != "exact")
    failures = [r for r in results if not r.passed]
    payload = {"command": "selftest", "n": ns, "k": [cfg.k_min, cfg.k_max], "seed": cfg.seed,
               "injectedFault": cfg.inject_fault, "version": __version__,
               "passed": len(results) - len(failures), "failed": len(failures),
               "checks": [r.to_json() for r in results]}
    return payload, EXIT_OK if not failures else EXIT_DISAGREE


COMMANDS = {"verify": run_verify, "table": run_table, "sum": run_sum, "selftest": run_selftest}


# --- formatting --------------------------------------------------------------------------

def to_json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def to_csv_text(payload: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cmd = payload["command"]
    if cmd == "table":
        w.writerow(TABLE_HEADER)
        for r in payload["rows"]:
            w.writerow([r[h] if h != "residual_zero" else str(r[h]).lower() for h in TABLE_HEADER])
    elif cmd in ("verify", "sum"):
        w.writerow(["k", "a_k", "verdict", "residual_zero", "residual_norm"])
        reports = payload["reports"] if cmd == "verify" else [payload["report"]]
        for rep in reports:
            for t in rep["terms"]:
                w.writerow([t["k"], t["a_k"], rep["verdict"], str(t["residual_zero"]).lower(), t["residual_norm"]])
    else:
        w.writerow(["module", "name", "pass", "witness"])
        for c in payload["checks"]:
            w.writerow([c["module"], c["name"], str(c["pass"]).lower(), c["witness"]])
    return buf.getvalue()


def to_text(payload: dict) -> str:
    cmd = payload["command"]
    lines = [f"ppmc {cmd}  (version {payload['version']})"]
    if cmd == "table":
        lines.append("  ".join(f"{h:>13}" for h in TABLE_HEADER))
        for r in payload["rows"]:
            lines.append("  ".join(f"{str(r[h]):>13}" for h in TABLE_HEADER))
    elif cmd in ("verify", "sum"):
        reports = payload["reports"] if cmd == "verify" else [payload["report"]]
        for rep in reports:
            terms = " + ".join(f"{t['a_k']}*Phi_{t['k']}" for t in rep["terms"])
            lines.append(f"n={rep['spec']['n']}  {terms:<24} verdict={rep['verdict']}")
            for c in rep.get("oracle", []):
                lines.append(f"    [{'pass' if c['pass'] else 'FAIL'}] {c['name']} = {c['value']}")
    else:
        for c in payload["checks"]:
            mark = "pass" if c["pass"] else "FAIL"
            lines.append(f"[{mark}] {c['module']}: {c['name']}" + (f"  ({c['witness']})" if c["witness"] else ""))
        lines.append(f"{payload['passed']} passed, {payload['failed']} failed")
    if "agreement" in payload:
        lines.append(f"agreement with theorem: {payload['agreement']}")
    return "\n".join(lines) + "\n"


FORMATTERS = {"json": to_json_text, "csv": to_csv_text, "text": to_text}


def _default_output(cfg: RunConfig) -> str | None:
    if cfg.output_path:
        return cfg.output_path
    directory = os.environ.get(OUTPUT_DIR_ENV)
    if directory:
        return str(Path(directory) / f"{cfg.command}.{cfg.format if cfg.format != 'text' else 'txt'}")
    return None


# --- argument parsing --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppmc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ppmc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, k_default="1"):
        p.add_argument("--n", type=int, default=1, help="complex dimension of CP^n")
        p.add_argument("--mode", choices=["exact", "numeric", "both"], default="exact")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", dest="output_path", default=None,
                       help=f"output file (default: stdout, or ${OUTPUT_DIR_ENV}/<command>.<ext>)")
        p.add_argument("--format", choices=["json", "csv", "text"], default="json")
        return p

    common(sub.add_parser("verify", help="check the theorem for single Phi_k")).add_argument("--k", default="1",
                                                                                             help="k or a..b")
    t = common(sub.add_parser("table", help="tabulate coefficient families"))
    t.add_argument("--k", default="1..8", help="k or a..b")
    t.set_defaults(format="csv")
    common(sub.add_parser("sum", help="verdict for a direct sum of a_k Phi_k")).add_argument(
        "--terms", required=True, help="k:a_k,k:a_k, e.g. 1:3/2,2:-1")
    s = common(sub.add_parser("selftest", help="run every invariant suite"))
    s.add_argument("--k", default="1..4")
    s.add_argument("--ns", default="1,2", help="comma-separated n values")
    s.add_argument("--inject-fault", action="store_true", help="flip the sign of delta(v) = -x")
    s.set_defaults(mode="both")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    k_min, k_max = parse_range(getattr(args, "k", "1"))
    extra = {}
    if args.command == "selftest":
        try:
            extra["ns"] = [int(x) for x in args.ns.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"bad --ns {args.ns!r}") from None
    cfg = RunConfig(command=args.command, n=args.n, k_min=k_min, k_max=k_max, terms=getattr(args, "terms", ""),
                    mode=args.mode, seed=args.seed, output_path=args.output_path, format=args.format,
                    inject_fault=getattr(args, "inject_fault", False), extra=extra)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        payload, status = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ppmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = FORMATTERS[cfg.format](payload)
    target = _default_output(cfg)
    if target is None:
        sys.stdout.write(text)
    else:
        try:
            Path(target).parent.mkdir(parents=True, exist_ok=True)
            Path(target).write_text(text)
        except OSError as exc:
            print(f"ppmc: cannot write {target}: {exc}", file=sys.stderr)
            return EXIT_WRITE
    return status


if __name__ == "__main__":
    sys.exit(main())
