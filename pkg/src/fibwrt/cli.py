"""Command-line entry point.

Every subcommand writes one JSON object (to stdout or ``--json-out``) and a
short human summary to stderr.  Failures produce ``{"error": {...}}`` and a
nonzero exit code.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import checks, dqc1, qudits, spine
from .representation import MCGWord, wrt_invariant

_TOKEN = re.compile(r"^T(\d+)(?:\^(.*))?$")
_GENUS_TAG = re.compile(r"^g(\d+):$")


class CLIError(Exception):
    code = "invalid_input"


class WordError(CLIError):
    code = "malformed_word"


class IndexOutOfRange(WordError):
    code = "index_out_of_range"


class MalformedExponent(WordError):
    code = "malformed_exponent"


class GenusMismatch(WordError):
    code = "genus_mismatch"


def parse_word(text: str, genus: int) -> MCGWord:
    """Parse ``T<k>`` letters with optional ``^<exp>``, e.g. ``"T1 T4^-2 T5"``.

    The text may start with a tag ``g<N>:`` naming its genus; it must agree
    with ``genus``.  ``"identity"`` is the empty word.
    """
    if genus < 2:
        raise CLIError(f"genus must be >= 2, got {genus}")
    tokens = text.split()
    if tokens and _GENUS_TAG.match(tokens[0]):
        tagged = int(_GENUS_TAG.match(tokens[0]).group(1))
        if tagged != genus:
            raise GenusMismatch(f"word is tagged genus {tagged} but genus {genus} was requested")
        tokens = tokens[1:]
    if not tokens:
        raise WordError("word is empty; use 'identity' for the trivial word")
    if tokens == ["identity"]:
        return MCGWord(genus)
    top = 3 * genus - 1
    pairs = []
    for tok in tokens:
        m = _TOKEN.match(tok)
        if m is None:
            raise WordError(f"cannot parse letter {tok!r}; expected T<k> or T<k>^<exp>")
        index = int(m.group(1))
        if not 1 <= index <= top:
            raise IndexOutOfRange(f"generator index {index} in {tok!r} is outside 1..{top} (3g-1 for genus {genus})")
        exp_text = m.group(2)
        if exp_text is None:
            exp = 1
        else:
            if not re.fullmatch(r"[+-]?\d+", exp_text):
                raise MalformedExponent(f"exponent {exp_text!r} in {tok!r} is not an integer")
            exp = int(exp_text)
            if exp == 0:
                raise MalformedExponent(f"exponent in {tok!r} must be nonzero")
        pairs.append((index, exp))
    return MCGWord.from_pairs(genus, pairs)


# --- output ---------------------------------------------------------------


def _round(x):
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def render(payload: dict) -> str:
    return json.dumps(_round(payload), indent=2) + "\n"


def _emit(payload: dict, path: Optional[str]) -> None:
    text = render(payload)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- commands -------------------------------------------------------------


def cmd_wrt(args) -> dict:
    word = parse_word(args.word, args.genus)
    trace, norm = wrt_invariant(word)
    _say(f"genus {args.genus}, word {word}: trace {trace.real:.6f}{trace.imag:+.6f}i")
    return {
        "command": "wrt",
        "genus": args.genus,
        "word": str(word),
        "dimension": spine.labeling_count(args.genus),
        "trace_re": trace.real,
        "trace_im": trace.imag,
        "normalized_re": norm.real,
        "normalized_im": norm.imag,
    }


def cmd_estimate(args) -> dict:
    if args.circuit:
        circuit = dqc1.load_circuit(args.circuit)
        rep = dqc1.sample_estimate(circuit, args.samples, args.seed)
        est = rep.normalized_estimate
        _say(f"circuit on {circuit.num_qubits} qubits: normalized trace estimate {est.real:.5f}{est.imag:+.5f}i")
        exact = 2 * complex(rep.p0_exact_real, rep.p0_exact_imag) - (1 + 1j)
        return {
            "command": "estimate",
            "circuit": args.circuit,
            **rep.as_dict(),
            "exact_normalized_re": exact.real,
            "exact_normalized_im": exact.imag,
        }
    if args.beta is None:
        raise CLIError("estimate needs --beta (or --circuit)")
    word = parse_word(args.word, args.genus)
    res = dqc1.run_wrt_estimation(word, args.beta, args.samples, args.seed)
    est = res.report.normalized_estimate
    ok = res.within_bounds(args.sigmas)
    _say(
        f"genus {args.genus}, word {word}, beta {args.beta}: estimate {est.real:.5f}{est.imag:+.5f}i, "
        f"exact {res.exact_normalized.real:.5f}{res.exact_normalized.imag:+.5f}i, within bounds: {ok}"
    )
    return {
        "command": "estimate",
        "genus": args.genus,
        "word": res.word,
        "beta": args.beta,
        **res.report.as_dict(),
        "exact_normalized_re": res.exact_normalized.real,
        "exact_normalized_im": res.exact_normalized.imag,
        "encoded_normalized_re": res.encoded_normalized.real,
        "encoded_normalized_im": res.encoded_normalized.imag,
        "bias_bound": res.bias_bound,
        "sigmas": args.sigmas,
        "within_bounds": ok,
    }


def _parse_punctures(text: Optional[str]):
    if text is None:
        return None
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise CLIError(f"--punctures takes two comma-separated labels (0, 1 or none), got {text!r}")
    out = []
    for p in parts:
        if p.lower() in ("none", ""):
            out.append(None)
        elif p in ("0", "1"):
            out.append(int(p))
        else:
            raise CLIError(f"puncture label must be 0, 1 or none, got {p!r}")
    return tuple(out)


def cmd_spine(args) -> dict:
    punctures = _parse_punctures(args.punctures)
    graph = spine.standard_spine(args.genus, punctures=punctures)
    labelings = spine.enumerate_labelings(graph)
    out = {
        "command": "spine",
        "genus": args.genus,
        "punctures": list(punctures) if punctures else None,
        "num_edges": graph.num_edges,
        "edge_kinds": graph.kinds(),
        "count": len(labelings),
    }
    if punctures is None:
        out["transfer_count"] = spine.labeling_count(args.genus)
    if args.labelings:
        out["labelings"] = ["".join(map(str, x)) for x in labelings]
    _say(f"genus {args.genus}, punctures {punctures}: {len(labelings)} labelings on {graph.num_edges} edges")
    return out


def cmd_check(args) -> dict:
    names = args.suite or list(checks.SUITES)
    unknown = [n for n in names if n not in checks.SUITES]
    if unknown:
        raise CLIError(f"unknown suite(s) {unknown}; choose from {list(checks.SUITES)}")
    results = []
    for name in names:
        r = checks.run_suite(name)
        _say(r.line())
        results.append(
            {
                "suite": name,
                "passed": r.ok,
                # Wall time goes to stderr only, so the JSON stays reproducible.
                "time_limit": r.time_limit,
                "in_time": r.in_time,
                "detail": {k: list(v) if isinstance(v, tuple) else v for k, v in r.detail.items()},
            }
        )
    return {"command": "check", "suites": results, "all_passed": all(r["passed"] for r in results)}


def cmd_plan(args) -> dict:
    try:
        delta = Fraction(args.delta)
    except ValueError:
        raise CLIError(f"--delta must be a number, got {args.delta!r}") from None
    p = qudits.plan(args.a, args.b, args.n, delta)
    _say(f"a={p.a} b={p.b} n={p.n}: d={p.d}, c={p.c}, delta={float(p.delta):.3e}")
    return {
        "command": "plan-qudits",
        **p.as_dict(),
        "discrepancy_bound": qudits.discrepancy_bound(p),
        "discrepancy_at_zero_trace": qudits.trace_discrepancy(p, 0),
    }


def cmd_reduce(args) -> dict:
    circuit = dqc1.load_circuit(args.circuit)
    reduced = dqc1.absolute_trace_reduction(circuit)
    payload = dqc1.circuit_to_json(reduced)
    _say(f"reduced {circuit.num_qubits}-qubit circuit to {reduced.num_qubits} qubits, {len(reduced.gates)} gates")
    return payload


COMMANDS = {
    "wrt": cmd_wrt,
    "estimate": cmd_estimate,
    "spine": cmd_spine,
    "check": cmd_check,
    "plan-qudits": cmd_plan,
    "reduce-abs": cmd_reduce,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fibwrt", description="Fibonacci WRT invariants of mapping tori and one-clean-qubit simulation")
    parser.add_argument("--threads", type=int, help=f"worker threads (default from ${dqc1.THREADS_ENV}, else 1)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, word=True):
        p.add_argument("--genus", type=int, default=2)
        if word:
            p.add_argument("--word", default="identity", help="e.g. 'T1 T4^-2 T5' or 'identity'")
        p.add_argument("--json-out", help="write the JSON report here instead of stdout")

    common(sub.add_parser("wrt", help="exact WRT invariant of a mapping torus"))
    est = sub.add_parser("estimate", help="sampled Hadamard-test estimate")
    common(est)
    est.add_argument("--beta", type=int)
    est.add_argument("--samples", type=int, default=10_000)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--sigmas", type=float, default=4.0, help="tolerance in standard errors")
    est.add_argument("--circuit", help="estimate the trace of a JSON gate-list circuit instead")
    sp = sub.add_parser("spine", help="labelings of the standard spine")
    common(sp, word=False)
    sp.add_argument("--punctures", help="'left,right' labels, each 0, 1 or none")
    sp.add_argument("--labelings", action="store_true", help="list every labeling")
    ck = sub.add_parser("check", help="run property suites")
    ck.add_argument("--suite", action="append", help=f"one of {', '.join(checks.SUITES)} (repeatable)")
    ck.add_argument("--json-out")
    pq = sub.add_parser("plan-qudits", help="qudit embedding parameters")
    pq.add_argument("--a", type=int, required=True)
    pq.add_argument("--b", type=int, required=True)
    pq.add_argument("--n", type=int, required=True)
    pq.add_argument("--delta", required=True)
    pq.add_argument("--json-out")
    ra = sub.add_parser("reduce-abs", help="absolute-trace reduction of a circuit file")
    ra.add_argument("--circuit", required=True)
    ra.add_argument("--json-out")
    return parser


@dataclass(frozen=True)
class _Failure:
    code: str
    message: str


def run(argv: Optional[Sequence[str]] = None) -> tuple[int, dict, Optional[str]]:
    """Execute a command line; returns (exit code, JSON payload, output path)."""
    out_path = None
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise CLIError("missing subcommand; choose from " + ", ".join(COMMANDS))
        if args.threads is not None:
            if args.threads < 1:
                raise CLIError("--threads must be >= 1")
            os.environ[dqc1.THREADS_ENV] = str(args.threads)
        out_path = getattr(args, "json_out", None)
        payload = COMMANDS[args.command](args)
    except CLIError as exc:
        fail = _Failure(exc.code, str(exc))
    except dqc1.CircuitError as exc:
        fail = _Failure("invalid_circuit", str(exc))
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        fail = _Failure(type(exc).__name__, str(exc))
    else:
        code = 1 if payload.get("all_passed") is False else 0
        return code, payload, out_path
    return 2, {"error": {"code": fail.code, "message": fail.message}}, None


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, payload, out_path = run(argv)
    if "error" in payload:
        _say(f"error: {payload['error']['message']}")
        sys.stdout.write(render(payload))
        return code
    try:
        _emit(payload, out_path)
    except OSError as exc:
        sys.stdout.write(render({"error": {"code": "OSError", "message": str(exc)}}))
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
