"""Command-line front end: ``qdlpsim {demo,session,params,attack}``.

Every command builds a :class:`TraceDocument` first and renders it either as
JSON (``--json``) or as ket-notation text, so both outputs describe the same
run. Exit codes: 0 success, 1 property violation or recovery failure,
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Any, Sequence

from . import adversary
from .errors import ExhaustedSearch, NoSolution, NoWitness, QDLPError
from .modmath import (
    DEFAULT_MODULUS_BOUND,
    GeneralParams,
    Params,
    element_order,
    generate_params,
)
from .protocol import Message, SecretKey, alice_prepare, keygen, run_session, run_session_general
from .qstate import ChannelView, SeededRandom
from .trace import TraceDocument, params_to_dict

EXHAUSTIVE_P_MAX = 200

DEMO_PARAMS = (11, 5, 3)
DEMO_KEY = 3
DEMO_MESSAGE = 3
DEMO_GOLDEN: dict[str, Any] = {
    "phi_A": [[1, 5], [2, 3], [3, 4], [4, 9]],
    "phi_C": [[1, 4], [2, 9], [3, 1], [4, 5]],
    "phi_D1": [[1, 4], [2, 9], [3, 1], [4, 5]],
    "phi_D2": [[1, 5], [2, 3], [3, 4], [4, 9]],
    "phi_D3": [[1, 5], [2, 5], [3, 5], [4, 5]],
    "channel_A": [3, 4, 5, 9],
    "channel_C": [1, 4, 5, 9],
    "measured": 5,
    "recovered": 3,
}


class UsageError(Exception):
    pass


class Outcome:
    def __init__(self, doc: TraceDocument, ok: bool, lines: list[str] | None = None) -> None:
        self.doc = doc
        self.ok = ok
        self.lines = lines or []


# -- parsing ------------------------------------------------------------------


def _q_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (MT19937)")
    common.add_argument("--json", action="store_true", help="emit a JSON trace document")
    common.add_argument("--reveal-secrets", action="store_true", help="include x and its inverses")

    group = argparse.ArgumentParser(add_help=False)
    group.add_argument("--p", type=int)
    group.add_argument("--q", type=int)
    group.add_argument("--g", type=int)
    group.add_argument("--q-range", type=_q_range, metavar="LO:HI")
    group.add_argument("--max-p", type=int, default=DEFAULT_MODULUS_BOUND, help="modulus bound for generated p")
    group.add_argument("--general", action="store_true", help="hidden index-set variant")
    group.add_argument("--order", type=int, help="expected order r of g (general variant)")
    group.add_argument("--indices", type=_int_list, help="comma list of index-set entries")

    ap = argparse.ArgumentParser(prog="qdlpsim", description="Quantum discrete-log secret-key encryption simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("demo", parents=[common], help="replay the p=11, q=5, g=3 worked example")

    s = sub.add_parser("session", parents=[common, group], help="run one honest session")
    s.add_argument("--x", type=int)
    s.add_argument("--y", type=int)

    sub.add_parser("params", parents=[common, group], help="generate or validate parameters")

    a = sub.add_parser("attack", parents=[common, group], help="run an eavesdropper analysis")
    a.add_argument("case", choices=["case1", "case2", "case3", "tv", "general"])
    a.add_argument("--x", type=int)
    a.add_argument("--y", type=int)
    a.add_argument("--y1", type=int)
    a.add_argument("--y2", type=int)
    a.add_argument("--forged-x", type=int)
    a.add_argument("--strategy", choices=adversary.FORGE_STRATEGIES, default="impersonate")
    a.add_argument("--trials", type=int, default=1000)
    mode = a.add_mutually_exclusive_group()
    mode.add_argument("--sampled", action="store_true")
    mode.add_argument("--exact", action="store_true")
    return ap


# -- shared resolution ------------------------------------------------------------


def _resolve_params(args: argparse.Namespace, rng: SeededRandom) -> Params:
    given = [args.p, args.q, args.g]
    if all(v is not None for v in given):
        return Params(args.p, args.q, args.g)
    if any(v is not None for v in given):
        raise UsageError("--p, --q and --g must be given together")
    if args.q_range is None:
        raise UsageError("give either --p/--q/--g or --q-range")
    return generate_params(args.q_range, rng, modulus_bound=args.max_p)


def _resolve_general(args: argparse.Namespace) -> GeneralParams:
    if args.p is None or args.g is None:
        raise UsageError("--general needs --p and --g")
    r = element_order(args.g, args.p)
    if args.order is not None and args.order != r:
        raise UsageError(f"g={args.g} has order {r} modulo {args.p}, not {args.order}")
    indices = args.indices or [a for a in range(1, r) if math.gcd(a, r) == 1]
    return GeneralParams(args.p, args.g, r, tuple(indices))


def _resolve_key(args: argparse.Namespace, params: Params, rng: SeededRandom) -> SecretKey:
    return SecretKey.for_params(args.x, params) if args.x is not None else keygen(params, rng)


def _random_unit(order: int, rng: SeededRandom) -> int:
    while True:
        v = rng.randint(1, order - 1)
        if math.gcd(v, order) == 1:
            return v


# -- commands ---------------------------------------------------------------------


def cmd_demo(args: argparse.Namespace) -> Outcome:
    params = Params(*DEMO_PARAMS)
    key = SecretKey.for_params(DEMO_KEY, params)
    t = run_session(params, key, Message(DEMO_MESSAGE), SeededRandom(args.seed))
    doc = TraceDocument.from_transcript("demo", args.seed, t, args.reveal_secrets)
    actual: dict[str, Any] = {s["name"]: s["pairs"] for s in doc.states}
    actual.update({v["name"]: v["values"] for v in doc.channel_views})
    actual.update(measured=doc.measured, recovered=doc.recovered)
    for name, expected in DEMO_GOLDEN.items():
        if actual[name] != expected:
            msg = f"golden mismatch at {name}: expected {expected}, got {actual[name]}"
            return Outcome(doc, False, [msg])
    return Outcome(doc, True, ["golden example: MATCH"])


def cmd_session(args: argparse.Namespace) -> Outcome:
    rng = SeededRandom(args.seed)
    if args.general:
        gp = _resolve_general(args)
        x = args.x if args.x is not None else _random_unit(gp.r, rng)
        y = args.y if args.y is not None else _random_unit(gp.r, rng)
        t = run_session_general(gp, x, y, rng)
    else:
        params = _resolve_params(args, rng)
        key = _resolve_key(args, params, rng)
        y = args.y if args.y is not None else rng.randint(1, params.q - 1)
        t = run_session(params, key, Message(y), rng)
    doc = TraceDocument.from_transcript("session", args.seed, t, args.reveal_secrets)
    ok = t.recovered == t.message.y
    return Outcome(doc, ok, ["recovery: OK" if ok else "recovery: FAILED"])


def cmd_params(args: argparse.Namespace) -> Outcome:
    rng = SeededRandom(args.seed)
    params = _resolve_general(args) if args.general else _resolve_params(args, rng)
    doc = TraceDocument(command="params", seed=args.seed, params=params_to_dict(params))
    return Outcome(doc, True, ["parameters: VALID"])


def _exhaustive(args: argparse.Namespace, p: int) -> bool:
    if args.exact:
        return True
    return not args.sampled and p <= EXHAUSTIVE_P_MAX


def _attack_case1(args, params, rng):
    verdict = adversary.channel_multiset_invariance(params)
    key = _resolve_key(args, params, rng)
    view = ChannelView.of(alice_prepare(params, key))
    candidates = adversary.brute_force_key_recovery(view, params)
    full = candidates == list(range(1, params.q))
    report = {
        "kind": "case1",
        "invariant_holds": verdict.holds,
        "witness": list(verdict.witness),
        "observed_view": list(view.values),
        "candidates": candidates,
    }
    return [report], verdict.holds and full


def _attack_case2(args, params, rng):
    key = _resolve_key(args, params, rng)
    msg = Message(args.y if args.y is not None else rng.randint(1, params.q - 1))
    msg.check(params.q)
    reports: list[dict] = []
    if _exhaustive(args, params.p):
        verdict = adversary.ciphertext_multiset_invariance(params, key)
        rep = adversary.intercept_exhaustive(params, key, msg)
        try:
            for c_prime in verdict.witness:
                adversary.message_ambiguity_witness(c_prime, params)
            ambiguity = True
        except NoWitness:
            ambiguity = False
        reports.append({
            "kind": "case2_invariance",
            "invariant_holds": verdict.holds,
            "witness": list(verdict.witness),
            "ambiguity_complete": ambiguity,
        })
        reports.append(rep.to_dict())
        ok = verdict.holds and ambiguity and rep.alice_recoveries == rep.trials
    else:
        rep = adversary.intercept_attack(params, key, msg, args.trials, args.seed)
        reports.append(rep.to_dict())
        ok = rep.alice_recoveries == rep.trials
    return reports, ok


def _attack_case3(args, params, rng):
    key = _resolve_key(args, params, rng)
    msg = Message(args.y if args.y is not None else rng.randint(1, params.q - 1))
    msg.check(params.q)
    if args.forged_x is not None:
        SecretKey.for_params(args.forged_x, params)
    if _exhaustive(args, params.p):
        forged = [args.forged_x] if args.forged_x is not None else [
            xf for xf in range(1, params.q) if xf != key.x
        ]
        rep = adversary.forged_channel_exhaustive(
            params, args.strategy, keys=[key.x], messages=[msg.y], forged=forged or [key.x]
        )
    else:
        xf = args.forged_x if args.forged_x is not None else rng.randint(1, params.q - 1)
        rep = adversary.forged_channel_sampled(
            params, key, msg, xf, args.trials, args.seed, args.strategy
        )
    d = rep.to_dict()
    d["strategy"] = args.strategy
    return [d], True


def _attack_tv(args, params, rng):
    if args.y1 is None or args.y2 is None:
        raise UsageError("tv needs --y1 and --y2")
    key = _resolve_key(args, params, rng)
    y1, y2 = Message(args.y1), Message(args.y2)
    y1.check(params.q)
    y2.check(params.q)
    if _exhaustive(args, params.p):
        rep = adversary.estimate_tv_distance(params, key, y1, y2, "exact")
        return [rep.to_dict()], rep.exact_tv == 0
    rep = adversary.estimate_tv_distance(params, key, y1, y2, "sampled", args.trials, rng)
    return [rep.to_dict()], True


def cmd_attack(args: argparse.Namespace) -> Outcome:
    rng = SeededRandom(args.seed)
    if args.case == "general" or args.general:
        if args.case != "general":
            raise UsageError("--general only applies to the 'general' case")
        gp = _resolve_general(args)
        x = args.x if args.x is not None else _random_unit(gp.r, rng)
        y = args.y if args.y is not None else _random_unit(gp.r, rng)
        rep = adversary.general_case_attack_suite(gp, x, y, rng)
        doc = TraceDocument(command="attack general", seed=args.seed, params=params_to_dict(gp),
                            reports=[rep.to_dict()])
        ok = len(rep.hidden_key_candidates) >= len(rep.known_index_candidates)
        return Outcome(doc, ok)
    params = _resolve_params(args, rng)
    handler = {
        "case1": _attack_case1,
        "case2": _attack_case2,
        "case3": _attack_case3,
        "tv": _attack_tv,
    }[args.case]
    reports, ok = handler(args, params, rng)
    doc = TraceDocument(command=f"attack {args.case}", seed=args.seed,
                        params=params_to_dict(params), reports=reports)
    if args.reveal_secrets and args.x is not None:
        key = SecretKey.for_params(args.x, params)
        doc.key = {"x": key.x, "xq_inv": key.xq_inv, "xp_inv": key.xp_inv}
    return Outcome(doc, ok)


# -- rendering ----------------------------------------------------------------------


def _fmt_set(values) -> str:
    return "{" + ",".join(str(v) for v in values) + "}"


def _render_report(rep: dict[str, Any]) -> list[str]:
    kind = rep.get("kind")
    if kind == "case1":
        holds = "HOLDS" if rep["invariant_holds"] else "VIOLATED"
        return [
            f"channel view = {_fmt_set(rep['observed_view'])}",
            f"candidates = {_fmt_set(rep['candidates'])}; multiset invariant {holds}",
        ]
    if kind == "case2_invariance":
        holds = "HOLDS" if rep["invariant_holds"] else "VIOLATED"
        amb = "complete" if rep["ambiguity_complete"] else "INCOMPLETE"
        return [
            f"ciphertext multiset = {_fmt_set(rep['witness'])}; invariant over messages {holds}",
            f"message ambiguity table for every C': {amb}",
        ]
    if kind == "attack":
        lines = [
            f"case {rep['case_id']} ({rep['mode']}): success rate = {rep['exact_rate']} "
            f"({rep['successes']}/{rep['trials']}), blind-guess baseline = {rep['baseline_rate']:.6g}"
        ]
        if rep.get("strategy"):
            lines[0] += f", strategy = {rep['strategy']}"
        if rep.get("alice_recoveries") is not None:
            lines.append(f"Alice recovers y after interception: {rep['alice_recoveries']}/{rep['trials']}")
        return lines
    if kind == "distinguisher":
        y1, y2 = rep["message_pair"]
        if rep["exact_tv"] is not None:
            return [f"tv(y1={y1}, y2={y2}) = {rep['exact_tv']} (exact)"]
        return [f"tv(y1={y1}, y2={y2}) ~ {rep['tv_estimate']:.4f} ({rep['samples_per_arm']} samples per arm)"]
    if kind == "general":
        return [
            f"index set size k = {rep['index_set_size']}",
            f"key candidates, index set known  = {_fmt_set(rep['known_index_candidates'])}",
            f"key candidates, index set hidden = {_fmt_set(rep['hidden_key_candidates'])} "
            f"({rep['hidden_explanations']} (index set, key) explanations)",
            f"observed C' = {rep['observation']}; consistent messages known/hidden = "
            f"{_fmt_set(rep['known_index_messages'])} / {_fmt_set(rep['hidden_index_messages'])}",
        ]
    return [str(rep)]


def render_text(doc: TraceDocument, lines: list[str]) -> str:
    out = [f"# {doc.command} (seed {doc.seed})"]
    if doc.params:
        out.append("params: " + " ".join(f"{k}={v}" for k, v in doc.params.items()))
    if doc.key:
        out.append("key: " + " ".join(f"{k}={v}" for k, v in doc.key.items()))
    if doc.message is not None:
        out.append(f"message: y={doc.message}")
    views = {v["name"]: v["values"] for v in doc.channel_views}
    for s in doc.states:
        ket = " + ".join(f"|{i}⟩|{v}⟩" for i, v in s["pairs"])
        out.append(f"{s['name']:<7}= 1/√{len(s['pairs'])} ({ket})  [reg1: {s['holder_reg1']}, reg2: {s['holder_reg2']}]")
        view = {"phi_A": "channel_A", "phi_C": "channel_C"}.get(s["name"])
        if view in views:
            out.append("  sent: " + " + ".join(f"|{v}⟩" for v in views[view]))
    if doc.measured is not None:
        out.append(f"measured g^y mod p = {doc.measured}")
    if doc.recovered is not None:
        out.append(f"recovered y = {doc.recovered}")
    for rep in doc.reports:
        out.extend(_render_report(rep))
    out.extend(lines)
    return "\n".join(out) + "\n"


COMMANDS = {"demo": cmd_demo, "session": cmd_session, "params": cmd_params, "attack": cmd_attack}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        outcome = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ExhaustedSearch, NoSolution) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (QDLPError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    status = outcome.lines if outcome.ok else []
    if args.json:
        sys.stdout.write(outcome.doc.to_json() + "\n")
    else:
        sys.stdout.write(render_text(outcome.doc, status))
    if not outcome.ok:
        for line in outcome.lines or [f"{args.command}: property violated"]:
            print(line, file=sys.stderr)
    return 0 if outcome.ok else 1


if __name__ == "__main__":
    sys.exit(main())
