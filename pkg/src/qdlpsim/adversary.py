"""Eavesdropper analyses against the protocol.

Nancy sits on the channel. The analyses here are exact at desk scale:

* key hiding -- the transmitted channel multiset is the same for every key;
* message hiding -- the ciphertext multiset is the same for every message,
  and measuring it (intercept-and-resend) yields a distribution independent
  of the message while Alice still decrypts correctly;
* forged channel -- Nancy impersonates Alice with her own key guess;
* hidden index set -- the same questions for the general-index variant.

Exhaustive modes enumerate every measurement branch and, where Nancy falls
back to a blind guess, every guess value, so all leaves are equally likely
and success counts are exact integers.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .errors import NoSolution, NoWitness
from .modmath import GeneralParams, Params, discrete_log, mod_inverse
from .protocol import (
    Message,
    SecretKey,
    alice_equalize,
    alice_prepare,
    alice_prepare_general,
    alice_unmask,
    bob_encrypt,
)
from .qstate import (
    ChannelView,
    JointState,
    ModularMap,
    Party,
    SeededRandom,
    apply_indexed_exponent,
    apply_value_map,
    measure_register2,
    outcome_distribution,
    transmit_register2,
)

FORGE_STRATEGIES = ("impersonate", "exponent")


@dataclass
class TrialRecord:
    seed: int | None
    observation: int
    guess: int | None
    true_y: int
    success: bool
    alice_recovered: int | None = None


@dataclass
class AttackReport:
    case_id: int
    trials: int
    successes: int
    baseline_rate: float
    details: list[TrialRecord] = field(default_factory=list)
    # intercept-and-resend only: how many leaves still decrypted correctly for Alice
    alice_recoveries: int | None = None
    mode: str = "exhaustive"

    def __post_init__(self) -> None:
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes must lie in [0, trials]")

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    def exact_rate(self) -> Fraction:
        return Fraction(self.successes, self.trials) if self.trials else Fraction(0)

    def merge(self, other: "AttackReport") -> "AttackReport":
        if (self.case_id, self.mode) != (other.case_id, other.mode):
            raise ValueError("can only merge reports of the same case and mode")
        ar = None
        if self.alice_recoveries is not None and other.alice_recoveries is not None:
            ar = self.alice_recoveries + other.alice_recoveries
        return AttackReport(
            self.case_id,
            self.trials + other.trials,
            self.successes + other.successes,
            self.baseline_rate,
            self.details + other.details,
            ar,
            self.mode,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = "attack"
        d["success_rate"] = self.success_rate
        d["exact_rate"] = str(self.exact_rate())
        return d


@dataclass
class DistinguisherReport:
    message_pair: tuple[int, int]
    samples_per_arm: int
    tv_estimate: float
    exact_tv: Fraction | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.tv_estimate <= 1.0:
            raise ValueError("TV estimate must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "kind": "distinguisher",
            "message_pair": list(self.message_pair),
            "samples_per_arm": self.samples_per_arm,
            "tv_estimate": self.tv_estimate,
            "exact_tv": None if self.exact_tv is None else str(self.exact_tv),
        }


@dataclass(frozen=True)
class InvarianceVerdict:
    holds: bool
    witness: tuple[int, ...]
    counterexample: int | None = None


@dataclass
class GeneralCaseReport:
    index_set_size: int
    known_index_candidates: list[int]
    hidden_key_candidates: list[int]
    hidden_explanations: int
    observation: int
    known_index_messages: list[int]
    hidden_index_messages: list[int]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = "general"
        return d


@lru_cache(maxsize=256)
def _subgroup_powers(g: int, p: int, order: int) -> tuple[int, ...]:
    out, cur = [], 1
    for _ in range(order):
        out.append(cur)
        cur = cur * g % p
    return tuple(out)


@lru_cache(maxsize=256)
def _subgroup_log_table(g: int, p: int, order: int) -> dict[int, int]:
    return {v: k for k, v in enumerate(_subgroup_powers(g, p, order))}


def _ciphertext_state(params: Params, key: SecretKey, msg: Message) -> JointState:
    at_bob, _ = transmit_register2(alice_prepare(params, key), Party.BOB)
    return bob_encrypt(at_bob, params, key, msg)


def nancy_guess(c_prime: int, params: Params, rng: random.Random | None) -> int | None:
    """Nancy's message guess from one observed value.

    Takes ``dlog_g(C')`` when ``C'`` lies in ``<g>``, otherwise a uniform draw
    from ``[1, q-1]``. With ``rng=None`` returns None in the fallback case so
    exhaustive callers can enumerate the draw.
    """
    try:
        return discrete_log(c_prime, params.g, params.p, params.q)
    except NoSolution:
        return None if rng is None else rng.randint(1, params.q - 1)


# -- key hiding -------------------------------------------------------------


def channel_multiset_invariance(params: Params) -> InvarianceVerdict:
    """Check that Alice's channel multiset is the same for every key."""
    p, q, g = params.p, params.q, params.g
    expected = tuple(sorted(pow(g, k, p) for k in range(1, q)))
    for x in range(1, q):
        _, view = transmit_register2(alice_prepare(params, SecretKey.for_params(x, params)), Party.BOB)
        if view.values != expected:
            return InvarianceVerdict(False, expected, counterexample=x)
    return InvarianceVerdict(True, expected)


def brute_force_key_recovery(view: ChannelView, params: Params) -> list[int]:
    """Every key whose predicted channel multiset equals the observed view."""
    out = []
    for x in range(1, params.q):
        predicted = ChannelView.of(alice_prepare(params, SecretKey.for_params(x, params)))
        if predicted.values == view.values:
            out.append(x)
    return out


# -- message hiding (intercept and measure) -----------------------------------


def ciphertext_multiset_invariance(params: Params, key: SecretKey) -> InvarianceVerdict:
    """Check that the ciphertext multiset is the same for every message."""
    p, q, g = params.p, params.q, params.g
    expected = tuple(sorted(key.x * pow(g, k, p) % p for k in range(1, q)))
    for y in range(1, q):
        view = ChannelView.of(_ciphertext_state(params, key, Message(y)))
        if view.values != expected:
            return InvarianceVerdict(False, expected, counterexample=y)
    return InvarianceVerdict(True, expected)


def _alice_continue(state: JointState, key: SecretKey, params: Params, rng: random.Random) -> int:
    at_alice, _ = transmit_register2(state, Party.ALICE)
    d3 = alice_equalize(alice_unmask(at_alice, key))
    observed, _ = measure_register2(d3, rng, Party.ALICE)
    return discrete_log(observed, params.g, params.p, params.q)


def intercept_ciphertext(
    params: Params, key: SecretKey, msg: Message, rng: random.Random
) -> TrialRecord:
    """One intercept-and-resend trial.

    Nancy measures the ciphertext register in transit, guesses, and lets the
    collapsed state continue to Alice, who finishes the protocol.
    """
    in_transit = _ciphertext_state(params, key, msg)
    at_nancy, _ = transmit_register2(in_transit, Party.NANCY)
    c_prime, collapsed = measure_register2(at_nancy, rng, Party.NANCY)
    guess = nancy_guess(c_prime, params, rng)
    recovered = _alice_continue(collapsed, key, params, rng)
    return TrialRecord(
        getattr(rng, "seed_value", None), c_prime, guess, msg.y, guess == msg.y, recovered
    )


def intercept_attack(
    params: Params, key: SecretKey, msg: Message, trials: int, seed: int
) -> AttackReport:
    """Sampled intercept trials; trial ``t`` uses seed ``seed + t``."""
    records = [intercept_ciphertext(params, key, msg, SeededRandom(seed + t)) for t in range(trials)]
    return AttackReport(
        case_id=2,
        trials=trials,
        successes=sum(r.success for r in records),
        baseline_rate=1 / (params.q - 1),
        details=records,
        alice_recoveries=sum(r.alice_recovered == msg.y for r in records),
        mode="sampled",
    )


def intercept_exhaustive(params: Params, key: SecretKey, msg: Message) -> AttackReport:
    """Every collapse branch and every fallback guess, equally weighted."""
    q = params.q
    at_nancy, _ = transmit_register2(_ciphertext_state(params, key, msg), Party.NANCY)
    trials = successes = alice_ok = 0
    details = []
    # honest Step 3 on a collapsed state has one outcome, so a shared rng is fine
    rng = SeededRandom(0)
    branches: dict[int, list[tuple[int, int]]] = {}
    for pair in at_nancy.pairs:
        branches.setdefault(pair[1], []).append(pair)
    for c_prime, kept in branches.items():
        collapsed = JointState(tuple(kept), at_nancy.p, at_nancy.index_modulus,
                               at_nancy.holder_reg1, at_nancy.holder_reg2)
        recovered = _alice_continue(collapsed, key, params, rng)
        guess = nancy_guess(c_prime, params, None)
        # one branch per basis pair carrying this value
        for _ in kept:
            trials += q - 1
            successes += 1 if guess is None else (q - 1) * (guess == msg.y)
            alice_ok += (q - 1) * (recovered == msg.y)
            details.append(TrialRecord(None, c_prime, guess, msg.y, guess == msg.y, recovered))
    return AttackReport(2, trials, successes, 1 / (q - 1), details, alice_ok, "exhaustive")


def message_ambiguity_witness(c_prime: int, params: Params) -> dict[int, tuple[int, int]]:
    """For each candidate message ``y*`` a pair ``(x', j')`` with
    ``x' * g_j'^y* = C'``; raises :class:`NoWitness` if any ``y*`` has none."""
    p, q, g = params.p, params.q, params.g
    if not 1 <= c_prime < p:
        raise NoWitness(f"{c_prime} is not a unit modulo {p}")
    g_inv = mod_inverse(g, p)
    table = {}
    for y_star in range(1, q):
        step = pow(g_inv, y_star, p)
        x_cand = c_prime
        for j in range(1, q):
            x_cand = x_cand * step % p
            if 1 <= x_cand <= q - 1:
                table[y_star] = (x_cand, j)
                break
        else:
            raise NoWitness(f"no (x', j') explains {c_prime} under message {y_star}")
    return table


def ciphertext_distribution(params: Params, key: SecretKey, msg: Message) -> dict[int, Fraction]:
    """Exact distribution of Nancy's measurement outcome ``C'``."""
    return outcome_distribution(_ciphertext_state(params, key, msg))


def total_variation(a: dict[int, Fraction], b: dict[int, Fraction]) -> Fraction:
    return sum((abs(a.get(k, 0) - b.get(k, 0)) for k in a.keys() | b.keys()), Fraction(0)) / 2


def estimate_tv_distance(
    params: Params,
    key: SecretKey,
    y1: Message,
    y2: Message,
    mode: str = "exact",
    samples: int = 10_000,
    rng: random.Random | None = None,
) -> DistinguisherReport:
    """Distance between Nancy's ``C'`` distributions under two messages.

    ``exact`` enumerates the Born-rule distributions; ``sampled`` measures
    ``samples`` fresh ciphertexts per message and compares empirical frequencies.
    """
    if mode == "exact":
        tv = total_variation(
            ciphertext_distribution(params, key, y1), ciphertext_distribution(params, key, y2)
        )
        return DistinguisherReport((y1.y, y2.y), 0, float(tv), tv)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        rng = SeededRandom(0)
    empirical = []
    for msg in (y1, y2):
        state, _ = transmit_register2(_ciphertext_state(params, key, msg), Party.NANCY)
        counts = Counter(measure_register2(state, rng, Party.NANCY)[0] for _ in range(samples))
        empirical.append({v: Fraction(c, samples) for v, c in counts.items()})
    tv = total_variation(*empirical)
    return DistinguisherReport((y1.y, y2.y), samples, float(tv), None)


# -- forged channel ----------------------------------------------------------


def _nancy_decrypt(state: JointState, forged: SecretKey, strategy: str) -> JointState:
    if strategy == "impersonate":
        # Alice's Step 3 run with the forged key
        return alice_equalize(alice_unmask(state, forged, Party.NANCY), Party.NANCY)
    if strategy == "exponent":
        m = state.index_modulus
        state = apply_value_map(state, ModularMap(1, forged.xq_inv), Party.NANCY)
        return apply_indexed_exponent(state, lambda i: mod_inverse(i, m), Party.NANCY)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {FORGE_STRATEGIES}")


def forged_final_state(
    params: Params, bob_key: SecretKey, msg: Message, forged_x: int, strategy: str = "impersonate"
) -> JointState:
    """Nancy's state after her decryption pipeline, just before measurement."""
    forged = SecretKey.for_params(forged_x, params)
    nancy_state = alice_prepare(params, forged, owner=Party.NANCY)
    at_bob, _ = transmit_register2(nancy_state, Party.BOB)
    ciphertext = bob_encrypt(at_bob, params, bob_key, msg)
    back, _ = transmit_register2(ciphertext, Party.NANCY)
    return _nancy_decrypt(back, forged, strategy)


def forged_channel_attack(
    params: Params,
    bob_key: SecretKey,
    msg: Message,
    forged_x: int,
    rng: random.Random,
    strategy: str = "impersonate",
) -> TrialRecord:
    """One forged-channel trial: Nancy poses as Alice with key ``forged_x``.

    ``impersonate`` runs Alice's decryption with the forged key (multiply by
    ``x'^-1 mod p``, then branch exponent ``i^-1``). ``exponent`` raises the
    whole register to ``x'^-1 mod q`` before the branch exponent.
    """
    final = forged_final_state(params, bob_key, msg, forged_x, strategy)
    observed, _ = measure_register2(final, rng, Party.NANCY)
    guess = nancy_guess(observed, params, rng)
    return TrialRecord(getattr(rng, "seed_value", None), observed, guess, msg.y, guess == msg.y)


def _forged_leaves(
    params: Params, bob_key: SecretKey, msg: Message, forged_x: int, strategy: str
) -> tuple[int, int]:
    final = forged_final_state(params, bob_key, msg, forged_x, strategy)
    q = params.q
    trials = successes = 0
    for _, observed in final.pairs:
        guess = nancy_guess(observed, params, None)
        trials += q - 1
        if guess is None:
            successes += 1  # exactly one of the q-1 blind draws is right
        elif guess == msg.y:
            successes += q - 1
    return trials, successes


def forged_channel_exhaustive(
    params: Params,
    strategy: str = "impersonate",
    *,
    keys: list[int] | None = None,
    messages: list[int] | None = None,
    forged: list[int] | None = None,
    include_true_key: bool = False,
) -> AttackReport:
    """Exact success count over keys, messages, forged keys, branches and draws.

    By default every ``x``, ``y`` and ``x' != x`` in ``[1, q-1]`` is used.
    """
    q = params.q
    full = list(range(1, q))
    trials = successes = 0
    for x in keys or full:
        key = SecretKey.for_params(x, params)
        for y in messages or full:
            for xf in forged or full:
                if xf == x and not include_true_key and forged is None:
                    continue
                t, s = _forged_leaves(params, key, Message(y), xf, strategy)
                trials += t
                successes += s
    return AttackReport(3, trials, successes, 1 / (q - 1), mode="exhaustive")


def forged_channel_sampled(
    params: Params,
    bob_key: SecretKey,
    msg: Message,
    forged_x: int,
    trials: int,
    seed: int,
    strategy: str = "impersonate",
) -> AttackReport:
    records = [
        forged_channel_attack(params, bob_key, msg, forged_x, SeededRandom(seed + t), strategy)
        for t in range(trials)
    ]
    return AttackReport(3, trials, sum(r.success for r in records), 1 / (params.q - 1),
                        records, mode="sampled")


# -- hidden index set -------------------------------------------------------


def _units(r: int) -> list[int]:
    return [a for a in range(1, r) if math.gcd(a, r) == 1]


def hidden_index_explanations(view: ChannelView, gp: GeneralParams) -> list[tuple[tuple[int, ...], int]]:
    """All ``(index set, key)`` pairs that reproduce ``view`` when the index set is secret."""
    logs = _subgroup_log_table(gp.g, gp.p, gp.r)
    k = view.count
    out = []
    for xf in _units(gp.r):
        xf_inv = mod_inverse(xf, gp.r)
        cand = []
        for v in view.values:
            e = logs.get(v)
            if e is None:
                break
            cand.append(e * xf_inv % gp.r)
        else:
            s = tuple(sorted(cand))
            if len(set(s)) == k and all(a != 0 and math.gcd(a, gp.r) == 1 for a in s):
                out.append((s, xf))
    return out


def known_index_candidates(view: ChannelView, gp: GeneralParams) -> list[int]:
    """Keys consistent with ``view`` when Nancy knows the index set."""
    powers = _subgroup_powers(gp.g, gp.p, gp.r)
    target = list(view.values)
    return [
        xf
        for xf in _units(gp.r)
        if sorted(powers[xf * a % gp.r] for a in gp.index_set) == target
    ]


def _ambiguous_messages(c_prime: int, gp: GeneralParams, index_pool: list[int]) -> list[int]:
    units = set(_units(gp.r))
    out = []
    for y_star in sorted(units):
        for a in index_pool:
            xf = c_prime * mod_inverse(pow(gp.g, a * y_star % gp.r, gp.p), gp.p) % gp.p
            if xf in units:
                out.append(y_star)
                break
    return out


def general_case_attack_suite(
    gp: GeneralParams, key_x: int, msg_y: int, rng: random.Random
) -> GeneralCaseReport:
    """Key and message ambiguity with the index set known vs hidden.

    The known-index figures are the base-case analysis (the index register's
    labels are public); the hidden figures are what Nancy faces when the
    index set is secret.
    """
    key = SecretKey.from_x(key_x, gp.r, gp.p)
    Message(msg_y).check(gp.r)
    _, view = transmit_register2(alice_prepare_general(gp, key_x), Party.BOB)
    explanations = hidden_index_explanations(view, gp)

    state, _ = transmit_register2(alice_prepare_general(gp, key_x), Party.BOB)
    exponent = msg_y * key.xq_inv % gp.r
    ciphertext = apply_value_map(state, ModularMap(key.x, exponent), Party.BOB)
    at_nancy, _ = transmit_register2(ciphertext, Party.NANCY)
    c_prime, _ = measure_register2(at_nancy, rng, Party.NANCY)

    return GeneralCaseReport(
        index_set_size=len(gp.index_set),
        known_index_candidates=known_index_candidates(view, gp),
        hidden_key_candidates=sorted({xf for _, xf in explanations}),
        hidden_explanations=len(explanations),
        observation=c_prime,
        known_index_messages=_ambiguous_messages(c_prime, gp, list(gp.index_set)),
        hidden_index_messages=_ambiguous_messages(c_prime, gp, _units(gp.r)),
    )


def proper_index_subsets(r: int, max_full: int = 8) -> list[tuple[int, ...]]:
    """Proper non-empty subsets of the units mod ``r`` used in sweeps.

    All of them when there are at most ``max_full`` units; otherwise every
    subset of size 1, 2 and ``|units| - 1``.
    """
    units = _units(r)
    n = len(units)
    sizes = range(1, n) if n <= max_full else sorted({1, 2, n - 1} - {0, n})
    out = []
    for k in sizes:
        out.extend(combinations(units, k))
    return out
