"""Honest two-party sessions.

Alice (receiver) and Bob (sender) share ``x``. Alice entangles an index
register with ``g^(i x)`` and ships the value register to Bob; Bob maps each
value ``v`` to ``x * v^(y x^-1 mod q)`` and ships it back; Alice strips ``x``,
raises each branch to ``i^-1`` so that every branch holds ``g^y``, measures,
and takes a discrete log.

The general variant replaces ``1..q-1`` by an arbitrary index set of units
modulo ``r = ord(g)``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import DegenerateOperation, InvalidKey, InvalidMessage, NotHolder
from .modmath import GeneralParams, Params, discrete_log, mod_inverse
from .qstate import (
    ChannelView,
    JointState,
    ModularMap,
    Party,
    apply_indexed_exponent,
    apply_value_map,
    make_joint_state,
    measure_register2,
    transmit_register2,
)


@dataclass(frozen=True)
class SecretKey:
    """Shared key ``x`` with its inverses modulo the subgroup order and modulo ``p``.

    ``xq_inv`` is the inverse modulo ``q`` in the base case and modulo ``r``
    in the general case.
    """

    x: int
    xq_inv: int
    xp_inv: int

    @classmethod
    def from_x(cls, x: int, order: int, p: int) -> "SecretKey":
        if not 1 <= x <= order - 1 or math.gcd(x, order) != 1:
            raise InvalidKey(f"key {x} must be a unit in [1, {order - 1}]")
        return cls(x, mod_inverse(x, order), mod_inverse(x, p))

    @classmethod
    def for_params(cls, x: int, params: Params) -> "SecretKey":
        return cls.from_x(x, params.q, params.p)


@dataclass(frozen=True)
class Message:
    y: int

    def check(self, order: int) -> None:
        if not 1 <= self.y <= order - 1 or math.gcd(self.y, order) != 1:
            raise InvalidMessage(f"message {self.y} must be a unit in [1, {order - 1}]")


@dataclass(frozen=True)
class SessionTranscript:
    params: Params | GeneralParams
    key: SecretKey
    message: Message
    phi_A: JointState
    channel_A: ChannelView
    phi_C: JointState
    channel_C: ChannelView
    phi_D1: JointState
    phi_D2: JointState
    phi_D3: JointState
    measured: int
    recovered: int
    seed: int | None = None

    def snapshots(self) -> dict[str, JointState]:
        return {
            "phi_A": self.phi_A,
            "phi_C": self.phi_C,
            "phi_D1": self.phi_D1,
            "phi_D2": self.phi_D2,
            "phi_D3": self.phi_D3,
        }


def keygen(params: Params, rng: random.Random) -> SecretKey:
    return SecretKey.for_params(rng.randint(1, params.q - 1), params)


def alice_prepare(params: Params, key: SecretKey, owner: Party = Party.ALICE) -> JointState:
    """Step 1: ``sum_i |i>|g^(i x mod q)>`` for ``i = 1..q-1``, held by ``owner``."""
    p, q, g = params.p, params.q, params.g
    pairs = [(i, pow(g, i * key.x % q, p)) for i in range(1, q)]
    return make_joint_state(pairs, p, q, holder=owner)


def alice_prepare_general(
    gp: GeneralParams, key_x: int, owner: Party = Party.ALICE
) -> JointState:
    """Hidden-index preparation ``sum_a |a>|g^(a x mod r)>`` over ``gp.index_set``."""
    if math.gcd(key_x, gp.r) != 1:
        raise InvalidKey(f"key {key_x} is not a unit modulo r={gp.r}")
    p, g, r = gp.p, gp.g, gp.r
    pairs = [(a, pow(g, a * key_x % r, p)) for a in gp.index_set]
    return make_joint_state(pairs, p, r, holder=owner)


def _encrypt(state: JointState, key: SecretKey, y: int, order: int) -> JointState:
    exponent = y * key.xq_inv % order
    if math.gcd(exponent, order) != 1:
        raise DegenerateOperation(f"Bob's exponent {exponent} is not a unit modulo {order}")
    return apply_value_map(state, ModularMap(key.x, exponent), Party.BOB)


def bob_encrypt(state: JointState, params: Params, key: SecretKey, msg: Message) -> JointState:
    """Step 2: ``v -> x * v^(y x^-1 mod q)``; values become ``x * g_i^y``."""
    return _encrypt(state, key, msg.y, params.q)


def alice_unmask(state: JointState, key: SecretKey, actor: Party = Party.ALICE) -> JointState:
    """Step 3a: multiply by ``x^-1 mod p``."""
    if state.holder_reg1 != actor:
        raise NotHolder(f"{actor.value} does not hold register 1")
    return apply_value_map(state, ModularMap(key.xp_inv, 1), actor)


def alice_equalize(state: JointState, actor: Party = Party.ALICE) -> JointState:
    """Step 3b: raise branch ``i`` to ``i^-1 mod index_modulus``."""
    m = state.index_modulus
    for i in state.indices:
        if math.gcd(i, m) != 1:
            raise DegenerateOperation(f"index {i} is not a unit modulo {m}")
    return apply_indexed_exponent(state, lambda i: mod_inverse(i, m), actor)


def alice_recover(state: JointState, params: Params, rng: random.Random) -> int:
    """Measure register 2 (``g^y``) and return its discrete log."""
    observed, _ = measure_register2(state, rng, Party.ALICE)
    return discrete_log(observed, params.g, params.p, params.q)


def _pipeline(
    params: Params | GeneralParams,
    prepared: JointState,
    key: SecretKey,
    msg: Message,
    g: int,
    order: int,
    rng: random.Random,
) -> SessionTranscript:
    phi_A = prepared
    at_bob, channel_A = transmit_register2(phi_A, Party.BOB)
    phi_C = _encrypt(at_bob, key, msg.y, order)
    phi_D1, channel_C = transmit_register2(phi_C, Party.ALICE)
    phi_D2 = alice_unmask(phi_D1, key)
    phi_D3 = alice_equalize(phi_D2)
    measured, _ = measure_register2(phi_D3, rng, Party.ALICE)
    recovered = discrete_log(measured, g, params.p, order)
    return SessionTranscript(
        params=params,
        key=key,
        message=msg,
        phi_A=phi_A,
        channel_A=channel_A,
        phi_C=phi_C,
        channel_C=channel_C,
        phi_D1=phi_D1,
        phi_D2=phi_D2,
        phi_D3=phi_D3,
        measured=measured,
        recovered=recovered,
        seed=getattr(rng, "seed_value", None),
    )


def run_session(
    params: Params, key: SecretKey, msg: Message, rng: random.Random
) -> SessionTranscript:
    """Steps 1-3 end to end, recording every intermediate state."""
    msg.check(params.q)
    return _pipeline(params, alice_prepare(params, key), key, msg, params.g, params.q, rng)


def run_session_general(
    gp: GeneralParams, key_x: int, msg_y: int, rng: random.Random
) -> SessionTranscript:
    key = SecretKey.from_x(key_x, gp.r, gp.p)
    msg = Message(msg_y)
    msg.check(gp.r)
    return _pipeline(gp, alice_prepare_general(gp, key_x), key, msg, gp.g, gp.r, rng)
