"""Two-register quantum state model.

Every operation the protocol performs is a reversible modular map on basis
states, so amplitudes stay uniform and never interfere. A state is therefore
stored exactly as its list of ``(index, value)`` basis pairs with an implicit
amplitude of ``1/sqrt(N)``; no complex vectors and no floating point.

Register ownership is tracked explicitly. Sending a register is a change of
holder on a persistent joint state, so the entanglement between Alice's index
register and the transmitted value register survives the trip.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable

from .errors import (
    DegenerateOperation,
    DuplicateIndex,
    NotHolder,
    ValueOutOfGroup,
)
from .modmath import element_order, lcm, mod_inverse

RNG_ALGORITHM = "mt19937"


class SeededRandom(random.Random):
    """``random.Random`` (MT19937) that remembers the integer it was seeded with."""

    def __init__(self, seed: int = 0) -> None:
        self.seed_value = int(seed)
        super().__init__(self.seed_value)


class Party(str, Enum):
    ALICE = "Alice"
    BOB = "Bob"
    NANCY = "Nancy"
    IN_TRANSIT = "in-transit"


@dataclass(frozen=True)
class JointState:
    """Uniform superposition ``N^-1/2 * sum |index>|value>`` over ``pairs``.

    Build instances with :func:`make_joint_state`; the operations below return
    new states and never mutate.
    """

    pairs: tuple[tuple[int, int], ...]
    p: int
    index_modulus: int
    holder_reg1: Party = Party.ALICE
    holder_reg2: Party = Party.ALICE

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.pairs]

    @property
    def values(self) -> list[int]:
        return [v for _, v in self.pairs]

    @property
    def amplitude(self) -> float:
        return 1 / math.sqrt(len(self.pairs))

    def ket(self) -> str:
        """Render as ``|i>|v> + ...`` in the usual ket notation."""
        return " + ".join(f"|{i}⟩|{v}⟩" for i, v in self.pairs)


@dataclass(frozen=True)
class ModularMap:
    """The value-register map ``v -> multiplier * v**exponent mod p``."""

    multiplier: int
    exponent: int

    def __post_init__(self) -> None:
        if self.exponent < 0:
            raise ValueError("exponent must be nonnegative")

    def inverse(self, p: int, order: int) -> "ModularMap":
        """Inverse map, valid on values whose multiplicative order divides ``order``.

        Undoing ``v -> m v^e`` means ``w -> (m^-1 w)^f`` with ``f = e^-1 mod order``,
        which is ``m^-f * w^f``.
        """
        f = mod_inverse(self.exponent, order)
        return ModularMap(pow(mod_inverse(self.multiplier, p), f, p), f)


@dataclass(frozen=True)
class ChannelView:
    """What an eavesdropper sees of a register in transit: a value multiset.

    Values are kept sorted. Transmission order would correlate with the index
    register and is not part of the observable.
    """

    values: tuple[int, ...]

    @classmethod
    def of(cls, state: JointState) -> "ChannelView":
        return cls(tuple(sorted(state.values)))

    @property
    def count(self) -> int:
        return len(self.values)

    def multiset(self) -> Counter:
        return Counter(self.values)

    def ket(self) -> str:
        return " + ".join(f"|{v}⟩" for v in self.values)


def make_joint_state(
    index_value_pairs: Iterable[tuple[int, int]],
    p: int,
    index_modulus: int,
    holder: Party = Party.ALICE,
) -> JointState:
    """Validated constructor; both registers start with ``holder``."""
    pairs = tuple((int(i), int(v)) for i, v in index_value_pairs)
    if not pairs:
        raise ValueError("a joint state needs at least one basis pair")
    seen: set[int] = set()
    for i, v in pairs:
        if i in seen:
            raise DuplicateIndex(f"index {i} appears more than once")
        seen.add(i)
        if not 1 <= v < p or math.gcd(v, p) != 1:
            raise ValueOutOfGroup(f"value {v} is not a unit modulo {p}")
    return JointState(pairs, p, index_modulus, holder, holder)


def value_group_order(state: JointState) -> int:
    """Order against which exponent maps must be coprime.

    The support sits in a coset ``v0 * H`` where ``H`` is generated by the
    ratios ``v / v0``; ``v -> v^e`` is injective on that coset iff
    ``gcd(e, |H|) = 1``. The index modulus (the order of ``g``) is always
    folded in so that single-pair states are held to the same rule.
    """
    p, m = state.p, state.index_modulus
    v0 = state.pairs[0][1]
    # (v/v0)^m == 1 iff v^m == v0^m
    target = pow(v0, m, p)
    if all(pow(v, m, p) == target for _, v in state.pairs):
        return m
    v0_inv = mod_inverse(v0, p)
    order = m
    for r in {v * v0_inv % p for _, v in state.pairs}:
        order = lcm(order, element_order(r, p))
    return order


def _with_pairs(state: JointState, pairs: tuple[tuple[int, int], ...]) -> JointState:
    # direct construction; dataclasses.replace is slow in the exhaustive sweeps
    return JointState(pairs, state.p, state.index_modulus, state.holder_reg1, state.holder_reg2)


def _require(state: JointState, actor: Party, *, both: bool) -> None:
    if state.holder_reg2 != actor:
        raise NotHolder(f"{actor.value} does not hold register 2 ({state.holder_reg2.value} does)")
    if both and state.holder_reg1 != actor:
        raise NotHolder(f"{actor.value} does not hold register 1 ({state.holder_reg1.value} does)")


def apply_value_map(state: JointState, vmap: ModularMap, actor: Party) -> JointState:
    """Apply ``vmap`` to every value; requires ``actor`` to hold register 2."""
    _require(state, actor, both=False)
    p = state.p
    if math.gcd(vmap.multiplier, p) != 1:
        raise DegenerateOperation(f"multiplier {vmap.multiplier} is not a unit modulo {p}")
    order = value_group_order(state)
    if math.gcd(vmap.exponent, order) != 1:
        raise DegenerateOperation(
            f"exponent {vmap.exponent} shares a factor with value-group order {order}"
        )
    mult, e = vmap.multiplier % p, vmap.exponent
    pairs = tuple((i, mult * pow(v, e, p) % p) for i, v in state.pairs)
    return _with_pairs(state, pairs)


def apply_indexed_exponent(
    state: JointState, exponent_fn: Callable[[int], int], actor: Party
) -> JointState:
    """Controlled map ``|i>|v> -> |i>|v^f(i)>``; ``actor`` must hold both registers."""
    _require(state, actor, both=True)
    order = value_group_order(state)
    p = state.p
    pairs = []
    for i, v in state.pairs:
        e = exponent_fn(i)
        if e < 0 or math.gcd(e, order) != 1:
            raise DegenerateOperation(
                f"exponent {e} for index {i} is not a unit modulo value-group order {order}"
            )
        pairs.append((i, pow(v, e, p)))
    return _with_pairs(state, tuple(pairs))


def transmit_register2(state: JointState, to: Party) -> tuple[JointState, ChannelView]:
    """Hand register 2 to ``to``; returns the new state and what was on the wire."""
    moved = JointState(state.pairs, state.p, state.index_modulus, state.holder_reg1, to)
    return moved, ChannelView.of(state)


def collapse(state: JointState, observed: int) -> JointState:
    """Restrict the superposition to pairs whose value equals ``observed``."""
    kept = tuple(pair for pair in state.pairs if pair[1] == observed)
    if not kept:
        raise ValueError(f"{observed} has zero probability in this state")
    return _with_pairs(state, kept)


def outcome_distribution(state: JointState) -> dict[int, Fraction]:
    """Exact Born-rule distribution of a register-2 measurement."""
    n = len(state.pairs)
    return {v: Fraction(c, n) for v, c in sorted(Counter(state.values).items())}


def measure_register2(
    state: JointState, rng: random.Random, actor: Party
) -> tuple[int, JointState]:
    """Measure the value register: outcome ``v`` with probability multiplicity/N."""
    _require(state, actor, both=False)
    observed = state.pairs[rng.randrange(len(state.pairs))][1]
    return observed, collapse(state, observed)
