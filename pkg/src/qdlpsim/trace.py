"""JSON trace documents emitted by the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .modmath import GeneralParams, Params
from .protocol import SecretKey, SessionTranscript
from .qstate import ChannelView, JointState, Party, make_joint_state

SCHEMA_VERSION = "1"


@dataclass
class TraceDocument:
    command: str
    seed: int
    params: dict[str, Any] | None = None
    key: dict[str, int] | None = None
    message: int | None = None
    states: list[dict[str, Any]] = field(default_factory=list)
    channel_views: list[dict[str, Any]] = field(default_factory=list)
    measured: int | None = None
    recovered: int | None = None
    reports: list[dict[str, Any]] = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_transcript(
        cls, command: str, seed: int, t: SessionTranscript, reveal_secrets: bool = False
    ) -> "TraceDocument":
        doc = cls(command=command, seed=seed, params=params_to_dict(t.params))
        if reveal_secrets:
            doc.key = {"x": t.key.x, "xq_inv": t.key.xq_inv, "xp_inv": t.key.xp_inv}
            doc.message = t.message.y
        for name, state in t.snapshots().items():
            doc.states.append(state_to_dict(name, state))
        doc.channel_views = [
            {"name": "channel_A", "values": list(t.channel_A.values)},
            {"name": "channel_C", "values": list(t.channel_C.values)},
        ]
        doc.measured = t.measured
        doc.recovered = t.recovered
        return doc

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "schema_version": self.schema_version,
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
        }
        if self.key is not None:
            d["key"] = self.key
        if self.message is not None:
            d["message"] = self.message
        d.update(
            states=self.states,
            channel_views=self.channel_views,
            measured=self.measured,
            recovered=self.recovered,
            reports=self.reports,
        )
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TraceDocument":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
        doc = cls(
            command=d["command"],
            seed=d["seed"],
            params=d.get("params"),
            key=d.get("key"),
            message=d.get("message"),
            states=d.get("states", []),
            channel_views=d.get("channel_views", []),
            measured=d.get("measured"),
            recovered=d.get("recovered"),
            reports=d.get("reports", []),
        )
        doc.validate()
        return doc

    @classmethod
    def from_json(cls, text: str) -> "TraceDocument":
        return cls.from_dict(json.loads(text))

    def validate(self) -> None:
        """Re-check every embedded object against its module invariants."""
        order = None
        p = None
        if self.params is not None:
            params = params_from_dict(self.params)
            p = params.p
            order = params.q if isinstance(params, Params) else params.r
            if self.key is not None:
                expected = SecretKey.from_x(self.key["x"], order, p)
                if (expected.xq_inv, expected.xp_inv) != (self.key["xq_inv"], self.key["xp_inv"]):
                    raise ValueError("key inverses are inconsistent with x")
        for s in self.states:
            if p is None:
                raise ValueError("states require params")
            state_from_dict(s, p, order)
        for view in self.channel_views:
            if list(view["values"]) != sorted(view["values"]):
                raise ValueError(f"channel view {view['name']} is not a sorted multiset")
        for rep in self.reports:
            if rep.get("kind") == "attack" and not 0 <= rep["successes"] <= rep["trials"]:
                raise ValueError("attack report has successes outside [0, trials]")
            if rep.get("kind") == "distinguisher" and not 0 <= rep["tv_estimate"] <= 1:
                raise ValueError("distinguisher estimate outside [0, 1]")


def params_to_dict(params: Params | GeneralParams) -> dict[str, Any]:
    if isinstance(params, Params):
        return {"p": params.p, "q": params.q, "g": params.g}
    return {"p": params.p, "g": params.g, "r": params.r, "index_set": list(params.index_set)}


def params_from_dict(d: dict[str, Any]) -> Params | GeneralParams:
    if "q" in d:
        return Params(d["p"], d["q"], d["g"])
    return GeneralParams(d["p"], d["g"], d["r"], tuple(d["index_set"]))


def state_to_dict(name: str, state: JointState) -> dict[str, Any]:
    return {
        "name": name,
        "holder_reg1": state.holder_reg1.value,
        "holder_reg2": state.holder_reg2.value,
        "pairs": [[i, v] for i, v in state.pairs],
    }


def state_from_dict(d: dict[str, Any], p: int, index_modulus: int) -> JointState:
    state = make_joint_state([tuple(pair) for pair in d["pairs"]], p, index_modulus)
    return JointState(
        state.pairs, p, index_modulus, Party(d["holder_reg1"]), Party(d["holder_reg2"])
    )


def view_to_dict(name: str, view: ChannelView) -> dict[str, Any]:
    return {"name": name, "values": list(view.values)}
