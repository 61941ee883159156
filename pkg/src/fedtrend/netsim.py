"""Deterministic in-memory simulation of one secure-aggregation round.

Nodes are small state machines exchanging messages over an in-process
queue.  A round runs the protocol phases in order: every user splits her
secret into shares and sends the off-diagonal ones to her peers; once a
user holds all N-1 peer shares she sends her combined (obfuscated) vector
to the aggregator; the aggregator sums the N obfuscated vectors and
broadcasts the result.  The full delivery sequence is recorded in a
transcript for privacy and conformance checks.

Delivery order within each phase follows the configured schedule
(``round_robin`` or ``seeded_shuffle``); the aggregate itself is invariant
to delivery order because all sums run in ascending node-id order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from . import secagg
from .secagg import FeatureVector, ObfuscatedVector, RangeReport

__all__ = [
    "AGGREGATOR_ID",
    "AdversaryBehavior",
    "AggregatorNode",
    "Message",
    "MessageKind",
    "PrivacyReport",
    "ProtocolViolation",
    "RoundConfig",
    "Transcript",
    "UserNode",
    "inject_adversary",
    "load_transcript",
    "run_round",
    "transcript_privacy_check",
    "transcript_to_jsonl",
    "write_transcript",
]

AGGREGATOR_ID = "aggregator"


class ProtocolViolation(RuntimeError):
    """A node acted out of phase; the message names the offending node."""


class MessageKind(Enum):
    SHARE = "Share"
    OBFUSCATED = "Obfuscated"
    AGGREGATE = "Aggregate"


class AdversaryBehavior(Enum):
    INFLATE_COORDINATE = "inflate_coordinate"
    OUT_OF_RANGE_SHARE = "out_of_range_share"


@dataclass(frozen=True, eq=False)
class Message:
    round: int
    sender: str
    receiver: str
    kind: MessageKind
    payload: np.ndarray

    def __post_init__(self):
        p = np.array(self.payload, dtype=np.float64, copy=True)
        p.setflags(write=False)
        object.__setattr__(self, "payload", p)


@dataclass(frozen=True)
class Transcript:
    """Every delivered message of a run, plus the round parameters."""

    n_users: int
    dim: int
    share_range: float
    seed: int
    messages: tuple[Message, ...]

    def count(self, kind: MessageKind) -> int:
        return sum(1 for m in self.messages if m.kind is kind)


@dataclass(frozen=True)
class RoundConfig:
    seed: int
    share_range: float = secagg.DEFAULT_SHARE_RANGE
    delivery: str = "round_robin"

    def __post_init__(self):
        if self.delivery not in ("round_robin", "seeded_shuffle"):
            raise ValueError(f"unknown delivery schedule: {self.delivery!r}")
        if not self.share_range > 0:
            raise ValueError("share_range must be positive")
        if int(self.seed) < 0:
            raise ValueError("seed must be a nonnegative integer")


class _Phase(Enum):
    INIT = "Init"
    SHARES_SENT = "SharesSent"
    OBFUSCATED = "Obfuscated"
    DONE = "Done"


class UserNode:
    """Protocol state machine for one user.

    Transitions Init -> SharesSent -> Obfuscated -> Done only; the
    obfuscated vector is emitted after exactly N-1 peer shares arrived.
    """

    def __init__(self, index, secret, n_users, share_range, rng):
        self.index = int(index)
        self.id = str(index)
        self.secret: FeatureVector = secret
        self.n_users = n_users
        self.share_range = share_range
        self.rng = rng
        self.phase = _Phase.INIT
        self.kept: np.ndarray | None = None
        self.received: dict[int, np.ndarray] = {}
        self.result: FeatureVector | None = None

    def _create_shares(self) -> secagg.ShareSet:
        return secagg.make_shares(
            self.secret,
            self.n_users,
            self.share_range,
            rng=self.rng,
            owner=self.index,
        )

    def _obfuscated_values(self, values: np.ndarray) -> np.ndarray:
        return values  # hook for adversarial subclasses

    def start(self, round_no: int) -> tuple[list[Message], Message | None]:
        """Create shares; returns the peer messages and, when the user has
        no peers to wait for (N=1), her obfuscated message right away."""
        if self.phase is not _Phase.INIT:
            raise ProtocolViolation(f"user {self.id}: start() called twice")
        share_set = self._create_shares()
        self.kept = share_set.diagonal
        outgoing = [
            Message(round_no, self.id, str(k), MessageKind.SHARE, share_set.share_for(k))
            for k in range(self.n_users)
            if k != self.index
        ]
        self.phase = _Phase.SHARES_SENT
        return outgoing, self._maybe_obfuscate(round_no)

    def receive_share(self, msg: Message) -> Message | None:
        if self.phase is not _Phase.SHARES_SENT:
            raise ProtocolViolation(
                f"user {self.id}: share received in phase {self.phase.value}"
            )
        sender = int(msg.sender)
        if sender == self.index or sender in self.received:
            raise ProtocolViolation(
                f"user {self.id}: unexpected or duplicate share from {msg.sender}"
            )
        self.received[sender] = msg.payload
        return self._maybe_obfuscate(msg.round)

    def _maybe_obfuscate(self, round_no: int) -> Message | None:
        if len(self.received) != self.n_users - 1:
            return None
        combined = secagg.combine_received(
            self.kept,
            [self.received[k] for k in sorted(self.received)],
            owner=self.index,
        )
        self.phase = _Phase.OBFUSCATED
        return Message(
            round_no,
            self.id,
            AGGREGATOR_ID,
            MessageKind.OBFUSCATED,
            self._obfuscated_values(combined.values),
        )

    def receive_aggregate(self, msg: Message) -> None:
        if self.phase is not _Phase.OBFUSCATED:
            raise ProtocolViolation(
                f"user {self.id}: aggregate received in phase {self.phase.value}"
            )
        self.result = FeatureVector(values=msg.payload, bounds=self._result_bounds())
        self.phase = _Phase.DONE

    def _result_bounds(self) -> tuple[float, float]:
        a, b = self.secret.bounds
        return (self.n_users * a, self.n_users * b)


class AggregatorNode:
    """Collects the N obfuscated vectors and sums them; never sees shares."""

    def __init__(self, n_users: int, per_user_bounds: tuple[float, float]):
        self.n_users = n_users
        self.per_user_bounds = per_user_bounds
        self.buffer: dict[int, np.ndarray] = {}
        self.result: FeatureVector | None = None

    def receive(self, msg: Message) -> None:
        if msg.kind is not MessageKind.OBFUSCATED:
            raise ProtocolViolation(
                f"aggregator: received {msg.kind.value} message from {msg.sender}"
            )
        owner = int(msg.sender)
        if owner in self.buffer or self.result is not None:
            raise ProtocolViolation(f"aggregator: duplicate vector from {msg.sender}")
        self.buffer[owner] = msg.payload
        if len(self.buffer) == self.n_users:
            self.result = secagg.aggregate(
                [ObfuscatedVector(owner=i, values=v) for i, v in self.buffer.items()],
                per_user_bounds=self.per_user_bounds,
            )


# ---------------------------------------------------------------------------
# Round execution
# ---------------------------------------------------------------------------


def _common_bounds(secrets: Sequence[FeatureVector]) -> tuple[float, float]:
    bounds = {s.bounds for s in secrets}
    if len(bounds) != 1:
        raise ValueError("all secrets must declare the same bounds")
    return bounds.pop()


def _schedule(batches: list[list[Message]], delivery: str, rng) -> list[Message]:
    """Order one phase's messages: cycle senders, or shuffle with the rng."""
    if delivery == "seeded_shuffle":
        flat = [m for batch in batches for m in batch]
        return [flat[i] for i in rng.permutation(len(flat))]
    width = max((len(b) for b in batches), default=0)
    return [b[i] for i in range(width) for b in batches if i < len(b)]


def _execute_round(users, secrets, cfg, round_index, deliver_rng):
    n = len(users)
    a, b = _common_bounds(secrets)
    aggregator = AggregatorNode(n, per_user_bounds=(a, b))
    delivered: list[Message] = []

    share_batches: list[list[Message]] = []
    obfuscated: list[Message] = []
    for user in users:
        outgoing, obf = user.start(round_index)
        share_batches.append(outgoing)
        if obf is not None:
            obfuscated.append(obf)

    for msg in _schedule(share_batches, cfg.delivery, deliver_rng):
        delivered.append(msg)
        reply = users[int(msg.receiver)].receive_share(msg)
        if reply is not None:
            obfuscated.append(reply)

    obfuscated.sort(key=lambda m: int(m.sender))
    for msg in _schedule([[m] for m in obfuscated], cfg.delivery, deliver_rng):
        delivered.append(msg)
        aggregator.receive(msg)

    result = aggregator.result
    if result is None:
        raise ProtocolViolation("aggregator: round ended without all obfuscated vectors")

    broadcasts = [
        [Message(round_index, AGGREGATOR_ID, u.id, MessageKind.AGGREGATE, result.values)]
        for u in users
    ]
    for msg in _schedule(broadcasts, cfg.delivery, deliver_rng):
        delivered.append(msg)
        users[int(msg.receiver)].receive_aggregate(msg)

    transcript = Transcript(
        n_users=n,
        dim=len(secrets[0]),
        share_range=cfg.share_range,
        seed=cfg.seed,
        messages=tuple(delivered),
    )
    return result, transcript


def _spawn_rngs(cfg: RoundConfig, round_index: int, n: int):
    seq = np.random.SeedSequence((int(cfg.seed), int(round_index)))
    children = seq.spawn(n + 1)
    user_rngs = [np.random.default_rng(c) for c in children[:n]]
    return user_rngs, np.random.default_rng(children[n])


def run_round(
    secrets: Sequence[FeatureVector], cfg: RoundConfig, round_index: int = 0
) -> tuple[FeatureVector, Transcript]:
    """Run one honest aggregation round over the users' secret vectors."""
    n = len(secrets)
    if n < 1:
        raise ValueError("need at least one user")
    dims = {len(s) for s in secrets}
    if len(dims) != 1:
        raise ValueError("all secrets must have the same dimension")
    _common_bounds(secrets)
    for i, s in enumerate(secrets):
        if not s.within_bounds():
            raise ValueError(f"secret of user {i} violates its declared bounds")
    user_rngs, deliver_rng = _spawn_rngs(cfg, round_index, n)
    users = [
        UserNode(i, secrets[i], n, cfg.share_range, user_rngs[i]) for i in range(n)
    ]
    return _execute_round(users, secrets, cfg, round_index, deliver_rng)


# ---------------------------------------------------------------------------
# Adversary injection
# ---------------------------------------------------------------------------


class _InflatingUser(UserNode):
    def __init__(self, *args, coordinate: int, amount: float):
        super().__init__(*args)
        self._coordinate = coordinate
        self._amount = amount

    def _obfuscated_values(self, values: np.ndarray) -> np.ndarray:
        out = values.copy()
        out[self._coordinate] += self._amount
        return out


class _OutOfRangeShareUser(UserNode):
    def __init__(self, *args, coordinate: int):
        super().__init__(*args)
        self._coordinate = coordinate

    def _create_shares(self) -> secagg.ShareSet:
        honest = super()._create_shares()
        shares = honest.shares.copy()
        target = next(k for k in range(self.n_users) if k != self.index)
        shares[target, self._coordinate] = 2.0 * self.share_range
        # recompute the residual so the share sum stays consistent; only the
        # per-message range check should trip
        others = [k for k in range(self.n_users) if k != self.index]
        shares[self.index] = self.secret.values - secagg.ordered_sum(shares[others])
        return secagg.ShareSet(
            owner=self.index, shares=shares, share_range=self.share_range
        )


def inject_adversary(
    secrets: Sequence[FeatureVector],
    cfg: RoundConfig,
    behavior: AdversaryBehavior | str,
    adversary: int = 0,
    coordinate: int = 0,
    amount: float | None = None,
    round_index: int = 0,
    validation_tolerance: float = secagg.DEFAULT_VALIDATION_TOLERANCE,
) -> tuple[FeatureVector, Transcript, RangeReport]:
    """Run a round where one designated user misbehaves.

    ``inflate_coordinate`` adds ``amount`` (default: enough to escape the
    admissible range) to one coordinate of the adversary's obfuscated
    vector; ``out_of_range_share`` sends a peer share entry of 2D, which
    the transcript range check flags.  Returns the aggregate, transcript,
    and the aggregator's range-validation report.
    """
    behavior = AdversaryBehavior(behavior)
    n = len(secrets)
    if n < 2:
        raise ValueError("adversary injection needs at least two users")
    if not 0 <= adversary < n:
        raise ValueError("adversary index out of range")
    a, b = _common_bounds(secrets)
    if amount is None:
        amount = n * (b - a) + 1.0
    user_rngs, deliver_rng = _spawn_rngs(cfg, round_index, n)
    users: list[UserNode] = []
    for i in range(n):
        args = (i, secrets[i], n, cfg.share_range, user_rngs[i])
        if i != adversary:
            users.append(UserNode(*args))
        elif behavior is AdversaryBehavior.INFLATE_COORDINATE:
            users.append(_InflatingUser(*args, coordinate=coordinate, amount=amount))
        else:
            users.append(_OutOfRangeShareUser(*args, coordinate=coordinate))
    result, transcript = _execute_round(users, secrets, cfg, round_index, deliver_rng)
    report = secagg.validate_aggregate(result, n, (a, b), tolerance=validation_tolerance)
    return result, transcript, report


# ---------------------------------------------------------------------------
# Privacy checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrivacyReport:
    """Transcript-level violations, as (message index, reason) pairs."""

    violations: tuple[tuple[int, str], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _canonical_bytes(values: np.ndarray) -> bytes:
    # fold -0.0 onto +0.0 so byte equality matches numeric equality
    v = np.asarray(values, dtype=np.float64)
    return secagg.vector_to_bytes(np.where(v == 0.0, 0.0, v))


def transcript_privacy_check(
    transcript: Transcript, secrets: Sequence[FeatureVector]
) -> PrivacyReport:
    """Honest-but-curious audit of a recorded round.

    Checks that (i) no payload delivered to the aggregator equals any
    user's raw vector, (ii) every user-to-user share lies in [-D, D]^d, and
    (iii) no node other than user i ever observes user i's raw vector.
    """
    d = transcript.share_range
    secret_owner = {
        _canonical_bytes(s.values): str(i) for i, s in enumerate(secrets)
    }
    violations: list[tuple[int, str]] = []
    for idx, msg in enumerate(transcript.messages):
        if (
            msg.kind is MessageKind.SHARE
            and msg.sender != AGGREGATOR_ID
            and msg.receiver != AGGREGATOR_ID
        ):
            if np.any(msg.payload < -d) or np.any(msg.payload > d):
                violations.append(
                    (idx, f"share from {msg.sender} to {msg.receiver} outside [-D, D]")
                )
        owner = secret_owner.get(_canonical_bytes(msg.payload))
        if owner is not None and msg.receiver != owner:
            violations.append(
                (
                    idx,
                    f"{msg.kind.value} message from {msg.sender} to {msg.receiver} "
                    f"equals the raw vector of user {owner}",
                )
            )
    return PrivacyReport(violations=tuple(violations))


# ---------------------------------------------------------------------------
# Transcript serialization
# ---------------------------------------------------------------------------


def _format_payload(values: np.ndarray) -> str:
    return "[" + ", ".join(format(x, ".17g") for x in values) + "]"


def transcript_to_jsonl(transcript: Transcript) -> str:
    """JSON Lines text: a metadata header, then one message per line.

    Payload doubles are written with 17 significant digits, which
    round-trips IEEE-754 doubles exactly.
    """
    header = json.dumps(
        {
            "N": transcript.n_users,
            "d": transcript.dim,
            "D": transcript.share_range,
            "seed": transcript.seed,
        }
    )
    lines = [header]
    for msg in transcript.messages:
        lines.append(
            '{"round": %d, "from": %s, "to": %s, "kind": %s, "payload": %s}'
            % (
                msg.round,
                json.dumps(msg.sender),
                json.dumps(msg.receiver),
                json.dumps(msg.kind.value),
                _format_payload(msg.payload),
            )
        )
    return "\n".join(lines) + "\n"


def write_transcript(transcript: Transcript, path: str | Path) -> None:
    Path(path).write_text(transcript_to_jsonl(transcript), encoding="utf-8")


def load_transcript(path: str | Path) -> Transcript:
    with open(path, encoding="utf-8") as handle:
        header = json.loads(handle.readline())
        messages = []
        for line in handle:
            if not line.strip():
                continue
            rec = json.loads(line)
            messages.append(
                Message(
                    round=int(rec["round"]),
                    sender=rec["from"],
                    receiver=rec["to"],
                    kind=MessageKind(rec["kind"]),
                    payload=np.asarray(rec["payload"], dtype=np.float64),
                )
            )
    return Transcript(
        n_users=int(header["N"]),
        dim=int(header["d"]),
        share_range=float(header["D"]),
        seed=int(header["seed"]),
        messages=tuple(messages),
    )
