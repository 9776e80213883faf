"""Scenario configuration and the single-run event loop."""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from typing import Any

from ..coin import CoinOracle
from ..core import (
    BOT, BOT_DEFAULT, Envelope, InstanceId, PartialVector, Tag, header_bits, payload_bits,
)
from .byzantine import BEHAVIOURS, Behaviour
from .node import Node
from .scheduler import STRATEGIES, Scheduler, fairness_bound

PROTOCOLS = ("OciorABA", "OciorABAStar", "APVA", "RBC", "ABBA", "ABBBA")
INPUT_MODES = ("unanimous", "random", "split")
ADVERSARIES = ("none",) + BEHAVIOURS
TOP_ID = "ID"

CSV_COLUMNS = (
    "seed", "protocol", "n", "t", "ell", "adversary", "scheduler", "total_bits",
    "bits_rbc", "bits_apva", "bits_abba", "bits_acidd", "elections",
    "completion_step", "decided", "all_honest_agree",
)


def default_max_steps(n: int) -> int:
    return 400 * n ** 3 + 20_000


@dataclass
class ScenarioConfig:
    n: int
    t: int
    protocol: str = "OciorABA"
    input_mode: str = "unanimous"
    ell: int = 64
    adversary: str = "none"
    byzantine_set: tuple[int, ...] | None = None
    scheduler: str = "random"
    seed: int = 0
    max_steps: int | None = None
    crash_after: int | None = None
    leader: int = 1
    allow_subresilient: bool = False
    apva_round_limit: int | None = None
    inputs: dict[int, Any] | None = None

    def __post_init__(self):
        self.input_mode = self.input_mode.lower()
        if self.byzantine_set is not None:
            self.byzantine_set = tuple(sorted(set(self.byzantine_set)))

    def validate(self) -> None:
        n, t = self.n, self.t
        if n < 1 or t < 0:
            raise ValueError(f"need n >= 1 and t >= 0, got n={n}, t={t}")
        if n < 3 * t + 1:
            if not self.allow_subresilient:
                raise ValueError(f"n={n} < 3t+1={3 * t + 1}; pass allow_subresilient to run anyway")
            warnings.warn(f"running below the resilience bound (n={n}, t={t})", stacklevel=2)
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}; choose from {PROTOCOLS}")
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"unknown input mode {self.input_mode!r}; choose from {INPUT_MODES}")
        if self.adversary not in ADVERSARIES:
            raise ValueError(f"unknown adversary {self.adversary!r}; choose from {ADVERSARIES}")
        if self.scheduler not in STRATEGIES:
            raise ValueError(f"unknown scheduler {self.scheduler!r}; choose from {STRATEGIES}")
        if self.ell <= 0 or self.ell % 8:
            raise ValueError(f"ell must be a positive multiple of 8, got {self.ell}")
        if self.byzantine_set is not None:
            if len(self.byzantine_set) > t:
                raise ValueError(f"{len(self.byzantine_set)} Byzantine nodes exceed t={t}")
            if any(not 1 <= b <= n for b in self.byzantine_set):
                raise ValueError(f"Byzantine ids must lie in 1..{n}")
        if not 1 <= self.leader <= n:
            raise ValueError(f"leader must lie in 1..{n}")

    def faulty(self) -> tuple[int, ...]:
        if self.adversary == "none":
            return ()
        if self.byzantine_set is not None:
            return self.byzantine_set
        rng = random.Random(f"{self.seed}/byzantine")
        return tuple(sorted(rng.sample(range(1, self.n + 1), self.t)))

    def root(self) -> InstanceId:
        if self.protocol == "RBC":
            return InstanceId.root("RBC", TOP_ID, self.leader)
        return InstanceId.root(self.protocol, TOP_ID)


@dataclass
class Metrics:
    bits_by_tag: dict[str, int] = field(default_factory=dict)
    msgs_by_tag: dict[str, int] = field(default_factory=dict)
    bits_by_message: dict[str, int] = field(default_factory=dict)
    total_bits: int = 0
    total_msgs: int = 0
    bits_rbc: int = 0
    bits_apva: int = 0
    bits_abba: int = 0
    bits_acidd: int = 0
    byzantine_bits: int = 0
    byzantine_msgs: int = 0
    completion_step: dict[int, int] = field(default_factory=dict)
    elections: int = 0
    decided: dict[int, Any] = field(default_factory=dict)
    steps: int = 0
    deliveries: int = 0


@dataclass
class LivenessViolation:
    step: int
    reason: str
    stuck: dict[int, list[str]]

    def __str__(self) -> str:
        lines = [f"liveness violation at step {self.step}: {self.reason}"]
        for node, insts in sorted(self.stuck.items()):
            shown = ", ".join(insts[:6]) + (" ..." if len(insts) > 6 else "")
            lines.append(f"  node {node}: {shown}")
        return "\n".join(lines)


@dataclass
class RunResult:
    config: ScenarioConfig
    metrics: Metrics
    honest: tuple[int, ...]
    byzantine: tuple[int, ...]
    inputs: dict[int, Any]
    outputs: dict[int, Any]
    completed: bool
    liveness: LivenessViolation | None
    fairness_ok: bool
    max_delay: int
    apva_inputs: dict[int, dict[int, int]] = field(default_factory=dict)
    apva_outputs: dict[int, Any] = field(default_factory=dict)
    apva_rounds: dict[int, int] = field(default_factory=dict)
    nodes: list | None = field(default=None, repr=False)

    @property
    def all_honest_agree(self) -> bool:
        vals = [self.outputs[i] for i in self.honest if i in self.outputs]
        return len(vals) == len(self.honest) and all(v == vals[0] for v in vals)

    def decided_repr(self) -> str:
        vals = [self.outputs[i] for i in self.honest if i in self.outputs]
        if not vals:
            return "NONE"
        if any(v != vals[0] for v in vals):
            return "MIXED"
        return format_value(vals[0])

    def csv_row(self) -> dict[str, Any]:
        c, m = self.config, self.metrics
        done = [m.completion_step[i] for i in self.honest if i in m.completion_step]
        return {
            "seed": c.seed,
            "protocol": c.protocol,
            "n": c.n,
            "t": c.t,
            "ell": c.ell,
            "adversary": c.adversary,
            "scheduler": c.scheduler,
            "total_bits": m.total_bits,
            "bits_rbc": m.bits_rbc,
            "bits_apva": m.bits_apva,
            "bits_abba": m.bits_abba,
            "bits_acidd": m.bits_acidd,
            "elections": m.elections,
            "completion_step": max(done) if len(done) == len(self.honest) else -1,
            "decided": self.decided_repr(),
            "all_honest_agree": self.all_honest_agree,
        }


def format_value(v: Any) -> str:
    if v is BOT_DEFAULT:
        return "BOT"
    if isinstance(v, (bytes, bytearray)):
        return bytes(v).hex()
    if isinstance(v, PartialVector):
        return "".join("-" if x == BOT else str(x) for x in v)
    if hasattr(v, "data"):
        return bytes(v.data).hex()
    return str(v)


# inputs

def _apva_vectors(cfg: ScenarioConfig, honest: list[int], rng: random.Random) -> dict[int, dict[int, int]]:
    """Partial input vectors: a common set of n-t indices is known to every honest
    node, each remaining index is known with probability 1/2."""
    n, t = cfg.n, cfg.t
    core = set(rng.sample(range(1, n + 1), n - t))
    base = [rng.randrange(2) for _ in range(n)]
    other = [1 - b for b in base]
    out = {}
    for pos, i in enumerate(honest):
        if cfg.input_mode == "unanimous":
            bits = base
        elif cfg.input_mode == "split":
            bits = base if pos < (len(honest) + 1) // 2 else other
        else:
            bits = [rng.randrange(2) for _ in range(n)]
        out[i] = {j: bits[j - 1] for j in range(1, n + 1) if j in core or rng.random() < 0.5}
    return out


def _abbba_pairs(cfg: ScenarioConfig, honest: list[int], rng: random.Random) -> dict[int, tuple[int, int]]:
    mode = cfg.input_mode
    if mode == "unanimous":
        p = (rng.randrange(2), rng.randrange(2))
        pairs = {i: p for i in honest}
    elif mode == "split":
        pairs = {i: ((0, 0) if pos < len(honest) // 2 else (1, 0)) for pos, i in enumerate(honest)}
    else:
        pairs = {i: (rng.randrange(2), rng.randrange(2)) for i in honest}
    # keep the conditional-termination precondition: any beta=1 needs t+1 alpha=1
    if any(b == 1 for _, b in pairs.values()):
        ones = [i for i in honest if pairs[i][0] == 1]
        for i in honest:
            if len(ones) >= cfg.t + 1:
                break
            if pairs[i][0] == 0:
                pairs[i] = (1, pairs[i][1])
                ones.append(i)
    return pairs


def make_inputs(cfg: ScenarioConfig, honest: list[int], faulty: tuple[int, ...]) -> dict[int, Any]:
    """Per-node top-level inputs (faulty nodes get arbitrary ones of the right type)."""
    rng = random.Random(f"{cfg.seed}/inputs")
    size = cfg.ell // 8
    p = cfg.protocol
    if p in ("OciorABA", "OciorABAStar"):
        w0, w1 = rng.randbytes(size), rng.randbytes(size)
        if cfg.input_mode == "unanimous":
            vals = {i: w0 for i in honest}
        elif cfg.input_mode == "split":
            vals = {i: (w0 if pos < (len(honest) + 1) // 2 else w1) for pos, i in enumerate(honest)}
        else:
            vals = {i: rng.randbytes(size) for i in honest}
        vals.update({b: rng.randbytes(size) for b in faulty})
    elif p == "RBC":
        vals = {cfg.leader: rng.randbytes(size)}
    elif p == "ABBA":
        b0 = rng.randrange(2)
        if cfg.input_mode == "unanimous":
            vals = {i: b0 for i in honest}
        elif cfg.input_mode == "split":
            vals = {i: int(pos >= len(honest) // 2) for pos, i in enumerate(honest)}
        else:
            vals = {i: rng.randrange(2) for i in honest}
        vals.update({b: rng.randrange(2) for b in faulty})
    elif p == "ABBBA":
        vals = _abbba_pairs(cfg, honest, rng)
        vals.update({b: (rng.randrange(2), rng.randrange(2)) for b in faulty})
    else:
        vals = _apva_vectors(cfg, honest, rng)
        vals.update({
            b: {j: rng.randrange(2) for j in range(1, cfg.n + 1) if rng.random() < 0.8}
            for b in faulty
        })
    if cfg.inputs is not None:
        vals.update(cfg.inputs)
    return vals


# event loop

class _Accounting:
    def __init__(self, n: int, metrics: Metrics):
        self.n = n
        self.m = metrics
        self.header = header_bits(n)
        self.classes: dict[InstanceId, tuple[str, bool, bool]] = {}

    def classify(self, iid: InstanceId) -> tuple[str, bool, bool]:
        c = self.classes.get(iid)
        if c is None:
            label = iid[-1][0]
            in_apva = any(comp[0] == "APVA" for comp in iid)
            c = (label, in_apva, label == "RBC" and not in_apva)
            self.classes[iid] = c
        return c

    def charge(self, iid: InstanceId, tag: Tag, payload: Any, copies: int) -> None:
        bits = (payload_bits(tag, payload, self.n) + self.header) * copies
        m = self.m
        label, in_apva, top_rbc = self.classify(iid)
        m.total_bits += bits
        m.total_msgs += copies
        m.bits_by_tag[label] = m.bits_by_tag.get(label, 0) + bits
        m.msgs_by_tag[label] = m.msgs_by_tag.get(label, 0) + copies
        m.bits_by_message[tag.value] = m.bits_by_message.get(tag.value, 0) + bits
        if in_apva:
            m.bits_apva += bits
        if top_rbc:
            m.bits_rbc += bits
        if label == "ABBA":
            m.bits_abba += bits
        elif label == "ACIDd":
            m.bits_acidd += bits


def run(config: ScenarioConfig, keep_nodes: bool = False) -> RunResult:
    """Execute one scenario to completion, quiescence or ``max_steps``."""
    cfg = config
    cfg.validate()
    n, t = cfg.n, cfg.t
    faulty = cfg.faulty()
    honest = [i for i in range(1, n + 1) if i not in faulty]
    root = cfg.root()
    oracle = CoinOracle(n, t, random.Random(f"{cfg.seed}/coin").getrandbits(64), set(honest))
    nodes: list[Node | None] = [None] + [Node(i, n, t, root, oracle, cfg.apva_round_limit) for i in range(1, n + 1)]
    byz_rng = random.Random(f"{cfg.seed}/byzantine-behaviour")
    behaviours: dict[int, Behaviour] = {}
    for b in faulty:
        k = cfg.crash_after if cfg.crash_after is not None else byz_rng.randint(1, 4 * n * n)
        behaviours[b] = Behaviour(cfg.adversary, n, random.Random(f"{cfg.seed}/noise/{b}"), k)

    slow = None
    if cfg.scheduler == "targeted-delay":
        trng = random.Random(f"{cfg.seed}/targets")
        targets = set(trng.sample(honest, max(1, min(t, len(honest)))))
        slow = lambda env: env.dst in targets  # noqa: E731
    elif cfg.scheduler == "split-brain":
        left = set(range(1, (n + 1) // 2 + 1))
        slow = lambda env: env.src != 0 and ((env.src in left) != (env.dst in left))  # noqa: E731
    bound = fairness_bound(n)
    sched = Scheduler(cfg.scheduler, random.Random(f"{cfg.seed}/scheduler"), bound, slow)
    max_steps = cfg.max_steps if cfg.max_steps is not None else default_max_steps(n)

    metrics = Metrics()
    acct = _Accounting(n, metrics)
    inputs = make_inputs(cfg, honest, faulty)
    apva = cfg.protocol == "APVA"
    for i in range(1, n + 1):
        if i not in inputs:
            continue
        if apva:
            for j, v in sorted(inputs[i].items()):
                sched.push(Envelope(0, i, root, Tag.INPUT, (j, v)), 0)
        else:
            sched.push(Envelope(0, i, root, Tag.INPUT, inputs[i]), 0)

    now = 0
    remaining = set(honest)

    def flush(i: int) -> None:
        node = nodes[i]
        out, node.outbox = node.outbox, []
        beh = behaviours.get(i)
        if beh is None:
            for iid, tag, payload, dst in out:
                dsts = range(1, n + 1) if dst is None else (dst,)
                acct.charge(iid, tag, payload, len(dsts))
                for d in dsts:
                    sched.push(Envelope(i, d, iid, tag, payload), now)
        else:
            for item in out:
                for d, iid, tag, payload in beh.step(item):
                    metrics.byzantine_msgs += 1
                    metrics.byzantine_bits += payload_bits(tag, payload, n) + acct.header
                    sched.push(Envelope(i, d, iid, tag, payload), now)
        if i in remaining and node.done:
            remaining.discard(i)
            metrics.completion_step[i] = now

    def process(env: Envelope) -> None:
        metrics.deliveries += 1
        i = env.dst
        beh = behaviours.get(i)
        if beh is not None:
            if not beh.processes_events:
                return
            beh.count_event()
        node = nodes[i]
        if env.tag is Tag.INPUT:
            node.input(env.payload)
        else:
            node.deliver(env.instance, env.tag, env.payload, env.src)
        flush(i)
        released = oracle.drain()
        while released:
            for caller, ident, value in released:
                nodes[caller].coin_released(ident, value)
                flush(caller)
            released = oracle.drain()

    liveness = None
    while remaining:
        if now >= max_steps:
            liveness = LivenessViolation(now, f"max_steps={max_steps} reached", {})
            break
        if not sched:
            liveness = LivenessViolation(now, "no pending messages (quiescent)", {})
            break
        msg = sched.due(now)
        while msg is not None:
            process(msg.envelope)
            msg = sched.due(now)
        if sched:
            process(sched.next(now).envelope)
        now += 1
    metrics.steps = now

    if liveness is not None:
        liveness.stuck = {
            i: [repr(iid) for iid in nodes[i].pending_instances()] for i in sorted(remaining)
        }

    # post-run fairness audit: nothing was delivered late, and nothing still
    # pending is overdue for a recipient that could still act on it
    live = {i for i in range(1, n + 1) if not nodes[i].done}
    fairness_ok = sched.max_delay <= bound and not any(
        m.envelope.dst in live for m in sched.overdue(now)
    )

    outputs = {}
    apva_inputs: dict[int, dict[int, int]] = {}
    apva_outputs: dict[int, Any] = {}
    apva_rounds: dict[int, int] = {}
    for i in honest:
        node = nodes[i]
        top = node.root_instance
        if top.has_output:
            outputs[i] = top.output
            metrics.decided[i] = top.output
        apva_inst = top if apva else node.instances.get(root.child("APVA", TOP_ID))
        if apva:
            apva_inputs[i] = dict(inputs.get(i, {}))
        elif apva_inst is not None:
            apva_inputs[i] = {j: v for j, v in enumerate(top.votes, 1) if v != BOT}
        if apva_inst is not None:
            if apva_inst.has_output:
                apva_outputs[i] = apva_inst.output
            if apva_inst.output_round is not None:
                apva_rounds[i] = apva_inst.output_round
                metrics.elections = max(metrics.elections, apva_inst.output_round)

    return RunResult(
        config=cfg,
        metrics=metrics,
        honest=tuple(honest),
        byzantine=faulty,
        inputs=inputs,
        outputs=outputs,
        completed=not remaining,
        liveness=liveness,
        fairness_ok=fairness_ok,
        max_delay=sched.max_delay,
        apva_inputs=apva_inputs,
        apva_outputs=apva_outputs,
        apva_rounds=apva_rounds,
        nodes=nodes if keep_nodes else None,
    )
