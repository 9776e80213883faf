"""Per-run property checks.  Each returns a list of human-readable violations."""

from __future__ import annotations

from ..core import BOT, PartialVector
from .runner import RunResult


def _termination(r: RunResult) -> list[str]:
    out = []
    if not r.completed:
        out.append(f"termination: {r.liveness}")
    if not r.fairness_ok:
        out.append(f"fairness: max delay {r.max_delay} exceeds the bound")
    return out


def _agreement(r: RunResult, what: str) -> list[str]:
    vals = {repr(r.outputs[i]) for i in r.honest if i in r.outputs}
    if len(vals) > 1:
        return [f"{what}: honest outputs differ {sorted(vals)}"]
    return []


def check_apva_output(r: RunResult, outputs: dict, ledger: dict[int, dict[int, int]]) -> list[str]:
    """Consistency, |M(w)| >= n-t and traceability of every non-missing element."""
    n, t = r.config.n, r.config.t
    out = []
    vecs = {repr(v) for v in outputs.values()}
    if len(vecs) > 1:
        out.append(f"apva consistency: outputs differ {sorted(vecs)}")
    for i, w in outputs.items():
        if not isinstance(w, PartialVector) or len(w) != n:
            out.append(f"apva: node {i} output is not a length-{n} partial vector")
            continue
        if len(w.nonmissing()) < n - t:
            out.append(f"apva validity: |M(w)|={len(w.nonmissing())} < n-t at node {i}")
        for j, x in enumerate(w, 1):
            if x != BOT and not any(ledger.get(h, {}).get(j) == x for h in r.honest):
                out.append(f"apva validity: w[{j}]={x} not input by any honest node")
        break  # identical outputs, one is enough once consistency is checked
    rounds = set(r.apva_rounds.values())
    if len(rounds) > 1:
        out.append(f"apva lockstep: honest nodes terminated in rounds {sorted(rounds)}")
    return out


def check_aba(r: RunResult) -> list[str]:
    out = _termination(r) + _agreement(r, "consistency")
    honest_inputs = {r.inputs[i] for i in r.honest}
    if len(honest_inputs) == 1 and r.completed:
        (w,) = honest_inputs
        bad = [i for i in r.honest if r.outputs.get(i) != w]
        if bad:
            out.append(f"validity: unanimous input not output at nodes {bad}")
    if r.config.protocol == "OciorABA" and r.apva_outputs:
        out += check_apva_output(r, r.apva_outputs, r.apva_inputs)
    return out


def check_apva(r: RunResult) -> list[str]:
    return _termination(r) + check_apva_output(r, r.apva_outputs, r.apva_inputs)


def check_rbc(r: RunResult) -> list[str]:
    out = _agreement(r, "rbc consistency")
    if not r.fairness_ok:
        out.append("fairness: deadline missed")
    leader = r.config.leader
    delivered = [i for i in r.honest if i in r.outputs]
    if leader in r.honest:
        w = r.inputs[leader]
        bad = [i for i in r.honest if r.outputs.get(i) != w]
        if bad:
            out.append(f"rbc validity: honest leader's value not delivered at {bad}")
    elif delivered and len(delivered) < len(r.honest):
        missing = [i for i in r.honest if i not in r.outputs]
        out.append(f"rbc totality: {delivered} delivered but {missing} did not")
    return out


def check_abba(r: RunResult) -> list[str]:
    out = _termination(r) + _agreement(r, "abba agreement")
    allowed = {r.inputs[i] for i in r.honest}
    for i in r.honest:
        if i in r.outputs and r.outputs[i] not in allowed:
            out.append(f"abba validity: node {i} decided {r.outputs[i]} not input by any honest node")
    return out


def abbba_violations(t: int, honest_inputs: list[tuple[int, int]], outputs: list[int | None]) -> list[str]:
    """Biased validity, biased integrity and conditional termination for one run.

    ``outputs`` holds the output of each honest node (None if it never output).
    """
    out = []
    betas = sum(b for _, b in honest_inputs)
    alphas = sum(a for a, _ in honest_inputs)
    if betas >= t + 1 and 0 in outputs:
        out.append("abbba biased validity: output 0 although t+1 honest inputs had beta=1")
    if 1 in outputs and not any(a or b for a, b in honest_inputs):
        out.append("abbba biased integrity: output 1 without any honest 1 input")
    condition = betas == 0 or alphas >= t + 1
    if condition and None in outputs:
        out.append("abbba conditional termination: an honest node never output")
    return out


def check_abbba(r: RunResult) -> list[str]:
    out = []
    if not r.fairness_ok:
        out.append("fairness: deadline missed")
    inputs = [r.inputs[i] for i in r.honest]
    outputs = [r.outputs.get(i) for i in r.honest]
    return out + abbba_violations(r.config.t, inputs, outputs)


CHECKS = {
    "OciorABA": check_aba,
    "OciorABAStar": check_aba,
    "APVA": check_apva,
    "RBC": check_rbc,
    "ABBA": check_abba,
    "ABBBA": check_abbba,
}


def check(r: RunResult) -> list[str]:
    return CHECKS[r.config.protocol](r)
