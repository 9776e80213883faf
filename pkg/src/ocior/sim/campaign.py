"""Seeded multi-run campaigns, the named acceptance suites and the exhaustive
biased-agreement schedule search."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from ..abbba import ABBBA
from ..core import Event, EventKind, InstanceId, Tag
from .byzantine import BEHAVIOURS
from .checks import abbba_violations, check
from .runner import ADVERSARIES, INPUT_MODES, ScenarioConfig, run
from .scheduler import STRATEGIES


def max_faults(n: int) -> int:
    return (n - 1) // 3


@dataclass
class RunRecord:
    row: dict
    violations: list[str]
    bits_by_tag: dict[str, int]
    completed: bool


@dataclass
class CampaignReport:
    records: list[RunRecord] = field(default_factory=list)

    @property
    def runs(self) -> int:
        return len(self.records)

    @property
    def violations(self) -> list[tuple[dict, str]]:
        return [(r.row, v) for r in self.records for v in r.violations]

    @property
    def failures(self) -> int:
        return sum(1 for r in self.records if r.violations)

    def rows(self) -> list[dict]:
        return [r.row for r in self.records]

    def summary(self) -> dict:
        n = max(1, self.runs)
        tags: dict[str, float] = {}
        for r in self.records:
            for k, v in r.bits_by_tag.items():
                tags[k] = tags.get(k, 0) + v
        return {
            "runs": self.runs,
            "failures": self.failures,
            "violations": len(self.violations),
            "liveness_failures": sum(1 for r in self.records if not r.completed),
            "mean_bits_by_tag": {k: v / n for k, v in sorted(tags.items())},
            "mean_total_bits": sum(r.row["total_bits"] for r in self.records) / n,
            "mean_elections": sum(r.row["elections"] for r in self.records) / n,
        }


def execute(cfg: ScenarioConfig) -> RunRecord:
    result = run(cfg)
    return RunRecord(result.csv_row(), check(result), dict(result.metrics.bits_by_tag), result.completed)


def run_campaign(
    configs: Iterable[ScenarioConfig],
    workers: int = 1,
    on_record: Callable[[RunRecord], None] | None = None,
) -> CampaignReport:
    """Run every config; results keep the order of ``configs``."""
    report = CampaignReport()
    configs = list(configs)
    if workers <= 1:
        records = map(execute, configs)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        records = pool.map(execute, configs, chunksize=8)
    try:
        for rec in records:
            report.records.append(rec)
            if on_record is not None:
                on_record(rec)
    finally:
        if pool is not None:
            pool.shutdown()
    return report


def grid(
    protocols: Iterable[str],
    ns: Iterable[int],
    modes: Iterable[str] = INPUT_MODES,
    adversaries: Iterable[str] = ADVERSARIES,
    schedulers: Iterable[str] = STRATEGIES,
    seeds: int = 1,
    seed_base: int = 0,
    ell: int = 64,
    t: int | None = None,
    **extra,
) -> Iterator[ScenarioConfig]:
    """Cartesian product of the dimensions, ``seeds`` seeded runs per cell."""
    for p, n, mode, adv, sch in itertools.product(protocols, ns, modes, adversaries, schedulers):
        for s in range(seeds):
            yield ScenarioConfig(
                n=n, t=max_faults(n) if t is None else t, protocol=p, input_mode=mode,
                ell=ell, adversary=adv, scheduler=sch, seed=seed_base + s, **extra,
            )


# named suites

def suite_rbc(seeds: int = 300, seed_base: int = 0) -> Iterator[ScenarioConfig]:
    """Per adversary and n: half the runs have a faulty leader."""
    for adv in ("silent", "equivocator", "crash-after-k"):
        for n in (4, 7):
            t = max_faults(n)
            for s in range(seeds):
                seed = seed_base + s
                others = list(range(2, n + 1))[seed % (n - 1):] + list(range(2, n + 1))[: seed % (n - 1)]
                byz = (1, *others[: t - 1]) if seed % 2 == 0 else tuple(others[:t])
                yield ScenarioConfig(
                    n=n, t=t, protocol="RBC", adversary=adv, byzantine_set=byz,
                    scheduler=STRATEGIES[seed % len(STRATEGIES)], seed=seed, ell=64,
                )


def _cycled(protocol: str, ns, runs: int, seed_base: int, **extra) -> Iterator[ScenarioConfig]:
    cells = list(itertools.product(ADVERSARIES, STRATEGIES))
    for n in ns:
        for s in range(runs):
            adv, sch = cells[s % len(cells)]
            yield ScenarioConfig(
                n=n, t=max_faults(n), protocol=protocol, adversary=adv, scheduler=sch,
                input_mode=INPUT_MODES[(s // len(cells)) % len(INPUT_MODES)],
                seed=seed_base + s, **extra,
            )


def suite_apva(runs: int = 300, seed_base: int = 0) -> Iterator[ScenarioConfig]:
    """``runs`` seeded runs per n, cycling over the adversary x scheduler grid."""
    return _cycled("APVA", (4, 7, 10), runs, seed_base)


def suite_aba(seeds: int = 200, seed_base: int = 0, ns=(4, 7, 10, 13)) -> Iterator[ScenarioConfig]:
    return grid(("OciorABA", "OciorABAStar"), ns, seeds=seeds, seed_base=seed_base)


def suite_abbba(runs: int = 500, seed_base: int = 0) -> Iterator[ScenarioConfig]:
    for s in range(runs):
        yield ScenarioConfig(
            n=7, t=2, protocol="ABBBA", adversary="equivocator",
            scheduler=STRATEGIES[s % len(STRATEGIES)],
            input_mode=INPUT_MODES[(s // len(STRATEGIES)) % len(INPUT_MODES)],
            seed=seed_base + s,
        )


def suite_rounds(seeds: int = 200, seed_base: int = 0, n: int = 16) -> Iterator[ScenarioConfig]:
    """OciorABA at n=16 under every scheduler, faulty behaviour rotating by seed."""
    for sch in STRATEGIES:
        for s in range(seeds):
            yield ScenarioConfig(
                n=n, t=max_faults(n), protocol="OciorABA", scheduler=sch,
                adversary=BEHAVIOURS[s % len(BEHAVIOURS)],
                input_mode=INPUT_MODES[s % len(INPUT_MODES)], seed=seed_base + s,
            )


COMPLEXITY_NS = (4, 7, 10, 13, 16)


def suite_complexity(seeds: int = 10, seed_base: int = 0, ell: int = 1024) -> Iterator[ScenarioConfig]:
    for n in COMPLEXITY_NS:
        for s in range(seeds):
            yield ScenarioConfig(
                n=n, t=max_faults(n), protocol="OciorABA", ell=ell, scheduler="random",
                input_mode="random", seed=seed_base + s,
            )


def suite_subresilient(seeds: int = 200, seed_base: int = 0, n: int = 3, t: int = 1) -> Iterator[ScenarioConfig]:
    """n = 3t with an equivocating node; properties are expected to break somewhere."""
    for s in range(seeds):
        yield ScenarioConfig(
            n=n, t=t, protocol=("OciorABA", "APVA")[s % 2], adversary="equivocator",
            scheduler=STRATEGIES[s % len(STRATEGIES)], input_mode=INPUT_MODES[s % 3],
            seed=seed_base + s, allow_subresilient=True, max_steps=20_000,
        )


SUITES: dict[str, Callable[..., Iterator[ScenarioConfig]]] = {
    "rbc": suite_rbc,
    "apva": suite_apva,
    "aba": suite_aba,
    "abbba": suite_abbba,
    "rounds": suite_rounds,
    "complexity": suite_complexity,
    "subresilient": suite_subresilient,
}


def complexity_table(records: list[RunRecord]) -> list[dict]:
    """Mean honest bits per n with the bits_apva / n^3 normalisation."""
    by_n: dict[int, list[RunRecord]] = {}
    for r in records:
        by_n.setdefault(r.row["n"], []).append(r)
    table = []
    for n, recs in sorted(by_n.items()):
        k = len(recs)
        apva = sum(r.row["bits_apva"] for r in recs) / k
        rbc = sum(r.row["bits_rbc"] for r in recs) / k
        table.append({
            "n": n, "runs": k, "bits_apva": apva, "apva_per_n3": apva / n ** 3,
            "bits_rbc": rbc, "total_bits": sum(r.row["total_bits"] for r in recs) / k,
        })
    return table


RBC_NOTE = (
    "RBC bits are reported only: the Bracha broadcast used here costs O(n^2 * ell / k) "
    "per instance, so the O(n * ell) term is not certified."
)


def complexity_band(table: list[dict]) -> float:
    vals = [row["apva_per_n3"] for row in table]
    return max(vals) / min(vals)


# exhaustive schedule search for the biased binary agreement

ABBBA_BYZ_CHOICES = (None, (0, 0), (0, 1), (1, 0), (1, 1))


@dataclass
class ExhaustiveReport:
    interleavings: int
    violations: list[str]


def abbba_exhaustive(n: int = 4, t: int = 1) -> ExhaustiveReport:
    """Every honest input assignment x every value the faulty node n shows to
    node 1 x every order of node 1's events.

    Node 1's view is its own input plus one VALUE from each node (its own VALUE
    can only arrive after its input).  By symmetry node 1 stands for any honest
    node; the run's honest outputs are the set of outputs over all views that
    share the same inputs, so each property is evaluated per view.
    """
    iid = InstanceId.root("ABBBA", "ID")
    honest = list(range(1, n))
    violations = []
    count = 0
    for bits in itertools.product((0, 1), repeat=2 * len(honest)):
        inputs = {i: (bits[2 * k], bits[2 * k + 1]) for k, i in enumerate(honest)}
        for byz in ABBBA_BYZ_CHOICES:
            events = [("input", None)] + [("value", j) for j in range(1, n + 1)]
            for order in itertools.permutations(events):
                if order.index(("value", 1)) < order.index(("input", None)):
                    continue
                count += 1
                node = ABBBA(iid, 1, n, t)
                for kind, j in order:
                    if node.terminated:
                        break
                    if kind == "input":
                        node.step(Event(EventKind.INPUT, iid, inputs[1]))
                    elif j == n:
                        if byz is not None:
                            node.step(Event(EventKind.MESSAGE, iid, (Tag.ABBAVALUE, byz), j))
                    else:
                        node.step(Event(EventKind.MESSAGE, iid, (Tag.ABBAVALUE, inputs[j]), j))
                out = node.output if node.has_output else None
                for v in abbba_violations(t, list(inputs.values()), [out]):
                    violations.append(f"{v} (inputs={inputs}, byz={byz}, order={order})")
    return ExhaustiveReport(count, violations)


def replay_rows(cfg: ScenarioConfig, times: int = 3) -> list[dict]:
    return [run(cfg).csv_row() for _ in range(times)]
