"""Experiment planning, batch execution, persistence, and analysis tables.

A run materializes the persona-by-attribute-group grid, executes one dialogue
per profile, judges every explanation, and persists everything under the
output directory: ``transcripts.jsonl`` (one record per dialogue, judgments
included), ``metrics.json``/``metrics.csv``, ``config.json``, and
``manifest.json``. Runs are resumable; completed profiles are never
re-executed. Scripted backends force sequential execution so replays are
byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from .agent import AgentConfig, CrsAgent, strip_exp_token
from .catalog import AttributeGroup, Catalog, load_catalog, render_item_card
from .dialogue import (
    DialogueState,
    render_history,
    run_dialogue,
    seeker_texts,
    state_from_record,
    state_to_record,
    strategy_from_dict,
)
from .errors import InsufficientBandDataError, PccrsError
from .evaluation import (
    DialogueMetrics,
    IntentionTriple,
    aggregate_metrics,
    evaluate_dialogue,
    judge_credibility,
    judge_intention,
    persuasiveness,
)
from .gateway import LlmGateway, ScriptedBackend, make_backend
from .refiner import refine_loop
from .simulator import PERSONA_NAMES, SeekerProfile, persona_registry
from .strategies import STRATEGY_ORDER, Strategy, card_for
from .textmetrics import BandedExplanation, relevance_gap

logger = logging.getLogger(__name__)

ABLATION_ARMS: dict[str, tuple[bool, bool]] = {
    "full": (True, True),
    "no_seg": (False, True),
    "no_ier": (True, False),
    "neither": (False, False),
}


def _file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class ExperimentConfig:
    dataset: str
    catalog_path: str
    groups: list[AttributeGroup]
    personas: list[str] = field(default_factory=lambda: list(PERSONA_NAMES))
    max_turns: int = 10
    turn_unit: str = "exchange"
    agent: AgentConfig = field(default_factory=AgentConfig)
    backend_spec: str = "live"
    judge_backend_spec: str | None = None
    live_options: dict[str, Any] = field(default_factory=dict)
    out_dir: str = "runs/out"
    parallelism: int = 4
    persona_definitions: str | None = None
    ablation: dict[str, dict[str, str]] = field(default_factory=dict)

    def semantic_dict(self) -> dict:
        """The fields that identify the experiment (output location excluded)."""
        return {
            "dataset": self.dataset,
            "catalog_path": self.catalog_path,
            "personas": list(self.personas),
            "groups": [{"id": g.id, "attributes": sorted(g.attributes)} for g in self.groups],
            "max_turns": self.max_turns,
            "turn_unit": self.turn_unit,
            "agent": asdict(self.agent),
            "backend": self.backend_spec,
            "judge_backend": self.judge_backend_spec or self.backend_spec,
        }

    def _backend_kind(self, spec: str) -> str:
        # paths stay out of the fingerprint so relocated inputs hash alike
        if spec.startswith("scripted:"):
            return "scripted"
        return f"live:{self.live_options.get('endpoint', '')}:{self.live_options.get('model', '')}"

    def fingerprint(self) -> str:
        payload = {
            "dataset": self.dataset,
            "personas": list(self.personas),
            "groups": [{"id": g.id, "attributes": sorted(g.attributes)} for g in self.groups],
            "max_turns": self.max_turns,
            "turn_unit": self.turn_unit,
            "agent": asdict(self.agent),
            "backend_kind": self._backend_kind(self.backend_spec),
            "judge_backend_kind": self._backend_kind(self.judge_backend_spec or self.backend_spec),
            "catalog_sha256": _file_sha256(self.catalog_path),
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        raw = Path(path).read_text(encoding="utf-8")
        data = yaml.safe_load(raw)
        if not isinstance(data, Mapping):
            raise ValueError(f"config file {path} must hold a mapping")
        groups = [
            AttributeGroup.of(g["id"], g["attributes"]) for g in data.get("attribute_groups", [])
        ]
        agent_data = data.get("agent", {})
        return cls(
            dataset=data.get("dataset", "unnamed"),
            catalog_path=data["catalog"],
            groups=groups,
            personas=list(data.get("personas", PERSONA_NAMES)),
            max_turns=int(data.get("max_turns", 10)),
            turn_unit=data.get("turn_unit", "exchange"),
            agent=AgentConfig(
                retrieval_k=int(agent_data.get("retrieval_k", 10)),
                enable_strategies=bool(agent_data.get("enable_strategies", True)),
                enable_refinement=bool(agent_data.get("enable_refinement", True)),
                max_refine_iterations=int(agent_data.get("max_refine_iterations", 2)),
            ),
            backend_spec=data.get("backend", "live"),
            judge_backend_spec=data.get("judge_backend"),
            live_options=dict(data.get("live", {})),
            out_dir=data.get("out", "runs/out"),
            parallelism=int(data.get("parallelism", 4)),
            persona_definitions=data.get("persona_definitions"),
            ablation=dict(data.get("ablation", {})),
        )


@dataclass
class RunManifest:
    config_fingerprint: str
    statuses: dict[str, str]
    duration_seconds: float
    versions: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "config_fingerprint": self.config_fingerprint,
            "dialogues": dict(sorted(self.statuses.items())),
            "duration_seconds": self.duration_seconds,
            "versions": self.versions,
        }


def plan(config: ExperimentConfig) -> list[SeekerProfile]:
    """Full persona-major cross product of personas and attribute groups."""
    if not config.personas or not config.groups:
        raise ValueError("plan needs at least one persona and one attribute group")
    registry = persona_registry(config.persona_definitions)
    profiles = []
    for name in config.personas:
        persona = registry[name]
        for group in config.groups:
            profiles.append(SeekerProfile(persona=persona, group=group))
    return profiles


def record_key(record: Mapping) -> str:
    profile = record["profile"]
    return f"{profile['persona']}|{profile['group']['id']}"


def _dump_record(record: Mapping) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def load_transcripts(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            records.append(json.loads(line))
    return records


def _write_metrics_csv(path: Path, report: Mapping) -> None:
    rows = [
        ("persuasiveness_per_explanation_mean", report["persuasiveness"]["per_explanation_mean"]),
        ("persuasiveness_per_dialogue_mean", report["persuasiveness"]["per_dialogue_mean"]),
        ("credibility_mean", report["credibility_mean"]),
        ("convincing_acceptance", report["convincing_acceptance"]),
        ("recall@1", report["recall"].get("1")),
        ("recall@5", report["recall"].get("5")),
        ("recall@10", report["recall"].get("10")),
        ("success_rate", report["success_rate"]),
        ("dialogues", report["counts"]["dialogues"]),
        ("accepted", report["counts"]["accepted"]),
        ("explanations", report["counts"]["explanations"]),
    ]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric", "value"])
        for name, value in rows:
            writer.writerow([name, "" if value is None else value])


def _judged_metrics(records: Sequence[Mapping]) -> list[DialogueMetrics]:
    out = []
    for record in records:
        judgments = record.get("judgments")
        if judgments:
            out.append(DialogueMetrics.from_dict(judgments))
    return out


def run(config: ExperimentConfig) -> RunManifest:
    """Execute every planned dialogue, judge, aggregate, and persist."""
    started = time.perf_counter()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    catalog = load_catalog(config.catalog_path)
    backend = make_backend(config.backend_spec, config.live_options)
    judge_backend = make_backend(
        config.judge_backend_spec or config.backend_spec, config.live_options
    )
    gateway = LlmGateway(backend)
    judge_gateway = LlmGateway(judge_backend)

    profiles = plan(config)
    fingerprint = config.fingerprint()
    transcripts_path = out / "transcripts.jsonl"
    existing = {record_key(r): r for r in load_transcripts(transcripts_path)}

    statuses: dict[str, str] = {}
    records: dict[str, dict] = {}
    to_run: list[SeekerProfile] = []
    for profile in profiles:
        prior = existing.get(profile.key)
        if prior is not None and not prior.get("failure"):
            records[profile.key] = prior
            statuses[profile.key] = "resumed"
        else:
            to_run.append(profile)

    def execute(profile: SeekerProfile) -> dict:
        agent = CrsAgent(gateway, catalog, config.agent)
        state = run_dialogue(profile, agent, gateway, config.max_turns, config.turn_unit)
        record = state_to_record(state)
        record["config_fingerprint"] = fingerprint
        record["judgments"] = None
        record["accepted_item_match"] = None
        return record

    sequential = isinstance(backend, ScriptedBackend) or config.parallelism <= 1
    if sequential:
        finished = [execute(p) for p in to_run]
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            finished = list(pool.map(execute, to_run))
    if finished:
        with transcripts_path.open("a", encoding="utf-8") as handle:
            for record in finished:
                handle.write(_dump_record(record) + "\n")
    for profile, record in zip(to_run, finished):
        records[profile.key] = record
        statuses[profile.key] = "failed" if record.get("failure") else "ran"

    for profile in profiles:
        record = records[profile.key]
        if record.get("failure") or record.get("judgments"):
            continue
        try:
            metrics = evaluate_dialogue(state_from_record(record), catalog, judge_gateway)
        except PccrsError as exc:
            record["failure"] = f"judge: {type(exc).__name__}: {exc}"
            statuses[profile.key] = "failed"
            logger.error("judging failed for %s: %s", profile.key, exc)
            continue
        record["judgments"] = metrics.to_dict()
        record["accepted_item_match"] = metrics.accepted_item_match

    ordered = [records[p.key] for p in profiles]
    transcripts_path.write_text(
        "".join(_dump_record(r) + "\n" for r in ordered), encoding="utf-8"
    )

    report = aggregate_metrics(_judged_metrics(ordered))
    (out / "metrics.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _write_metrics_csv(out / "metrics.csv", report)
    (out / "config.json").write_text(
        json.dumps(
            {**config.semantic_dict(), "out": str(out), "parallelism": config.parallelism},
            sort_keys=True,
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )

    manifest = RunManifest(
        config_fingerprint=fingerprint,
        statuses=statuses,
        duration_seconds=time.perf_counter() - started,
        versions={"pccrs": _package_version(), "python": sys.version.split()[0]},
    )
    (out / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    failed = [k for k, s in statuses.items() if s == "failed"]
    if failed:
        logger.warning("run finished with %d failed dialogue(s): %s", len(failed), failed)
    return manifest


def _package_version() -> str:
    from . import __version__

    return __version__


def ablation(config: ExperimentConfig) -> dict:
    """Run the four arms (full, no_seg, no_ier, neither) over a shared plan."""
    base_out = Path(config.out_dir)
    arm_metrics: dict[str, dict] = {}
    for arm, (enable_strategies, enable_refinement) in ABLATION_ARMS.items():
        overrides = config.ablation.get(arm, {})
        arm_backend = overrides.get("backend", config.backend_spec)
        arm_config = replace(
            config,
            out_dir=str(base_out / arm),
            agent=replace(
                config.agent,
                enable_strategies=enable_strategies,
                enable_refinement=enable_refinement,
            ),
            backend_spec=arm_backend,
            judge_backend_spec=overrides.get(
                "judge_backend", config.judge_backend_spec or arm_backend
            ),
        )
        run(arm_config)
        arm_metrics[arm] = json.loads((base_out / arm / "metrics.json").read_text(encoding="utf-8"))
    payload = {"arms": arm_metrics}
    (base_out / "ablation.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    with (base_out / "ablation.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["arm", "persuasiveness", "credibility_mean", "convincing_acceptance", "success_rate"]
        )
        for arm in ABLATION_ARMS:
            m = arm_metrics[arm]
            writer.writerow(
                [
                    arm,
                    _cell(m["persuasiveness"]["per_explanation_mean"]),
                    _cell(m["credibility_mean"]),
                    _cell(m["convincing_acceptance"]),
                    _cell(m["success_rate"]),
                ]
            )
    return payload


def _cell(value: Any) -> Any:
    return "" if value is None else value


def _dialogue_succeeded(record: Mapping) -> bool:
    return record.get("termination") == "accepted" and bool(record.get("accepted_item_match"))


def strategy_persona_table(records: Sequence[Mapping]) -> dict[str, list[dict]]:
    """Per persona, the top-3 strategies by recommendation success rate.

    A strategy counts for a dialogue when it was the primary of at least one
    explanation there; its rate is successes over appearances. Ties keep the
    canonical strategy order.
    """
    appearances: dict[str, dict[Strategy, list[int]]] = {}
    for record in records:
        profile = record.get("profile")
        if not profile:
            continue
        persona = profile["persona"]
        used: set[Strategy] = set()
        for utterance in record.get("utterances", []):
            strategy = utterance.get("strategy")
            if utterance.get("action_kind") == "explain" and strategy:
                used.add(Strategy(strategy["primary"]))
        if not used:
            continue
        succeeded = _dialogue_succeeded(record)
        rows = appearances.setdefault(persona, {})
        for name in used:
            cell = rows.setdefault(name, [0, 0])
            cell[0] += 1
            if succeeded:
                cell[1] += 1
    table: dict[str, list[dict]] = {}
    for persona in sorted(appearances):
        ranked = sorted(
            appearances[persona].items(),
            key=lambda kv: (-(kv[1][1] / kv[1][0]), STRATEGY_ORDER.index(kv[0])),
        )
        table[persona] = [
            {
                "strategy": name.value,
                "abbreviation": card_for(name).abbreviation,
                "success_rate": succeeded / appeared,
                "dialogues": appeared,
            }
            for name, (appeared, succeeded) in ranked[:3]
        ]
    return table


def _explanation_samples(records: Sequence[Mapping]) -> list[tuple[Mapping, Mapping, Mapping]]:
    """(record, utterance, judgment) for every judged explanation."""
    samples = []
    for record in records:
        judgments = record.get("judgments")
        if not judgments:
            continue
        by_index = {u["index"]: u for u in record.get("utterances", [])}
        for judgment in judgments.get("records", []):
            utterance = by_index.get(judgment["utterance_index"])
            if utterance is not None:
                samples.append((record, utterance, judgment))
    return samples


def relevance_gap_rows(records: Sequence[Mapping], catalog: Catalog) -> list[dict]:
    """Figure-style gap table: band means per reference and metric."""
    explanations = []
    for record, utterance, judgment in _explanation_samples(records):
        state = state_from_record(record)
        history = " ".join(seeker_texts(state, before_index=utterance["index"]))
        card = render_item_card(catalog.get(utterance["item_id"]))
        explanations.append(
            BandedExplanation(
                text=strip_exp_token(utterance["text"]),
                band=judgment["credibility"]["band"],
                item_info=card.text,
                user_history=history,
            )
        )
    return relevance_gap(explanations).to_rows()


def refinement_sweep(
    run_dir: str | Path,
    iterations: Sequence[int],
    gateway: LlmGateway,
    judge_gateway: LlmGateway,
    catalog: Catalog,
) -> dict:
    """Re-refine the credibility-3 explanations at each iteration cap and re-judge.

    Iteration 0 is the identity arm: the stored judgments are reported as-is.
    """
    records = load_transcripts(Path(run_dir) / "transcripts.jsonl")
    samples = [
        (record, utterance, judgment)
        for record, utterance, judgment in _explanation_samples(records)
        if judgment["credibility"]["score"] == 3
    ]
    if not samples:
        raise InsufficientBandDataError("no explanation with credibility score 3 in this run")

    points = []
    for cap in iterations:
        credibilities: list[int] = []
        persuasion_values: list[float] = []
        for record, utterance, judgment in samples:
            if cap == 0:
                credibilities.append(judgment["credibility"]["score"])
                stored = judgment["persuasiveness"]
                if stored["defined"]:
                    persuasion_values.append(stored["value"])
                continue
            state = state_from_record(record)
            prefix = DialogueState(
                profile=state.profile,
                utterances=[u for u in state.utterances if u.index < utterance["index"]],
            )
            card = render_item_card(catalog.get(utterance["item_id"]))
            strategy = strategy_from_dict(utterance.get("strategy"))
            final, _ = refine_loop(
                gateway,
                render_history(prefix),
                card,
                strategy,
                strip_exp_token(utterance["text"]),
                max_iterations=cap,
            )
            score = judge_credibility(judge_gateway, final, card)
            credibilities.append(score.score)
            i_post, _evidence = judge_intention(judge_gateway, state.profile, final, "explanation")
            triple = IntentionTriple(
                i_pre=judgment["i_pre"], i_post=i_post, i_true=judgment["i_true"]
            )
            result = persuasiveness(triple)
            if result.defined:
                persuasion_values.append(result.value)
        points.append(
            {
                "max_iterations": cap,
                "credibility_mean": sum(credibilities) / len(credibilities),
                "persuasiveness_mean": (
                    sum(persuasion_values) / len(persuasion_values) if persuasion_values else None
                ),
                "count": len(samples),
            }
        )
    return {"iterations": points}


def write_report(run_dir: str | Path, catalog: Catalog | None = None) -> dict:
    """Recompute every aggregate from persisted transcripts alone."""
    run_dir = Path(run_dir)
    records = load_transcripts(run_dir / "transcripts.jsonl")
    report = aggregate_metrics(_judged_metrics(records))
    (run_dir / "metrics.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _write_metrics_csv(run_dir / "metrics.csv", report)

    table = strategy_persona_table(records)
    (run_dir / "strategy_persona.json").write_text(
        json.dumps(table, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    if catalog is not None:
        try:
            rows = relevance_gap_rows(records, catalog)
        except InsufficientBandDataError as exc:
            logger.info("relevance gap skipped: %s", exc)
        else:
            with (run_dir / "relevance_gap.csv").open("w", newline="", encoding="utf-8") as handle:
                writer = csv.DictWriter(
                    handle,
                    fieldnames=["reference", "metric", "mean_low", "mean_high", "gap", "n_low", "n_high"],
                )
                writer.writeheader()
                writer.writerows(rows)
    return report
