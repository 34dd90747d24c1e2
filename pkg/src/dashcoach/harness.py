"""Evaluation and coaching orchestration behind the CLI.

evaluate: exhaustive dialogues over the test split for every configured
endpoint, event-recognition judging against gold labels, BLEU + BERTScore
over the open questions, and report emission (JSON / CSV / text table /
figures). coach: conditional dialogue for one clip, event detection,
database alignment, report composition. ingest: populate the merged-frame
cache.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .cache import FrameCache
from .catalog import (
    CONDITIONAL,
    EXHAUSTIVE,
    OPEN,
    Catalog,
    default_catalog,
    expand_for_clip,
    load_catalog,
)
from .coaching import (
    CoachingDB,
    CoachingReport,
    align_with_db,
    compose_report,
    default_db,
    detect_events,
    load_db,
)
from .errors import ConfigError, DecodeError, GoldError
from .frames import MergedFrameSet, MergePolicy, merge_clip
from .gateway import (
    DialogueTranscript,
    GenerationParams,
    InferenceClient,
    RetryPolicy,
    frames_to_payload,
    run_dialogue,
)
from .manifest import ClipPair, Manifest, load_manifest
from .metrics import accuracy_rate, bert_score, corpus_bert_score, corpus_bleu, judge
from .metrics.ar import ARResult, ERJudgement
from .metrics.bertscore import BertScoreResult
from .metrics.bleu import BleuResult
from .parsing import (
    EXPLANATION,
    UNPARSEABLE,
    NormalizationRuleSet,
    ParsedAnswer,
    default_rules,
    load_rules,
    normalize,
)

log = logging.getLogger(__name__)


# -- gold records -------------------------------------------------------------

@dataclass(frozen=True)
class GoldRecord:
    clip_id: str
    er_gold: dict[str, ParsedAnswer]
    oq_gold: dict[str, str]


def _parse_gold_answer(value: str, template_id: str, catalog: Catalog) -> ParsedAnswer:
    template = catalog.template(template_id)
    if template.kind == "binary":
        if value == "yes":
            return ParsedAnswer.affirmative()
        if value == "no":
            return ParsedAnswer.negative()
        raise GoldError(f"gold for binary template {template_id!r} must be yes/no, got {value!r}")
    labels = {c.label for c in template.choices}
    if value not in labels:
        raise GoldError(f"gold label {value!r} not among choices of {template_id!r}")
    return ParsedAnswer.choice(value)


def load_gold(path: str | Path, catalog: Catalog) -> dict[str, GoldRecord]:
    """Gold records, one JSON object per line."""
    path = Path(path)
    if not path.exists():
        raise GoldError(f"gold record file not found: {path}")
    records: dict[str, GoldRecord] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise GoldError(f"gold parse error on line {lineno}: {e.msg}") from e
        cid = doc["clip_id"]
        er = {
            tid: _parse_gold_answer(v, tid, catalog)
            for tid, v in doc.get("er_gold", {}).items()
        }
        oq = dict(doc.get("oq_gold", {}))
        for tid, ref in oq.items():
            if not str(ref).strip():
                raise GoldError(f"clip {cid!r}: empty open-question reference for {tid!r}")
        records[cid] = GoldRecord(clip_id=cid, er_gold=er, oq_gold=oq)
    return records


def check_gold_coverage(clips: list[ClipPair], gold: dict[str, GoldRecord], catalog: Catalog):
    """Every test clip needs a gold answer for every ER template."""
    er_ids = [t.id for t in catalog.templates if t.er_countable]
    for clip in clips:
        record = gold.get(clip.gold_ref)
        if record is None:
            raise GoldError(f"missing gold record for clip {clip.id!r}")
        for tid in er_ids:
            if tid not in record.er_gold:
                raise GoldError(f"clip {clip.id!r}: gold missing ER template {tid!r}")


# -- configuration ------------------------------------------------------------

@dataclass
class EndpointSpec:
    name: str
    url: str


@dataclass
class RunConfig:
    manifest_path: str
    endpoints: list[EndpointSpec] = field(default_factory=list)
    catalog_path: str | None = None
    gold_path: str | None = None
    db_path: str | None = None
    rules_path: str | None = None
    out_dir: str = "out"
    cache_dir: str | None = None
    seed: int = 42
    policy: MergePolicy = field(default_factory=MergePolicy)
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    in_flight: int = 4
    include_history: bool = True
    max_tokens: int = 256
    temperature: float = 0.0
    timestamp: str | None = None
    figures: bool = True
    embed_url: str | None = None  # defaults to the first endpoint
    # "false_event" scores an unparseable answer as a miss; "exclude"
    # drops it from the accuracy rate entirely
    unparseable_policy: str = "false_event"

    def load_catalog(self) -> Catalog:
        return load_catalog(self.catalog_path) if self.catalog_path else default_catalog()

    def load_rules(self) -> NormalizationRuleSet:
        return load_rules(self.rules_path) if self.rules_path else default_rules()

    def load_db(self) -> CoachingDB:
        return load_db(self.db_path) if self.db_path else default_db()

    def params(self) -> GenerationParams:
        return GenerationParams(
            temperature=self.temperature, max_tokens=self.max_tokens, seed=self.seed
        )


# -- media --------------------------------------------------------------------

def ensure_merged(clip: ClipPair, policy: MergePolicy, cache: FrameCache | None) -> MergedFrameSet:
    if cache is not None:
        hit = cache.get(clip.id, policy)
        if hit is not None:
            return hit
    merged = merge_clip(clip, policy)
    if cache is not None:
        cache.put(merged, policy)
    return merged


# -- evaluate -----------------------------------------------------------------

@dataclass
class ModelEval:
    name: str
    ar: ARResult
    bleu: BleuResult
    bertscore: BertScoreResult | None
    judgements: list[ERJudgement]
    transcripts: dict[str, DialogueTranscript]
    oq_items: list[dict]
    error_turns: int


@dataclass
class EvalOutcome:
    models: dict[str, ModelEval]
    catalog_version: str
    per_item_failures: int


def _evaluate_endpoint(
    spec: EndpointSpec,
    clips: list[ClipPair],
    payloads: dict[str, dict],
    gold: dict[str, GoldRecord],
    catalog: Catalog,
    rules: NormalizationRuleSet,
    cfg: RunConfig,
    embed_client: InferenceClient,
) -> ModelEval:
    client = InferenceClient(spec.url, retry=cfg.retry)
    params = cfg.params()

    def one_clip(clip: ClipPair) -> tuple[str, DialogueTranscript]:
        instances = expand_for_clip(catalog, clip.id, EXHAUSTIVE)
        transcript = run_dialogue(
            client,
            payloads[clip.id],
            instances,
            catalog,
            rules,
            params,
            EXHAUSTIVE,
            audio=clip.audio,
            include_history=cfg.include_history,
            expected_frames=cfg.policy.sample_count,
        )
        return clip.id, transcript

    with ThreadPoolExecutor(max_workers=max(1, cfg.in_flight)) as pool:
        transcripts = dict(pool.map(one_clip, clips))

    judgements: list[ERJudgement] = []
    oq_pairs: list[tuple[str, str]] = []  # (hypothesis, reference)
    oq_items: list[dict] = []
    error_turns = 0

    for clip in clips:
        record = gold[clip.gold_ref]
        transcript = transcripts[clip.id]
        for entry in transcript.entries:
            if entry.error:
                error_turns += 1
            template = catalog.template(entry.instance.template_id)
            if template.er_countable:
                if (
                    cfg.unparseable_policy == "exclude"
                    and entry.parsed.variant == UNPARSEABLE
                ):
                    continue
                judgements.append(
                    judge(clip.id, template.id, record.er_gold[template.id], entry.parsed)
                )
            elif template.kind == OPEN and template.id in record.oq_gold:
                hyp = (
                    entry.parsed.text
                    if entry.parsed.variant == EXPLANATION
                    else normalize(entry.raw_response, rules)
                )
                oq_items.append(
                    {
                        "clip_id": clip.id,
                        "turn_index": entry.instance.turn_index,
                        "template_id": template.id,
                        "hypothesis": hyp,
                        "reference": record.oq_gold[template.id],
                    }
                )
                oq_pairs.append((hyp, record.oq_gold[template.id]))

    ar = accuracy_rate(judgements)
    bleu = corpus_bleu([h for h, _ in oq_pairs], [r for _, r in oq_pairs])

    # per-pair sentence BLEU for the item records
    for item, (hyp, ref) in zip(oq_items, oq_pairs):
        item["bleu"] = corpus_bleu([hyp], [ref]).score

    scorable = [i for i, (h, _) in enumerate(oq_pairs) if h.strip()]
    if len(scorable) < len(oq_pairs):
        log.warning(
            "%d open-question hypotheses are empty after normalization; excluded from BERTScore",
            len(oq_pairs) - len(scorable),
        )
    bertscore: BertScoreResult | None = None
    if scorable:
        texts: list[str] = []
        for i in scorable:
            texts.extend(oq_pairs[i])
        matrices = embed_client.embed(texts)
        pairs = [(matrices[2 * j], matrices[2 * j + 1]) for j in range(len(scorable))]
        for j, i in enumerate(scorable):
            s = bert_score(*pairs[j])
            oq_items[i]["bertscore"] = {"precision": s.precision, "recall": s.recall, "f1": s.f1}
        bertscore = corpus_bert_score(pairs)
    for item in oq_items:
        item.setdefault("bertscore", None)

    return ModelEval(
        name=spec.name,
        ar=ar,
        bleu=bleu,
        bertscore=bertscore,
        judgements=judgements,
        transcripts=transcripts,
        oq_items=oq_items,
        error_turns=error_turns,
    )


def evaluate(cfg: RunConfig) -> EvalOutcome:
    if not cfg.endpoints:
        raise ConfigError("evaluate needs at least one endpoint (NAME=URL)")
    if cfg.gold_path is None:
        raise ConfigError("evaluate needs a gold record file")
    manifest = load_manifest(cfg.manifest_path)
    catalog = cfg.load_catalog()
    rules = cfg.load_rules()
    gold = load_gold(cfg.gold_path, catalog)
    clips = sorted(manifest.by_split["test"], key=lambda c: c.id)
    if not clips:
        raise ConfigError("manifest has no test-split clips to evaluate")
    check_gold_coverage(clips, gold, catalog)

    for spec in cfg.endpoints:
        if not InferenceClient(spec.url, retry=cfg.retry).healthy():
            raise ConfigError(f"endpoint {spec.name!r} unreachable at {spec.url}")

    cache = FrameCache(cfg.cache_dir) if cfg.cache_dir else None
    payloads = {
        clip.id: frames_to_payload(ensure_merged(clip, cfg.policy, cache)) for clip in clips
    }

    embed_url = cfg.embed_url or cfg.endpoints[0].url
    embed_client = InferenceClient(embed_url, retry=cfg.retry)

    models: dict[str, ModelEval] = {}
    for spec in sorted(cfg.endpoints, key=lambda s: s.name):
        models[spec.name] = _evaluate_endpoint(
            spec, clips, payloads, gold, catalog, rules, cfg, embed_client
        )

    failures = sum(m.error_turns for m in models.values())
    return EvalOutcome(models=models, catalog_version=catalog.version, per_item_failures=failures)


# -- coach ----------------------------------------------------------------------

def coach(cfg: RunConfig, clip_id: str, llm_url: str | None = None) -> CoachingReport:
    manifest = load_manifest(cfg.manifest_path)
    clip = manifest.clip(clip_id)
    catalog = cfg.load_catalog()
    rules = cfg.load_rules()
    db = cfg.load_db()
    if not cfg.endpoints:
        raise ConfigError("coach needs an endpoint")
    client = InferenceClient(cfg.endpoints[0].url, retry=cfg.retry)

    cache = FrameCache(cfg.cache_dir) if cfg.cache_dir else None
    payload = frames_to_payload(ensure_merged(clip, cfg.policy, cache))
    instances = expand_for_clip(catalog, clip.id, CONDITIONAL)
    transcript = run_dialogue(
        client,
        payload,
        instances,
        catalog,
        rules,
        cfg.params(),
        CONDITIONAL,
        audio=clip.audio,
        include_history=cfg.include_history,
        expected_frames=cfg.policy.sample_count,
    )
    record = detect_events(transcript, catalog)
    entries = align_with_db(record, db)
    llm = InferenceClient(llm_url, retry=cfg.retry) if llm_url else None
    return compose_report(record, entries, db, llm=llm, params=cfg.params())


# -- ingest ---------------------------------------------------------------------

@dataclass
class IngestSummary:
    processed: list[str]
    cache_hits: list[str]
    failures: dict[str, str]


def ingest(cfg: RunConfig) -> IngestSummary:
    if not cfg.cache_dir:
        raise ConfigError("ingest needs a cache directory")
    manifest = load_manifest(cfg.manifest_path, check_media=False)
    cache = FrameCache(cfg.cache_dir)
    summary = IngestSummary(processed=[], cache_hits=[], failures={})
    for clip in manifest.clips:
        if cache.has(clip.id, cfg.policy):
            summary.cache_hits.append(clip.id)
            continue
        try:
            cache.put(merge_clip(clip, cfg.policy), cfg.policy)
        except DecodeError as e:
            summary.failures[clip.id] = f"{e.camera or 'unknown'} camera: {e}"
            continue
        summary.processed.append(clip.id)
    return summary
