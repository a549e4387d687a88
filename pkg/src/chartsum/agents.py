"""Pipeline orchestration: brainstorming, iterative refinement, self-consistency.

Two analyst roles and a writer share one text backend under different role
prompts. Brainstorming produces per-dimension insights and a voted
cross-dimension record; refinement rounds deepen the temporal granularity
until the analyst reports nothing new (or the iteration cap is hit); the
self-consistency pass oracle-checks suspect claims and rewrites failures.
"""

from __future__ import annotations

import hashlib
import json
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import oracles, sumdoc
from .backend import GenRequest, GenResponse
from .errors import ChartsumError, ClaimParseError, PipelineError
from .ingest import BoundChart, TimeSeriesDataset, load_chart
from .oracles import (
    FAIL,
    PASS,
    UNVERIFIABLE,
    Claim,
    Verdict,
    apply_correction,
    canonical_sentence,
    extract_claims,
    verify_claim,
)
from .patches import SegmentationConfig, UniInsightRecord, uni_insight
from .relations import MultiInsightRecord, multi_insight
from .sumdoc import Sentence, SummaryDoc

_PROMPT_DIR = Path(__file__).parent / "prompts"

STAGE_BRAINSTORM = "brainstorming"
STAGE_REFINE = "refining"
STAGE_SELFCHECK = "selfcheck"


def load_prompt(tag: str) -> str:
    path = _PROMPT_DIR / f"{tag}.txt"
    if not path.exists():
        return f"You are the {tag} agent."
    return path.read_text(encoding="utf-8").strip()


@dataclass(frozen=True)
class PipelineConfig:
    vote_candidates: int = 3
    max_refine_iters: int = 5
    selfcheck_kinds: frozenset = frozenset({oracles.EXTREMUM_KIND, oracles.SIGNIFICANCE_KIND})
    seed: int = 0
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    generation_check: bool = True

    def __post_init__(self):
        if self.vote_candidates < 3 or self.vote_candidates % 2 == 0:
            raise ValueError("vote_candidates must be odd and >= 3")
        if self.max_refine_iters < 1:
            raise ValueError("max_refine_iters must be >= 1")


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


@dataclass
class TranscriptEvent:
    sequence: int
    stage: str
    agent: str
    request_digest: str
    response_digest: str
    note: str = ""
    verdicts: list = field(default_factory=list)
    timestamp: float = 0.0

    def to_dict(self, canonical: bool = False) -> dict:
        out = {
            "sequence": self.sequence,
            "stage": self.stage,
            "agent": self.agent,
            "request_digest": self.request_digest,
            "response_digest": self.response_digest,
            "note": self.note,
            "verdicts": self.verdicts,
        }
        if not canonical:
            out["timestamp"] = self.timestamp
        return out


class Transcript:
    """Append-only audit trail; every backend call appears exactly once."""

    def __init__(self):
        self.events: list[TranscriptEvent] = []

    def add(self, stage: str, agent: str, request_digest: str = "",
            response_digest: str = "", note: str = "", verdicts=None) -> None:
        self.events.append(
            TranscriptEvent(
                sequence=len(self.events),
                stage=stage,
                agent=agent,
                request_digest=request_digest,
                response_digest=response_digest,
                note=note,
                verdicts=list(verdicts or []),
                timestamp=time.time(),
            )
        )

    @property
    def backend_calls(self) -> int:
        return sum(1 for e in self.events if e.request_digest)

    def stages(self) -> list[str]:
        seen = []
        for e in self.events:
            if e.stage not in seen:
                seen.append(e.stage)
        return seen

    def to_dict(self, canonical: bool = False) -> dict:
        return {"events": [e.to_dict(canonical=canonical) for e in self.events]}

    def to_text(self) -> str:
        lines = []
        for e in self.events:
            lines.append(
                f"{e.sequence:04d} [{e.stage}] {e.agent} "
                f"req={e.request_digest or '-'} resp={e.response_digest or '-'} {e.note}"
            )
        return "\n".join(lines)


class RecordingBackend:
    """Backend wrapper that logs every completion to the transcript.

    Guarantees the transcript invariant: one backend event per call, no
    matter which code path issued it (agents, claim extraction, level
    classification).
    """

    def __init__(self, inner, transcript: Transcript):
        self.inner = inner
        self.transcript = transcript
        self.stage = "pipeline"

    def complete(self, req: GenRequest) -> GenResponse:
        resp = self.inner.complete(req)
        self.transcript.add(
            self.stage, f"backend:{req.tag}",
            request_digest=_digest(req.user_prompt),
            response_digest=_digest(resp.text),
        )
        return resp


def _call(backend, transcript: Transcript | None, stage: str, agent: str,
          tag: str, payload: dict, seed: int, note: str = "") -> GenResponse:
    req = GenRequest(
        role_prompt=load_prompt(tag),
        user_prompt=json.dumps(payload, sort_keys=True),
        tag=tag,
        seed=seed,
    )
    resp = backend.complete(req)
    if transcript is not None and not isinstance(backend, RecordingBackend):
        transcript.add(
            stage, agent,
            request_digest=_digest(req.user_prompt),
            response_digest=_digest(resp.text),
            note=note,
        )
    return resp


# --- brainstorming ----------------------------------------------------------


def _patch_sets(records) -> list:
    return [r.patches for r in records]


def _sentence_fails(
    text: str, records, data: TimeSeriesDataset, backend, cfg: PipelineConfig,
    kinds=None,
) -> list[tuple[str, Claim, Verdict]]:
    """(sentence, claim, verdict) for every failing claim in the prose."""
    fails = []
    for sentence in sumdoc.split_sentences(text):
        try:
            claims = extract_claims(
                sentence, [], backend, data=data, patch_sets=_patch_sets(records)
            )
        except (ClaimParseError, ChartsumError):
            continue
        for claim in claims:
            if kinds is not None and claim.kind not in kinds:
                continue
            try:
                verdict = verify_claim(claim, data, cfg.segmentation)
            except ChartsumError:
                continue
            if verdict.status == FAIL:
                fails.append((sentence, claim, verdict))
    return fails


def _repair_text(text: str, fails) -> str:
    """Deterministic substitution of computed values into failing sentences."""
    for sentence, claim, verdict in fails:
        fixed = apply_correction(sentence, claim, verdict)
        if fixed == sentence:
            canon = canonical_sentence(claim, verdict)
            if canon is not None:
                fixed = canon
        if fixed != sentence:
            text = text.replace(sentence, fixed, 1)
    return text


def run_uni_insighter(
    bound: BoundChart,
    cfg: PipelineConfig,
    backend,
    transcript: Transcript | None = None,
) -> dict[str, dict]:
    """Per-dimension analysis records plus oracle-checked prose."""
    data = bound.data
    records = {
        name: uni_insight(bound, name, cfg.segmentation)
        for name in data.dimension_names
    }
    all_records = list(records.values())
    out: dict[str, dict] = {}
    for offset, name in enumerate(data.dimension_names):
        record = records[name]
        seed = cfg.seed + offset
        resp = _call(
            backend, transcript, STAGE_BRAINSTORM, "uni-insighter", "uni",
            {"mode": "verbalize", "record": record.to_dict()},
            seed, note=f"dimension={name}",
        )
        prose = resp.text
        if cfg.generation_check:
            fails = _sentence_fails(prose, all_records, data, backend, cfg)
            if fails:
                resp = _call(
                    backend, transcript, STAGE_BRAINSTORM, "uni-insighter", "uni",
                    {"mode": "verbalize", "record": record.to_dict()},
                    seed + 1000, note=f"dimension={name} regenerated",
                )
                prose = resp.text
                fails = _sentence_fails(prose, all_records, data, backend, cfg)
                if fails:
                    prose = _repair_text(prose, fails)
        out[name] = {"record": record, "prose": prose}
    return out


def _proposal_key(proposal: dict) -> tuple:
    return (
        proposal.get("kind", ""),
        tuple(proposal.get("pair", ())),
        proposal.get("window", ""),
        tuple(proposal.get("directions", ())),
    )


def _default_vote_key(candidate) -> frozenset:
    from .relations import insight_tuples

    if isinstance(candidate, MultiInsightRecord):
        return insight_tuples(candidate)
    if isinstance(candidate, frozenset):
        return candidate
    return frozenset(candidate)


def majority_vote(candidates, key=_default_vote_key):
    """Most consistent candidate by modal fact set, with a documented ladder.

    Strict modal winner first; ties break on highest mean pairwise Jaccard
    agreement; a full tie falls back to the smallest canonical
    serialization. Returns (winner, decided_by).
    """
    candidates = list(candidates)
    if len(candidates) < 3:
        raise ValueError("majority vote needs at least 3 candidates")
    keys = [key(c) for c in candidates]
    counts = Counter(keys)
    top_count = max(counts.values())
    top_keys = [k for k, c in counts.items() if c == top_count]
    if len(top_keys) == 1 and top_count > 1:
        winner_key = top_keys[0]
        idx = keys.index(winner_key)
        return candidates[idx], "majority"

    def jaccard(x: frozenset, y: frozenset) -> float:
        if not x and not y:
            return 1.0
        return len(x & y) / len(x | y)

    agreements = []
    for i, k in enumerate(keys):
        others = [jaccard(k, other) for j, other in enumerate(keys) if j != i]
        agreements.append(sum(others) / len(others))
    best = max(agreements)
    leaders = [i for i, a in enumerate(agreements) if a == best]
    if len(leaders) == 1:
        return candidates[leaders[0]], "agreement"

    def canonical(i: int) -> str:
        return json.dumps(sorted(map(list, keys[i])), sort_keys=True)

    winner = min(leaders, key=canonical)
    return candidates[winner], "full_tie"


def _collect_proposals(
    uni_records, cfg: PipelineConfig, backend, transcript, stage: str,
    depth: int, seed_base: int,
) -> tuple[frozenset, str]:
    """Run the vote over ``vote_candidates`` proposal generations."""
    record_dicts = [r.to_dict() for r in uni_records]
    payload = {"mode": "propose", "records": record_dicts, "depth": depth}

    def generate(seed: int) -> frozenset:
        resp = _call(
            backend, transcript, stage, "multi-insighter", "multi",
            payload, seed, note=f"propose depth={depth}",
        )
        try:
            proposals = json.loads(resp.text)["proposals"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ClaimParseError(f"bad proposal payload: {exc}") from exc
        return frozenset(_proposal_key(p) for p in proposals)

    candidates = [generate(seed_base + i) for i in range(cfg.vote_candidates)]
    winner, decided_by = majority_vote(candidates, key=lambda c: c)
    if decided_by == "full_tie":
        # one regeneration round before accepting the canonical fallback
        extra = [generate(seed_base + 100 + i) for i in range(cfg.vote_candidates)]
        winner, decided_by = majority_vote(candidates + extra, key=lambda c: c)
    if transcript is not None:
        transcript.add(stage, "multi-insighter",
                       note=f"vote decided_by={decided_by} tuples={len(winner)}")
    return winner, decided_by


def _additions_record(record: MultiInsightRecord) -> MultiInsightRecord:
    """The refinement additions: trend pairs only, no repeated relation prose."""
    pairs = [
        replace(pair, relation=None, dominance=(), evidence=(),
                trend_pairs=tuple(tp for tp in pair.trend_pairs if tp.kind != "gap_trend"))
        for pair in record.pairs
    ]
    return replace(record, pairs=tuple(pairs), rankings=())


def run_multi_insighter(
    uni_records,
    data: TimeSeriesDataset,
    cfg: PipelineConfig,
    backend,
    transcript: Transcript | None = None,
    *,
    stage: str = STAGE_BRAINSTORM,
    depth: int = 0,
    seed_base: int | None = None,
) -> dict | None:
    """Voted cross-dimension analysis: candidates, majority vote, module pass.

    Returns {"record", "prose", "tuples"}; None for single-dimension charts
    (the pipeline simply continues without cross-dimension content).
    """
    uni_records = list(uni_records)
    if len(uni_records) < 2:
        return None
    seed_base = cfg.seed if seed_base is None else seed_base
    winner, _ = _collect_proposals(
        uni_records, cfg, backend, transcript, stage, depth, seed_base
    )
    record = multi_insight(uni_records, data, depth=depth)
    resp = _call(
        backend, transcript, stage, "multi-insighter", "multi",
        {"mode": "synthesize", "record": record.to_dict()},
        seed_base + 50, note="synthesize",
    )
    try:
        sentences = json.loads(resp.text)["sentences"]
    except (json.JSONDecodeError, KeyError) as exc:
        raise ClaimParseError(f"bad synthesis payload: {exc}") from exc
    return {"record": record, "prose": " ".join(sentences), "tuples": winner}


def write_draft(
    bound: BoundChart,
    uni_results: dict[str, dict],
    multi_result: dict | None,
    cfg: PipelineConfig,
    backend,
    transcript: Transcript | None = None,
) -> str:
    """First full summary from the insight records."""
    payload = {
        "mode": "draft",
        "l1": {
            "title": bound.l1.title,
            "x_label": bound.l1.x_label,
            "y_label": bound.l1.y_label,
            "dimensions": list(bound.l1.dimension_names),
        },
        "uni": [v["record"].to_dict() for v in uni_results.values()],
        "multi": multi_result["record"].to_dict() if multi_result else None,
    }
    resp = _call(
        backend, transcript, STAGE_BRAINSTORM, "writer", "writer",
        payload, cfg.seed + 10, note="draft",
    )
    return resp.text


def refine_loop(
    draft: str,
    uni_records,
    data: TimeSeriesDataset,
    cfg: PipelineConfig,
    backend,
    transcript: Transcript | None = None,
    known_tuples: frozenset = frozenset(),
) -> tuple[str, int]:
    """Alternate analyst and writer until no new insights remain (capped).

    Each round analyzes one temporal level deeper; the analyst's voted
    proposals define novelty, and only module-confirmed additions reach the
    text. Returns the final text and the number of rounds run.
    """
    uni_records = list(uni_records)
    text = draft
    accumulated = frozenset(known_tuples)
    rounds = 0
    if len(uni_records) < 2:
        return text, rounds
    for iteration in range(1, cfg.max_refine_iters + 1):
        rounds = iteration
        winner, _ = _collect_proposals(
            uni_records, cfg, backend, transcript, STAGE_REFINE,
            depth=iteration, seed_base=cfg.seed + 1000 * iteration,
        )
        new_tuples = winner - accumulated
        accumulated |= winner
        if transcript is not None:
            transcript.add(STAGE_REFINE, "multi-insighter",
                           note=f"round={iteration} new_insights={len(new_tuples)}")
        if not new_tuples:
            break
        record = multi_insight(uni_records, data, depth=iteration)
        filtered = _additions_record(record)
        resp = _call(
            backend, transcript, STAGE_REFINE, "multi-insighter", "multi",
            {"mode": "synthesize", "record": filtered.to_dict(), "exhaustive": True},
            cfg.seed + 1000 * iteration + 50, note="synthesize additions",
        )
        try:
            additions = json.loads(resp.text)["sentences"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ClaimParseError(f"bad synthesis payload: {exc}") from exc
        additions = [s for s in additions if s not in text]
        if additions:
            resp = _call(
                backend, transcript, STAGE_REFINE, "writer", "writer",
                {
                    "mode": "integrate",
                    "sentences": sumdoc.split_sentences(text),
                    "additions": additions,
                },
                cfg.seed + 1000 * iteration + 60, note="integrate",
            )
            text = resp.text
    return text, rounds


# --- self-consistency ---------------------------------------------------------


def _verify_sentence(
    sentence: Sentence,
    records,
    data: TimeSeriesDataset,
    cfg: PipelineConfig,
    backend,
    kinds,
    transcript: Transcript | None,
    stage: str = STAGE_SELFCHECK,
) -> tuple[Sentence, list[Verdict]]:
    """Oracle-check one sentence; rewrite failures, flag unverifiables."""
    try:
        claims = extract_claims(
            sentence.text, sentence.refs, backend,
            data=data, patch_sets=_patch_sets(records),
            sentence_index=sentence.index,
        )
    except ClaimParseError:
        return replace(sentence, unverifiable=True), []
    claims = [c for c in claims if kinds is None or c.kind in kinds]
    if not claims:
        return sentence, []

    verdicts: list[Verdict] = []
    text = sentence.text
    edited = sentence.edited
    unverifiable = sentence.unverifiable
    for claim in claims:
        try:
            verdict = verify_claim(claim, data, cfg.segmentation)
        except ChartsumError as exc:
            verdicts.append(Verdict(status=UNVERIFIABLE, explanation=str(exc)))
            unverifiable = True
            continue
        verdicts.append(verdict)
        if verdict.status == UNVERIFIABLE:
            unverifiable = True
        elif verdict.status == FAIL:
            resp = _call(
                backend, transcript, stage, "selfcheck", "selfcheck",
                {
                    "mode": "rewrite",
                    "sentence": text,
                    "claim": claim.to_dict(),
                    "verdict": verdict.to_dict(),
                },
                cfg.seed + 7000 + sentence.index, note="rewrite",
            )
            try:
                rewritten = json.loads(resp.text)["sentence"]
            except (json.JSONDecodeError, KeyError):
                rewritten = text
            if rewritten == text:
                rewritten = apply_correction(text, claim, verdict)
            if rewritten == text:
                canon = canonical_sentence(claim, verdict)
                if canon is not None:
                    rewritten = canon
            if rewritten != text:
                text = rewritten
                edited = True
            else:
                unverifiable = True

    if text != sentence.text:
        new_sentence = Sentence(
            index=sentence.index,
            text=text,
            level=sumdoc.classify_level(text, backend=backend),
            refs=tuple(sumdoc.attach_data_refs(text, records, data)),
            unverifiable=unverifiable,
            edited=True,
        )
        # the rewrite must itself survive the oracles
        recheck, re_verdicts = _verify_sentence(
            replace(new_sentence, edited=edited), records, data, cfg, backend,
            kinds, None, stage,
        )
        return recheck, verdicts + re_verdicts
    if unverifiable != sentence.unverifiable:
        return replace(sentence, unverifiable=unverifiable), verdicts
    return sentence, verdicts


def self_consistency(
    summary: SummaryDoc,
    data: TimeSeriesDataset,
    cfg: PipelineConfig,
    backend,
    records,
    transcript: Transcript | None = None,
) -> SummaryDoc:
    """Detect and correct the configured claim kinds across the summary."""
    sentences = []
    all_verdicts = []
    for sentence in summary.sentences:
        checked, verdicts = _verify_sentence(
            sentence, records, data, cfg, backend, cfg.selfcheck_kinds, transcript,
        )
        sentences.append(checked)
        all_verdicts.extend(v.to_dict() for v in verdicts)
    if transcript is not None:
        transcript.add(STAGE_SELFCHECK, "selfcheck",
                       note=f"verdicts={len(all_verdicts)}", verdicts=all_verdicts)
    return replace(summary, sentences=tuple(sentences))


# --- end-to-end ---------------------------------------------------------------


def run_pipeline(
    spec_text: str,
    data_raw: bytes | str | None,
    cfg: PipelineConfig,
    backend,
    chart_id: str = "",
    on_stage=None,
) -> tuple[SummaryDoc, Transcript]:
    """Ingest, brainstorm, draft, refine, and self-check one chart.

    ``on_stage(name)`` is invoked as each stage begins (progress reporting).
    """
    transcript = Transcript()
    backend = RecordingBackend(backend, transcript)

    def stage(name: str, fn):
        backend.stage = name
        if on_stage is not None:
            on_stage(name)
        try:
            return fn()
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, exc) from exc

    bound = stage("ingest", lambda: load_chart(spec_text, data_raw))
    transcript.add("ingest", "ingest",
                   note=f"dimensions={len(bound.data.dimension_names)}")

    uni_results = stage(
        STAGE_BRAINSTORM,
        lambda: run_uni_insighter(bound, cfg, backend, transcript),
    )
    records = [v["record"] for v in uni_results.values()]
    multi_result = stage(
        STAGE_BRAINSTORM,
        lambda: run_multi_insighter(records, bound.data, cfg, backend, transcript),
    )
    draft = stage(
        STAGE_BRAINSTORM,
        lambda: write_draft(bound, uni_results, multi_result, cfg, backend, transcript),
    )
    known = multi_result["tuples"] if multi_result else frozenset()
    refined, rounds = stage(
        STAGE_REFINE,
        lambda: refine_loop(draft, records, bound.data, cfg, backend, transcript, known),
    )
    doc = stage(
        STAGE_SELFCHECK,
        lambda: sumdoc.build_summary_doc(
            refined, records, bound.data,
            chart_id=chart_id, backend=backend,
        ),
    )
    final = stage(
        STAGE_SELFCHECK,
        lambda: self_consistency(doc, bound.data, cfg, backend, records, transcript),
    )
    return final, transcript


def chat_refine(
    summary: SummaryDoc,
    message: str,
    data: TimeSeriesDataset,
    backend,
    records,
    cfg: PipelineConfig | None = None,
    transcript: Transcript | None = None,
) -> SummaryDoc:
    """Apply one user instruction, then oracle-check every edited sentence."""
    cfg = cfg or PipelineConfig()
    if not message or not message.strip():
        return summary
    payload = {
        "instruction": message,
        "sentences": [s.text for s in summary.sentences],
        "uni": [r.to_dict() for r in records],
        "dimensions": [r.dimension for r in records],
    }
    resp = _call(
        backend, transcript, "chat", "chat", "chat",
        payload, cfg.seed + 9000, note="chat edit",
    )
    try:
        new_texts = json.loads(resp.text)["sentences"]
    except (json.JSONDecodeError, KeyError) as exc:
        raise ClaimParseError(f"bad chat payload: {exc}") from exc

    sentences: list[Sentence] = []
    for i, text in enumerate(new_texts):
        if i < len(summary.sentences) and summary.sentences[i].text == text:
            sentences.append(replace(summary.sentences[i], index=i))
            continue
        sentences.append(
            Sentence(
                index=i,
                text=text,
                level=sumdoc.classify_level(text, backend=backend),
                refs=tuple(sumdoc.attach_data_refs(text, records, data)),
                edited=True,
            )
        )
    checked: list[Sentence] = []
    for sentence in sentences:
        if sentence.edited:
            # edited sentences face the full oracle sweep, not just the
            # self-consistency kinds
            verified, _ = _verify_sentence(
                sentence, records, data, cfg, backend, None, transcript, stage="chat",
            )
            checked.append(verified)
        else:
            checked.append(sentence)
    return replace(summary, sentences=tuple(checked))
