"""Text-generation backends: a remote chat-completions client and a
deterministic template mock.

The mock renders prose and JSON strictly from the structured records
embedded in the request, so every number it emits is traceable to its
input; seed changes vary phrasing, never facts. Deliberate corruption
hooks exist for exercising the verification pipeline.
"""

from __future__ import annotations

import json
import random
import re
import time
from dataclasses import dataclass, field
from datetime import date, timedelta

from .errors import AuthError, BackendError, RateLimited, TemplateMissing, Timeout
from .oracles import fmt_num, parse_claim_sentence
from .relations import propose_trend_pairs

TAGS = ("uni", "multi", "writer", "selfcheck", "chat")


@dataclass(frozen=True)
class GenRequest:
    role_prompt: str
    user_prompt: str
    tag: str
    temperature: float = 0.0
    seed: int | None = None
    max_tokens: int = 1024

    def __post_init__(self):
        if not self.role_prompt or not self.user_prompt:
            raise ValueError("prompts must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class GenResponse:
    text: str
    usage: dict
    backend_id: str
    latency: float

    def __post_init__(self):
        if not self.text:
            raise BackendError("backend returned empty text")


def _years_of(label: str) -> str:
    m = re.match(r"^(\d{4})", label)
    return m.group(1) if m else label


def _epoch_days_to_year(days: float) -> int:
    return (date(1970, 1, 1) + timedelta(days=days)).year


_RISE_WORDS = ["rose", "climbed", "increased"]
_FALL_WORDS = ["fell", "declined", "dropped"]
_LEAD_INS = ["", "Overall, ", "Across the period, ", "Taken together, "]


class MockBackend:
    """Deterministic template backend for offline, reproducible runs.

    ``corrupt_extremum`` makes the writer misstate a dimension's maximum
    using an early local peak, seeding the error class the self-consistency
    pass must correct. ``corrupt_uni_seed`` corrupts the single-dimension
    prose once, for the matching request seed only, so a regeneration with
    a shifted seed comes out clean.
    """

    backend_id = "mock"

    def __init__(
        self,
        seed: int = 0,
        corrupt_extremum: bool = False,
        corrupt_uni_seed: int | None = None,
    ):
        self.seed = seed
        self.corrupt_extremum = corrupt_extremum
        self.corrupt_uni_seed = corrupt_uni_seed

    # -- plumbing -----------------------------------------------------------

    def complete(self, req: GenRequest) -> GenResponse:
        started = time.perf_counter()
        handler = getattr(self, f"_tag_{req.tag}", None)
        if handler is None:
            raise TemplateMissing(f"mock has no template for tag {req.tag!r}")
        try:
            payload = json.loads(req.user_prompt)
        except json.JSONDecodeError:
            payload = {"text": req.user_prompt}
        seed = req.seed if req.seed is not None else self.seed
        rng = random.Random(f"{req.tag}:{seed}")
        text = handler(payload, rng, seed)
        return GenResponse(
            text=text,
            usage={
                "prompt_tokens": len(req.user_prompt.split()),
                "completion_tokens": len(text.split()),
            },
            backend_id=self.backend_id,
            latency=time.perf_counter() - started,
        )

    # -- shared verbalizers ---------------------------------------------------

    def _trend_sentence(self, dim: str, patch: dict, rng: random.Random,
                        significant: bool) -> str | None:
        trend = patch["stats"]["trend"]
        t0, t1 = patch["start_time"], patch["end_time"]
        if trend == "Rising":
            return f"{dim} {rng.choice(_RISE_WORDS)} from {t0} to {t1}."
        if trend == "Falling":
            return f"{dim} {rng.choice(_FALL_WORDS)} from {t0} to {t1}."
        if trend == "BigChange":
            verb = rng.choice(_RISE_WORDS if patch["stats"]["net_change"] > 0 else _FALL_WORDS)
            adverb = " sharply" if significant else ""
            return f"{dim} {verb}{adverb} from {t0} to {t1}."
        if trend == "Stable":
            return f"{dim} remained stable from {t0} to {t1}."
        if trend in ("Oscillating", "Change"):
            return f"{dim} fluctuated between {t0} and {t1}."
        if trend == "Cyclic":
            return f"{dim} showed a cyclical pattern between {t0} and {t1}."
        return None

    def _uni_sentences(self, rec: dict, rng: random.Random, corrupt: bool) -> list[str]:
        dim = rec["dimension"]
        out = []
        patches = rec["patches"]
        baseline = max(p["stats"]["range"] for p in patches)
        major = [p for p in patches if baseline and p["stats"]["range"] >= 0.2 * baseline]
        for patch in major[:4]:
            significant = baseline > 0 and patch["stats"]["range"] / baseline >= 0.25
            s = self._trend_sentence(dim, patch, rng, significant)
            if s:
                out.append(s)

        gmax, gmin = rec["global_max"], rec["global_min"]
        if corrupt:
            # the classic mistake: an early local peak reported as the maximum
            locals_ = [
                p for p in patches
                if p["stats"]["max"]["value"] < gmax["value"]
            ]
            if locals_:
                wrong = locals_[0]
                out.append(
                    f"{dim} reached a maximum of {fmt_num(wrong['stats']['max']['value'])} "
                    f"in {wrong['start_time']}."
                )
            else:
                out.append(
                    f"{dim} reached a maximum of {fmt_num(gmax['value'])} in {gmax['time']}."
                )
        else:
            out.append(
                f"{dim} reached a maximum of {fmt_num(gmax['value'])} in {gmax['time']}."
            )
        out.append(f"{dim} bottomed out at {fmt_num(gmin['value'])} in {gmin['time']}.")
        out.append(f"{dim} averaged {fmt_num(rec['overall_mean'])} over the period.")
        return out

    def _trend_pair_sentence(self, a: str, b: str, tp: dict,
                             rng: random.Random | None) -> str | None:
        def pick(words):
            return words[0] if rng is None else rng.choice(words)

        window = tp.get("window", "")
        lo, hi = (window.split("..") + [""])[:2] if ".." in window else ("", "")
        span = f" from {lo} to {hi}" if lo and hi else " over the period"
        if tp["kind"] == "gap_trend":
            word = "widened" if tp["gap_direction"] == "widening" else "narrowed"
            return f"The gap between {a} and {b} {word}{span}."
        da, db = tp["directions"]
        if tp["kind"] == "same_trend" and da in ("rising", "falling"):
            return f"Both {a} and {b} {pick(_RISE_WORDS if da == 'rising' else _FALL_WORDS)}{span}."
        if tp["kind"] == "contrast_trend" and "flat" not in (da, db):
            va = pick(_RISE_WORDS if da == "rising" else _FALL_WORDS)
            vb = pick(_RISE_WORDS if db == "rising" else _FALL_WORDS)
            return f"{a} {va} while {b} {vb}{span}."
        return None

    def _multi_sentences(self, rec: dict, rng: random.Random,
                         exhaustive: bool = False) -> list[str]:
        out = []
        for pair in rec.get("pairs", []):
            a, b = pair["pair"]
            dominance = pair.get("dominance", [])
            if dominance:
                first = dominance[0]
                other = b if first["above"] == a else a
                out.append(
                    f"{first['above']} remained above {other} "
                    f"from {first['start']} to {first['end']}."
                )
            relation = pair.get("relation") or {}
            if relation.get("kind") == "contrast_relation":
                for crossing in relation.get("crossings", []):
                    when = (
                        _years_of(crossing["label"])
                        if crossing.get("label")
                        else _epoch_days_to_year(crossing["time"])
                    )
                    overtaker = (
                        pair["pair"][0]
                        if crossing["direction"] == "a_overtakes_b"
                        else pair["pair"][1]
                    )
                    other = pair["pair"][1] if overtaker == pair["pair"][0] else pair["pair"][0]
                    out.append(f"{overtaker} overtook {other} in {when}.")
            trend_pairs = [
                t for t in pair.get("trend_pairs", []) if t["kind"] != "gap_trend"
            ]
            gaps = [t for t in pair.get("trend_pairs", []) if t["kind"] == "gap_trend"]
            if exhaustive:
                chosen = trend_pairs
                word_rng = None  # deterministic wording so additions dedupe
            else:
                same = [
                    t for t in trend_pairs
                    if t["kind"] == "same_trend" and t["directions"][0] in ("rising", "falling")
                ]
                chosen = [max(same, key=lambda t: t.get("days", 0))] if same else []
                word_rng = rng
            for tp in chosen + gaps:
                sentence = self._trend_pair_sentence(a, b, tp, word_rng)
                if sentence:
                    out.append(sentence)
        rankings = rec.get("rankings", [])
        if rankings:
            overall = rankings[0]
            leader = overall["order"][0]
            out.append(
                f"{leader} recorded the highest average over the period "
                f"({fmt_num(overall['means'][leader])})."
            )
        return out

    # -- tag handlers ---------------------------------------------------------

    def _tag_uni(self, payload: dict, rng: random.Random, seed: int) -> str:
        rec = payload["record"]
        corrupt = self.corrupt_uni_seed is not None and seed == self.corrupt_uni_seed
        sentences = self._uni_sentences(rec, rng, corrupt=corrupt)
        lead = rng.choice(_LEAD_INS)
        text = " ".join(sentences)
        return (lead + text) if lead else text

    def _tag_multi(self, payload: dict, rng: random.Random, seed: int) -> str:
        mode = payload.get("mode", "propose")
        if mode == "synthesize":
            sentences = self._multi_sentences(
                payload["record"], rng, exhaustive=bool(payload.get("exhaustive"))
            )
            return json.dumps({"sentences": sentences}, sort_keys=True)
        records = payload["records"]
        depth = int(payload.get("depth", 0))
        proposals = propose_trend_pairs(records, depth)
        rationale = rng.choice(
            ["direct comparison of the patch directions",
             "cross-checking per-window movements",
             "pairwise reading of each segment"]
        )
        return json.dumps(
            {"proposals": proposals, "rationale": rationale}, sort_keys=True
        )

    def _tag_writer(self, payload: dict, rng: random.Random, seed: int) -> str:
        mode = payload.get("mode", "draft")
        if mode == "integrate":
            base = list(payload["sentences"])
            additions = list(payload.get("additions", []))
            return " ".join(base + additions)
        l1 = payload["l1"]
        uni = payload["uni"]
        multi = payload.get("multi")
        sentences = []
        title = l1.get("title") or "The data"
        sentences.append(
            f"{title} is shown as a line chart of {l1['y_label']} by {l1['x_label']}."
        )
        names = ", ".join(l1["dimensions"])
        if len(l1["dimensions"]) > 1:
            sentences.append(
                f"The chart tracks {len(l1['dimensions'])} series: {names}."
            )
        corrupt = self.corrupt_extremum
        for rec in uni:
            sentences.extend(self._uni_sentences(rec, rng, corrupt=corrupt))
        if multi:
            sentences.extend(self._multi_sentences(multi, rng))
        return " ".join(sentences)

    def _tag_selfcheck(self, payload: dict, rng: random.Random, seed: int) -> str:
        mode = payload.get("mode", "extract")
        if mode == "extract":
            claims = parse_claim_sentence(payload["sentence"], payload["dimensions"])
            return json.dumps({"claims": claims}, sort_keys=True)
        if mode == "classify":
            from .sumdoc import classify_level

            return json.dumps(
                {"level": classify_level(payload["sentence"])}, sort_keys=True
            )
        if mode == "rewrite":
            from .oracles import Claim, Verdict, apply_correction

            claim = Claim.from_dict(payload["claim"])
            verdict = Verdict(
                status=payload["verdict"]["status"],
                computed=payload["verdict"].get("computed"),
                tolerance_used=payload["verdict"].get("tolerance_used", 0.0),
                explanation=payload["verdict"].get("explanation", ""),
            )
            fixed = apply_correction(payload["sentence"], claim, verdict)
            return json.dumps({"sentence": fixed}, sort_keys=True)
        raise TemplateMissing(f"selfcheck mode {mode!r} unknown")

    def _tag_chat(self, payload: dict, rng: random.Random, seed: int) -> str:
        instruction = payload.get("instruction", "").strip()
        sentences = list(payload.get("sentences", []))
        dimensions = payload.get("dimensions", [])
        records = {r["dimension"]: r for r in payload.get("uni", [])}
        edited: list[int] = []
        note = ""

        soften = re.search(r"\bsoften\b", instruction, re.IGNORECASE)
        add = re.search(r"\badd\b", instruction, re.IGNORECASE)
        mentioned_dims = [d for d in dimensions if re.search(rf"\b{re.escape(d)}\b", instruction)]
        year_m = re.search(r"\b(1[5-9]\d{2}|20\d{2})\b", instruction)

        from .oracles import _MINOR_OF, _SIGNIFICANT_ADVERBS

        if soften:
            targets = mentioned_dims or dimensions
            for i, s in enumerate(sentences):
                if not any(d in s for d in targets):
                    continue
                for word in sorted(_SIGNIFICANT_ADVERBS, key=len, reverse=True):
                    if re.search(rf"\b{word}\b", s):
                        sentences[i] = re.sub(rf"\b{word}\b", _MINOR_OF[word], s)
                        edited.append(i)
                        break
            if not edited:
                note = "no strongly-worded sentence found to soften"
        elif add and year_m and mentioned_dims:
            dim = mentioned_dims[0]
            year = year_m.group(1)
            rec = records.get(dim)
            if rec:
                patch = next(
                    (p for p in rec["patches"] if p["end_time"].startswith(year)),
                    None,
                ) or next(
                    (p for p in rec["patches"]
                     if p["start_time"][:4] <= year <= p["end_time"][:4]),
                    None,
                )
                if patch is not None:
                    baseline = max(p["stats"]["range"] for p in rec["patches"])
                    significant = baseline > 0 and patch["stats"]["range"] / baseline >= 0.25
                    verb = "rose" if patch["stats"]["net_change"] > 0 else "fell"
                    adverb = " sharply" if significant else ""
                    sentence = (
                        f"{dim} {verb}{adverb} from {patch['start_time']} "
                        f"to {patch['end_time']}."
                    )
                    is_global_max = (
                        patch["stats"]["max"]["value"] == rec["global_max"]["value"]
                    )
                    if is_global_max:
                        sentence = sentence[:-1] + (
                            f", reaching a maximum of "
                            f"{fmt_num(rec['global_max']['value'])} "
                            f"in {rec['global_max']['time']}."
                        )
                    sentences.append(sentence)
                    edited.append(len(sentences) - 1)
                else:
                    note = f"no movement of {dim} found around {year}"
            else:
                note = f"unknown dimension {dim!r}"
        elif instruction:
            note = "instruction not understood; summary unchanged"

        return json.dumps(
            {"sentences": sentences, "edited": edited, "note": note}, sort_keys=True
        )


class AlwaysNovelBackend(MockBackend):
    """Adversarial mock whose multi-stage proposals never converge.

    Each call invents one extra never-seen tuple, so a refinement loop
    relying on an empty novelty set must hit its iteration cap.
    """

    backend_id = "mock-adversarial"

    def __init__(self, seed: int = 0):
        super().__init__(seed=seed)
        self._calls = 0

    def _tag_multi(self, payload: dict, rng: random.Random, seed: int) -> str:
        if payload.get("mode", "propose") != "propose":
            return super()._tag_multi(payload, rng, seed)
        self._calls += 1
        base = json.loads(super()._tag_multi(payload, rng, seed))
        records = payload["records"]
        dims = [r["dimension"] for r in records[:2]]
        if len(dims) < 2:
            dims = dims + dims
        base["proposals"].append(
            {
                "kind": "same_trend",
                "pair": dims,
                "window": f"novel-window-{self._calls}",
                "directions": ["rising", "rising"],
            }
        )
        return json.dumps(base, sort_keys=True)


class RemoteBackend:
    """Chat-completions client with bounded retries.

    Retries only transient failures (timeouts, rate limits, 5xx); an
    authentication rejection surfaces immediately.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str,
        model: str,
        timeout: float = 60.0,
        max_retries: int = 3,
        sleep=time.sleep,
    ):
        import httpx

        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.max_retries = max_retries
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout)
        self.backend_id = model

    def complete(self, req: GenRequest) -> GenResponse:
        import httpx

        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.role_prompt},
                {"role": "user", "content": req.user_prompt},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.seed is not None:
            body["seed"] = req.seed
        headers = {"Authorization": f"Bearer {self.api_key}"}
        started = time.perf_counter()

        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                resp = self._client.post(
                    f"{self.endpoint}/chat/completions", json=body, headers=headers
                )
            except httpx.TimeoutException as exc:
                last_error = Timeout(f"backend timed out: {exc}")
            except httpx.HTTPError as exc:
                last_error = BackendError(f"transport failure: {exc}")
            else:
                if resp.status_code in (401, 403):
                    raise AuthError(f"backend rejected credentials ({resp.status_code})")
                if resp.status_code == 429:
                    last_error = RateLimited("backend rate limit")
                elif resp.status_code >= 500:
                    last_error = BackendError(f"backend error {resp.status_code}")
                else:
                    resp.raise_for_status()
                    data = resp.json()
                    text = data["choices"][0]["message"]["content"]
                    usage = data.get("usage", {})
                    return GenResponse(
                        text=text,
                        usage=usage,
                        backend_id=data.get("model", self.model),
                        latency=time.perf_counter() - started,
                    )
            if attempt + 1 < self.max_retries:
                self._sleep(0.25 * (2 ** attempt))
        raise last_error if last_error else BackendError("backend failed")


def backend_from_env(env=None):
    """Build the backend selected by CI_BACKEND (mock unless told otherwise)."""
    import os

    env = env if env is not None else os.environ
    kind = env.get("CI_BACKEND", "mock").lower()
    if kind == "mock":
        return MockBackend(seed=int(env.get("CI_SEED", "0")))
    if kind == "remote":
        endpoint = env.get("CI_ENDPOINT", "")
        api_key = env.get("CI_API_KEY", "")
        model = env.get("CI_MODEL", "gpt-4")
        if not endpoint or not api_key:
            raise BackendError("remote backend needs CI_ENDPOINT and CI_API_KEY")
        return RemoteBackend(endpoint=endpoint, api_key=api_key, model=model)
    raise BackendError(f"unknown backend kind {kind!r}")
