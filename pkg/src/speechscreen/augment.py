"""Label-conditioned synthetic-speech workflow.

Fine-tune prompts combine one of ten expert personas with a constant task
description and a label-specific cue block; inference prompts are neutral
(no cue vocabulary) so a fine-tuned generator has to rely on what it
learned. Since this package never fine-tunes anything itself, generation
also offers a cue-prompted mode where the cues ride along at inference —
the conditioning mode is always recorded in provenance.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, EmptyTranscript, Label, Split, Transcript
from .httpclient import RetryPolicy, TokenBucket, post_json, bearer_headers
from .lingfeat import tokenize

log = logging.getLogger(__name__)

PERSONAS = (
    "a language and cognition specialist",
    "a speech-language pathologist",
    "a geriatric clinician",
    "a neuropsychologist",
    "a cognitive neuroscientist studying spoken language",
    "a clinical linguist",
    "a dementia-care nurse practitioner",
    "a psychometrician specializing in verbal assessments",
    "a conversation analyst",
    "a gerontology researcher",
)

TASK_TEXT = (
    "Produce the transcript of a person spontaneously describing the "
    "'cookie theft' picture: a boy on a tipping stool reaching into a "
    "cookie jar, a girl beside him, and a mother drying dishes while the "
    "sink overflows. Write it as natural unrehearsed speech, not polished "
    "prose."
)

LABEL_CUES = {
    Label.CONTROL: (
        "The speaker is cognitively healthy: use well-organized "
        "descriptions, advanced sentence structures, varied vocabulary, "
        "and a fluent coherent flow."
    ),
    Label.CASE: (
        "The speaker is cognitively impaired: include repetition of words "
        "and phrases, filler words such as um and uh, grammatical slips, "
        "word-finding difficulty, and abrupt topic shifts."
    ),
}

# Phrases that must never leak into a neutral inference prompt.
CUE_LEXICON = frozenset({
    "well-organized", "advanced sentence structures", "varied vocabulary",
    "fluent coherent flow", "repetition of words", "filler words",
    "grammatical slips", "word-finding difficulty", "abrupt topic shifts",
    "cognitively healthy", "cognitively impaired",
})

GENERATION_REQUEST = "Describe the cookie theft picture in spontaneous speech."


def build_finetune_prompt(label: Label, role_index: int) -> str:
    if not 0 <= role_index < len(PERSONAS):
        raise ValueError(f"role_index must be 0-9, got {role_index}")
    return (f"You are {PERSONAS[role_index]}. {TASK_TEXT} "
            f"{LABEL_CUES[label]}")


def build_inference_prompt() -> str:
    prompt = (f"You are an expert in spoken language. {TASK_TEXT}")
    leaked = [c for c in CUE_LEXICON if c in prompt]
    assert not leaked, f"cue phrases leaked into neutral prompt: {leaked}"
    return prompt


def assign_roles(n: int) -> list[int]:
    """Round-robin persona assignment over the id-ordered training set."""
    return [i % len(PERSONAS) for i in range(n)]


def export_finetune_dataset(corpus: Corpus, path: str | Path) -> int:
    """Write the chat-format fine-tune JSONL (one record per training
    transcript, personas assigned round-robin by id order). Byte-stable
    for a fixed corpus. Returns the number of records written."""
    train = corpus.view(Split.TRAIN)
    if not train:
        raise ValueError("training split is empty")
    roles = assign_roles(len(train))
    with Path(path).open("w", encoding="utf-8") as fh:
        for t, role in zip(train, roles):
            rec = {
                "system": build_finetune_prompt(t.label, role),
                "user": GENERATION_REQUEST,
                "assistant": t.text,
                "label": t.label.value,
                "role_index": role,
                "id": t.id,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return len(train)


# ----------------------------------------------------------- generators --

@dataclass(frozen=True)
class Sampling:
    temperature: float = 1.0
    top_p: float | None = 0.95
    top_k: int | None = 50

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("generation temperature must be > 0")

    def to_dict(self) -> dict:
        return {"temperature": self.temperature, "top_p": self.top_p,
                "top_k": self.top_k}


@dataclass(frozen=True)
class FinetuneRecord:
    """External fine-tune bookkeeping; nothing here is trained locally."""
    qlora_rank: int | None = None
    qlora_alpha: int | None = None
    qlora_dropout: float | None = None
    effective_batch: int = 8
    epochs: int = 10

    def to_dict(self) -> dict:
        return {"qlora_rank": self.qlora_rank, "qlora_alpha": self.qlora_alpha,
                "qlora_dropout": self.qlora_dropout,
                "effective_batch": self.effective_batch, "epochs": self.epochs}


@dataclass(frozen=True)
class GeneratorConfig:
    provider: str
    model: str
    sampling: Sampling = field(default_factory=Sampling)
    finetune: FinetuneRecord = field(default_factory=FinetuneRecord)
    supports_top_k: bool = True
    conditioning: str = "finetuned-neutral"  # or "cue-prompted"

    def to_dict(self) -> dict:
        return {"provider": self.provider, "model": self.model,
                "sampling": self.sampling.to_dict(),
                "finetune": self.finetune.to_dict(),
                "conditioning": self.conditioning}


# Known-good sampling and fine-tune settings per generator family.
GENERATOR_PRESETS = {
    "llama-8b": GeneratorConfig(
        provider="llama-8b", model="llama-3.1-8b-instruct",
        sampling=Sampling(1.0, 0.95, 50),
        finetune=FinetuneRecord(64, 128, 0.1, 8, 12)),
    "medalpaca-7b": GeneratorConfig(
        provider="medalpaca-7b", model="medalpaca-7b",
        sampling=Sampling(1.0, 0.95, 50),
        finetune=FinetuneRecord(128, 256, 0.1, 8, 6)),
    "ministral-8b": GeneratorConfig(
        provider="ministral-8b", model="ministral-8b-instruct-2410",
        sampling=Sampling(1.0, None, 50),
        finetune=FinetuneRecord(32, 64, 0.0, 8, 10)),
    "llama-70b": GeneratorConfig(
        provider="llama-70b", model="llama-3.3-70b-instruct",
        sampling=Sampling(1.0, 0.95, 50),
        finetune=FinetuneRecord(16, 32, 0.0, 8, 9)),
    "gpt-4o": GeneratorConfig(
        provider="gpt-4o", model="gpt-4o",
        sampling=Sampling(1.0, None, None), supports_top_k=False,
        finetune=FinetuneRecord(None, None, None, 20, 10)),
}


class ChatClient:
    """Minimal provider-agnostic chat-completion client.

    Request: {"model", "messages", "temperature", "top_p", "top_k"};
    nullable knobs are omitted, and top_k is dropped with a warning when
    the provider does not support it. Response: {"text": ...} or an
    OpenAI-style choices list.
    """

    def __init__(self, endpoint: str, api_key_env: str | None = None,
                 retry: RetryPolicy | None = None,
                 limiter: TokenBucket | None = None,
                 timeout: float = 120.0, session=None):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.retry = retry or RetryPolicy()
        self.limiter = limiter
        self.timeout = timeout
        self.session = session

    def generate(self, messages: list[dict], cfg: GeneratorConfig,
                 temperature: float | None = None,
                 max_tokens: int | None = None) -> str:
        payload = {"model": cfg.model, "messages": messages,
                   "temperature": (cfg.sampling.temperature
                                   if temperature is None else temperature)}
        if max_tokens is not None:
            payload["max_tokens"] = max_tokens
        if cfg.sampling.top_p is not None:
            payload["top_p"] = cfg.sampling.top_p
        if cfg.sampling.top_k is not None:
            if cfg.supports_top_k:
                payload["top_k"] = cfg.sampling.top_k
            else:
                log.warning("provider %s does not support top_k; omitted",
                            cfg.provider)
        resp = post_json(self.endpoint, payload,
                         headers=bearer_headers(self.api_key_env),
                         timeout=self.timeout, retry=self.retry,
                         session=self.session, limiter=self.limiter)
        if "text" in resp:
            return str(resp["text"])
        try:
            return str(resp["choices"][0]["message"]["content"])
        except (KeyError, IndexError, TypeError):
            raise ValueError(f"unrecognized completion response: {list(resp)}")


# ----------------------------------------------------------- validation --

@dataclass(frozen=True)
class Bounds:
    min_words: int = 10
    max_words: int = 600
    near_duplicate_jaccard: float = 0.8


def content_hash(text: str) -> str:
    return hashlib.sha256(" ".join(text.split()).encode("utf-8")).hexdigest()


def _four_grams(text: str) -> frozenset:
    try:
        words = tokenize(text).words
    except EmptyTranscript:
        return frozenset()
    if len(words) < 4:
        return frozenset({tuple(words)})
    return frozenset(tuple(words[i:i + 4]) for i in range(len(words) - 3))


def validate_sample(text: str, bounds: Bounds, seen_hashes: set[str],
                    seen_grams: list[frozenset]) -> str | None:
    """None when acceptable, else the rejection reason."""
    if not text.strip():
        return "empty"
    try:
        wc = tokenize(text).n_words
    except EmptyTranscript:
        return "empty"
    if wc < bounds.min_words:
        return "too_short"
    if wc > bounds.max_words:
        return "too_long"
    if content_hash(text) in seen_hashes:
        return "duplicate"
    grams = _four_grams(text)
    for other in seen_grams:
        union = len(grams | other)
        if union and len(grams & other) / union > bounds.near_duplicate_jaccard:
            return "near_duplicate"
    return None


@dataclass
class SyntheticSample:
    text: str
    target_label: Label
    generator: str
    role_index: int | None        # None under the neutral inference prompt
    sampling: dict
    conditioning: str
    status: str                   # "accepted" or "rejected:<reason>"
    content_hash: str
    attempt: int = 1

    def to_dict(self) -> dict:
        return {"text": self.text, "label": self.target_label.value,
                "provenance": {
                    "generator": self.generator, "role_index": self.role_index,
                    "sampling": self.sampling,
                    "conditioning": self.conditioning, "status": self.status,
                    "content_hash": self.content_hash,
                    "attempt": self.attempt}}


@dataclass
class SyntheticCorpus:
    samples: list[SyntheticSample]
    generator: dict
    created_unix: float = 0.0

    def accepted(self) -> list[SyntheticSample]:
        return [s for s in self.samples if s.status == "accepted"]

    def label_counts(self) -> dict[str, int]:
        out = {l.value: 0 for l in Label}
        for s in self.accepted():
            out[s.target_label.value] += 1
        return out

    def write_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(json.dumps({"generator": self.generator,
                                 "created_unix": self.created_unix},
                                sort_keys=True) + "\n")
            for s in self.samples:
                fh.write(json.dumps(s.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def read_jsonl(cls, path: str | Path) -> "SyntheticCorpus":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        header = json.loads(lines[0])
        samples = []
        for line in lines[1:]:
            if not line.strip():
                continue
            d = json.loads(line)
            prov = d["provenance"]
            samples.append(SyntheticSample(
                text=d["text"], target_label=Label(d["label"]),
                generator=prov["generator"], role_index=prov["role_index"],
                sampling=prov["sampling"], conditioning=prov["conditioning"],
                status=prov["status"], content_hash=prov["content_hash"],
                attempt=prov.get("attempt", 1)))
        return cls(samples=samples, generator=header["generator"],
                   created_unix=header.get("created_unix", 0.0))


class GenerationExhausted(Exception):
    """A sample kept getting rejected past the retry budget."""


def generate_synthetic(client: ChatClient, gen_cfg: GeneratorConfig, n: int,
                       label_mix: float = 0.5, bounds: Bounds = Bounds(),
                       max_attempts_per_sample: int = 6,
                       clock=time.time) -> SyntheticCorpus:
    """Drive the generator for n accepted samples at the requested label
    mix. Rejected samples are retried up to the per-sample budget; every
    sample (accepted or not) lands in the corpus with full provenance.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= label_mix <= 1.0:
        raise ValueError("label_mix must be in [0,1]")
    n_case = round(n * label_mix)
    case_q = [Label.CASE] * n_case
    ctrl_q = [Label.CONTROL] * (n - n_case)
    # interleave so partial corpora stay roughly balanced
    m = min(len(case_q), len(ctrl_q))
    targets = [t for pair in zip(case_q, ctrl_q) for t in pair] \
        + case_q[m:] + ctrl_q[m:]

    samples: list[SyntheticSample] = []
    seen_hashes: set[str] = set()
    seen_grams: list[frozenset] = []
    for target in targets:
        if gen_cfg.conditioning == "cue-prompted":
            system = build_finetune_prompt(target, 0)
            role: int | None = 0
        else:
            system = build_inference_prompt()
            role = None
        messages = [{"role": "system", "content": system}]
        if gen_cfg.conditioning == "finetuned-neutral":
            messages.append({"role": "system",
                             "content": f"target label: {target.value}"})
        messages.append({"role": "user", "content": GENERATION_REQUEST})

        for attempt in range(1, max_attempts_per_sample + 1):
            text = client.generate(messages, gen_cfg)
            reason = validate_sample(text, bounds, seen_hashes, seen_grams)
            sample = SyntheticSample(
                text=text, target_label=target, generator=gen_cfg.provider,
                role_index=role, sampling=gen_cfg.sampling.to_dict(),
                conditioning=gen_cfg.conditioning,
                status="accepted" if reason is None else f"rejected:{reason}",
                content_hash=content_hash(text), attempt=attempt)
            samples.append(sample)
            if reason is None:
                seen_hashes.add(sample.content_hash)
                seen_grams.append(_four_grams(text))
                break
            log.info("sample rejected (%s), attempt %d/%d", reason, attempt,
                     max_attempts_per_sample)
        else:
            raise GenerationExhausted(
                f"generator {gen_cfg.provider}: no accepted sample for "
                f"{target.value} after {max_attempts_per_sample} attempts")

    return SyntheticCorpus(samples=samples, generator=gen_cfg.to_dict(),
                           created_unix=clock())


def augment_training_set(real: Corpus, synth: SyntheticCorpus,
                         multiplier: int) -> list[Transcript]:
    """Real training split plus multiplier x |train| synthetic samples (in
    provenance order). Validation and test views are untouched by
    construction: only the merged train list is returned."""
    if not 1 <= multiplier <= 5:
        raise ValueError(f"multiplier must be 1-5, got {multiplier}")
    train = real.view(Split.TRAIN)
    need = multiplier * len(train)
    accepted = synth.accepted()
    if len(accepted) < need:
        raise ValueError(
            f"need {need} accepted synthetic samples, have {len(accepted)}")
    merged = list(train)
    for i, s in enumerate(accepted[:need]):
        merged.append(Transcript(
            id=f"synth-{s.generator}-{i:05d}", label=s.target_label,
            split=Split.TRAIN, text=s.text,
            word_count=tokenize(s.text).n_words,
            meta={"synthetic": "true", "content_hash": s.content_hash}))
    return merged
