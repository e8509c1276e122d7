"""Zero-shot / externally fine-tuned LLM classifier harness.

The classification prompt asks for a strict JSON label ('Healthy' or
'AD'); parsing tolerates single quotes, markdown fences, and surrounding
prose, and falls back to a bare-word read when exactly one label word
appears. A response that still defies parsing becomes the Unparseable
verdict — scored as a misclassification and reported as a separate rate,
never an exception.
"""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass

from .augment import ChatClient, GeneratorConfig
from .clsmetrics import ScoredPrediction, confusion_f1
from .corpus import Label, Transcript

log = logging.getLogger(__name__)

CLASSIFICATION_INSTRUCTION = (
    "You are an expert in cognitive health and language analysis. You will "
    "analyze a spoken language transcript from a person describing the "
    "'cookie theft' picture. This is not written text but a transcription "
    "of spontaneous speech. Analyze the provided transcript and classify "
    "it into one of two categories: 'Healthy' for a healthy cognitive "
    "state or 'AD' for Alzheimer's disease. Provide only the label "
    "('Healthy' or 'AD') as the output. Do not include explanations or "
    "additional text. The output should be in JSON format, like "
    "{'label': 'predicted label'}."
)

FORMAT_REMINDER = (
    "Reminder: respond with JSON only, exactly like "
    "{\"label\": \"Healthy\"} or {\"label\": \"AD\"}."
)

# Temperature policy: deterministic decoding for open-weight models,
# the vendor-recommended 0.7 for the closed GPT family.
OPEN_WEIGHT_TEMPERATURE = 0.0
GPT_FAMILY_TEMPERATURE = 0.7


@dataclass(frozen=True)
class JudgeConfig:
    generator: GeneratorConfig
    temperature: float | None = None   # None -> family policy
    max_retries: int = 2
    response_token_limit: int = 64

    def effective_temperature(self) -> float:
        if self.temperature is not None:
            if not 0.0 <= self.temperature <= 2.0:
                raise ValueError("temperature must be in [0,2]")
            return self.temperature
        if self.generator.provider.startswith("gpt"):
            return GPT_FAMILY_TEMPERATURE
        return OPEN_WEIGHT_TEMPERATURE


@dataclass(frozen=True)
class JudgeVerdict:
    id: str
    raw_response: str
    parsed_label: Label | None   # None = Unparseable
    latency: float
    attempts: int

    def to_dict(self) -> dict:
        return {"id": self.id, "raw_response": self.raw_response,
                "parsed_label": (self.parsed_label.value
                                 if self.parsed_label else "unparseable"),
                "latency": self.latency, "attempts": self.attempts}


def build_classification_prompt(transcript_text: str) -> str:
    if not transcript_text.strip():
        raise ValueError("transcript text is empty")
    return f"{CLASSIFICATION_INSTRUCTION}\n\nTranscript:\n{transcript_text}"


_JSON_BLOB = re.compile(r"\{[^{}]*\}")
_WORD_AD = re.compile(r"\bAD\b")
_WORD_HEALTHY = re.compile(r"\bhealthy\b", re.IGNORECASE)


def _label_from_word(word: str) -> Label | None:
    w = word.strip().strip(".").lower()
    if w == "ad" or "alzheimer" in w:
        return Label.CASE
    if w == "healthy":
        return Label.CONTROL
    return None


def parse_label(raw: str) -> Label | None:
    """Total and deterministic; None means Unparseable."""
    if not isinstance(raw, str):
        return None
    text = raw.strip()
    # peel markdown fences
    text = re.sub(r"```[a-zA-Z]*", "", text).replace("```", "")

    for blob in _JSON_BLOB.findall(text):
        for candidate in (blob, blob.replace("'", '"')):
            try:
                doc = json.loads(candidate)
            except ValueError:
                continue
            if isinstance(doc, dict):
                for k, v in doc.items():
                    if k.lower() == "label" and isinstance(v, str):
                        lab = _label_from_word(v)
                        if lab is not None:
                            return lab

    # bare-word fallback: exactly one of the two label words present
    has_ad = bool(_WORD_AD.search(text))
    has_healthy = bool(_WORD_HEALTHY.search(text))
    if has_ad and not has_healthy:
        return Label.CASE
    if has_healthy and not has_ad:
        return Label.CONTROL
    return None


def judge(client: ChatClient, cfg: JudgeConfig, transcript: Transcript,
          clock=time.perf_counter) -> JudgeVerdict:
    """One verdict; re-asks with a format reminder on unparseable output.

    The outbound prompt carries the transcript text only — never the true
    label (asserted, since that would be leakage).
    """
    prompt = build_classification_prompt(transcript.text)
    # leakage guard: outside the transcript's own words, the prompt must
    # not mention the true label
    scaffold = prompt.replace(transcript.text, "")
    assert transcript.label.value not in scaffold.lower(), \
        "true label leaked into the judge prompt"
    temperature = cfg.effective_temperature()
    start = clock()
    raw = ""
    attempts = 0
    label = None
    for attempt in range(1, cfg.max_retries + 2):
        attempts = attempt
        content = prompt if attempt == 1 else f"{prompt}\n\n{FORMAT_REMINDER}"
        raw = client.generate([{"role": "user", "content": content}],
                              cfg.generator, temperature=temperature,
                              max_tokens=cfg.response_token_limit)
        label = parse_label(raw)
        if label is not None:
            break
        log.info("unparseable judge output for %s (attempt %d)",
                 transcript.id, attempt)
    return JudgeVerdict(id=transcript.id, raw_response=raw, parsed_label=label,
                        latency=clock() - start, attempts=attempts)


def evaluate_judge(client: ChatClient, cfg: JudgeConfig,
                   transcripts: list[Transcript]) -> dict:
    """Batch evaluation. Unparseable verdicts count as misclassifications
    (the prediction is forced to the wrong label) and are also reported as
    a separate rate."""
    if not transcripts:
        raise ValueError("evaluate_judge needs a non-empty split")
    verdicts = [judge(client, cfg, t) for t in transcripts]
    preds = []
    unparseable = 0
    for t, v in zip(transcripts, verdicts):
        if v.parsed_label is None:
            unparseable += 1
            predicted = (Label.CONTROL if t.label is Label.CASE else Label.CASE)
        else:
            predicted = v.parsed_label
        preds.append(ScoredPrediction(
            id=t.id, true_label=t.label,
            p_case=1.0 if predicted is Label.CASE else 0.0))
    cm = confusion_f1(preds)
    return {
        "n": len(transcripts),
        "f1": cm["f1"], "precision": cm["precision"], "recall": cm["recall"],
        "confusion": {k: cm[k] for k in ("tp", "fp", "tn", "fn")},
        "unparseable_rate": unparseable / len(transcripts),
        "temperature": cfg.effective_temperature(),
        "provider": cfg.generator.provider,
        "verdicts": [v.to_dict() for v in verdicts],
    }
