"""Scoring: BLEU, embedding similarity, judge-based answer correctness,
and the descriptive-statistics bundle behind the subjective-score tables.
"""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .errors import MalformedJudgeReplyError, OutOfRangeError, ParameterError
from .llm import ChatClient, system, user
from .prompts import PromptLedger, load_ledger

AUTOMATED_METRICS = ("bleu", "answer_similarity", "answer_correctness")
SUBJECTIVE_METRICS = ("subj_precision", "subj_quality")
METRIC_NAMES = AUTOMATED_METRICS + SUBJECTIVE_METRICS

DEFAULT_W_FACTUAL = 0.75
DEFAULT_W_SEMANTIC = 0.25


# --------------------------------------------------------------------------
# BLEU
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase, then split on non-alphanumerics (Unicode-aware)."""
    return _TOKEN.findall(text.lower())


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(cand_tokens: list[str], refs_tokens: list[list[str]], n: int) -> float | None:
    """Clipped n-gram precision; None when the candidate has no n-grams of
    this order. Zero matches smooth to 1/(2 * candidate n-gram count)."""
    counts = _ngram_counts(cand_tokens, n)
    total = max(len(cand_tokens) - n + 1, 0)
    if total == 0:
        return None
    max_ref = Counter()
    for ref in refs_tokens:
        ref_counts = _ngram_counts(ref, n)
        for gram, c in ref_counts.items():
            if c > max_ref[gram]:
                max_ref[gram] = c
    clipped = sum(min(c, max_ref[gram]) for gram, c in counts.items())
    if clipped == 0:
        return 1.0 / (2 * total)
    return clipped / total


def bleu(candidate: str, references: list[str], max_n: int = 4) -> float:
    """BLEU with uniform weights over the attainable n-gram orders.

    Orders the candidate is too short to populate are excluded from the
    geometric mean (so a verbatim one-word match still scores 1), and the
    brevity penalty uses the reference length closest to the candidate's,
    ties resolved toward the shorter reference.
    """
    if not references:
        raise ParameterError("references must be non-empty")
    if max_n < 1:
        raise ParameterError("max_n must be >= 1")
    cand = tokenize(candidate)
    if not cand:
        return 0.0
    refs = [tokenize(r) for r in references]
    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        p = modified_precision(cand, refs, n)
        if p is None:
            continue
        log_sum += math.log(p)
        orders += 1
    geo = math.exp(log_sum / orders)
    c = len(cand)
    r = min((len(ref) for ref in refs), key=lambda rl: (abs(rl - c), rl))
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * geo


# --------------------------------------------------------------------------
# Answer similarity
# --------------------------------------------------------------------------

def answer_similarity(candidate: str, ground_truth: str, embedder) -> float:
    """Cosine of the two embeddings, clamped to [0, 1]."""
    vectors = embedder.embed_passages([candidate, ground_truth])
    cos = float(vectors[0].as_array() @ vectors[1].as_array())
    return min(max(cos, 0.0), 1.0)


# --------------------------------------------------------------------------
# Judge-based factual correctness
# --------------------------------------------------------------------------

_NUMBERED_LINE = re.compile(r"^\s*\d+\s*[.)]\s*(.*\S)\s*$")


def _parse_numbered(reply: str) -> list[str]:
    items = []
    for line in reply.splitlines():
        m = _NUMBERED_LINE.match(line)
        if m:
            items.append(m.group(1))
    if not items:
        raise MalformedJudgeReplyError(f"no numbered lines in judge reply: {reply[:120]!r}")
    return items


def _judge_call_with_reask(judge: ChatClient, messages, parse, reask_text: str, agent: str):
    reply = judge.complete(messages, agent=agent)
    try:
        return parse(reply)
    except MalformedJudgeReplyError:
        from .llm import ChatMessage, Role

        retry = list(messages) + [ChatMessage(Role.ASSISTANT, reply), user(reask_text)]
        return parse(judge.complete(retry, agent=agent))


def decompose_statements(text: str, judge: ChatClient, prompts: PromptLedger | None = None) -> list[str]:
    """Break a text into atomic factual statements via one judge call."""
    if not text.strip():
        return []
    prompts = prompts or load_ledger("judge")
    messages = [system(prompts.get("decompose", "system")), user(text)]
    items = _judge_call_with_reask(
        judge, messages, _parse_numbered, prompts.get("decompose", "reask"), agent="judge:decompose"
    )
    return [] if items == ["(nenhuma)"] else items


class Verdict(str, Enum):
    SUPPORTED = "SUPPORTED"
    UNSUPPORTED = "UNSUPPORTED"
    COVERED = "COVERED"
    MISSING = "MISSING"


def _parse_verdicts(reply: str, expected: int, positive: Verdict, negative: Verdict) -> list[bool]:
    lines = _parse_numbered(reply)
    if len(lines) != expected:
        raise MalformedJudgeReplyError(f"expected {expected} verdict lines, got {len(lines)}")
    verdicts = []
    for line in lines:
        token = line.strip().upper()
        if token == positive.value:
            verdicts.append(True)
        elif token == negative.value:
            verdicts.append(False)
        else:
            raise MalformedJudgeReplyError(f"unknown verdict {line!r}")
    return verdicts


@dataclass
class FactBreakdown:
    tp: int
    fp: int
    fn: int
    statements_generated: list[str] = field(default_factory=list)
    statements_reference: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "statements_generated": self.statements_generated,
            "statements_reference": self.statements_reference,
        }


def f1_from_counts(tp: int, fp: int, fn: int) -> float:
    if tp + fp + fn == 0:
        return 0.0
    return tp / (tp + 0.5 * (fp + fn))


def _numbered_block(statements: list[str]) -> str:
    return "\n".join(f"{i + 1}. {s}" for i, s in enumerate(statements))


def factual_f1(
    candidate_statements: list[str],
    reference_statements: list[str],
    judge: ChatClient,
    prompts: PromptLedger | None = None,
    reference_text: str | None = None,
    candidate_text: str | None = None,
) -> tuple[float, FactBreakdown]:
    """Statement-level F1: the judge marks candidate statements as
    supported by the reference (TP vs FP) and reference statements as
    covered by the candidate (FN when not). Sides without statements are
    trivially all-unsupported / all-missing and skip the judge call."""
    prompts = prompts or load_ledger("judge")
    reference_text = reference_text if reference_text is not None else "\n".join(reference_statements)
    candidate_text = candidate_text if candidate_text is not None else "\n".join(candidate_statements)

    if candidate_statements and reference_statements:
        messages = [
            system(prompts.get("support", "system")),
            user(prompts.format("support", "user", reference=reference_text, statements=_numbered_block(candidate_statements))),
        ]
        supported = _judge_call_with_reask(
            judge,
            messages,
            lambda r: _parse_verdicts(r, len(candidate_statements), Verdict.SUPPORTED, Verdict.UNSUPPORTED),
            prompts.get("support", "reask"),
            agent="judge:support",
        )
        messages = [
            system(prompts.get("coverage", "system")),
            user(prompts.format("coverage", "user", candidate=candidate_text, statements=_numbered_block(reference_statements))),
        ]
        covered = _judge_call_with_reask(
            judge,
            messages,
            lambda r: _parse_verdicts(r, len(reference_statements), Verdict.COVERED, Verdict.MISSING),
            prompts.get("coverage", "reask"),
            agent="judge:coverage",
        )
        tp = sum(supported)
        fp = len(candidate_statements) - tp
        fn = len(covered) - sum(covered)
    else:
        tp = 0
        fp = len(candidate_statements)
        fn = len(reference_statements)

    breakdown = FactBreakdown(
        tp=tp,
        fp=fp,
        fn=fn,
        statements_generated=list(candidate_statements),
        statements_reference=list(reference_statements),
    )
    return f1_from_counts(tp, fp, fn), breakdown


def combine_correctness(f1: float, similarity: float, w_factual: float = DEFAULT_W_FACTUAL, w_semantic: float = DEFAULT_W_SEMANTIC) -> float:
    if w_factual < 0 or w_semantic < 0 or abs(w_factual + w_semantic - 1.0) > 1e-9:
        raise ParameterError("weights must be non-negative and sum to 1")
    return w_factual * f1 + w_semantic * similarity


@dataclass
class CorrectnessReport:
    score: float
    f1: float
    similarity: float
    breakdown: FactBreakdown


def answer_correctness(
    candidate: str,
    ground_truth: str,
    embedder,
    judge: ChatClient,
    w_factual: float = DEFAULT_W_FACTUAL,
    w_semantic: float = DEFAULT_W_SEMANTIC,
    prompts: PromptLedger | None = None,
) -> CorrectnessReport:
    """Weighted blend of statement-level factual F1 and embedding
    similarity; the full breakdown is kept for auditability."""
    prompts = prompts or load_ledger("judge")
    cand_statements = decompose_statements(candidate, judge, prompts)
    ref_statements = decompose_statements(ground_truth, judge, prompts)
    f1, breakdown = factual_f1(
        cand_statements,
        ref_statements,
        judge,
        prompts,
        reference_text=ground_truth,
        candidate_text=candidate,
    )
    similarity = answer_similarity(candidate, ground_truth, embedder) if candidate.strip() and ground_truth.strip() else 0.0
    score = combine_correctness(f1, similarity, w_factual, w_semantic)
    return CorrectnessReport(score=score, f1=f1, similarity=similarity, breakdown=breakdown)


# --------------------------------------------------------------------------
# Descriptive statistics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScoreStats:
    mean: float
    median: float
    std: float
    var: float
    min: float
    max: float
    range: float
    cv_percent: float | None
    n: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "median": self.median,
            "std": self.std,
            "var": self.var,
            "min": self.min,
            "max": self.max,
            "range": self.range,
            "cv_percent": self.cv_percent,
            "n": self.n,
        }


def describe_stats(scores: list[float]) -> ScoreStats:
    """Mean/median/sample-std bundle; cv = 100*std/mean (None when the
    mean is zero and the spread is not)."""
    if len(scores) < 2:
        raise ParameterError("need at least two scores")
    mean = statistics.fmean(scores)
    var = statistics.variance(scores)  # n-1 denominator
    std = math.sqrt(var)
    lo, hi = min(scores), max(scores)
    if mean != 0:
        cv = 100.0 * std / mean
    else:
        cv = 0.0 if std == 0 else None
    return ScoreStats(
        mean=mean,
        median=statistics.median(scores),
        std=std,
        var=var,
        min=lo,
        max=hi,
        range=hi - lo,
        cv_percent=cv,
        n=len(scores),
    )


# --------------------------------------------------------------------------
# Evaluation records
# --------------------------------------------------------------------------

METRIC_BOUNDS = {
    "bleu": (0.0, 1.0),
    "answer_similarity": (0.0, 1.0),
    "answer_correctness": (0.0, 1.0),
    "subj_precision": (0.0, 10.0),
    "subj_quality": (0.0, 10.0),
}


@dataclass
class EvalRecord:
    question_id: str
    question: str
    ground_truth: str
    candidate: str
    pipeline: str
    model_id: str
    scores: dict[str, float] = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.scores.items():
            check_score(name, value)

    def key(self) -> tuple[str, str, str]:
        return (self.question_id, self.pipeline, self.model_id)

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "question": self.question,
            "ground_truth": self.ground_truth,
            "candidate": self.candidate,
            "pipeline": self.pipeline,
            "model_id": self.model_id,
            "scores": dict(sorted(self.scores.items())),
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalRecord":
        return cls(
            question_id=d["question_id"],
            question=d["question"],
            ground_truth=d["ground_truth"],
            candidate=d["candidate"],
            pipeline=d["pipeline"],
            model_id=d["model_id"],
            scores=dict(d.get("scores", {})),
            details=dict(d.get("details", {})),
        )


def check_score(name: str, value: float) -> None:
    if name not in METRIC_BOUNDS:
        raise OutOfRangeError(f"unknown metric {name!r}")
    lo, hi = METRIC_BOUNDS[name]
    if not math.isfinite(value):
        raise OutOfRangeError(f"{name} must be finite, got {value}")
    if not lo <= value <= hi:
        raise OutOfRangeError(f"{name}={value} outside [{lo}, {hi}]")
