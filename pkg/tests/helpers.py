"""Shared test doubles for metric and pipeline tests."""

from lexcrew.embed import EmbeddingVector
from lexcrew.llm import ChatClient, LlmConfig, ScriptedBackend


class PresetEmbedder:
    """Maps known texts to fixed vectors, bypassing normalization so tests
    can demand exact cosines."""

    model_id = "preset"

    def __init__(self, mapping):
        self.mapping = {t: tuple(float(x) for x in v) for t, v in mapping.items()}

    def embed_passages(self, texts):
        return [
            EmbeddingVector(values=self.mapping[t], dim=len(self.mapping[t]), model_id=self.model_id)
            for t in texts
        ]

    def embed_query(self, text):
        return self.embed_passages([text])[0]


def judge_client(script, strict=True):
    return ChatClient(ScriptedBackend(script, strict=strict), LlmConfig(model_id="judge"))


def verdict_lines(n, positive, k, negative):
    return "\n".join(f"{i + 1}. {positive if i < k else negative}" for i in range(n))


def grid_judge(tp, fp, fn):
    """Scripted judge producing an exact TP/FP/FN breakdown for texts
    containing the markers CAND / REF."""
    cand_n, ref_n = tp + fp, tp + fn

    def decomp(prefix, n):
        if n == 0:
            return lambda m: "1. (nenhuma)"
        return lambda m: "\n".join(f"{i + 1}. {prefix}-s{i}" for i in range(n))

    return judge_client(
        [
            ("REFERÊNCIA:", verdict_lines(cand_n, "SUPPORTED", tp, "UNSUPPORTED")),
            ("CANDIDATO:", verdict_lines(ref_n, "COVERED", tp, "MISSING")),
            (lambda t: "Decomponha" in t and "CAND" in t, decomp("c", cand_n)),
            (lambda t: "Decomponha" in t and "REF" in t, decomp("r", ref_n)),
        ]
    )
