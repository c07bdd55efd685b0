"""Single-LLM RAG baseline: retrieve top-k articles, prepend them to one
chat call, no routing and no review."""

from __future__ import annotations

import time

from .agents import AgentStep, Outcome, PipelineRun, ToolCall
from .citations import referenced_chunk_ids
from .errors import LexcrewError
from .index import Retriever
from .llm import ChatClient, LlmConfig, system, user
from .prompts import PromptLedger, load_ledger

BASELINE_STEP = "Baseline"


class RagBaseline:
    def __init__(self, backend, retriever: Retriever, llm: LlmConfig, prompts: PromptLedger | None = None):
        self.backend = backend
        self.retriever = retriever
        self.llm = llm
        self.prompts = prompts or load_ledger("agents")

    def run(self, question: str) -> PipelineRun:
        started = time.monotonic()
        client = ChatClient(self.backend, self.llm)
        step = AgentStep(agent=BASELINE_STEP, input_text=question, output_text="")

        def finish(outcome, final, cited, error=None):
            return PipelineRun(
                question=question,
                outcome=outcome,
                steps=[step],
                final_answer=final,
                cited_articles=cited,
                wall_time_ms=int((time.monotonic() - started) * 1000),
                pipeline="rag",
                model_id=self.llm.model_id,
                error=error,
                transcript=client.transcript,
            )

        try:
            context, result = self.retriever.retrieve(question)
            step.tool_calls.append(ToolCall("retrieval", question, result.chunk_ids()))
            messages = [
                system(self.prompts.format("baseline", "system", context=context)),
                user(question),
            ]
            answer = client.complete(messages, agent=BASELINE_STEP)
            step.llm_calls = len(client.transcript)
        except LexcrewError as exc:
            step.llm_calls = len(client.transcript)
            return finish(Outcome.FAILED, "", [], error=f"{BASELINE_STEP}: {exc}")
        step.output_text = answer
        cited = referenced_chunk_ids(answer, result, self.retriever.index)
        return finish(Outcome.ANSWERED, answer, cited)


def baseline_answer(
    question: str,
    backend,
    retriever: Retriever,
    llm: LlmConfig,
    prompts: PromptLedger | None = None,
) -> PipelineRun:
    return RagBaseline(backend, retriever, llm, prompts).run(question)
