"""The three-agent pipeline: Office Clerk routes, HR Specialist answers
from retrieval, Chief of HR reviews.

Agents hand each other plain text in a fixed sequential order; only the
specialist holds the retrieval tool.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from enum import Enum

from .citations import referenced_chunk_ids
from .errors import EmptyCompletionError, LexcrewError, MalformedAgentReplyError, ParameterError
from .index import RetrievalResult, Retriever
from .llm import ChatClient, ChatMessage, LlmConfig, Role, TranscriptEntry, system, user
from .prompts import PromptLedger, load_ledger

logger = logging.getLogger(__name__)

RETRIEVAL_TOOL = "retrieval"


class AgentName(str, Enum):
    OFFICE_CLERK = "OfficeClerk"
    HR_SPECIALIST = "HrSpecialist"
    HR_CHIEF = "HrChief"


class Outcome(str, Enum):
    ANSWERED = "Answered"
    OFF_TOPIC = "OffTopic"
    FAILED = "Failed"


class Scope(str, Enum):
    IN_SCOPE = "InScope"
    OUT_OF_SCOPE = "OutOfScope"


@dataclass(frozen=True)
class AgentSpec:
    name: AgentName
    role_text: str
    backstory: str
    goal: str
    tools: frozenset[str]
    llm: LlmConfig

    def __post_init__(self):
        if self.name is AgentName.HR_SPECIALIST:
            if self.tools != frozenset({RETRIEVAL_TOOL}):
                raise ParameterError("HrSpecialist must hold exactly the retrieval tool")
        elif self.tools:
            raise ParameterError(f"{self.name.value} must hold no tools")

    def persona(self) -> str:
        return f"{self.role_text}\n{self.backstory}\n{self.goal}"


@dataclass
class ToolCall:
    tool: str
    query: str
    chunk_ids: list[str]

    def to_dict(self) -> dict:
        return {"tool": self.tool, "query": self.query, "chunk_ids": self.chunk_ids}


@dataclass
class AgentStep:
    agent: str
    input_text: str
    output_text: str
    tool_calls: list[ToolCall] = field(default_factory=list)
    llm_calls: int = 0

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "input_text": self.input_text,
            "output_text": self.output_text,
            "tool_calls": [t.to_dict() for t in self.tool_calls],
            "llm_calls": self.llm_calls,
        }


@dataclass
class PipelineRun:
    question: str
    outcome: Outcome
    steps: list[AgentStep]
    final_answer: str
    cited_articles: list[str]
    wall_time_ms: int
    pipeline: str = "agents"
    model_id: str = ""
    error: str | None = None
    transcript: list[TranscriptEntry] = field(default_factory=list)

    @property
    def llm_calls(self) -> int:
        return sum(s.llm_calls for s in self.steps)

    @property
    def retrieval_calls(self) -> int:
        return sum(len(s.tool_calls) for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "outcome": self.outcome.value,
            "steps": [s.to_dict() for s in self.steps],
            "final_answer": self.final_answer,
            "cited_articles": self.cited_articles,
            "wall_time_ms": self.wall_time_ms,
            "pipeline": self.pipeline,
            "model_id": self.model_id,
            "error": self.error,
            "transcript": [e.to_dict() for e in self.transcript],
        }


def default_agent_specs(llm: LlmConfig, prompts: PromptLedger | None = None) -> dict[AgentName, AgentSpec]:
    prompts = prompts or load_ledger("agents")

    def from_section(name: AgentName, section: str, tools: frozenset[str]) -> AgentSpec:
        return AgentSpec(
            name=name,
            role_text=prompts.get(section, "role"),
            backstory=prompts.get(section, "backstory"),
            goal=prompts.get(section, "goal"),
            tools=tools,
            llm=llm,
        )

    return {
        AgentName.OFFICE_CLERK: from_section(AgentName.OFFICE_CLERK, "clerk", frozenset()),
        AgentName.HR_SPECIALIST: from_section(AgentName.HR_SPECIALIST, "specialist", frozenset({RETRIEVAL_TOOL})),
        AgentName.HR_CHIEF: from_section(AgentName.HR_CHIEF, "chief", frozenset()),
    }


_SCOPE_LINE = re.compile(r"^\s*SCOPE:\s*(IN|OUT)\s*$")


def parse_clerk_reply(reply: str) -> tuple[Scope, str]:
    """Parse the constrained two-line clerk format; raises when malformed."""
    lines = [ln for ln in reply.strip().splitlines() if ln.strip()]
    if not lines:
        raise MalformedAgentReplyError("empty clerk reply")
    m = _SCOPE_LINE.match(lines[0])
    if not m:
        raise MalformedAgentReplyError(f"first line is not a SCOPE line: {lines[0]!r}")
    if m.group(1) == "OUT":
        return Scope.OUT_OF_SCOPE, ""
    if len(lines) < 2 or lines[1].strip() in ("", "-"):
        raise MalformedAgentReplyError("missing distilled question on second line")
    return Scope.IN_SCOPE, lines[1].strip()


class AgentPipeline:
    """Sequential Clerk -> Specialist -> Chief orchestration over one
    shared retriever; each run gets its own chat client and transcript."""

    def __init__(
        self,
        specs: dict[AgentName, AgentSpec],
        backend,
        retriever: Retriever,
        prompts: PromptLedger | None = None,
        refusal_text: str | None = None,
        distill: bool = True,
        pipeline_id: str = "agents",
    ):
        self.specs = specs
        self.backend = backend
        self.retriever = retriever
        self.prompts = prompts or load_ledger("agents")
        self.refusal_text = refusal_text or self.prompts.get("common", "refusal")
        self.distill = distill
        self.pipeline_id = pipeline_id

    # stages ---------------------------------------------------------------

    def clerk_route(self, client: ChatClient, question: str) -> tuple[Scope, str]:
        """Classify scope and distill the question; one re-ask on a
        malformed reply, then the error propagates."""
        if not question.strip():
            raise ParameterError("question must be non-empty")
        spec = self.specs[AgentName.OFFICE_CLERK]
        task_key = "task" if self.distill else "task_forward"
        messages = [
            system(f"{spec.persona()}\n\n{self.prompts.get('clerk', task_key)}"),
            user(question),
        ]
        reply = client.complete(messages, agent=spec.name.value)
        try:
            scope, distilled = parse_clerk_reply(reply)
        except MalformedAgentReplyError:
            reask = messages + [
                ChatMessage(Role.ASSISTANT, reply),
                user(self.prompts.get("clerk", "reask")),
            ]
            reply = client.complete(reask, agent=spec.name.value)
            scope, distilled = parse_clerk_reply(reply)
        if not self.distill and scope is Scope.IN_SCOPE:
            distilled = question
        return scope, distilled

    def specialist_answer(self, client: ChatClient, distilled_question: str) -> tuple[str, RetrievalResult]:
        """Exactly one retrieval, then one grounded LLM call."""
        spec = self.specs[AgentName.HR_SPECIALIST]
        context, result = self.retriever.retrieve(distilled_question)
        messages = [
            system(f"{spec.persona()}\n\n" + self.prompts.format("specialist", "task", context=context)),
            user(distilled_question),
        ]
        draft = client.complete(messages, agent=spec.name.value)
        return draft, result

    def chief_review(self, client: ChatClient, question: str, draft: str) -> str:
        """One review call; an empty revision falls back to the draft."""
        if not draft.strip():
            raise ParameterError("draft must be non-empty")
        spec = self.specs[AgentName.HR_CHIEF]
        messages = [
            system(spec.persona()),
            user(self.prompts.format("chief", "task", question=question, draft=draft)),
        ]
        try:
            return client.complete(messages, agent=spec.name.value)
        except EmptyCompletionError:
            logger.warning("chief returned an empty revision; falling back to the draft")
            return draft

    # orchestration ----------------------------------------------------------

    def run(self, question: str) -> PipelineRun:
        started = time.monotonic()
        client = ChatClient(self.backend, self.specs[AgentName.OFFICE_CLERK].llm)
        steps: list[AgentStep] = []

        def finish(outcome: Outcome, final: str, cited: list[str], error: str | None = None) -> PipelineRun:
            return PipelineRun(
                question=question,
                outcome=outcome,
                steps=steps,
                final_answer=final,
                cited_articles=cited,
                wall_time_ms=int((time.monotonic() - started) * 1000),
                pipeline=self.pipeline_id,
                model_id=client.cfg.model_id,
                error=error,
                transcript=client.transcript,
            )

        def stage(agent: AgentName, input_text: str, call):
            """Run one stage, recording llm/tool call deltas on its step."""
            llm_before = len(client.transcript)
            tools_before = len(self.retriever.calls)
            try:
                output = call()
                failure = None
            except LexcrewError as exc:
                output = None
                failure = exc
            step = AgentStep(
                agent=agent.value,
                input_text=input_text,
                output_text="",
                llm_calls=len(client.transcript) - llm_before,
            )
            for rc in self.retriever.calls[tools_before:]:
                step.tool_calls.append(ToolCall(RETRIEVAL_TOOL, rc.query, list(rc.chunk_ids)))
            steps.append(step)
            return output, failure, step

        result_box: dict = {}

        def clerk_call():
            return self.clerk_route(client, question)

        output, failure, step = stage(AgentName.OFFICE_CLERK, question, clerk_call)
        if failure is not None:
            return finish(Outcome.FAILED, "", [], error=f"{AgentName.OFFICE_CLERK.value}: {failure}")
        scope, distilled = output
        step.output_text = distilled if scope is Scope.IN_SCOPE else "SCOPE: OUT"
        if scope is Scope.OUT_OF_SCOPE:
            return finish(Outcome.OFF_TOPIC, self.refusal_text, [])

        def specialist_call():
            draft, result = self.specialist_answer(client, distilled)
            result_box["retrieval"] = result
            return draft

        draft, failure, step = stage(AgentName.HR_SPECIALIST, distilled, specialist_call)
        if failure is not None:
            return finish(Outcome.FAILED, "", [], error=f"{AgentName.HR_SPECIALIST.value}: {failure}")
        step.output_text = draft

        final, failure, step = stage(
            AgentName.HR_CHIEF, draft, lambda: self.chief_review(client, question, draft)
        )
        if failure is not None:
            return finish(Outcome.FAILED, "", [], error=f"{AgentName.HR_CHIEF.value}: {failure}")
        step.output_text = final

        cited = referenced_chunk_ids(final, result_box["retrieval"], self.retriever.index)
        return finish(Outcome.ANSWERED, final, cited)
