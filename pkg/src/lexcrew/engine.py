"""Glue layer: one object holding the index, embedder, model backends and
prompts, answering questions through either pipeline. The HTTP service,
the CLI and the benchmark runner all sit on top of this."""

from __future__ import annotations

from pathlib import Path

from .agents import AgentPipeline, PipelineRun, default_agent_specs
from .baseline import RagBaseline
from .config import AppConfig
from .errors import ConfigError
from .index import DEFAULT_SEPARATOR, DEFAULT_TOP_K, Retriever, VectorIndex

PIPELINES = ("agents", "rag")


class QaEngine:
    def __init__(
        self,
        index: VectorIndex,
        embedder,
        config: AppConfig | None = None,
        agents_index: VectorIndex | None = None,
    ):
        self.config = config or AppConfig()
        self.index = index
        # by default both pipelines share the identical index object so
        # benchmark differences are attributable to the pipeline alone;
        # a separate window-chunked index may be supplied for the agents
        self.agents_index = agents_index or index
        self.embedder = embedder
        self.prompts_agents = self.config.load_prompts("agents")
        self.k = int(self.config.retrieval.get("k", DEFAULT_TOP_K))
        self.separator = str(self.config.retrieval.get("separator", DEFAULT_SEPARATOR))
        self.distill = bool(self.config.agents.get("distill", True))

    @property
    def n_chunks(self) -> int:
        return len(self.index)

    def model_ids(self) -> list[str]:
        return self.config.model_ids()

    def ask(self, question: str, pipeline: str = "agents", model_id: str | None = None) -> PipelineRun:
        if pipeline not in PIPELINES:
            raise ConfigError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
        backend, llm_cfg = self.config.build_backend(model_id)
        if pipeline == "rag":
            retriever = Retriever(self.index, self.embedder, k=self.k, separator=self.separator)
            return RagBaseline(backend, retriever, llm_cfg, self.prompts_agents).run(question)
        retriever = Retriever(self.agents_index, self.embedder, k=self.k, separator=self.separator)
        specs = default_agent_specs(llm_cfg, self.prompts_agents)
        pipe = AgentPipeline(
            specs,
            backend,
            retriever,
            prompts=self.prompts_agents,
            distill=self.distill,
        )
        return pipe.run(question)


def load_engine(index_path: str | Path, config: AppConfig | None = None, agents_index_path: str | Path | None = None) -> QaEngine:
    config = config or AppConfig()
    index = VectorIndex.load(index_path)
    agents_index = VectorIndex.load(agents_index_path) if agents_index_path else None
    return QaEngine(index, config.build_embedder(), config, agents_index=agents_index)
