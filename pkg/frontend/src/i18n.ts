// Every user-visible string lives here; Portuguese is the default locale.

export const STRINGS: Record<string, Record<string, string>> = {
  "pt-BR": {
    title: "Assistente Trabalhista (CLT)",
    inputPlaceholder: "Digite sua pergunta sobre a legislação trabalhista…",
    send: "Enviar",
    pipeline: "Pipeline",
    pipelineAgents: "Agentes (três etapas)",
    pipelineRag: "RAG simples",
    model: "Modelo",
    compare: "Comparar os dois pipelines",
    compareUnavailable: "Comparação indisponível: o serviço expõe um único pipeline",
    citations: "Artigos citados",
    outcomeAnswered: "Respondida",
    outcomeOffTopic: "Fora do escopo",
    errorTitle: "Falha no serviço",
    retry: "Tentar novamente",
    serviceDegraded: "Serviço sem índice carregado; respostas indisponíveis.",
    serviceUnreachable: "Não foi possível contatar o serviço.",
    latency: "tempo",
    you: "Você",
  },
};

let locale = "pt-BR";

export function setLocale(next: string): void {
  if (STRINGS[next]) locale = next;
}

export function t(key: string): string {
  return STRINGS[locale]?.[key] ?? key;
}
