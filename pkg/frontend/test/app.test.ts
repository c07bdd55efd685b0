import { Window } from "happy-dom";
import { beforeEach, describe, expect, it } from "vitest";

import { ApiError, AskRequest, AskResponse, HealthResponse } from "../src/api.js";
import { AskClient, createApp } from "../src/app.js";
import { t } from "../src/i18n.js";

function answered(answer: string, cited: Array<[string, string]> = []): AskResponse {
  return {
    answer,
    outcome: "Answered",
    cited_articles: cited.map(([chunk_id, article_label]) => ({
      chunk_id,
      article_label,
      excerpt: `trecho de ${article_label}`,
    })),
    run_id: Math.random().toString(16).slice(2),
    latency_ms: 1,
  };
}

const REFUSAL: AskResponse = {
  answer: "Desculpe, só posso ajudar com legislação trabalhista.",
  outcome: "OffTopic",
  cited_articles: [],
  run_id: "ref",
  latency_ms: 1,
};

class FakeClient implements AskClient {
  requests: AskRequest[] = [];
  pipelines = ["agents", "rag"];
  byPipeline: Record<string, AskResponse | ApiError> = {};

  async health(): Promise<HealthResponse> {
    return { status: "ok", index_chunks: 20, models: ["scripted-demo"], pipelines: this.pipelines };
  }

  async ask(request: AskRequest): Promise<AskResponse> {
    this.requests.push(request);
    const result = this.byPipeline[request.pipeline] ?? answered("resposta padrão");
    if (result instanceof ApiError) throw result;
    return result;
  }
}

function mount(client: FakeClient) {
  const window = new Window();
  const root = window.document.createElement("div") as unknown as HTMLElement;
  window.document.body.appendChild(root as never);
  const app = createApp(root, { client });
  return { window, root, app };
}

function query<T extends Element = Element>(root: HTMLElement, selector: string): T[] {
  return Array.from(root.querySelectorAll(selector)) as T[];
}

describe("chat app", () => {
  let client: FakeClient;

  beforeEach(() => {
    client = new FakeClient();
  });

  it("renders an answer with its citations panel, 1:1 with the API list", async () => {
    client.byPipeline["agents"] = answered("Você tem direito a 30 dias (Art. 129).", [
      ["clt:art:0006", "Art. 129"],
      ["clt:art:0007", "Art. 130"],
    ]);
    const { root, app } = mount(client);
    await app.ready;
    await app.submit("Quantos dias de férias?");
    const turns = query(root, ".turn");
    expect(turns).toHaveLength(1);
    expect(query(root, ".answer-text")[0].textContent).toContain("30 dias");
    const items = query<HTMLElement>(root, ".citation");
    expect(items).toHaveLength(2);
    expect(items.map((i) => i.getAttribute("data-chunk-id"))).toEqual(["clt:art:0006", "clt:art:0007"]);
    expect(query(root, ".citation-label").map((e) => e.textContent)).toEqual(["Art. 129", "Art. 130"]);
    // pipeline badge on the turn
    expect(query(root, ".pipeline-badge")[0].textContent).toBe("agents");
  });

  it("blocks empty input client-side", async () => {
    const { root, app } = mount(client);
    await app.ready;
    await app.submit("   ");
    expect(client.requests).toHaveLength(0);
    expect(query(root, ".turn")).toHaveLength(0);
  });

  it("disables the input while a request is in flight", async () => {
    let release: (value: AskResponse) => void = () => {};
    client.ask = async (request) => {
      client.requests.push(request);
      return new Promise<AskResponse>((resolve) => {
        release = resolve;
      });
    };
    const { root, app } = mount(client);
    await app.ready;
    const input = query<HTMLInputElement>(root, ".question-input")[0];
    const submission = app.submit("pergunta lenta");
    expect(input.disabled).toBe(true);
    release(answered("pronto"));
    await submission;
    expect(input.disabled).toBe(false);
  });

  it("renders a 422 refusal distinctly, without a citations panel", async () => {
    client.byPipeline["agents"] = REFUSAL;
    const { root, app } = mount(client);
    await app.ready;
    await app.submit("Qual a capital da França?");
    const refusals = query(root, ".answer.refusal");
    expect(refusals).toHaveLength(1);
    expect(query(root, ".outcome-badge")[0].textContent).toBe(t("outcomeOffTopic"));
    expect(query(root, ".citations")).toHaveLength(0);
  });

  it("renders a retryable error card on 5xx and retries on click", async () => {
    client.byPipeline["agents"] = new ApiError(502, "backend down");
    const { root, app } = mount(client);
    await app.ready;
    await app.submit("pergunta");
    expect(query(root, ".answer.error")).toHaveLength(1);
    const retry = query<HTMLButtonElement>(root, ".retry-button")[0];
    expect(retry).toBeDefined();
    client.byPipeline["agents"] = answered("agora sim");
    retry.click();
    await app.idle();
    expect(client.requests).toHaveLength(2);
    expect(query(root, ".answer.answered")).toHaveLength(1);
  });

  it("compare mode issues both pipelines in parallel and renders two panels", async () => {
    client.byPipeline["agents"] = answered("resposta dos agentes", [["c1", "Art. 129"]]);
    client.byPipeline["rag"] = answered("resposta do rag", [["c1", "Art. 129"]]);
    const { root, app } = mount(client);
    await app.ready;
    query<HTMLInputElement>(root, ".compare-toggle")[0].checked = true;
    await app.submit("Quantos dias de férias?");
    const turn = query(root, ".turn.compare");
    expect(turn).toHaveLength(1);
    const badges = query(root, ".pipeline-badge").map((b) => b.textContent);
    expect(badges).toEqual(["agents", "rag"]);
    expect(query(root, ".answer-text").map((e) => e.textContent)).toEqual([
      "resposta dos agentes",
      "resposta do rag",
    ]);
    expect(client.requests.map((r) => r.pipeline)).toEqual(["agents", "rag"]);
  });

  it("compare partial failure renders one answer and one error card", async () => {
    client.byPipeline["agents"] = answered("só os agentes responderam");
    client.byPipeline["rag"] = new ApiError(502, "rag caiu");
    const { root, app } = mount(client);
    await app.ready;
    query<HTMLInputElement>(root, ".compare-toggle")[0].checked = true;
    await app.submit("pergunta");
    expect(query(root, ".answer.answered")).toHaveLength(1);
    expect(query(root, ".answer.error")).toHaveLength(1);
  });

  it("disables the compare control when health reports a single pipeline", async () => {
    client.pipelines = ["agents"];
    const { root, app } = mount(client);
    await app.ready;
    expect(query<HTMLInputElement>(root, ".compare-toggle")[0].disabled).toBe(true);
  });

  it("keeps turns in submission order", async () => {
    client.byPipeline["agents"] = answered("primeira");
    const { root, app } = mount(client);
    await app.ready;
    await app.submit("pergunta um");
    client.byPipeline["agents"] = answered("segunda");
    await app.submit("pergunta dois");
    expect(query(root, ".question-text").map((e) => e.textContent)).toEqual([
      "pergunta um",
      "pergunta dois",
    ]);
    expect(query(root, ".answer-text").map((e) => e.textContent)).toEqual(["primeira", "segunda"]);
  });

  it("defaults the pipeline toggle to agents", async () => {
    const { root, app } = mount(client);
    await app.ready;
    expect(query<HTMLSelectElement>(root, ".pipeline-select")[0].value).toBe("agents");
    await app.submit("pergunta");
    expect(client.requests[0].pipeline).toBe("agents");
  });
});
