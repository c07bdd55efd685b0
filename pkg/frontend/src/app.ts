// Single-page chat UI over the lexcrew JSON API: one chat column, a
// pipeline toggle, and an optional side-by-side compare mode.

import { ApiError, AskRequest, AskResponse, HealthResponse, LexcrewClient, Pipeline } from "./api.js";
import { t } from "./i18n.js";

export interface TurnSide {
  pipeline: Pipeline;
  response?: AskResponse;
  error?: { status: number; message: string; retryable: boolean };
}

export interface ChatTurn {
  question: string;
  timestamp: number;
  sides: TurnSide[]; // one side normally, two in compare mode
}

/** What the app needs from the API; LexcrewClient satisfies it. */
export interface AskClient {
  health(): Promise<HealthResponse>;
  ask(request: AskRequest): Promise<AskResponse>;
}

export interface AppOptions {
  baseUrl?: string;
  client?: AskClient;
}

export interface App {
  root: HTMLElement;
  turns: ChatTurn[];
  /** Resolves when no request is in flight (used by tests). */
  idle(): Promise<void>;
  submit(question: string): Promise<void>;
  ready: Promise<void>;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createApp(root: HTMLElement, options: AppOptions = {}): App {
  const doc = root.ownerDocument;
  const client = options.client ?? new LexcrewClient(options.baseUrl ?? "");
  const turns: ChatTurn[] = [];
  let busy: Promise<void> = Promise.resolve();

  root.classList.add("lexcrew-app");

  const header = el(doc, "header");
  header.appendChild(el(doc, "h1", "", t("title")));
  const status = el(doc, "div", "status");
  header.appendChild(status);

  const controls = el(doc, "div", "controls");
  const pipelineLabel = el(doc, "label", "", t("pipeline") + " ");
  const pipelineSelect = el(doc, "select", "pipeline-select") as HTMLSelectElement;
  for (const [value, key] of [["agents", "pipelineAgents"], ["rag", "pipelineRag"]] as const) {
    const opt = el(doc, "option", "", t(key)) as HTMLOptionElement;
    opt.value = value;
    pipelineSelect.appendChild(opt);
  }
  pipelineSelect.value = "agents"; // the proposed system is the default
  pipelineLabel.appendChild(pipelineSelect);
  controls.appendChild(pipelineLabel);

  const modelLabel = el(doc, "label", "", t("model") + " ");
  const modelSelect = el(doc, "select", "model-select") as HTMLSelectElement;
  modelLabel.appendChild(modelSelect);
  controls.appendChild(modelLabel);

  const compareLabel = el(doc, "label", "compare-label");
  const compareToggle = el(doc, "input", "compare-toggle") as HTMLInputElement;
  compareToggle.type = "checkbox";
  compareLabel.appendChild(compareToggle);
  compareLabel.appendChild(doc.createTextNode(" " + t("compare")));
  controls.appendChild(compareLabel);
  header.appendChild(controls);

  const turnsBox = el(doc, "main", "turns");

  const form = el(doc, "div", "ask-form");
  const input = el(doc, "input", "question-input") as HTMLInputElement;
  input.placeholder = t("inputPlaceholder");
  const sendButton = el(doc, "button", "send-button", t("send")) as HTMLButtonElement;
  sendButton.type = "button";
  form.appendChild(input);
  form.appendChild(sendButton);

  root.appendChild(header);
  root.appendChild(turnsBox);
  root.appendChild(form);

  function renderCitations(response: AskResponse): HTMLElement | null {
    if (!response.cited_articles.length) return null;
    // never fabricate citations: render exactly the API's list, 1:1
    const details = el(doc, "details", "citations");
    const summary = el(doc, "summary", "", `${t("citations")} (${response.cited_articles.length})`);
    details.appendChild(summary);
    const list = el(doc, "ul");
    for (const cited of response.cited_articles) {
      const item = el(doc, "li", "citation");
      item.dataset.chunkId = cited.chunk_id;
      item.appendChild(el(doc, "strong", "citation-label", cited.article_label));
      item.appendChild(el(doc, "span", "citation-excerpt", " " + cited.excerpt));
      list.appendChild(item);
    }
    details.appendChild(list);
    return details;
  }

  function renderSide(turn: ChatTurn, side: TurnSide): HTMLElement {
    const box = el(doc, "section", "answer");
    box.appendChild(el(doc, "span", "pipeline-badge", side.pipeline));
    if (side.error) {
      box.classList.add("error");
      box.appendChild(el(doc, "div", "error-card", `${t("errorTitle")}: ${side.error.message}`));
      if (side.error.retryable) {
        const retry = el(doc, "button", "retry-button", t("retry")) as HTMLButtonElement;
        retry.type = "button";
        retry.addEventListener("click", () => void submit(turn.question));
        box.appendChild(retry);
      }
      return box;
    }
    const response = side.response as AskResponse;
    const offTopic = response.outcome === "OffTopic";
    box.classList.add(offTopic ? "refusal" : "answered");
    box.appendChild(
      el(doc, "span", "outcome-badge", offTopic ? t("outcomeOffTopic") : t("outcomeAnswered")),
    );
    box.appendChild(el(doc, "p", "answer-text", response.answer));
    if (!offTopic) {
      const citations = renderCitations(response);
      if (citations) box.appendChild(citations);
    }
    return box;
  }

  function renderTurn(turn: ChatTurn): void {
    const item = el(doc, "article", turn.sides.length > 1 ? "turn compare" : "turn");
    const question = el(doc, "div", "question");
    question.appendChild(el(doc, "span", "who", t("you")));
    question.appendChild(el(doc, "span", "question-text", turn.question));
    item.appendChild(question);
    const sides = el(doc, "div", "sides");
    for (const side of turn.sides) sides.appendChild(renderSide(turn, side));
    item.appendChild(sides);
    turnsBox.appendChild(item); // submission order
  }

  async function askSide(question: string, pipeline: Pipeline): Promise<TurnSide> {
    const model_id = modelSelect.value || undefined;
    try {
      const response = await client.ask({ question, pipeline, model_id });
      return { pipeline, response };
    } catch (error) {
      if (error instanceof ApiError) {
        return { pipeline, error: { status: error.status, message: error.message, retryable: error.retryable } };
      }
      return { pipeline, error: { status: 0, message: String(error), retryable: true } };
    }
  }

  async function submit(raw: string): Promise<void> {
    const question = raw.trim();
    if (!question || input.disabled) return; // client-side validation
    input.disabled = true;
    sendButton.disabled = true;
    const task = (async () => {
      const compare = compareToggle.checked && !compareToggle.disabled;
      const sides = compare
        ? await Promise.all([askSide(question, "agents"), askSide(question, "rag")])
        : [await askSide(question, pipelineSelect.value as Pipeline)];
      const turn: ChatTurn = { question, timestamp: Date.now(), sides };
      turns.push(turn);
      renderTurn(turn);
    })();
    busy = task
      .catch(() => undefined)
      .then(() => {
        input.disabled = false;
        sendButton.disabled = false;
        input.value = "";
      });
    await busy;
  }

  sendButton.addEventListener("click", () => void submit(input.value));
  input.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.key === "Enter") void submit(input.value);
  });

  const ready = (async () => {
    try {
      const health = await client.health();
      modelSelect.innerHTML = "";
      for (const model of health.models) {
        const opt = el(doc, "option", "", model) as HTMLOptionElement;
        opt.value = model;
        modelSelect.appendChild(opt);
      }
      if (health.pipelines.length < 2) {
        compareToggle.disabled = true;
        compareLabel.title = t("compareUnavailable");
      }
      status.textContent = health.status === "ok" ? "" : t("serviceDegraded");
    } catch {
      status.textContent = t("serviceUnreachable");
      status.classList.add("unreachable");
    }
  })();

  return {
    root,
    turns,
    submit,
    ready,
    idle: () => busy,
  };
}
