// DOM binding: renders the view model into the page and wires user events.

import { ChatApi } from "./api.js";
import { ChatViewModel, ViewMessage } from "./viewmodel.js";

const api = new ChatApi("");
const model = new ChatViewModel(api);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderTrace(message: ViewMessage, index: number): HTMLElement {
  const wrap = el("div", "trace");
  const trace = message.trace;
  if (!trace) {
    return wrap;
  }
  const toggle = el(
    "button",
    "trace-toggle",
    message.traceExpanded
      ? "hide refinement trace"
      : `refinement trace (${trace.candidate_count} candidate${trace.candidate_count === 1 ? "" : "s"})`,
  );
  toggle.addEventListener("click", () => {
    model.toggleTrace(index);
    render();
  });
  wrap.appendChild(toggle);
  if (message.traceExpanded) {
    const detail = el("div", "trace-detail");
    trace.candidates.forEach((candidate, i) => {
      detail.appendChild(el("div", "trace-candidate", `candidate ${i}: ${candidate}`));
      const critique = trace.critiques[i];
      if (critique) {
        detail.appendChild(
          el(
            "div",
            critique.credible ? "trace-critique credible" : "trace-critique flagged",
            `critic: ${critique.credible ? "credible" : "needs refinement"} (${critique.evidence})`,
          ),
        );
      }
    });
    detail.appendChild(el("div", "trace-stop", `stop reason: ${trace.stop_reason}`));
    wrap.appendChild(detail);
  }
  return wrap;
}

function renderRatingWidget(itemId: string): HTMLElement {
  const widget = model.ratingWidgetFor(itemId);
  const wrap = el("div", "rating");
  if (!widget) {
    return wrap;
  }
  wrap.appendChild(el("span", "rating-label", `rate your intention for ${itemId}`));
  (["pre", "post"] as const).forEach((stage) => {
    const row = el("div", "rating-row");
    row.appendChild(el("span", "rating-stage", stage));
    const slider = el("input") as HTMLInputElement;
    slider.type = "range";
    slider.min = "1";
    slider.max = "5";
    slider.step = "1";
    slider.value = String(widget[stage] ?? 3);
    const valueLabel = el("span", "rating-value", slider.value);
    slider.addEventListener("input", () => {
      valueLabel.textContent = slider.value;
    });
    slider.addEventListener("change", async () => {
      await model.rate(itemId, stage, Number(slider.value));
      render();
    });
    row.appendChild(slider);
    row.appendChild(valueLabel);
    wrap.appendChild(row);
  });
  const acceptButton = el("button", "accept", "accept this recommendation");
  acceptButton.disabled = model.sessionEnded;
  acceptButton.addEventListener("click", async () => {
    await model.accept(itemId);
    render();
  });
  wrap.appendChild(acceptButton);
  const persuasiveness = model.exportedPersuasiveness(itemId);
  if (persuasiveness !== null) {
    wrap.appendChild(el("div", "persuasiveness", `persuasiveness: ${persuasiveness.toFixed(4)}`));
  }
  return wrap;
}

function render(): void {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  root.replaceChildren();

  if (model.errorBanner) {
    const banner = el("div", "banner", model.errorBanner);
    if (!model.sessionId) {
      const retry = el("button", "retry", "retry");
      retry.addEventListener("click", async () => {
        await model.start();
        render();
      });
      banner.appendChild(retry);
    }
    root.appendChild(banner);
  }

  const pane = el("div", "chat-pane");
  model.messages.forEach((message, index) => {
    const bubble = el("div", `bubble ${message.speaker}`);
    bubble.appendChild(el("div", "text", message.text));
    if (message.strategyBadge) {
      bubble.appendChild(el("span", "badge", message.strategyBadge));
    }
    if (message.trace) {
      bubble.appendChild(renderTrace(message, index));
    }
    if (message.actionKind === "recommend" && message.itemId) {
      bubble.appendChild(renderRatingWidget(message.itemId));
    }
    pane.appendChild(bubble);
  });
  root.appendChild(pane);

  const composer = el("div", "composer");
  const input = el("input") as HTMLInputElement;
  input.type = "text";
  input.placeholder = model.sessionEnded ? "session ended" : "say something...";
  input.disabled = !model.composerEnabled;
  const sendButton = el("button", "send", "send");
  sendButton.disabled = !model.composerEnabled;
  const submit = async () => {
    const text = input.value;
    input.value = "";
    await model.send(text);
    render();
  };
  sendButton.addEventListener("click", submit);
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void submit();
    }
  });
  composer.appendChild(input);
  composer.appendChild(sendButton);
  root.appendChild(composer);
}

async function boot(): Promise<void> {
  await model.start();
  render();
}

void boot();
