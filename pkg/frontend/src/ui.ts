/** DOM scaffold and renderers. Everything renders from view-model values;
 * no DOM node carries state the server does not know. */

import type { PlotPanelView, TranscriptView } from "./state.js";

export interface Scaffold {
  root: HTMLElement;
  title: HTMLElement;
  transcript: HTMLElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
  retryBanner: HTMLElement;
  retryButton: HTMLButtonElement;
  directorToggle: HTMLButtonElement;
  plotPanel: HTMLElement;
  premiseForm: HTMLElement;
  premiseText: HTMLTextAreaElement;
  premiseSeed: HTMLInputElement;
  premiseSubmit: HTMLButtonElement;
  premiseStatus: HTMLElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  testId: string,
  className = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.setAttribute("data-testid", testId);
  if (className) node.className = className;
  return node;
}

export function buildScaffold(root: HTMLElement): Scaffold {
  const doc = root.ownerDocument;
  root.innerHTML = "";

  const title = el(doc, "h1", "title", "title");

  const premiseForm = el(doc, "section", "premise-form", "premise-form");
  const premiseText = el(doc, "textarea", "premise-text");
  premiseText.placeholder = "Premise paragraph (50-100 words): background, protagonist, beginning...";
  const premiseSeed = el(doc, "input", "premise-seed");
  premiseSeed.type = "number";
  premiseSeed.value = "0";
  const premiseSubmit = el(doc, "button", "premise-submit");
  premiseSubmit.textContent = "Write my drama";
  const premiseStatus = el(doc, "div", "premise-status", "premise-status");
  premiseForm.append(premiseText, premiseSeed, premiseSubmit, premiseStatus);

  const transcript = el(doc, "main", "transcript", "transcript");

  const retryBanner = el(doc, "div", "retry-banner", "retry-banner hidden");
  const retryText = el(doc, "span", "retry-text");
  retryText.textContent = "The last line did not reach the stage.";
  const retryButton = el(doc, "button", "retry-button");
  retryButton.textContent = "Retry";
  retryBanner.append(retryText, retryButton);

  const input = el(doc, "input", "player-input", "player-input");
  input.placeholder = "Say something...";
  const sendButton = el(doc, "button", "send-button");
  sendButton.textContent = "Send";

  const directorToggle = el(doc, "button", "director-toggle");
  directorToggle.textContent = "Director view";
  const plotPanel = el(doc, "aside", "plot-panel", "plot-panel hidden");

  const controls = el(doc, "footer", "controls", "controls");
  controls.append(input, sendButton, directorToggle);

  root.append(title, premiseForm, transcript, retryBanner, controls, plotPanel);
  return {
    root, title, transcript, input, sendButton, retryBanner, retryButton,
    directorToggle, plotPanel, premiseForm, premiseText, premiseSeed,
    premiseSubmit, premiseStatus,
  };
}

export function renderTranscript(scaffold: Scaffold, view: TranscriptView): void {
  const doc = scaffold.root.ownerDocument;
  scaffold.title.textContent = view.title;
  scaffold.transcript.innerHTML = "";
  for (const item of view.timeline) {
    if (item.kind === "banner") {
      const banner = el(doc, "div", "scene-banner", "scene-banner");
      const heading = doc.createElement("h2");
      heading.textContent = `Scene ${item.scene.index}: ${item.scene.location}`;
      const body = doc.createElement("p");
      body.textContent = item.scene.background;
      banner.append(heading, body);
      if (item.scene.is_flashback) banner.classList.add("flashback");
      scaffold.transcript.append(banner);
    } else if (item.kind === "epilogue") {
      const epilogue = el(doc, "div", "epilogue", "epilogue");
      epilogue.textContent = "The drama has concluded.";
      scaffold.transcript.append(epilogue);
    } else {
      const bubble = el(doc, "div", "bubble", `bubble ${item.kind}`);
      bubble.setAttribute("data-turn", String(item.turn));
      const speaker = doc.createElement("strong");
      speaker.textContent = item.speaker;
      const text = doc.createElement("span");
      text.textContent = item.text;
      bubble.append(speaker, text);
      if (item.action) {
        const action = doc.createElement("em");
        action.textContent = ` [${item.action}]`;
        bubble.append(action);
      }
      scaffold.transcript.append(bubble);
    }
  }
  scaffold.input.disabled = !view.inputEnabled;
  scaffold.sendButton.disabled = !view.inputEnabled;
}

export function renderPlotPanel(scaffold: Scaffold, view: PlotPanelView): void {
  const doc = scaffold.root.ownerDocument;
  scaffold.plotPanel.innerHTML = "";
  const heading = doc.createElement("h2");
  heading.textContent = `Plot chain (scene ${view.sceneIndex})`;
  scaffold.plotPanel.append(heading);

  const list = el(doc, "ul", "plot-list");
  for (const row of view.rows) {
    const item = el(doc, "li", "plot-row", row.completed ? "plot done" : "plot open");
    const badge = doc.createElement("span");
    badge.className = "badge";
    badge.textContent = row.completed ? "[x]" : "[ ]";
    const label = doc.createElement("span");
    label.textContent = ` ${row.id}: ${row.description}`;
    item.append(badge, label);
    if (row.reflected) {
      const marker = doc.createElement("span");
      marker.className = "origin-reflected";
      marker.textContent = " (reflected)";
      item.append(marker);
    }
    if (row.owner) {
      const owner = doc.createElement("span");
      owner.className = "owner";
      owner.textContent = ` - ${row.owner}`;
      item.append(owner);
    }
    list.append(item);
  }
  scaffold.plotPanel.append(list);

  const reflections = el(doc, "section", "reflection-history");
  const subheading = doc.createElement("h3");
  subheading.textContent = "Reflections";
  reflections.append(subheading);
  for (const reflection of view.reflections) {
    const entry = el(
      doc, "div", "reflection-entry",
      reflection.accepted ? "reflection accepted" : "reflection rejected",
    );
    const status = doc.createElement("strong");
    status.textContent =
      `turn ${reflection.turn}: ` + (reflection.accepted ? "accepted" : "rejected");
    entry.append(status);
    for (const line of reflection.lines) {
      const diff = el(doc, "div", "reflection-diff", "diff-line");
      diff.textContent = line;
      entry.append(diff);
    }
    for (const violation of reflection.violations) {
      const line = doc.createElement("div");
      line.className = "violation";
      line.textContent = `violation: ${violation}`;
      entry.append(line);
    }
    for (const flag of reflection.lintFlags) {
      const line = doc.createElement("div");
      line.className = "lint";
      line.textContent = `lint: ${flag}`;
      entry.append(line);
    }
    reflections.append(entry);
  }
  scaffold.plotPanel.append(reflections);
}

export function setRetryVisible(scaffold: Scaffold, visible: boolean, message = ""): void {
  scaffold.retryBanner.classList.toggle("hidden", !visible);
  if (message) {
    const text = scaffold.retryBanner.querySelector('[data-testid="retry-text"]');
    if (text) text.textContent = message;
  }
}
