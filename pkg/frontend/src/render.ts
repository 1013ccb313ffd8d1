/** Pure view: state in, HTML string out. Browser wiring lives in app.ts;
 * keeping this side-effect free means the trace tests can compare rendered
 * output directly, which is also how reload equivalence is checked. */

import type { ArtifactEntry } from "./contract.js";
import { highlightCode } from "./highlight.js";
import { renderMarkdown } from "./markdown.js";
import type { PreviewState, State, TraceEntry } from "./store.js";
import { escapeHtml, formatBytes, formatSeconds } from "./text.js";

const PREVIEW_TEXT = /\.(md|txt|json|jsonl|log|csv|py)$/i;
const PREVIEW_IMAGE = /\.(png|jpe?g|gif|svg)$/i;

export function previewKind(path: string): "text" | "image" | "binary" {
  if (PREVIEW_TEXT.test(path)) return "text";
  if (PREVIEW_IMAGE.test(path)) return "image";
  return "binary";
}

function renderConfigPanel(state: State): string {
  if (state.session === null) {
    return `<section class="config-panel"><p class="empty-state">Not connected.</p></section>`;
  }
  const { session } = state;
  const rows = [
    ["session", session.id],
    ["mode", session.config.mode],
    ["max steps", String(session.config.max_steps)],
    ["memory reset per query", session.config.reset_memory_after_query ? "yes" : "no"],
    ["observation cap", `${session.config.observation_cap_bytes} bytes`],
    ["adapter", session.config.adapter],
  ];
  if (session.config.tool_categories !== null) {
    rows.push(["tool categories", session.config.tool_categories.join(", ")]);
  }
  const cells = rows
    .map(
      ([label, value]) =>
        `<div class="config-row"><dt>${escapeHtml(label!)}</dt><dd>${escapeHtml(value!)}</dd></div>`,
    )
    .join("");
  return (
    `<section class="config-panel">` +
    `<span class="badge badge-${state.status}">${state.status}</span>` +
    `<dl>${cells}</dl>` +
    `</section>`
  );
}

function renderBanner(state: State): string {
  if (state.banner === null) return "";
  const retry = state.banner.retryable
    ? `<button type="button" data-action="retry">Retry</button>`
    : "";
  return `<div class="banner" role="alert">${escapeHtml(state.banner.message)}${retry}</div>`;
}

function renderQueryForm(state: State): string {
  const disabled =
    state.status === "idle" ? "" : " disabled";
  const notice =
    state.busyNotice === null
      ? ""
      : `<div class="busy-notice">${escapeHtml(state.busyNotice)}</div>`;
  const stop =
    state.status === "running"
      ? `<button type="button" data-action="stop">Stop</button>`
      : "";
  return (
    `<section class="query-form"><form data-action="submit-query">` +
    `<textarea name="query" placeholder="Ask the agent..."${disabled}></textarea>` +
    `<button type="submit"${disabled}>Send</button>${stop}` +
    `</form>${notice}</section>`
  );
}

function renderStepCard(entry: TraceEntry & { kind: "step" }): string {
  const { step } = entry;
  const finalMark = step.is_final ? `<span class="final-flag">final</span>` : "";
  return (
    `<article class="step-card" data-run="${escapeHtml(entry.runId)}" data-step-index="${step.index}">` +
    `<header><h3>Step ${step.index}</h3>${finalMark}` +
    `<span class="step-meta">${formatSeconds(step.duration)} &middot; ${step.operations_used} ops</span>` +
    `</header>` +
    `<p class="thought-pane">${escapeHtml(step.thought)}</p>` +
    `<pre class="code-pane"><code>${highlightCode(step.code)}</code></pre>` +
    `<pre class="observation-pane">${escapeHtml(step.observation)}</pre>` +
    `</article>`
  );
}

function renderSummaryBanner(entry: TraceEntry & { kind: "summary" }): string {
  const { summary } = entry;
  const answer = summary.answered
    ? escapeHtml(JSON.stringify(summary.final_answer))
    : "(no answer)";
  const notes: string[] = [];
  if (summary.cancelled) notes.push("cancelled");
  if (summary.fatal_cause !== null) notes.push(`fatal: ${summary.fatal_cause}`);
  const noteHtml =
    notes.length > 0
      ? `<p class="summary-notes">${escapeHtml(notes.join("; "))}</p>`
      : "";
  return (
    `<aside class="summary-banner" data-run="${escapeHtml(entry.runId)}">` +
    `<h3>Run ${escapeHtml(entry.runId)} finished</h3>` +
    `<p class="summary-answer">${answer}</p>` +
    `<p class="summary-meta">${summary.steps} steps &middot; ` +
    `${escapeHtml(summary.terminated_by)} &middot; ${formatSeconds(summary.total_duration)}</p>` +
    noteHtml +
    `</aside>`
  );
}

function renderTrace(state: State): string {
  if (state.trace.length === 0) {
    const label = state.session === null ? "" : `<p class="empty-state">No steps yet.</p>`;
    return `<section class="trace">${label}</section>`;
  }
  const cards = state.trace
    .map((entry) =>
      entry.kind === "step" ? renderStepCard(entry) : renderSummaryBanner(entry),
    )
    .join("\n");
  return `<section class="trace">${cards}</section>`;
}

function renderArtifactRow(entry: ArtifactEntry): string {
  const kind = previewKind(entry.path);
  const preview =
    kind === "binary"
      ? ""
      : `<button type="button" data-action="preview" data-path="${escapeHtml(entry.path)}">Preview</button>`;
  return (
    `<li class="artifact-row" data-path="${escapeHtml(entry.path)}">` +
    `<span class="artifact-name">${escapeHtml(entry.path)}</span>` +
    `<span class="artifact-size">${formatBytes(entry.size)}</span>` +
    preview +
    `<a data-action="download" href="#" data-path="${escapeHtml(entry.path)}" download>Download</a>` +
    `</li>`
  );
}

function renderArtifacts(state: State): string {
  if (state.session === null) return "";
  const body =
    state.artifacts.length === 0
      ? `<p class="empty-state">No artifacts yet.</p>`
      : `<ul class="artifact-list">${state.artifacts.map(renderArtifactRow).join("")}</ul>`;
  return `<section class="artifacts"><h2>Artifacts</h2>${body}</section>`;
}

function renderPreviewBody(preview: PreviewState, artifactHref: string): string {
  if (preview.text !== null) {
    if (/\.md$/i.test(preview.path) || preview.contentType.includes("markdown")) {
      return `<div class="markdown-preview">${renderMarkdown(preview.text)}</div>`;
    }
    return `<pre class="text-preview">${escapeHtml(preview.text)}</pre>`;
  }
  if (previewKind(preview.path) === "image") {
    return `<img class="image-preview" src="${escapeHtml(artifactHref)}" alt="${escapeHtml(preview.path)}">`;
  }
  return `<p class="empty-state">Binary file; use the download link.</p>`;
}

function renderPreview(state: State, artifactHref: (path: string) => string): string {
  if (state.preview === null) return "";
  const body = renderPreviewBody(state.preview, artifactHref(state.preview.path));
  return (
    `<section class="preview-pane" data-path="${escapeHtml(state.preview.path)}">` +
    `<header><h2>${escapeHtml(state.preview.path)}</h2>` +
    `<button type="button" data-action="close-preview">Close</button></header>` +
    body +
    `</section>`
  );
}

/** artifactHref maps an artifact path to a service URL for images and
 * download links; pass the client's artifactUrl bound to the session. */
export function renderApp(
  state: State,
  artifactHref: (path: string) => string = (path) => path,
): string {
  return [
    renderConfigPanel(state),
    renderBanner(state),
    renderQueryForm(state),
    renderTrace(state),
    renderArtifacts(state),
    renderPreview(state, artifactHref),
  ]
    .filter((chunk) => chunk !== "")
    .join("\n");
}
