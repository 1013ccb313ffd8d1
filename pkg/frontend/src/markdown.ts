/** Minimal markdown renderer for artifact previews: headings, fenced code,
 * lists, paragraphs, plus inline bold, code spans and links. Input is
 * escaped before any markup is applied, so artifact content cannot inject
 * HTML into the page. */

import { escapeHtml } from "./text.js";

function renderInline(escaped: string): string {
  let out = escaped.replace(/`([^`]+)`/g, "<code>$1</code>");
  out = out.replace(/\*\*([^*]+)\*\*/g, "<strong>$1</strong>");
  out = out.replace(/\[([^\]]+)\]\(([^)\s]+)\)/g, (whole, label: string, href: string) => {
    // hrefs were escaped with the rest of the text; only allow plain links
    if (/^(https?:\/\/|\.{0,2}\/|[\w.-]+$)/.test(href)) {
      return `<a href="${href}">${label}</a>`;
    }
    return whole;
  });
  return out;
}

export function renderMarkdown(source: string): string {
  const lines = source.split("\n");
  const blocks: string[] = [];
  let paragraph: string[] = [];
  let list: string[] = [];
  let fence: string[] | null = null;

  const flushParagraph = () => {
    if (paragraph.length > 0) {
      blocks.push(`<p>${renderInline(escapeHtml(paragraph.join(" ")))}</p>`);
      paragraph = [];
    }
  };
  const flushList = () => {
    if (list.length > 0) {
      blocks.push(`<ul>${list.join("")}</ul>`);
      list = [];
    }
  };

  for (const line of lines) {
    if (fence !== null) {
      if (line.trim().startsWith("```")) {
        blocks.push(`<pre><code>${escapeHtml(fence.join("\n"))}</code></pre>`);
        fence = null;
      } else {
        fence.push(line);
      }
      continue;
    }
    if (line.trim().startsWith("```")) {
      flushParagraph();
      flushList();
      fence = [];
      continue;
    }
    const heading = /^(#{1,6})\s+(.*)$/.exec(line);
    if (heading !== null) {
      flushParagraph();
      flushList();
      const level = heading[1]!.length;
      blocks.push(`<h${level}>${renderInline(escapeHtml(heading[2]!))}</h${level}>`);
      continue;
    }
    const item = /^\s*[-*]\s+(.*)$/.exec(line);
    if (item !== null) {
      flushParagraph();
      list.push(`<li>${renderInline(escapeHtml(item[1]!))}</li>`);
      continue;
    }
    if (line.trim() === "") {
      flushParagraph();
      flushList();
      continue;
    }
    flushList();
    paragraph.push(line.trim());
  }
  if (fence !== null) {
    blocks.push(`<pre><code>${escapeHtml(fence.join("\n"))}</code></pre>`);
  }
  flushParagraph();
  flushList();
  return blocks.join("\n");
}
