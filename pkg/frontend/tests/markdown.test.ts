import { describe, expect, it } from "vitest";

import { renderMarkdown } from "../src/markdown.js";

describe("markdown renderer", () => {
  it("renders headings at their level", () => {
    expect(renderMarkdown("# Title")).toBe("<h1>Title</h1>");
    expect(renderMarkdown("### Deep")).toBe("<h3>Deep</h3>");
  });

  it("joins consecutive lines into one paragraph", () => {
    expect(renderMarkdown("one\ntwo\n\nthree")).toBe("<p>one two</p>\n<p>three</p>");
  });

  it("renders bold, code spans and safe links inline", () => {
    const html = renderMarkdown("a **bold** move with `code` and [docs](https://example.org/x)");
    expect(html).toContain("<strong>bold</strong>");
    expect(html).toContain("<code>code</code>");
    expect(html).toContain('<a href="https://example.org/x">docs</a>');
  });

  it("keeps fenced code verbatim and unstyled", () => {
    const html = renderMarkdown("```\nx = 1 # **not bold**\n```");
    expect(html).toBe("<pre><code>x = 1 # **not bold**</code></pre>");
  });

  it("renders dash lists as ul items", () => {
    const html = renderMarkdown("- first\n- second\n\nafter");
    expect(html).toBe("<ul><li>first</li><li>second</li></ul>\n<p>after</p>");
  });

  it("escapes html in every position", () => {
    const html = renderMarkdown("# <script>\n\n<b>bold?</b> and `<i>`");
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
    expect(html).toContain("&lt;b&gt;bold?&lt;/b&gt;");
    expect(html).toContain("<code>&lt;i&gt;</code>");
  });

  it("refuses links with unexpected schemes", () => {
    const html = renderMarkdown("[x](javascript:alert(1))");
    expect(html).not.toContain("<a ");
  });

  it("handles an unterminated fence without losing content", () => {
    const html = renderMarkdown("```\ndangling");
    expect(html).toBe("<pre><code>dangling</code></pre>");
  });
});
