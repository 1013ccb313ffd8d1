/** Small Python highlighter for code panes. Tokenizes comments, strings,
 * numbers and keywords; everything else passes through escaped but unstyled.
 * Code is shown verbatim, so the output must round-trip the exact source
 * text once tags are stripped. */

import { escapeHtml } from "./text.js";

const KEYWORDS = new Set([
  "False", "None", "True", "and", "as", "assert", "break", "class",
  "continue", "def", "del", "elif", "else", "except", "finally", "for",
  "from", "global", "if", "import", "in", "is", "lambda", "not", "or",
  "pass", "raise", "return", "try", "while", "yield",
]);

const BUILTINS = new Set([
  "print", "len", "range", "final_answer", "open", "sorted", "sum", "min",
  "max", "abs", "round", "enumerate", "zip", "str", "int", "float", "list",
  "dict", "set", "tuple",
]);

const TOKEN = new RegExp(
  [
    "(#[^\\n]*)",
    '("""[\\s\\S]*?"""|\'\'\'[\\s\\S]*?\'\'\'|"(?:\\\\.|[^"\\\\\\n])*"|\'(?:\\\\.|[^\'\\\\\\n])*\')',
    "\\b(\\d+(?:\\.\\d+)?(?:[eE][+-]?\\d+)?)\\b",
    "\\b([A-Za-z_][A-Za-z0-9_]*)\\b",
  ].join("|"),
  "g",
);

function wrap(cls: string, text: string): string {
  return `<span class="${cls}">${escapeHtml(text)}</span>`;
}

export function highlightCode(code: string): string {
  let out = "";
  let last = 0;
  TOKEN.lastIndex = 0;
  for (let match = TOKEN.exec(code); match !== null; match = TOKEN.exec(code)) {
    out += escapeHtml(code.slice(last, match.index));
    const [whole, comment, str, num, word] = match;
    if (comment !== undefined) out += wrap("tok-comment", comment);
    else if (str !== undefined) out += wrap("tok-string", str);
    else if (num !== undefined) out += wrap("tok-number", num);
    else if (word !== undefined && KEYWORDS.has(word)) out += wrap("tok-keyword", word);
    else if (word !== undefined && BUILTINS.has(word)) out += wrap("tok-builtin", word);
    else out += escapeHtml(whole);
    last = match.index + whole.length;
  }
  out += escapeHtml(code.slice(last));
  return out;
}
