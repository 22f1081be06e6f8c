import type { Importance } from "./types";

/** A run of the input text, with a score when the run is a scored token. */
export interface HighlightSpan {
  text: string;
  start: number; // character offset into the original input
  end: number;
  score: number | null;
  opacity: number; // 0 for unscored runs, |score|/max|score| otherwise
}

// Must match the service's surface-token pattern so spans line up with the
// importances it returns.
const TOKEN_RE = /[A-Za-z0-9_']+/g;

/**
 * Splits `text` into spans covering every character exactly once, attaching
 * each scored token's importance. Spans concatenate back to the input, so
 * highlights map to exact character offsets.
 */
export function highlightSpans(text: string, importances: Importance[]): HighlightSpan[] {
  const scores = new Map<string, number>();
  for (const { token, score } of importances) scores.set(token, score);
  const maxAbs = Math.max(0, ...importances.map((i) => Math.abs(i.score)));

  const spans: HighlightSpan[] = [];
  let cursor = 0;
  for (const m of text.matchAll(TOKEN_RE)) {
    const start = m.index ?? 0;
    const token = m[0];
    if (start > cursor) {
      spans.push({ text: text.slice(cursor, start), start: cursor, end: start, score: null, opacity: 0 });
    }
    const score = scores.get(token);
    spans.push({
      text: token,
      start,
      end: start + token.length,
      score: score ?? null,
      opacity: score !== undefined && maxAbs > 0 ? Math.abs(score) / maxAbs : 0,
    });
    cursor = start + token.length;
  }
  if (cursor < text.length) {
    spans.push({ text: text.slice(cursor), start: cursor, end: text.length, score: null, opacity: 0 });
  }
  return spans;
}
