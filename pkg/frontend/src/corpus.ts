import { readFileSync } from "node:fs";

export interface CorpusQuery {
  id: string;
  text: string;
}

/**
 * Read a corpus JSONL file ({dataset, intent, text} per line) and assign the
 * same positional query ids the primary toolkit uses:
 * `<dataset>/<intent>/<ordinal>`, counted per intent in file order.
 */
export function loadCorpusJsonl(path: string): CorpusQuery[] {
  const counters = new Map<string, number>();
  const queries: CorpusQuery[] = [];
  const lines = readFileSync(path, "utf-8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let row: unknown;
    try {
      row = JSON.parse(line);
    } catch {
      throw new Error(`${path}:${i + 1}: malformed JSON`);
    }
    const obj = row as Record<string, unknown>;
    const dataset = obj.dataset;
    const intent = obj.intent;
    const text = obj.text;
    if (typeof dataset !== "string" || typeof intent !== "string") {
      throw new Error(`${path}:${i + 1}: missing dataset/intent`);
    }
    if (typeof text !== "string" || !text.trim()) {
      throw new Error(`${path}:${i + 1}: empty text field`);
    }
    const key = `${dataset}/${intent}`;
    const ordinal = counters.get(key) ?? 0;
    counters.set(key, ordinal + 1);
    queries.push({ id: `${key}/${ordinal}`, text });
  }
  if (queries.length === 0) throw new Error(`${path}: no records`);
  return queries;
}
