/** Corpus reader: line-delimited JSON records with `id` and `text` fields. */

import { readFileSync } from 'node:fs';

export interface CorpusDoc {
  id: string;
  text: string;
}

export interface CorpusReadResult {
  docs: CorpusDoc[];
  /** Human-readable descriptions of unusable lines, in file order. */
  errors: string[];
}

export function readCorpus(path: string): CorpusReadResult {
  const docs: CorpusDoc[] = [];
  const errors: string[] = [];
  const seen = new Set<string>();
  const lines = readFileSync(path, 'utf-8').split('\n');
  lines.forEach((line, index) => {
    if (line.trim().length === 0) {
      return;
    }
    const lineNo = index + 1;
    let record: any;
    try {
      record = JSON.parse(line);
    } catch {
      errors.push(`line ${lineNo}: invalid JSON`);
      return;
    }
    if (typeof record?.id !== 'string' || record.id.length === 0) {
      errors.push(`line ${lineNo}: missing 'id'`);
      return;
    }
    if (typeof record?.text !== 'string' || record.text.trim().length === 0) {
      errors.push(`line ${lineNo} (${record.id}): missing or empty 'text'`);
      return;
    }
    if (seen.has(record.id)) {
      errors.push(`line ${lineNo}: duplicate id '${record.id}'`);
      return;
    }
    seen.add(record.id);
    docs.push({ id: record.id, text: record.text });
  });
  if (docs.length === 0) {
    throw new Error(`${path}: no usable corpus records`);
  }
  return { docs, errors };
}
