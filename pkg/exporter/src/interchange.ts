/**
 * Interchange format shared with the training pipeline:
 * a "dim=<h>" header line, then one "doc_id<TAB>v1 v2 ... vh" row per
 * document. Floats are written in shortest round-trip form, so loading the
 * file recovers the exact float64 values.
 */

import { createHash } from 'node:crypto';
import { readFileSync, writeFileSync } from 'node:fs';

export interface ExportRow {
  docId: string;
  vector: number[];
}

export function formatRow(row: ExportRow): string {
  const values = row.vector.map((v) => {
    if (!Number.isFinite(v)) {
      throw new Error(`non-finite component in vector for ${row.docId}`);
    }
    return String(v);
  });
  return `${row.docId}\t${values.join(' ')}`;
}

export function writeInterchange(path: string, dim: number, rows: ExportRow[]): void {
  const lines = [`dim=${dim}`];
  for (const row of rows) {
    if (row.vector.length !== dim) {
      throw new Error(
        `vector for ${row.docId} has length ${row.vector.length}, expected ${dim}`,
      );
    }
    lines.push(formatRow(row));
  }
  writeFileSync(path, lines.join('\n') + '\n', 'utf-8');
}

export interface ExportManifest {
  model: string;
  pooling: string;
  dim: number;
  corpus_sha256: string;
  documents: number;
  failures: string[];
}

export function writeManifest(path: string, manifest: ExportManifest): void {
  // key order is fixed by construction, so the bytes are deterministic
  writeFileSync(path, JSON.stringify(manifest, null, 1) + '\n', 'utf-8');
}

export function sha256OfFile(path: string): string {
  return createHash('sha256').update(readFileSync(path)).digest('hex');
}
