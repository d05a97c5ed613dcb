#!/usr/bin/env node
/**
 * exporter --corpus F --model M --pooling P --out O
 *
 * Encodes every corpus document with the selected model, pools the hidden
 * states, and writes the interchange file plus a manifest
 * (<out>.manifest.json) recording model id, pooling, dimension, and the
 * corpus checksum. Documents that fail to encode are listed on stderr and
 * the process exits nonzero, with all successfully encoded rows still
 * written in corpus order.
 */

import { readCorpus } from './corpus';
import { sha256OfFile, writeInterchange, writeManifest, ExportRow } from './interchange';
import { encodePooled, loadModel } from './models';
import { parsePooling, Pooling } from './pooling';

interface CliArgs {
  corpus: string;
  model: string;
  pooling: Pooling;
  out: string;
  batchSize: number;
}

function parseArgs(argv: string[]): CliArgs {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith('--') || value === undefined) {
      throw new UsageError(`unexpected argument '${flag}'`);
    }
    values.set(flag.slice(2), value);
  }
  for (const required of ['corpus', 'model', 'out']) {
    if (!values.has(required)) {
      throw new UsageError(`missing required flag --${required}`);
    }
  }
  return {
    corpus: values.get('corpus')!,
    model: values.get('model')!,
    pooling: parsePooling(values.get('pooling') ?? 'last-token'),
    out: values.get('out')!,
    batchSize: Number(values.get('batch-size') ?? '16'),
  };
}

class UsageError extends Error {}

export async function runExport(args: CliArgs): Promise<number> {
  const { docs, errors } = readCorpus(args.corpus);
  const failures: string[] = [...errors];
  const model = await loadModel(args.model);

  const rows: ExportRow[] = [];
  for (let start = 0; start < docs.length; start += args.batchSize) {
    const batch = docs.slice(start, start + args.batchSize);
    for (const doc of batch) {
      try {
        const [vector] = await encodePooled(model, [doc.text], args.pooling, 1);
        rows.push({ docId: doc.id, vector });
      } catch (err) {
        failures.push(`${doc.id}: ${(err as Error).message}`);
      }
    }
  }
  if (rows.length === 0) {
    throw new Error('no document could be encoded');
  }
  writeInterchange(args.out, model.dim, rows);
  writeManifest(`${args.out}.manifest.json`, {
    model: model.id,
    pooling: args.pooling,
    dim: model.dim,
    corpus_sha256: sha256OfFile(args.corpus),
    documents: rows.length,
    failures,
  });
  if (failures.length > 0) {
    for (const failure of failures) {
      process.stderr.write(`failed: ${failure}\n`);
    }
    return 1;
  }
  return 0;
}

const USAGE =
  'usage: exporter --corpus <file> --model <hash:<dim> | model-id> ' +
  '[--pooling last-token|first-token|mean] --out <file> [--batch-size N]\n';

async function main(): Promise<number> {
  let args: CliArgs;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  try {
    return await runExport(args);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  main().then((code) => {
    process.exitCode = code;
  });
}
