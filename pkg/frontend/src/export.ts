import { loadCorpusJsonl } from "./corpus.js";
import { cosine, Encoder, HashedProjectionEncoder } from "./encoder.js";
import { readIndex, readMatrix, writeIndex, writeMatrix } from "./emb1.js";

export interface ExportConfig {
  corpusPath: string;
  model?: string;
  dim?: number;
  batchSize?: number;
  matrixPath: string;
  indexPath: string;
}

export interface ExportResult {
  count: number;
  dim: number;
}

export function makeEncoder(model?: string, dim?: number): Encoder {
  return new HashedProjectionEncoder(model, dim);
}

/** Encode every corpus query (in corpus order) and write matrix + index. */
export function exportEmbeddings(cfg: ExportConfig): ExportResult {
  const encoder = makeEncoder(cfg.model, cfg.dim);
  const queries = loadCorpusJsonl(cfg.corpusPath);
  const batchSize = cfg.batchSize ?? 64;
  if (batchSize < 1) throw new Error("batch size must be >= 1");
  const rows: Float32Array[] = [];
  for (let i = 0; i < queries.length; i += batchSize) {
    const batch = queries.slice(i, i + batchSize).map((q) => q.text);
    rows.push(...encoder.encode(batch));
  }
  writeMatrix(cfg.matrixPath, rows, encoder.dim);
  writeIndex(cfg.indexPath, queries.map((q) => q.id));
  return { count: rows.length, dim: encoder.dim };
}

export interface VerifyReport {
  count: number;
  dim: number;
  pairsChecked: number;
  maxCosineError: number;
}

/**
 * Validate an exported matrix/index pair against its source corpus:
 * header counts, id coverage, and cosines of sampled pairs recomputed from
 * freshly encoded vectors (tolerance covers float32 quantization).
 */
export function verify(
  matrixPath: string,
  indexPath: string,
  corpusPath: string,
  model?: string,
  dim?: number,
  nPairs = 5,
  tolerance = 1e-5,
): VerifyReport {
  const matrix = readMatrix(matrixPath);
  const ids = readIndex(indexPath);
  const queries = loadCorpusJsonl(corpusPath);

  if (ids.length !== matrix.count) {
    throw new Error(
      `index lists ${ids.length} ids but matrix count=${matrix.count}`,
    );
  }
  if (queries.length !== matrix.count) {
    throw new Error(
      `corpus has ${queries.length} queries but matrix count=${matrix.count}`,
    );
  }
  const byId = new Map(queries.map((q) => [q.id, q.text]));
  for (const id of ids) {
    if (!byId.has(id)) throw new Error(`index id ${id} not in corpus`);
  }

  const encoder = makeEncoder(model, dim);
  if (encoder.dim !== matrix.dim) {
    throw new Error(`encoder dim ${encoder.dim} != matrix dim ${matrix.dim}`);
  }

  // deterministic sample: evenly spaced pairs across the matrix
  let maxErr = 0;
  const n = matrix.count;
  const checked = Math.min(nPairs, Math.floor(n / 2));
  for (let k = 0; k < checked; k++) {
    const i = Math.floor((k * n) / (2 * checked));
    const j = n - 1 - i;
    const [ui, uj] = encoder.encode([byId.get(ids[i])!, byId.get(ids[j])!]);
    const got = cosine(matrix.rows[i], matrix.rows[j]);
    const want = cosine(ui, uj);
    maxErr = Math.max(maxErr, Math.abs(got - want));
  }
  if (maxErr > tolerance) {
    throw new Error(`cosine mismatch: max error ${maxErr} > ${tolerance}`);
  }
  return { count: n, dim: matrix.dim, pairsChecked: checked, maxCosineError: maxErr };
}
