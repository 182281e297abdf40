/**
 * Deterministic sentence encoder.
 *
 * Hashed bag-of-words with signed random projection: each unigram and bigram
 * is FNV-1a hashed into one of `dim` buckets with a hash-derived sign, then
 * the vector is L2-normalized. Purely a function of the text and the model
 * identifier, so re-encoding is always bit-identical — no model downloads,
 * no nondeterministic runtimes. The binary artifact format is encoder-
 * agnostic; a learned encoder can replace this one without touching readers.
 */

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;

function fnv1a(s: string, seed: number): number {
  let h = (FNV_OFFSET ^ seed) >>> 0;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, FNV_PRIME) >>> 0;
  }
  return h;
}

/** Lowercase, replace ASCII punctuation with spaces, collapse whitespace. */
export function normalizeText(text: string): string {
  return text
    .toLowerCase()
    .replace(/[!-/:-@[-`{-~]/g, " ")
    .split(/\s+/)
    .filter((t) => t.length > 0)
    .join(" ");
}

export interface Encoder {
  readonly model: string;
  readonly dim: number;
  encode(texts: string[]): Float32Array[];
}

export class HashedProjectionEncoder implements Encoder {
  readonly model: string;
  readonly dim: number;
  private readonly seed: number;

  constructor(model = "hashed-projection-v1", dim = 256) {
    if (dim <= 0 || !Number.isInteger(dim)) {
      throw new Error(`encoder dim must be a positive integer, got ${dim}`);
    }
    this.model = model;
    this.dim = dim;
    this.seed = fnv1a(model, 0);
  }

  private addFeature(vec: Float64Array, feature: string): void {
    const h = fnv1a(feature, this.seed);
    const bucket = h % this.dim;
    const sign = (h >>> 16) & 1 ? 1.0 : -1.0;
    vec[bucket] += sign;
  }

  encodeOne(text: string): Float32Array {
    const vec = new Float64Array(this.dim);
    const tokens = normalizeText(text).split(" ").filter((t) => t.length > 0);
    for (const tok of tokens) this.addFeature(vec, `u:${tok}`);
    for (let i = 0; i + 1 < tokens.length; i++) {
      this.addFeature(vec, `b:${tokens[i]} ${tokens[i + 1]}`);
    }
    // keep empty/degenerate inputs representable: a constant bias feature
    this.addFeature(vec, "bias");
    let norm = 0;
    for (const v of vec) norm += v * v;
    norm = Math.sqrt(norm);
    const out = new Float32Array(this.dim);
    for (let i = 0; i < this.dim; i++) out[i] = vec[i] / norm;
    return out;
  }

  encode(texts: string[]): Float32Array[] {
    return texts.map((t) => this.encodeOne(t));
  }
}

export function cosine(u: Float32Array, v: Float32Array): number {
  if (u.length !== v.length) throw new Error("dimension mismatch");
  let dot = 0;
  let nu = 0;
  let nv = 0;
  for (let i = 0; i < u.length; i++) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu === 0 || nv === 0) throw new Error("zero-norm vector");
  return dot / (Math.sqrt(nu) * Math.sqrt(nv));
}
