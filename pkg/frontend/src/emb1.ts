import { openSync, readFileSync, writeSync, closeSync, statSync } from "node:fs";

/**
 * The binary matrix container shared with the primary toolkit:
 * magic "EMB1", u32 version=1, u32 dim, u64 count, then count*dim float32
 * values row-major, everything little-endian. The companion index is JSONL
 * with one {"row": i, "id": "..."} per matrix row, in row order.
 */

export const EMB_MAGIC = "EMB1";
export const EMB_VERSION = 1;
export const HEADER_BYTES = 20;

export function writeMatrix(path: string, rows: Float32Array[], dim: number): void {
  for (const row of rows) {
    if (row.length !== dim) {
      throw new Error(`row has dim ${row.length}, expected ${dim}`);
    }
  }
  const header = Buffer.alloc(HEADER_BYTES);
  header.write(EMB_MAGIC, 0, "ascii");
  header.writeUInt32LE(EMB_VERSION, 4);
  header.writeUInt32LE(dim, 8);
  header.writeBigUInt64LE(BigInt(rows.length), 12);
  const fd = openSync(path, "w");
  try {
    writeSync(fd, header);
    for (const row of rows) {
      const buf = Buffer.alloc(dim * 4);
      for (let i = 0; i < dim; i++) buf.writeFloatLE(row[i], i * 4);
      writeSync(fd, buf);
    }
  } finally {
    closeSync(fd);
  }
}

export function writeIndex(path: string, ids: string[]): void {
  const fd = openSync(path, "w");
  try {
    for (let i = 0; i < ids.length; i++) {
      writeSync(fd, JSON.stringify({ row: i, id: ids[i] }) + "\n");
    }
  } finally {
    closeSync(fd);
  }
}

export interface MatrixFile {
  dim: number;
  count: number;
  rows: Float32Array[];
}

export function readMatrix(path: string): MatrixFile {
  const size = statSync(path).size;
  const buf = readFileSync(path);
  if (size < HEADER_BYTES) {
    throw new Error(`${path}: truncated header (${size} bytes)`);
  }
  if (buf.toString("ascii", 0, 4) !== EMB_MAGIC) {
    throw new Error(`${path}: bad magic`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== EMB_VERSION) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const dim = buf.readUInt32LE(8);
  const count = Number(buf.readBigUInt64LE(12));
  const expected = HEADER_BYTES + count * dim * 4;
  if (size !== expected) {
    throw new Error(
      `${path}: expected ${expected} bytes for count=${count} dim=${dim}, ` +
      `file ends at byte ${size}`,
    );
  }
  const rows: Float32Array[] = [];
  for (let r = 0; r < count; r++) {
    const row = new Float32Array(dim);
    const base = HEADER_BYTES + r * dim * 4;
    for (let i = 0; i < dim; i++) row[i] = buf.readFloatLE(base + i * 4);
    rows.push(row);
  }
  return { dim, count, rows };
}

export function readIndex(path: string): string[] {
  const ids: string[] = [];
  const lines = readFileSync(path, "utf-8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    const obj = JSON.parse(line) as { row?: number; id?: string };
    if (obj.row !== ids.length) {
      throw new Error(`${path}:${i + 1}: rows out of order`);
    }
    if (typeof obj.id !== "string") {
      throw new Error(`${path}:${i + 1}: missing id`);
    }
    ids.push(obj.id);
  }
  return ids;
}
