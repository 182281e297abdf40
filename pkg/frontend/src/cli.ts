#!/usr/bin/env node
import { exportEmbeddings, verify } from "./export.js";

const USAGE = `usage:
  collidekit-embed export --corpus <jsonl> --matrix <out.emb> --index <out.jsonl>
                          [--model <id>] [--dim <n>] [--batch-size <n>]
  collidekit-embed verify --corpus <jsonl> --matrix <file> --index <file>
                          [--model <id>] [--dim <n>]`;

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const val = argv[i + 1];
    if (!key.startsWith("--") || val === undefined) {
      throw new Error(`bad argument ${key}`);
    }
    flags.set(key.slice(2), val);
  }
  return flags;
}

function required(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (v === undefined) throw new Error(`--${name} is required`);
  return v;
}

export function main(argv: string[]): number {
  const [cmd, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    const dim = flags.has("dim") ? Number(flags.get("dim")) : undefined;
    if (cmd === "export") {
      const result = exportEmbeddings({
        corpusPath: required(flags, "corpus"),
        matrixPath: required(flags, "matrix"),
        indexPath: required(flags, "index"),
        model: flags.get("model"),
        dim,
        batchSize: flags.has("batch-size")
          ? Number(flags.get("batch-size"))
          : undefined,
      });
      console.log(JSON.stringify(result));
      return 0;
    }
    if (cmd === "verify") {
      const report = verify(
        required(flags, "matrix"),
        required(flags, "index"),
        required(flags, "corpus"),
        flags.get("model"),
        dim,
      );
      console.log(JSON.stringify(report));
      return 0;
    }
    console.error(USAGE);
    return 2;
  } catch (err) {
    console.error(JSON.stringify({ error: (err as Error).message }));
    return 1;
  }
}

if (process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!)) {
  process.exit(main(process.argv.slice(2)));
}
