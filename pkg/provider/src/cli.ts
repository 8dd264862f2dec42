#!/usr/bin/env node
/**
 * Command line front end.
 *
 *   bitextmine-provider export --in sents.tsv --out vectors.semb [--model hash-768]
 *   bitextmine-provider serve [--port 0] [--model hash-768] [--batch-limit 512]
 *   bitextmine-provider embed-one --text "..." [--dim 64] [--key k]
 *
 * embed-one prints the vector as a JSON array; it exists so determinism can
 * be checked across separate processes.
 */
import { exportEmbeddings } from "./export.js";
import { DEFAULT_DIM, hashEmbedOne, ModelLoadError } from "./hash-encoder.js";
import { createEmbedServer } from "./server.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const name = argv[i];
    if (!name.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`expected --flag value pairs, got "${name}"`);
    }
    flags.set(name.slice(2), argv[i + 1]);
  }
  return flags;
}

function required(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) {
    throw new Error(`--${name} is required`);
  }
  return value;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "export") {
      const flags = parseFlags(rest);
      const result = exportEmbeddings(
        required(flags, "in"),
        required(flags, "out"),
        flags.get("model") ?? "hash",
      );
      console.log(JSON.stringify(result));
      return 0;
    }
    if (command === "serve") {
      const flags = parseFlags(rest);
      const server = createEmbedServer({
        model: flags.get("model") ?? "hash",
        batchLimit: flags.get("batch-limit") !== undefined ? Number(flags.get("batch-limit")) : undefined,
      });
      server.listen(Number(flags.get("port") ?? "8752"), "127.0.0.1", () => {
        const address = server.address();
        const port = typeof address === "object" && address !== null ? address.port : "?";
        console.log(`listening on http://127.0.0.1:${port}`);
      });
      return 0;
    }
    if (command === "embed-one") {
      const flags = parseFlags(rest);
      const vector = hashEmbedOne(
        required(flags, "text"),
        flags.get("dim") !== undefined ? Number(flags.get("dim")) : DEFAULT_DIM,
        flags.get("key"),
      );
      console.log(JSON.stringify(Array.from(vector)));
      return 0;
    }
    console.error(`usage: bitextmine-provider {export|serve|embed-one} [--flag value ...]`);
    return 1;
  } catch (error) {
    if (error instanceof ModelLoadError) {
      console.error(`model error: ${(error as Error).message}`);
      return 1;
    }
    console.error(`error: ${(error as Error).message}`);
    return 1;
  }
}

const exitCode = main(process.argv.slice(2));
if (exitCode !== 0) {
  process.exit(exitCode);
}
