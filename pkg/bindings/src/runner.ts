/**
 * Process plumbing: every binding call goes through the `numsym` CLI with
 * JSONL files in a scratch directory. Batch entry points exist so that a
 * thousand evaluations cost one process spawn, not a thousand.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export class CliError extends Error {
  constructor(
    message: string,
    public readonly exitCode: number | null,
    public readonly stderr: string,
  ) {
    super(message);
    this.name = "CliError";
  }
}

function cliCommand(): string[] {
  const override = process.env.NUMSYM_BIN;
  if (override && override.trim().length > 0) {
    return override.trim().split(/\s+/);
  }
  return ["numsym"];
}

export interface CliResult {
  stdout: string;
  exitCode: number;
}

/** Run the CLI; exit codes 0 and 1 are successful completions (1 means the
 * run recorded per-instance errors), anything else throws. */
export function runCli(args: string[], okCodes: number[] = [0]): CliResult {
  const [bin, ...prefix] = cliCommand();
  const result = spawnSync(bin, [...prefix, ...args], {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (result.error) {
    throw new CliError(`failed to launch ${bin}: ${result.error.message}`, null, "");
  }
  if (result.status === null || !okCodes.includes(result.status)) {
    throw new CliError(
      `numsym ${args[0]} exited with ${result.status}: ${result.stderr}`,
      result.status,
      result.stderr ?? "",
    );
  }
  return { stdout: result.stdout ?? "", exitCode: result.status };
}

export function writeJsonl(path: string, records: unknown[]): void {
  writeFileSync(path, records.map((r) => JSON.stringify(r)).join("\n") + (records.length ? "\n" : ""));
}

export function readJsonl<T>(path: string): T[] {
  const text = readFileSync(path, "utf-8");
  return text
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as T);
}

/** Run `body` with a scratch directory that is always cleaned up. */
export function withScratch<T>(body: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "numsym-"));
  try {
    return body(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
