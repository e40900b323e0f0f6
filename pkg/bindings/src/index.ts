/**
 * Thin bindings over the numsym command line so Node-side code (training
 * loops, dashboards) can tag text, execute programs, derive NLI labels,
 * score answers, and query the selection gate without reimplementing any of
 * it. All values cross the boundary as JSON primitives; results are exactly
 * what the CLI computes.
 */

import { join } from "node:path";
import { readFileSync, writeFileSync } from "node:fs";
import { readJsonl, runCli, withScratch, writeJsonl } from "./runner.js";

export { CliError } from "./runner.js";

export const BINDING_VERSION = "0.1.0";

export type Role = "passage" | "question" | "premise" | "hypothesis";

export interface NumberBinding {
  token: string;
  value: number;
  surface: string;
  start: number;
  end: number;
  kind: "cardinal" | "ordinal" | "word" | "relative";
}

export interface TaggedText {
  original: string;
  annotated: string;
  role: Role;
  bindings: NumberBinding[];
}

export type BoundValue =
  | { kind: "number"; value: number }
  | { kind: "boolean"; value: boolean }
  | { kind: "null"; value: null; reason: string | null };

export interface Violation {
  code: string;
  message: string;
  location: [number, number] | null;
}

export interface ValidationResult {
  valid: boolean;
  violations: Violation[];
  /** Canonical program text; null when the input does not parse. */
  formatted: string | null;
}

export interface Environment {
  [token: string]: number;
}

export interface EvaluateRequest {
  program: string;
  env: Environment;
}

export interface NliRequest {
  eProgram: string;
  cProgram: string;
  env: Environment;
}

export type NliLabel = "entailment" | "contradiction" | "neutral" | "invalid";

export interface PairScore {
  em: 0 | 1;
  f1: number;
}

/** The installed CLI's version string. */
export function nativeVersion(): string {
  return runCli(["--version"]).stdout.trim();
}

/** Throws when the bindings and the installed CLI disagree on version. */
export function assertVersionMatch(): void {
  const native = nativeVersion();
  if (native !== BINDING_VERSION) {
    throw new Error(`bindings ${BINDING_VERSION} do not match numsym ${native}`);
  }
}

export function tag(text: string, role: Role = "passage", indexBase?: number): TaggedText {
  return tagBatch([{ text, role, indexBase }])[0];
}

export function tagBatch(
  items: { text: string; role?: Role; indexBase?: number }[],
): TaggedText[] {
  return withScratch((dir) => {
    const input = join(dir, "in.jsonl");
    const output = join(dir, "out.jsonl");
    const bases = new Set(items.map((i) => i.indexBase));
    if (bases.size > 1) {
      throw new Error("tagBatch requires a single indexBase per call");
    }
    writeJsonl(
      input,
      items.map((item, i) => ({ id: String(i), text: item.text, role: item.role ?? "passage" })),
    );
    const args = ["tag", "--input", input, "--output", output];
    const base = items[0]?.indexBase;
    if (base !== undefined) {
      args.push("--index-base", String(base));
    }
    runCli(args);
    return readJsonl<TaggedText & { id: string }>(output).map(
      ({ id: _id, ...tagged }) => tagged,
    );
  });
}

/** Parse program text; returns the canonical form or throws on bad syntax. */
export function parse(program: string): string {
  const result = validate(program, collectTokens(program));
  const parseFailure = result.violations.find((v) => v.code === "ParseError");
  if (parseFailure) {
    throw new Error(parseFailure.message);
  }
  return result.formatted as string;
}

/** Canonical formatting (whitespace-free, round-trip stable). */
export function format(program: string): string {
  return parse(program);
}

export function validate(program: string, tokens: string[] = []): ValidationResult {
  return validateBatch([{ program, tokens }])[0];
}

export function validateBatch(
  items: { program: string; tokens?: string[] }[],
): ValidationResult[] {
  return withScratch((dir) => {
    const input = join(dir, "in.jsonl");
    const output = join(dir, "out.jsonl");
    writeJsonl(
      input,
      items.map((item, i) => ({ id: String(i), program: item.program, tokens: item.tokens ?? [] })),
    );
    runCli(["validate", "--input", input, "--output", output]);
    return readJsonl<ValidationResult & { id: string }>(output).map(
      ({ id: _id, ...result }) => result,
    );
  });
}

/** Evaluate one program against an environment; failures come back as Null. */
export function evaluate(program: string, env: Environment): BoundValue {
  return evaluateBatch([{ program, env }])[0];
}

export function evaluateBatch(requests: EvaluateRequest[]): BoundValue[] {
  return withScratch((dir) => {
    const input = join(dir, "in.jsonl");
    const output = join(dir, "out.jsonl");
    writeJsonl(
      input,
      requests.map((request, i) => ({ id: String(i), program: request.program, env: request.env })),
    );
    runCli(["execute", "--input", input, "--output", output, "--summary", join(dir, "s.json")]);
    return readJsonl<{ value: number | boolean | null; null_reason: string | null }>(output).map(
      (record) => toBoundValue(record.value, record.null_reason),
    );
  });
}

function toBoundValue(value: number | boolean | null, reason: string | null): BoundValue {
  if (typeof value === "number") {
    return { kind: "number", value };
  }
  if (typeof value === "boolean") {
    return { kind: "boolean", value };
  }
  return { kind: "null", value: null, reason };
}

/** Execute an entailment-test / contradiction-test program pair. */
export function nliDecide(eProgram: string, cProgram: string, env: Environment): NliLabel {
  return nliDecideBatch([{ eProgram, cProgram, env }])[0];
}

export function nliDecideBatch(requests: NliRequest[]): NliLabel[] {
  return withScratch((dir) => {
    const input = join(dir, "in.jsonl");
    const output = join(dir, "out.jsonl");
    writeJsonl(
      input,
      requests.map((request, i) => ({
        id: String(i),
        e_program: request.eProgram,
        c_program: request.cProgram,
        env: request.env,
      })),
    );
    runCli(["execute", "--input", input, "--output", output, "--summary", join(dir, "s.json")]);
    return readJsonl<{ label: NliLabel }>(output).map((record) => record.label);
  });
}

/** Exact-match and aligned bag-of-tokens F1 for one answer pair. */
export function scoreQa(prediction: string[], gold: string[]): PairScore {
  return scoreQaBatch([{ prediction, gold }])[0];
}

export function scoreQaBatch(pairs: { prediction: string[]; gold: string[] }[]): PairScore[] {
  return withScratch((dir) => {
    const input = join(dir, "pairs.jsonl");
    const output = join(dir, "out.jsonl");
    writeJsonl(
      input,
      pairs.map((pair, i) => ({ id: String(i), prediction: pair.prediction, gold: pair.gold })),
    );
    runCli(["report", "--pairs", input, "--output", output]);
    return readJsonl<PairScore & { id: string }>(output).map(({ id: _id, ...score }) => score);
  });
}

/** NLI label accuracy (0-100) of predictions against gold labels, by id. */
export function scoreNli(
  predictions: { id: string; label: string }[],
  gold: { id: string; label: string }[],
): number {
  return withScratch((dir) => {
    const dataset = join(dir, "dataset.jsonl");
    const predictionFile = join(dir, "pred.jsonl");
    const output = join(dir, "report.json");
    writeJsonl(
      dataset,
      gold.map((g) => ({ id: g.id, premise: "", hypothesis: "", label: g.label })),
    );
    writeJsonl(predictionFile, predictions);
    runCli([
      "report", "--task", "nli",
      "--dataset", dataset,
      "--predictions", predictionFile,
      "--output", output,
    ]);
    return (JSON.parse(readFileSync(output, "utf-8")) as { accuracy: number }).accuracy;
  });
}

export interface GateModelData {
  n_in: number;
  n_out: number;
  weights: number[];
  bias: number[];
}

/** Per-route selection probabilities from a gate model (file or object). */
export function gateScore(model: string | GateModelData, features: number[]): number[] {
  return gateScoreBatch(model, [features])[0];
}

export function gateScoreBatch(
  model: string | GateModelData,
  featureRows: number[][],
): number[][] {
  return withScratch((dir) => {
    let modelPath: string;
    if (typeof model === "string") {
      modelPath = model;
    } else {
      modelPath = join(dir, "gate.json");
      writeFileSync(modelPath, JSON.stringify({ config: null, final_loss: null, ...model }));
    }
    const input = join(dir, "features.jsonl");
    const output = join(dir, "scores.jsonl");
    writeJsonl(
      input,
      featureRows.map((features, i) => ({ id: String(i), features })),
    );
    runCli(["gate-eval", "--model", modelPath, "--features", input, "--output", output]);
    return readJsonl<{ p: number[] }>(output).map((record) => record.p);
  });
}

/** Token names referenced by a program text (best-effort, for parse()). */
function collectTokens(program: string): string[] {
  const matches = program.match(/\b[NQM]\d+\b/g) ?? [];
  return [...new Set(matches)];
}
