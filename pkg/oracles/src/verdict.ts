// Shared checker plumbing. A checker is a pure function of one solution
// file: no network, no writes. Process contract: exit 0 accept, 1 reject,
// 2 malformed input; diagnostics go to stderr.

import * as fs from "fs";

export interface CheckResult {
  ok: boolean;
  reason?: string;
}

export function accept(): CheckResult {
  return { ok: true };
}

export function reject(reason: string): CheckResult {
  return { ok: false, reason };
}

/** Solution file is unreadable, not JSON, or missing required structure. */
export class MalformedSolutionError extends Error {}

export function asInt(value: unknown, label: string): number {
  if (typeof value !== "number" || !Number.isInteger(value)) {
    throw new MalformedSolutionError(`${label} must be an integer`);
  }
  return value;
}

export function asIntArray(value: unknown, label: string): number[] {
  if (!Array.isArray(value) || !value.every((x) => typeof x === "number" && Number.isInteger(x))) {
    throw new MalformedSolutionError(`${label} must be an array of integers`);
  }
  return value;
}

export function asIntGrid(value: unknown, label: string): number[][] {
  if (!Array.isArray(value)) {
    throw new MalformedSolutionError(`${label} must be an array of integer rows`);
  }
  return value.map((row, i) => asIntArray(row, `${label}[${i}]`));
}

export function readSolution(path: string): Record<string, unknown> {
  let raw: string;
  try {
    raw = fs.readFileSync(path, "utf-8");
  } catch (err) {
    throw new MalformedSolutionError(`cannot read ${path}: ${err}`);
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch (err) {
    throw new MalformedSolutionError(`not valid JSON: ${err}`);
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new MalformedSolutionError("solution must be a JSON object");
  }
  return parsed as Record<string, unknown>;
}

/** Process entry point for a check script: maps a validation function over
 * argv to the exit-code contract. Never returns. */
export function runChecker(
  argv: string[],
  validate: (solution: Record<string, unknown>) => CheckResult,
): never {
  const path = argv[2];
  if (!path) {
    console.error("usage: check <solution.json>");
    process.exit(2);
  }
  let result: CheckResult;
  try {
    result = validate(readSolution(path));
  } catch (err) {
    if (err instanceof MalformedSolutionError) {
      console.error(`malformed solution: ${err.message}`);
    } else {
      console.error(`checker failure: ${err}`);
    }
    process.exit(2);
  }
  if (!result.ok) {
    console.error(result.reason ?? "solution rejected");
    process.exit(1);
  }
  process.exit(0);
}
