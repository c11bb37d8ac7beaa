#!/usr/bin/env node
/**
 * CLI: `plots <kind> --in <csv> --out <svg>`
 *
 * Exit codes: 0 success, 2 usage/validation error.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { CsvError } from "./csv.js";
import { KINDS, Kind, renderText } from "./render.js";

export function run(argv: string[]): number {
  const usage = `usage: plots <${KINDS.join("|")}> --in <csv> --out <svg>`;
  const [kind, ...rest] = argv;
  if (!kind || !(KINDS as readonly string[]).includes(kind)) {
    console.error(usage);
    return 2;
  }
  let input: string | undefined;
  let output: string | undefined;
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) {
      console.error(usage);
      return 2;
    }
    if (flag === "--in") input = value;
    else if (flag === "--out") output = value;
    else {
      console.error(`unknown flag ${flag}\n${usage}`);
      return 2;
    }
  }
  if (!input || !output) {
    console.error(usage);
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(input, "utf-8");
  } catch (err) {
    console.error(`cannot read ${input}: ${(err as Error).message}`);
    return 2;
  }
  try {
    writeFileSync(output, renderText(kind as Kind, text));
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`invalid CSV: ${err.message}`);
      return 2;
    }
    throw err;
  }
  return 0;
}
