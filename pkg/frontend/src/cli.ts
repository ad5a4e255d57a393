#!/usr/bin/env node
/** Command-line entry: `ddflux-plot --mode M --in file.csv:label ... --out fig.png`. */

import { basename } from "node:path";

import { SchemaError } from "./csv.js";
import { FigureError, MODES, render, type FigureInput, type FigureSpec } from "./figure.js";

export class UsageError extends Error {}

const USAGE = `usage: ddflux-plot --mode <${MODES.join("|")}> --in <file.csv[:label]> [--in ...] --out <fig.png> [--force]

Renders solver CSV output into a deterministic 1200x800 PNG figure.
Modes 'refinement' and 'regime-comparison' overlay solution profiles
(columns x,u); 'diagnostics' overlays per-step energy traces (diagnostics
schema).  Legend entries follow the order of the --in flags.`;

function parseInput(raw: string): FigureInput {
  const sep = raw.lastIndexOf(":");
  if (sep <= 0 || sep === raw.length - 1) {
    const path = raw.endsWith(":") ? raw.slice(0, -1) : raw;
    return { path, label: basename(path).replace(/\.csv$/, "") };
  }
  return { path: raw.slice(0, sep), label: raw.slice(sep + 1) };
}

export function parseArgs(argv: string[]): FigureSpec {
  let mode: string | undefined;
  let out: string | undefined;
  let force = false;
  const inputs: FigureInput[] = [];

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i] as string;
    const next = (): string => {
      const value = argv[++i];
      if (value === undefined) {
        throw new UsageError(`${arg} expects a value`);
      }
      return value;
    };
    switch (arg) {
      case "--mode":
        mode = next();
        break;
      case "--in":
        inputs.push(parseInput(next()));
        break;
      case "--out":
        out = next();
        break;
      case "--force":
        force = true;
        break;
      case "--help":
      case "-h":
        throw new UsageError(USAGE);
      default:
        throw new UsageError(`unknown argument '${arg}'`);
    }
  }
  if (mode === undefined) throw new UsageError("--mode is required");
  if (!MODES.includes(mode as FigureSpec["mode"])) {
    throw new UsageError(`unknown mode '${mode}', expected one of ${MODES.join(", ")}`);
  }
  if (out === undefined) throw new UsageError("--out is required");
  if (inputs.length === 0) throw new UsageError("at least one --in is required");
  return { mode: mode as FigureSpec["mode"], inputs, out, force };
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (error) {
    if (error instanceof UsageError) {
      console.error(error.message);
      return 1;
    }
    throw error;
  }
  try {
    render(spec);
  } catch (error) {
    if (error instanceof FigureError || error instanceof SchemaError) {
      console.error(`error: ${error.message}`);
      return 1;
    }
    throw error;
  }
  console.log(`wrote ${spec.out}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(basename(process.argv[1]));
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
