#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { EmptyInput, SchemaMismatch } from "./errors.js";
import { Layout, render } from "./render.js";

export function main(argv: string[]): number {
  const parsed = yargs(argv)
    .command("render", "render a trajectory CSV to an SVG figure", (y) =>
      y
        .option("input", { type: "string", demandOption: true })
        .option("layout", {
          choices: ["single", "grid2x2"] as const,
          default: "single" as Layout,
        })
        .option("out", { type: "string", demandOption: true })
        .option("x-label", { type: "string" })
        .option("y-label", { type: "string" }),
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .fail((msg) => {
      throw new Error(msg ?? "usage error");
    });

  let args;
  try {
    args = parsed.parseSync(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 1;
  }
  try {
    render({
      input: args.input as string,
      layout: args.layout as Layout,
      out: args.out as string,
      xLabel: args["x-label"] as string | undefined,
      yLabel: args["y-label"] as string | undefined,
    });
  } catch (err) {
    if (err instanceof SchemaMismatch || err instanceof EmptyInput) {
      console.error(`${(err as Error).name}: ${(err as Error).message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 3;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(hideBin(process.argv)));
}
