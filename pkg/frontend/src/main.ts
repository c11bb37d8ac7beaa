#!/usr/bin/env node
/** Executable entry point for the `plots` command. */

import { run } from "./cli.js";

process.exit(run(process.argv.slice(2)));
