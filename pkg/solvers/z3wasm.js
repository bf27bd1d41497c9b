#!/usr/bin/env node
// SMT-LIB2 front end over the WebAssembly build of Z3.
// Usage: node z3wasm.js <script.smt2> [timeout_ms]
// Prints the first result token (sat/unsat/unknown) on stdout.
"use strict";
const fs = require("fs");
const path = require("path");

async function main() {
  const scriptPath = process.argv[2];
  const timeoutMs = parseInt(process.argv[3] || "2000", 10);
  if (!scriptPath) {
    console.error("usage: z3wasm.js <script.smt2> [timeout_ms]");
    process.exit(2);
  }
  const script = fs.readFileSync(scriptPath, "utf8");
  const { init } = require(path.join(__dirname, "node_modules", "z3-solver"));
  const { Z3 } = await init();
  Z3.global_param_set("timeout", String(timeoutMs));
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  let out;
  try {
    out = await Z3.eval_smtlib2_string(ctx, script);
  } catch (e) {
    console.error(String((e && e.message) || e));
    process.exit(1);
  }
  const text = String(out).trim();
  if (text.startsWith("(error")) {
    console.error(text);
    process.exit(1);
  }
  const tok = text.split(/\s+/)[0] || "unknown";
  process.stdout.write(tok + "\n");
  process.exit(0);
}

main().catch((e) => {
  console.error(String((e && e.message) || e));
  process.exit(1);
});
