#!/usr/bin/env node
// Interactive SMT-LIB2 solver CLI backed by the official Z3 WASM build
// (npm package z3-solver). Reads SMT-LIB text from stdin, evaluates each
// chunk once it contains (check-sat), and prints the solver's reply.
// Behaves like `z3 -in`; also accepts a file argument for one-shot use.
// Accepts and ignores common z3 flags (-in, -smt2, -T:n).
'use strict';
const fs = require('fs');

function resolveZ3() {
  try {
    return require('z3-solver');
  } catch (e) {
    return require('/usr/lib/node_modules/z3-solver');
  }
}

async function main() {
  const args = process.argv.slice(2).filter((a) => !a.startsWith('-'));
  const { init } = resolveZ3();
  const { Z3 } = await init();
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);

  async function evalChunk(text) {
    try {
      const out = await Z3.eval_smtlib2_string(ctx, text);
      if (out && out.trim().length > 0) process.stdout.write(out.trim() + '\n');
    } catch (e) {
      process.stdout.write('(error "' + String(e).replace(/"/g, "'") + '")\n');
    }
  }

  if (args.length > 0) {
    await evalChunk(fs.readFileSync(args[0], 'utf8'));
    process.exit(0);
  }

  let buffer = '';
  let queue = Promise.resolve();
  process.stdin.setEncoding('utf8');
  process.stdin.on('data', (data) => {
    buffer += data;
    let idx;
    while ((idx = buffer.indexOf('(check-sat)')) !== -1) {
      const chunk = buffer.slice(0, idx + '(check-sat)'.length);
      buffer = buffer.slice(idx + '(check-sat)'.length);
      queue = queue.then(() => evalChunk(chunk));
    }
  });
  process.stdin.on('end', () => {
    queue.then(async () => {
      if (buffer.trim().length > 0) await evalChunk(buffer);
      process.exit(0);
    });
  });
}

main();
