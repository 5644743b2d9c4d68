#!/usr/bin/env node
// Usage: node check.js solution.json
// Exit 0 accept, 1 reject, 2 malformed input; diagnostics on stderr.
"use strict";

const path = require("path");

const dist = path.join(__dirname, "..", "..", "oracles", "dist");
const { runChecker, asIntArray } = require(path.join(dist, "verdict.js"));
const { checkNQueens } = require(path.join(dist, "nqueens.js"));

const N = 6;

runChecker(process.argv, (solution) => {
  const queens = asIntArray(solution.queens, "queens");
  return checkNQueens(queens, N);
});
