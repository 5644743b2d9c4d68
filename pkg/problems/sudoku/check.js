#!/usr/bin/env node
// Usage: node check.js solution.json
// Exit 0 accept, 1 reject, 2 malformed input; diagnostics on stderr.
"use strict";

const path = require("path");

const dist = path.join(__dirname, "..", "..", "oracles", "dist");
const { runChecker, asIntGrid } = require(path.join(dist, "verdict.js"));
const { checkSudoku } = require(path.join(dist, "sudoku.js"));

const puzzle = require(path.join(__dirname, "puzzle.json"));

runChecker(process.argv, (solution) => {
  const grid = asIntGrid(solution.grid, "grid");
  return checkSudoku(grid, puzzle.givens);
});
