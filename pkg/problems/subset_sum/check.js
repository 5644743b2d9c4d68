#!/usr/bin/env node
// Usage: node check.js solution.json
// Exit 0 accept, 1 reject, 2 malformed input; diagnostics on stderr.
"use strict";

const path = require("path");

const dist = path.join(__dirname, "..", "..", "oracles", "dist");
const { runChecker, asIntArray } = require(path.join(dist, "verdict.js"));
const { checkSubsetSum } = require(path.join(dist, "subsetSum.js"));

const instance = require(path.join(__dirname, "instance.json"));

runChecker(process.argv, (solution) => {
  const indices = asIntArray(solution.indices, "indices");
  return checkSubsetSum(indices, instance.items, instance.target);
});
