#!/usr/bin/env node
// Usage: node check.js solution.json
// Exit 0 accept, 1 reject, 2 malformed input; diagnostics on stderr.
"use strict";

const path = require("path");

const dist = path.join(__dirname, "..", "..", "oracles", "dist");
const { runChecker, asInt, asIntArray } = require(path.join(dist, "verdict.js"));
const { checkKnapsackOptimal } = require(path.join(dist, "knapsack.js"));

const instance = require(path.join(__dirname, "instance.json"));

runChecker(process.argv, (solution) => {
  const chosen = asIntArray(solution.chosen, "chosen");
  const objective = asInt(solution.objective, "objective");
  return checkKnapsackOptimal(chosen, objective, instance.items, instance.capacity);
});
