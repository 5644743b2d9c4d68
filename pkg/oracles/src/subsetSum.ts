// Subset-sum validation: the chosen indices must be valid, distinct, and
// their items must sum exactly to the target.

import { CheckResult, accept, reject } from "./verdict";

export function checkSubsetSum(
  indices: number[],
  items: number[],
  target: number,
): CheckResult {
  const seen = new Set<number>();
  for (const idx of indices) {
    if (!Number.isInteger(idx) || idx < 0 || idx >= items.length) {
      return reject(`index ${idx} outside [0, ${items.length})`);
    }
    if (seen.has(idx)) {
      return reject(`index ${idx} chosen twice`);
    }
    seen.add(idx);
  }
  const total = indices.reduce((sum, idx) => sum + items[idx], 0);
  if (total !== target) {
    return reject(`chosen items sum to ${total}, not ${target}`);
  }
  return accept();
}
