// 0/1 knapsack validation with an exhaustive-search optimum as the
// reference. No solver dependencies: brute force and arithmetic only.

import { CheckResult, accept, reject } from "./verdict";

export type KnapsackItem = readonly [weight: number, value: number];

const DESK_SCALE_LIMIT = 20;

/** Maximum total value over all subsets fitting within the capacity,
 * by enumerating all 2^n subsets. Desk scale only: at most 20 items. */
export function bestKnapsackValue(
  items: readonly KnapsackItem[],
  capacity: number,
): number {
  if (items.length > DESK_SCALE_LIMIT) {
    throw new RangeError(`at most ${DESK_SCALE_LIMIT} items`);
  }
  let best = 0;
  for (let mask = 0; mask < 1 << items.length; mask++) {
    let weight = 0;
    let value = 0;
    for (let i = 0; i < items.length; i++) {
      if (mask & (1 << i)) {
        weight += items[i][0];
        value += items[i][1];
      }
    }
    if (weight <= capacity && value > best) {
      best = value;
    }
  }
  return best;
}

/** Accept iff the chosen subset is feasible (total weight within capacity),
 * the claimed value equals the chosen items' value sum, and that value
 * equals the exhaustive optimum. Diagnostics distinguish infeasibility
 * from suboptimality. */
export function checkKnapsackOptimal(
  chosen: number[],
  claimedValue: number,
  items: readonly KnapsackItem[],
  capacity: number,
): CheckResult {
  const seen = new Set<number>();
  for (const idx of chosen) {
    if (!Number.isInteger(idx) || idx < 0 || idx >= items.length) {
      return reject(`index ${idx} outside [0, ${items.length})`);
    }
    if (seen.has(idx)) {
      return reject(`index ${idx} chosen twice`);
    }
    seen.add(idx);
  }
  const weight = chosen.reduce((sum, idx) => sum + items[idx][0], 0);
  if (weight > capacity) {
    return reject(`infeasible: weight ${weight} exceeds capacity ${capacity}`);
  }
  const value = chosen.reduce((sum, idx) => sum + items[idx][1], 0);
  if (value !== claimedValue) {
    return reject(`claimed value ${claimedValue}, but the chosen items are worth ${value}`);
  }
  const best = bestKnapsackValue(items, capacity);
  if (value < best) {
    return reject(`suboptimal: value ${value} is below the optimum ${best}`);
  }
  return accept();
}
