// Column-per-row n-queens: validation by re-checking every pair, and
// exhaustive enumeration as the metamorphic oracle.

import { CheckResult, accept, reject } from "./verdict";

const DESK_SCALE_LIMIT = 8;

/** Accept iff the list has length n, every value lies in [0, n), all values
 * are distinct, and no two queens share a diagonal (|i-j| != |qi-qj|).
 * The diagnostic names the first violated rule. */
export function checkNQueens(queens: number[], n: number): CheckResult {
  if (queens.length !== n) {
    return reject(`expected ${n} queens, got ${queens.length}`);
  }
  for (let i = 0; i < n; i++) {
    const q = queens[i];
    if (!Number.isInteger(q) || q < 0 || q >= n) {
      return reject(`row ${i}: column ${q} outside [0, ${n})`);
    }
  }
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      if (queens[i] === queens[j]) {
        return reject(`rows ${i} and ${j} both use column ${queens[i]}`);
      }
      if (Math.abs(i - j) === Math.abs(queens[i] - queens[j])) {
        return reject(`rows ${i} and ${j} share a diagonal`);
      }
    }
  }
  return accept();
}

/** All solutions for an n x n board, found by exhaustive backtracking.
 * Desk scale only: n must be at most 8. */
export function enumerateNQueens(n: number): number[][] {
  if (!Number.isInteger(n) || n < 1 || n > DESK_SCALE_LIMIT) {
    throw new RangeError(`n must be an integer in [1, ${DESK_SCALE_LIMIT}]`);
  }
  const solutions: number[][] = [];
  const queens: number[] = [];
  const place = (row: number): void => {
    if (row === n) {
      solutions.push(queens.slice());
      return;
    }
    for (let col = 0; col < n; col++) {
      let legal = true;
      for (let r = 0; r < row; r++) {
        if (queens[r] === col || row - r === Math.abs(col - queens[r])) {
          legal = false;
          break;
        }
      }
      if (legal) {
        queens.push(col);
        place(row + 1);
        queens.pop();
      }
    }
  };
  place(0);
  return solutions;
}
