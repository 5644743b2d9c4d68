import { describe, expect, it } from "vitest";

import { checkNQueens, enumerateNQueens } from "../src/nqueens";
import { makeRng, randInt } from "./prng";

describe("checkNQueens", () => {
  it("accepts a known 4-queens solution", () => {
    expect(checkNQueens([1, 3, 0, 2], 4).ok).toBe(true);
  });

  it("rejects the main diagonal", () => {
    const result = checkNQueens([0, 1, 2, 3], 4);
    expect(result.ok).toBe(false);
    expect(result.reason).toContain("diagonal");
  });

  it("rejects a duplicate column", () => {
    const result = checkNQueens([0, 0, 1, 2], 4);
    expect(result.ok).toBe(false);
    expect(result.reason).toContain("column");
  });

  it("rejects a wrong-length list", () => {
    const result = checkNQueens([1, 3, 0], 4);
    expect(result.ok).toBe(false);
    expect(result.reason).toContain("expected 4 queens");
  });

  it("rejects out-of-range columns", () => {
    expect(checkNQueens([1, 3, 0, 4], 4).ok).toBe(false);
    expect(checkNQueens([1, 3, 0, -1], 4).ok).toBe(false);
    expect(checkNQueens([1, 3, 0, 2.5], 4).ok).toBe(false);
  });
});

describe("enumerateNQueens", () => {
  it("matches the known solution counts", () => {
    const counts = [1, 0, 0, 2, 10, 4, 40, 92];
    for (let n = 1; n <= 8; n++) {
      expect(enumerateNQueens(n).length).toBe(counts[n - 1]);
    }
  });

  it("stays desk scale", () => {
    expect(() => enumerateNQueens(9)).toThrow(RangeError);
    expect(() => enumerateNQueens(0)).toThrow(RangeError);
  });

  it("agrees with the checker on every assignment up to n=6", () => {
    // brute force over all n^n column assignments
    for (let n = 1; n <= 6; n++) {
      const enumerated = new Set(enumerateNQueens(n).map((s) => s.join(",")));
      let acceptedCount = 0;
      const queens = new Array<number>(n).fill(0);
      const walk = (row: number): void => {
        if (row === n) {
          const accepted = checkNQueens(queens, n).ok;
          if (accepted) acceptedCount++;
          expect(accepted).toBe(enumerated.has(queens.join(",")));
          return;
        }
        for (let col = 0; col < n; col++) {
          queens[row] = col;
          walk(row + 1);
        }
      };
      walk(0);
      expect(acceptedCount).toBe(enumerated.size);
    }
  });

  it("kills 50 of 50 single-value mutations of accepted solutions", () => {
    const rng = makeRng(0x5eed);
    const pool: Array<{ queens: number[]; n: number }> = [];
    for (let n = 4; n <= 8; n++) {
      for (const queens of enumerateNQueens(n)) {
        pool.push({ queens, n });
      }
    }
    let killed = 0;
    for (let trial = 0; trial < 50; trial++) {
      const { queens, n } = pool[randInt(rng, 0, pool.length - 1)];
      const mutated = queens.slice();
      const row = randInt(rng, 0, n - 1);
      let col = randInt(rng, 0, n - 1);
      while (col === mutated[row]) {
        col = randInt(rng, 0, n - 1);
      }
      mutated[row] = col;
      if (!checkNQueens(mutated, n).ok) killed++;
    }
    expect(killed).toBe(50);
  });
});
