// Sudoku validation: a completed 9x9 grid must use 1..9, repeat nothing in
// any row, column, or box, and preserve every given clue (0 marks a free
// cell in the givens grid).

import { CheckResult, accept, reject } from "./verdict";

export function checkSudoku(grid: number[][], givens: number[][]): CheckResult {
  if (grid.length !== 9 || grid.some((row) => row.length !== 9)) {
    return reject("grid must be 9x9");
  }
  for (let r = 0; r < 9; r++) {
    for (let c = 0; c < 9; c++) {
      const v = grid[r][c];
      if (!Number.isInteger(v) || v < 1 || v > 9) {
        return reject(`cell (${r}, ${c}): value ${v} outside 1..9`);
      }
    }
  }
  for (let r = 0; r < 9; r++) {
    for (let c = 0; c < 9; c++) {
      if (givens[r][c] !== 0 && grid[r][c] !== givens[r][c]) {
        return reject(`cell (${r}, ${c}): given ${givens[r][c]} replaced by ${grid[r][c]}`);
      }
    }
  }
  for (let r = 0; r < 9; r++) {
    if (new Set(grid[r]).size !== 9) {
      return reject(`row ${r} repeats a value`);
    }
  }
  for (let c = 0; c < 9; c++) {
    if (new Set(grid.map((row) => row[c])).size !== 9) {
      return reject(`column ${c} repeats a value`);
    }
  }
  for (let br = 0; br < 3; br++) {
    for (let bc = 0; bc < 3; bc++) {
      const box = new Set<number>();
      for (let r = 0; r < 3; r++) {
        for (let c = 0; c < 3; c++) {
          box.add(grid[3 * br + r][3 * bc + c]);
        }
      }
      if (box.size !== 9) {
        return reject(`box (${br}, ${bc}) repeats a value`);
      }
    }
  }
  return accept();
}
