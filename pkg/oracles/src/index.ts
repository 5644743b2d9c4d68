export {
  CheckResult,
  MalformedSolutionError,
  accept,
  asInt,
  asIntArray,
  asIntGrid,
  readSolution,
  reject,
  runChecker,
} from "./verdict";
export { checkNQueens, enumerateNQueens } from "./nqueens";
export { checkSubsetSum } from "./subsetSum";
export { KnapsackItem, bestKnapsackValue, checkKnapsackOptimal } from "./knapsack";
export { checkSudoku } from "./sudoku";
