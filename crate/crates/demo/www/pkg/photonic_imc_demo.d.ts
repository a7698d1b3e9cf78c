/* tslint:disable */
/* eslint-disable */

/**
 * Error histogram of an n x n multiplication grid.
 */
export function multiply_grid_svg(n: number, noise_on: boolean, seed: bigint): string;

/**
 * One offset-corrected multiplication on a fresh cell.
 */
export function multiply_summary(a: number, b: number, noise_on: boolean, seed: bigint): string;

/**
 * Text summary that pairs with `solve_svg` for the same arguments.
 */
export function solve_summary(size: number, noise_on: boolean, seed: bigint): string;

/**
 * Convergence plot of the exact, analog, and mixed-precision solvers on a
 * random positive-definite system.
 */
export function solve_svg(size: number, noise_on: boolean, seed: bigint): string;

/**
 * Level-versus-width curve at a chosen write energy. Pass `energy_pj <= 0`
 * to use the default energy, which saturates exactly at the width clamp.
 */
export function width_curve_svg(energy_pj: number, noise_on: boolean, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly multiply_grid_svg: (a: number, b: number, c: bigint) => [number, number];
    readonly multiply_summary: (a: number, b: number, c: number, d: bigint) => [number, number];
    readonly solve_summary: (a: number, b: number, c: bigint) => [number, number];
    readonly solve_svg: (a: number, b: number, c: bigint) => [number, number];
    readonly width_curve_svg: (a: number, b: number, c: bigint) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
