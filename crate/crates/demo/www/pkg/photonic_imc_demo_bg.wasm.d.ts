/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const multiply_grid_svg: (a: number, b: number, c: bigint) => [number, number];
export const multiply_summary: (a: number, b: number, c: number, d: bigint) => [number, number];
export const solve_summary: (a: number, b: number, c: bigint) => [number, number];
export const solve_svg: (a: number, b: number, c: bigint) => [number, number];
export const width_curve_svg: (a: number, b: number, c: bigint) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
