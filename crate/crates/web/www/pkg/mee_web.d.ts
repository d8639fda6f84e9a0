/* tslint:disable */
/* eslint-disable */

/**
 * MEE with the true noise density against least squares on one sample.
 */
export class FitResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly data_x: Float64Array;
    readonly data_y: Float64Array;
    readonly grid: Float64Array;
    readonly ls: Float64Array;
    readonly mee: Float64Array;
    readonly mse_ls: number;
    readonly mse_mee: number;
    readonly truth: Float64Array;
}

/**
 * Subbotin density `f_r` on an even grid over `[lo, hi]`.
 */
export function density_curve(r: number, lo: number, hi: number, points: number): Float64Array;

/**
 * `V(s) − V(0)` where `V(s) = E[−log f(ξ + s)]`, on an even grid over `[lo, hi]`.
 */
export function entropy_profile(r: number, lo: number, hi: number, points: number): Float64Array;

/**
 * Fits a one-input tanh bump observed under noise of shape `r`, or under
 * 5% scale-10 contamination when `contaminated` is set (the MEE loss then
 * uses the Laplace density).
 */
export function fit_demo(r: number, contaminated: boolean, n: number, epochs: number, seed: bigint): FitResult;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fitresult_free: (a: number, b: number) => void;
    readonly density_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly entropy_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly fit_demo: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly fitresult_data_x: (a: number) => [number, number];
    readonly fitresult_data_y: (a: number) => [number, number];
    readonly fitresult_grid: (a: number) => [number, number];
    readonly fitresult_ls: (a: number) => [number, number];
    readonly fitresult_mee: (a: number) => [number, number];
    readonly fitresult_mse_ls: (a: number) => number;
    readonly fitresult_mse_mee: (a: number) => number;
    readonly fitresult_truth: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
