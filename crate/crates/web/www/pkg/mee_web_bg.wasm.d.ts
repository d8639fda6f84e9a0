/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fitresult_free: (a: number, b: number) => void;
export const density_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const entropy_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const fit_demo: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const fitresult_data_x: (a: number) => [number, number];
export const fitresult_data_y: (a: number) => [number, number];
export const fitresult_grid: (a: number) => [number, number];
export const fitresult_ls: (a: number) => [number, number];
export const fitresult_mee: (a: number) => [number, number];
export const fitresult_mse_ls: (a: number) => number;
export const fitresult_mse_mee: (a: number) => number;
export const fitresult_truth: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
