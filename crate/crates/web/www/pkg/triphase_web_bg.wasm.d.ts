/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const eigen_table: (a: number, b: number, c: number) => [number, number, number, number];
export const front_series: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const groups: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const preset_names: () => [number, number];
export const quick_run: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
