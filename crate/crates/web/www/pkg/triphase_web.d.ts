/* tslint:disable */
/* eslint-disable */

/**
 * First `count` roots of `μζ + H tan μ = 0` with their small-H
 * approximations, as rows `[μ, approximation]`.
 */
export function eigen_table(henry: number, zeta: number, count: number): Float64Array;

/**
 * Series approximations of the melting front on `count` times up to the
 * leading-order melt time.
 *
 * Returns rows `[t, t_seconds, s0, s0 + Bi·s1, s_gw]` flattened.
 */
export function front_series(name: string, t1_offset: number, t2_offset: number, length: number, count: number): Float64Array;

/**
 * Dimensionless groups driving the front, as `[Bi, H, zeta, eps, t_bar]`.
 */
export function groups(name: string, t1_offset: number, t2_offset: number, length: number): Float64Array;

/**
 * Names of the built-in scenarios, comma separated.
 */
export function preset_names(): string;

/**
 * Coarse full simulation of a preset, sampled on a log time grid.
 *
 * Returns rows `[t, s_gw, s_wi, C(x=1)]` flattened; the last row is the
 * final state.
 */
export function quick_run(name: string, cells: number, t_end: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly eigen_table: (a: number, b: number, c: number) => [number, number, number, number];
    readonly front_series: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly groups: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly preset_names: () => [number, number];
    readonly quick_run: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
