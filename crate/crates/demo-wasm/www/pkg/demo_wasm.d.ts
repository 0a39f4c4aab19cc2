/* tslint:disable */
/* eslint-disable */

/**
 * Coverage selection over 2-D points, Euclidean distance between each pool
 * point and each test point. Returns the selection as JSON.
 */
export function coverage(pool: Float64Array, test: Float64Array, budget: number): string;

/**
 * Average Hausdorff distance between two point sets given as flat
 * `[x0, y0, x1, y1, ...]` arrays. NaN when either set is empty.
 */
export function hausdorff(a: Float64Array, b: Float64Array): number;

/**
 * Parses tabular model output against `sentence`, returning triples,
 * recovered spans and per-row diagnostics as JSON.
 */
export function parse_table(text: string, sentence: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly coverage: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly hausdorff: (a: number, b: number, c: number, d: number) => number;
    readonly parse_table: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
