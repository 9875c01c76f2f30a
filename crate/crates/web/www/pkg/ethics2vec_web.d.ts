/* tslint:disable */
/* eslint-disable */

/**
 * Profiles the ten car control laws under the given risk parameters.
 */
export function carExperiment(k: number, u0: number, a: number, dt: number): any;

/**
 * Optimal threshold, operating point and embedding of a binormal agent.
 */
export function exploreThreshold(mu0: number, sigma0: number, mu1: number, sigma1: number, ratio: number, p_pos: number): any;

/**
 * Simulates an agent with a known loss ratio and audits its action log.
 */
export function recoverAgent(ratio: number, n: number, seed: number, nonparametric: boolean): any;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly carExperiment: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly exploreThreshold: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly recoverAgent: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
