/* tslint:disable */
/* eslint-disable */

/**
 * Per-coefficient noise standard deviation over a log-spaced ε grid for
 * the clean and fairness-augmented objectives.
 */
export function noise_curve(d: number, delta: number): string;

/**
 * Largest coefficient change seen over random neighbouring datasets,
 * each paired with its analytic bound, plus a 20-bin histogram of the
 * fair L1 change as a fraction of its bound.
 */
export function sensitivity_probe(d: number, trials: number, seed: bigint): string;

/**
 * Train one model on a synthetic two-feature dataset and score it on a
 * held-out quarter. Split methods spend `eps` as the composite budget.
 */
export function train_demo(method: string, eps: number, delta: number, alpha1: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly noise_curve: (a: number, b: number) => [number, number, number, number];
    readonly sensitivity_probe: (a: number, b: number, c: bigint) => [number, number, number, number];
    readonly train_demo: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
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
