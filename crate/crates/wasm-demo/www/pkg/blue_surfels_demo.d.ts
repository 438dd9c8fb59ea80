/* tslint:disable */
/* eslint-disable */

/**
 * A model with its surfel ordering and the stats of the last frame drawn.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `key=value` lines comparing the level-of-detail frame with the reference.
     */
    compare(yaw: number, pitch: number, distance: number, width: number, height: number, overdraw: number): string;
    coverage(): number;
    /**
     * Window means of the distance from each surfel to its nearest predecessor.
     */
    dmin_curve(window: number): Float64Array;
    /**
     * `points triangles select_ms raster_ms` of the last frame, or an empty string.
     */
    last_stats(): string;
    constructor(model_name: string, resolution: number, max_surfels: number, candidates: number, seed: bigint);
    /**
     * RGBA pixels of an orbit view. `distance` is in multiples of the model's
     * bounding radius.
     */
    render(yaw: number, pitch: number, distance: number, width: number, height: number, overdraw: number, lod: boolean): Uint8Array;
    /**
     * Draws only the first `prefix` surfels, sized as if that prefix had been
     * selected for the view.
     */
    render_prefix(yaw: number, pitch: number, distance: number, width: number, height: number, prefix: number): Uint8Array;
    surfel_count(): number;
    /**
     * As `f64` so JavaScript gets a plain number.
     */
    triangle_count(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_compare: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly demo_coverage: (a: number) => number;
    readonly demo_dmin_curve: (a: number, b: number) => [number, number, number, number];
    readonly demo_last_stats: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly demo_render: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly demo_render_prefix: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly demo_surfel_count: (a: number) => number;
    readonly demo_triangle_count: (a: number) => number;
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
