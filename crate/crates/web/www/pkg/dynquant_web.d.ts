/* tslint:disable */
/* eslint-disable */

/**
 * Condition values of both schemes on a grid of periods.
 */
export class FeasibilityCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly norm: Float64Array;
    readonly periods: Float64Array;
    readonly set: Float64Array;
}

/**
 * One interval of the set-based update in the plane: the terminal
 * zonotope and its interval hull.
 */
export class ReachView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Decoded cell as `[cx, cy, hx, hy]`.
     */
    readonly cell: Float64Array;
    /**
     * Next region as `[cx, cy, hx, hy]`.
     */
    readonly hull: Float64Array;
    /**
     * Vertices, interleaved `[x, y, x, y, ...]`, counterclockwise.
     */
    readonly polygon: Float64Array;
}

/**
 * Downsampled trajectories of one closed-loop run.
 */
export class RunView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Active region center, interleaved like `x`.
     */
    readonly center: Float64Array;
    readonly envelope: Float64Array;
    readonly eq_inf: number;
    readonly eq_norm: Float64Array;
    readonly er_inf: number;
    readonly er_norm: Float64Array;
    readonly invariants_ok: boolean;
    /**
     * Active region half-widths, interleaved like `x`.
     */
    readonly range: Float64Array;
    readonly t: Float64Array;
    readonly tx_t: Float64Array;
    /**
     * Plant state, interleaved `[x1, x2, x1, x2, ...]`.
     */
    readonly x: Float64Array;
    /**
     * Remote reconstruction, interleaved like `x`.
     */
    readonly xr: Float64Array;
}

/**
 * Condition values `ρ(Λ̄/N)` and `e^{|A|T}/N` for `T` in `(0, t_max]`.
 */
export function feasibility_curve(levels: number, t_max: number, points: number): FeasibilityCurve;

/**
 * Image of a decoded cell of the reference plant after one period.
 */
export function reach_step(px: number, py: number, range: number, levels: number, period: number, beta: number): ReachView;

/**
 * Runs the reference plant with the given channel settings.
 */
export function simulate(scheme: string, levels: number, period: number, horizon: number, seed: number, half_span: boolean, stride: number): RunView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_feasibilitycurve_free: (a: number, b: number) => void;
    readonly __wbg_reachview_free: (a: number, b: number) => void;
    readonly __wbg_runview_free: (a: number, b: number) => void;
    readonly feasibility_curve: (a: number, b: number, c: number) => [number, number, number];
    readonly feasibilitycurve_norm: (a: number) => [number, number];
    readonly feasibilitycurve_periods: (a: number) => [number, number];
    readonly feasibilitycurve_set: (a: number) => [number, number];
    readonly reach_step: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly reachview_cell: (a: number) => [number, number];
    readonly reachview_hull: (a: number) => [number, number];
    readonly reachview_polygon: (a: number) => [number, number];
    readonly runview_center: (a: number) => [number, number];
    readonly runview_envelope: (a: number) => [number, number];
    readonly runview_eq_inf: (a: number) => number;
    readonly runview_eq_norm: (a: number) => [number, number];
    readonly runview_er_inf: (a: number) => number;
    readonly runview_er_norm: (a: number) => [number, number];
    readonly runview_invariants_ok: (a: number) => number;
    readonly runview_range: (a: number) => [number, number];
    readonly runview_t: (a: number) => [number, number];
    readonly runview_tx_t: (a: number) => [number, number];
    readonly runview_x: (a: number) => [number, number];
    readonly runview_xr: (a: number) => [number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
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
