/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_feasibilitycurve_free: (a: number, b: number) => void;
export const __wbg_reachview_free: (a: number, b: number) => void;
export const __wbg_runview_free: (a: number, b: number) => void;
export const feasibility_curve: (a: number, b: number, c: number) => [number, number, number];
export const feasibilitycurve_norm: (a: number) => [number, number];
export const feasibilitycurve_periods: (a: number) => [number, number];
export const feasibilitycurve_set: (a: number) => [number, number];
export const reach_step: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const reachview_cell: (a: number) => [number, number];
export const reachview_hull: (a: number) => [number, number];
export const reachview_polygon: (a: number) => [number, number];
export const runview_center: (a: number) => [number, number];
export const runview_envelope: (a: number) => [number, number];
export const runview_eq_inf: (a: number) => number;
export const runview_eq_norm: (a: number) => [number, number];
export const runview_er_inf: (a: number) => number;
export const runview_er_norm: (a: number) => [number, number];
export const runview_invariants_ok: (a: number) => number;
export const runview_range: (a: number) => [number, number];
export const runview_t: (a: number) => [number, number];
export const runview_tx_t: (a: number) => [number, number];
export const runview_x: (a: number) => [number, number];
export const runview_xr: (a: number) => [number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
