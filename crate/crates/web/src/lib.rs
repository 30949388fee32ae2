//! Browser bindings for the dynamic quantization demo.
//!
//! Every export has a plain Rust counterpart so the logic can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use dynquant::config::ExperimentConfig;
use dynquant::numerics::Vector;
use dynquant::quantizer::{DecodedPacket, DecoderGeometry, QuantizerConfig, QuantizerState};
use dynquant::schemes::{
    feasibility_norm, feasibility_set, set_based_terminal_zonotope, SchemeKind, TransitionMaps,
};
use dynquant::sets::interval_hull;
use dynquant::sim::{
    check_invariants, run_closed_loop, steady_state_metrics, RunOptions, DEFAULT_TAIL_FRACTION,
};
use wasm_bindgen::prelude::*;

/// Condition values of both schemes on a grid of periods.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct FeasibilityCurve {
    periods: Vec<f64>,
    set: Vec<f64>,
    norm: Vec<f64>,
}

#[wasm_bindgen]
impl FeasibilityCurve {
    #[wasm_bindgen(getter)]
    pub fn periods(&self) -> Vec<f64> {
        self.periods.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn set(&self) -> Vec<f64> {
        self.set.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn norm(&self) -> Vec<f64> {
        self.norm.clone()
    }
}

pub fn feasibility_curve_impl(
    levels: u32,
    t_max: f64,
    points: usize,
) -> dynquant::Result<FeasibilityCurve> {
    let a = ExperimentConfig::reference().experiment.plant.a;
    let points = points.max(2);
    let mut curve = FeasibilityCurve {
        periods: Vec::with_capacity(points),
        set: Vec::with_capacity(points),
        norm: Vec::with_capacity(points),
    };
    for i in 1..=points {
        let t = t_max * i as f64 / points as f64;
        curve.periods.push(t);
        curve.set.push(feasibility_set(&a, t, levels)?.lhs);
        curve.norm.push(feasibility_norm(&a, t, levels)?.lhs);
    }
    Ok(curve)
}

/// Downsampled trajectories of one closed-loop run.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct RunView {
    t: Vec<f64>,
    x: Vec<f64>,
    xr: Vec<f64>,
    center: Vec<f64>,
    range: Vec<f64>,
    er_norm: Vec<f64>,
    envelope: Vec<f64>,
    tx_t: Vec<f64>,
    eq_norm: Vec<f64>,
    eq_inf: f64,
    er_inf: f64,
    invariants_ok: bool,
}

#[wasm_bindgen]
impl RunView {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    /// Plant state, interleaved `[x1, x2, x1, x2, ...]`.
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    /// Remote reconstruction, interleaved like `x`.
    #[wasm_bindgen(getter)]
    pub fn xr(&self) -> Vec<f64> {
        self.xr.clone()
    }

    /// Active region center, interleaved like `x`.
    #[wasm_bindgen(getter)]
    pub fn center(&self) -> Vec<f64> {
        self.center.clone()
    }

    /// Active region half-widths, interleaved like `x`.
    #[wasm_bindgen(getter)]
    pub fn range(&self) -> Vec<f64> {
        self.range.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn er_norm(&self) -> Vec<f64> {
        self.er_norm.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn envelope(&self) -> Vec<f64> {
        self.envelope.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn tx_t(&self) -> Vec<f64> {
        self.tx_t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn eq_norm(&self) -> Vec<f64> {
        self.eq_norm.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn eq_inf(&self) -> f64 {
        self.eq_inf
    }

    #[wasm_bindgen(getter)]
    pub fn er_inf(&self) -> f64 {
        self.er_inf
    }

    #[wasm_bindgen(getter)]
    pub fn invariants_ok(&self) -> bool {
        self.invariants_ok
    }
}

fn parse_scheme(s: &str) -> dynquant::Result<SchemeKind> {
    s.parse()
}

pub fn simulate_impl(
    scheme: &str,
    levels: u32,
    period: f64,
    horizon: f64,
    seed: u32,
    half_span: bool,
    stride: usize,
) -> dynquant::Result<RunView> {
    let cfg = ExperimentConfig::reference();
    let mut exp = cfg.experiment;
    exp.period = period;
    exp.quantizer = QuantizerConfig::from_levels(exp.plant.state_dim(), levels)?;
    let mut opts = RunOptions::new(parse_scheme(scheme)?, horizon, cfg.dt, seed as u64);
    if half_span {
        opts.decoder = DecoderGeometry::HalfSpan;
    }
    let trace = run_closed_loop(&exp, &cfg.signals, &opts)?;
    let metrics = steady_state_metrics(&trace, DEFAULT_TAIL_FRACTION)?;

    let stride = stride.max(1);
    let kept = trace.samples.iter().step_by(stride);
    let mut view = RunView {
        t: Vec::new(),
        x: Vec::new(),
        xr: Vec::new(),
        center: Vec::new(),
        range: Vec::new(),
        er_norm: Vec::new(),
        envelope: Vec::new(),
        tx_t: Vec::new(),
        eq_norm: Vec::new(),
        eq_inf: metrics.eq_inf,
        er_inf: metrics.er_inf,
        invariants_ok: check_invariants(&trace).ok(),
    };
    for s in kept {
        view.t.push(s.t);
        view.x.extend_from_slice(&s.x);
        view.xr.extend_from_slice(&s.xr);
        view.center.extend_from_slice(&s.center);
        view.range.extend_from_slice(&s.range);
        view.er_norm.push(s.er_norm);
        view.envelope.push(s.thm1_envelope);
    }
    for tx in trace.transmissions.iter().filter(|tx| tx.k >= 1) {
        view.tx_t.push(tx.t);
        view.eq_norm.push(tx.eq.inf_norm());
    }
    Ok(view)
}

/// One interval of the set-based update in the plane: the terminal
/// zonotope and its interval hull.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct ReachView {
    polygon: Vec<f64>,
    cell: Vec<f64>,
    hull: Vec<f64>,
}

#[wasm_bindgen]
impl ReachView {
    /// Vertices, interleaved `[x, y, x, y, ...]`, counterclockwise.
    #[wasm_bindgen(getter)]
    pub fn polygon(&self) -> Vec<f64> {
        self.polygon.clone()
    }

    /// Decoded cell as `[cx, cy, hx, hy]`.
    #[wasm_bindgen(getter)]
    pub fn cell(&self) -> Vec<f64> {
        self.cell.clone()
    }

    /// Next region as `[cx, cy, hx, hy]`.
    #[wasm_bindgen(getter)]
    pub fn hull(&self) -> Vec<f64> {
        self.hull.clone()
    }
}

pub fn reach_step_impl(
    px: f64,
    py: f64,
    range: f64,
    levels: u32,
    period: f64,
    beta: f64,
) -> dynquant::Result<ReachView> {
    let a = ExperimentConfig::reference().experiment.plant.a;
    let maps = TransitionMaps::new(&a, period)?;
    let qs = QuantizerState::new(Vector::from([px, py]), Vector::from([range, range]), 0)?;
    let pd = DecodedPacket {
        value: Vector::from([px, py]),
        k: 0,
    };
    let zono = set_based_terminal_zonotope(&qs, &pd, &maps.lambda, beta, levels)?;
    let hull = interval_hull(&zono);
    let cell = qs.max_error(levels);
    Ok(ReachView {
        polygon: zono.polygon_2d()?.into_iter().flatten().collect(),
        cell: vec![px, py, cell[0], cell[1]],
        hull: vec![
            hull.center()[0],
            hull.center()[1],
            hull.half_widths()[0],
            hull.half_widths()[1],
        ],
    })
}

fn js_err(e: dynquant::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Condition values `ρ(Λ̄/N)` and `e^{|A|T}/N` for `T` in `(0, t_max]`.
#[wasm_bindgen]
pub fn feasibility_curve(
    levels: u32,
    t_max: f64,
    points: usize,
) -> Result<FeasibilityCurve, JsError> {
    feasibility_curve_impl(levels, t_max, points).map_err(js_err)
}

/// Runs the reference plant with the given channel settings.
#[wasm_bindgen]
pub fn simulate(
    scheme: &str,
    levels: u32,
    period: f64,
    horizon: f64,
    seed: u32,
    half_span: bool,
    stride: usize,
) -> Result<RunView, JsError> {
    simulate_impl(scheme, levels, period, horizon, seed, half_span, stride).map_err(js_err)
}

/// Image of a decoded cell of the reference plant after one period.
#[wasm_bindgen]
pub fn reach_step(
    px: f64,
    py: f64,
    range: f64,
    levels: u32,
    period: f64,
    beta: f64,
) -> Result<ReachView, JsError> {
    reach_step_impl(px, py, range, levels, period, beta).map_err(js_err)
}
