//! Closed-loop run: plant, local observer, channel and remote
//! reconstructor on a fixed RK4 grid.
//!
//! Transmission `k` happens at `t_k = kT`. Step `k = 0` only initializes:
//! `P_d^0 = x_c` and the region is `H(x_c, x_b 1)`. From `k = 1` on the
//! observer estimate is encoded under the current region, decoded, and the
//! reconstructor is reset to the decoded value. After every transmission
//! the region is moved forward one interval; the region logged on a
//! sample in `[t_k, t_{k+1})` is that post-update region `S_Q^{k+1}`.

use crate::error::{Error, Result};
use crate::numerics::{rk4_step, Matrix, Vector};
use crate::observer::{derive_gains, make_bound_functions, ObserverCertificate};
use crate::plant::{BoundsConfig, PlantModel};
use crate::quantizer::{
    decode_with, encode, max_qerror_step, DecodedPacket, DecoderGeometry, EncodedPacket,
    QuantizerConfig, QuantizerState,
};
use crate::reachability::{InflationSchedule, ZeroNormPolicy};
use crate::schemes::{
    feasibility, norm_based_update, set_based_update, SchemeKind, TransitionMaps,
};
use crate::sets::CONTAINMENT_TOL;
use crate::signals::{steps_in, DisturbanceSignal, DisturbanceSource, SignalSpec, RNG_ALGORITHM};

/// Everything fixed across runs of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub plant: PlantModel,
    pub bounds: BoundsConfig,
    pub cert: ObserverCertificate,
    pub quantizer: QuantizerConfig,
    pub period: f64,
    /// True initial plant state; the observer starts at `x_c`.
    pub x0: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub scheme: SchemeKind,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    pub decoder: DecoderGeometry,
    pub policy: ZeroNormPolicy,
}

impl RunOptions {
    pub fn new(scheme: SchemeKind, horizon: f64, dt: f64, seed: u64) -> Self {
        Self {
            scheme,
            horizon,
            dt,
            seed,
            decoder: DecoderGeometry::Centroid,
            policy: ZeroNormPolicy::Reject,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub scheme: SchemeKind,
    pub state_dim: usize,
    pub levels: u32,
    pub period: f64,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub rng: &'static str,
    pub decoder: DecoderGeometry,
    pub disturbance: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vector,
    pub xhat: Vector,
    pub xr: Vector,
    pub u: Vector,
    pub d: Vector,
    /// Active region `S_Q^{k+1}`.
    pub center: Vector,
    pub range: Vector,
    /// `x̂(t) - P_d^k`
    pub eq: Vector,
    /// `ē_q^k`
    pub eqbar: Vector,
    pub ehat_norm: f64,
    pub er_norm: f64,
    pub beta_d: f64,
    pub thm1_envelope: f64,
    pub tx: bool,
    /// Latest transmission index.
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub k: u64,
    pub t: f64,
    /// `None` at `k = 0`.
    pub packet: Option<EncodedPacket>,
    /// `P_d^k`
    pub decoded: Vector,
    /// Region `S_Q^k` the packet was encoded in.
    pub center: Vector,
    pub range: Vector,
    /// `x̂(t_k) - P_d^k`
    pub eq: Vector,
    pub eqbar: Vector,
    pub beta_ue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub meta: TraceMeta,
    pub samples: Vec<Sample>,
    pub transmissions: Vec<Transmission>,
}

struct Dynamics<'a> {
    plant: &'a PlantModel,
    k: &'a Matrix,
    kr: &'a Matrix,
    n: usize,
}

impl Dynamics<'_> {
    fn field(&self, z: &Vector, u: &Vector, d: &Vector, h_pd: &Vector) -> Vector {
        let n = self.n;
        let p = self.plant;
        let x = Vector::from(&z[..n]);
        let xh = Vector::from(&z[n..2 * n]);
        let xr = Vector::from(&z[2 * n..]);
        let bu = &p.b * u;
        let y = &p.h * &x;
        let dx = &(&(&p.a * &x) + &bu) + &(&p.e * d);
        let dxh = &(&(&p.a * &xh) + &bu) + &(self.k * &(&(&p.h * &xh) - &y));
        let dxr = &(&p.a * &xr) + &(self.kr * &(&(&p.h * &xr) - h_pd));
        let mut out = dx.into_inner();
        out.extend_from_slice(&dxh);
        out.extend_from_slice(&dxr);
        Vector::new(out)
    }
}

fn split(z: &Vector, n: usize) -> (Vector, Vector, Vector) {
    (
        Vector::from(&z[..n]),
        Vector::from(&z[n..2 * n]),
        Vector::from(&z[2 * n..]),
    )
}

fn check_signal(t: f64, what: &'static str, value: f64, bound: f64) -> Result<()> {
    if value > bound + 1e-12 * bound.max(1.0) {
        return Err(Error::SignalBound {
            t,
            what,
            value,
            bound,
        });
    }
    Ok(())
}

/// Integrates one run and records every sample and transmission.
pub fn run_closed_loop(
    exp: &Experiment,
    signals: &SignalSpec,
    opts: &RunOptions,
) -> Result<SimTrace> {
    let plant = &exp.plant;
    let bounds = &exp.bounds;
    let n = plant.state_dim();
    for (context, dim) in [("initial state", exp.x0.dim()), ("x_c", bounds.x_c.dim())] {
        if dim != n {
            return Err(Error::Dimension {
                context,
                expected: n,
                found: dim,
            });
        }
    }
    if exp.quantizer.state_dim() != n {
        return Err(Error::Dimension {
            context: "quantizer",
            expected: n,
            found: exp.quantizer.state_dim(),
        });
    }
    signals.check_dims(plant.input_dim(), plant.disturbance_dim())?;
    let total_steps = steps_in(opts.horizon, opts.dt).ok_or_else(|| {
        Error::Config(format!(
            "horizon {} is not a multiple of dt {}",
            opts.horizon, opts.dt
        ))
    })?;
    let per = steps_in(exp.period, opts.dt).ok_or_else(|| {
        Error::Config(format!(
            "period {} is not a multiple of dt {}",
            exp.period, opts.dt
        ))
    })?;
    let levels = exp.quantizer.levels();
    let report = feasibility(opts.scheme, &plant.a, exp.period, levels)?;
    if !report.feasible {
        return Err(Error::Infeasible {
            scheme: opts.scheme.short_name(),
            lhs: report.lhs,
        });
    }

    let gains = derive_gains(&exp.cert, plant)?;
    let bf = make_bound_functions(&exp.cert, &gains, plant, bounds)?;
    let schedule =
        InflationSchedule::new(plant, &gains, bounds, bf.clone(), exp.period, opts.policy)?;
    let maps = TransitionMaps::new(&plant.a, exp.period)?;
    let dynamics = Dynamics {
        plant,
        k: &gains.k,
        kr: &gains.kr,
        n,
    };
    let mut disturbance = DisturbanceSource::new(
        &signals.disturbance,
        plant.disturbance_dim(),
        opts.dt,
        opts.seed,
    )?;

    let mut region = QuantizerState::new(bounds.x_c.clone(), Vector::filled(n, bounds.x_b), 0)?;
    let mut eqbar_next = region.max_error(levels);
    let mut pd = bounds.x_c.clone();
    let mut h_pd = &plant.h * &pd;
    let mut z = {
        let mut v = exp.x0.clone().into_inner();
        v.extend_from_slice(&bounds.x_c);
        v.extend_from_slice(&bounds.x_c);
        Vector::new(v)
    };

    let mut samples = Vec::with_capacity(total_steps as usize + 1);
    let mut transmissions = Vec::with_capacity((total_steps / per) as usize + 1);
    let mut eqbar = eqbar_next.clone();
    let mut t_k = 0.0;
    let mut er_tk = 0.0;
    let mut sup = Suprema::default();
    let mut k = 0u64;

    for step in 0..=total_steps {
        let t = step as f64 * opts.dt;
        let tx = step % per == 0;
        if tx {
            k = step / per;
            let (x, xhat, _) = split(&z, n);
            let packet = if k == 0 {
                None
            } else {
                let pkt = encode(&xhat, &region, levels)?;
                pd = decode_with(&pkt, &region, levels, opts.decoder)?.value;
                h_pd = &plant.h * &pd;
                z[2 * n..].copy_from_slice(&pd);
                Some(pkt)
            };
            eqbar = eqbar_next.clone();
            let beta_ue = schedule.beta_ue(k)?;
            transmissions.push(Transmission {
                k,
                t,
                packet,
                decoded: pd.clone(),
                center: region.center.clone(),
                range: region.range.clone(),
                eq: &xhat - &pd,
                eqbar: eqbar.clone(),
                beta_ue,
            });
            let decoded = DecodedPacket {
                value: pd.clone(),
                k,
            };
            region = match opts.scheme {
                SchemeKind::SetBased => {
                    eqbar_next = max_qerror_step(&eqbar, &maps.lambda_bar, beta_ue, levels)?;
                    set_based_update(
                        &region,
                        &decoded,
                        &maps.lambda,
                        &maps.lambda_bar,
                        beta_ue,
                        levels,
                    )?
                }
                SchemeKind::NormBased => {
                    let next = norm_based_update(
                        &region,
                        &decoded,
                        &maps.lambda,
                        maps.a_norm,
                        exp.period,
                        beta_ue,
                        levels,
                    )?;
                    eqbar_next = next.max_error(levels);
                    next
                }
            };
            t_k = t;
            er_tk = (&x - &pd).inf_norm();
            sup = Suprema::default();
        }

        let (x, xhat, xr) = split(&z, n);
        let u = signals.input.eval(t, plant.input_dim());
        let d = disturbance.value(step, t).clone();
        check_signal(t, "|Bu|", (&plant.b * &u).inf_norm(), bounds.u_b)?;
        check_signal(t, "|Ed|", (&plant.e * &d).inf_norm(), bounds.d_b)?;
        let ehat = &x - &xhat;
        let eq = &xhat - &pd;
        sup.absorb(u.inf_norm(), d.inf_norm(), ehat.inf_norm(), eq.inf_norm());
        let thm1_envelope =
            bf.reconstruction_error_envelope(er_tk, t - t_k, sup.u, sup.d, sup.ehat, sup.eq);
        samples.push(Sample {
            t,
            ehat_norm: ehat.inf_norm(),
            er_norm: (&x - &xr).inf_norm(),
            beta_d: bf.local_error_envelope(t),
            thm1_envelope,
            x,
            xhat,
            xr,
            center: region.center.clone(),
            range: region.range.clone(),
            eq,
            eqbar: eqbar.clone(),
            u,
            d: d.clone(),
            tx,
            k,
        });

        if step < total_steps {
            let input = &signals.input;
            let m = plant.input_dim();
            let hp = &h_pd;
            z = rk4_step(
                |s, zz| dynamics.field(zz, &input.eval(s, m), &d, hp),
                t,
                &z,
                opts.dt,
            )?;
        }
    }

    Ok(SimTrace {
        meta: TraceMeta {
            scheme: opts.scheme,
            state_dim: n,
            levels,
            period: exp.period,
            dt: opts.dt,
            horizon: opts.horizon,
            seed: opts.seed,
            rng: RNG_ALGORITHM,
            decoder: opts.decoder,
            disturbance: match signals.disturbance {
                DisturbanceSignal::Zero => "zero",
                DisturbanceSignal::Uniform { .. } => "uniform",
                DisturbanceSignal::Table(_) => "table",
            },
        },
        samples,
        transmissions,
    })
}

#[derive(Debug, Default, Clone, Copy)]
struct Suprema {
    u: f64,
    d: f64,
    ehat: f64,
    eq: f64,
}

impl Suprema {
    fn absorb(&mut self, u: f64, d: f64, ehat: f64, eq: f64) {
        self.u = self.u.max(u);
        self.d = self.d.max(d);
        self.ehat = self.ehat.max(ehat);
        self.eq = self.eq.max(eq);
    }
}

/// Count and worst excess of one invariant over a trace.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Violations {
    pub checked: usize,
    pub count: usize,
    /// Largest `lhs - bound` seen, negative when every check held.
    pub worst_excess: f64,
}

impl Violations {
    fn new() -> Self {
        Self {
            checked: 0,
            count: 0,
            worst_excess: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, excess: f64, tol: f64) {
        self.checked += 1;
        if excess > tol {
            self.count += 1;
        }
        self.worst_excess = self.worst_excess.max(excess);
    }

    pub fn ok(&self) -> bool {
        self.count == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    /// `x̂(t) ∈ S_Q^{k+1}` on `[t_k, t_{k+1})`.
    pub containment: Violations,
    /// `|ê(t)| ≤ β_d(t)`.
    pub local_error: Violations,
    /// `|e_q^k| ≤ ē_q^k` per axis.
    pub quantization_error: Violations,
    /// `|e_r(t)|` within the reconstruction envelope.
    pub reconstruction_error: Violations,
}

impl InvariantReport {
    pub fn ok(&self) -> bool {
        self.containment.ok()
            && self.local_error.ok()
            && self.quantization_error.ok()
            && self.reconstruction_error.ok()
    }
}

pub fn check_invariants(trace: &SimTrace) -> InvariantReport {
    let mut containment = Violations::new();
    let mut local_error = Violations::new();
    let mut quantization_error = Violations::new();
    let mut reconstruction_error = Violations::new();
    for s in &trace.samples {
        let excess = s
            .xhat
            .iter()
            .zip(s.center.iter().zip(s.range.iter()))
            .map(|(x, (c, l))| (x - c).abs() - l)
            .fold(f64::NEG_INFINITY, f64::max);
        containment.record(excess, CONTAINMENT_TOL);
        local_error.record(s.ehat_norm - s.beta_d, 1e-12);
        reconstruction_error.record(s.er_norm - s.thm1_envelope, 1e-12);
    }
    for tx in &trace.transmissions {
        let excess = tx
            .eq
            .iter()
            .zip(tx.eqbar.iter())
            .map(|(e, b)| e.abs() - b)
            .fold(f64::NEG_INFINITY, f64::max);
        quantization_error.record(excess, 1e-12);
    }
    InvariantReport {
        containment,
        local_error,
        quantization_error,
        reconstruction_error,
    }
}

/// Fraction of the trace treated as steady state.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Max of `|e_q^k|` over the tail transmissions.
    pub eq_inf: f64,
    /// Max of `|e_r(t)|` over the tail samples.
    pub er_inf: f64,
    pub eq_tail_mean: f64,
    pub er_tail_mean: f64,
}

/// Tail statistics over transmissions `k ≥ 1` and all samples.
pub fn steady_state_metrics(trace: &SimTrace, tail_fraction: f64) -> Result<SteadyState> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument("tail fraction must lie in (0, 1]"));
    }
    let eqs: Vec<f64> = trace
        .transmissions
        .iter()
        .filter(|t| t.k >= 1)
        .map(|t| t.eq.inf_norm())
        .collect();
    if eqs.len() < 8 {
        return Err(Error::TraceTooShort {
            have: eqs.len(),
            need: 8,
        });
    }
    let ers: Vec<f64> = trace.samples.iter().map(|s| s.er_norm).collect();
    let tail = |v: &[f64]| -> (f64, f64) {
        let count = ((v.len() as f64 * tail_fraction).ceil() as usize).clamp(1, v.len());
        let slice = &v[v.len() - count..];
        let max = slice.iter().copied().fold(0.0, f64::max);
        (max, slice.iter().sum::<f64>() / count as f64)
    };
    let (eq_inf, eq_tail_mean) = tail(&eqs);
    let (er_inf, er_tail_mean) = tail(&ers);
    Ok(SteadyState {
        eq_inf,
        er_inf,
        eq_tail_mean,
        er_tail_mean,
    })
}
