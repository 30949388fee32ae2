//! Known input `u(t)` and unknown disturbance `d(t)` generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Name recorded in trace headers for the disturbance generator.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64";

/// Piecewise-constant table: `values[i]` holds on `[times[i], times[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    times: Vec<f64>,
    values: Vec<Vector>,
}

impl Table {
    pub fn new(times: Vec<f64>, values: Vec<Vector>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Config("table needs one value per breakpoint".into()));
        }
        if times[0] > 0.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config(
                "table breakpoints must start at 0 and increase".into(),
            ));
        }
        let dim = values[0].dim();
        if values.iter().any(|v| v.dim() != dim || !v.is_finite()) {
            return Err(Error::Config(
                "table values must share one finite dimension".into(),
            ));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn at(&self, t: f64) -> &Vector {
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        &self.values[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    Zero,
    /// `u_i(t) = amplitude · sin(frequency · t + phase)` on every channel.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    Table(Table),
}

impl InputSignal {
    pub fn eval(&self, t: f64, dim: usize) -> Vector {
        match self {
            InputSignal::Zero => Vector::zeros(dim),
            InputSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => Vector::filled(dim, amplitude * (frequency * t + phase).sin()),
            InputSignal::Table(table) => table.at(t).clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DisturbanceSignal {
    Zero,
    /// Each component drawn uniformly from `[-bound, bound]` and held for
    /// `hold` seconds; `None` holds for one integration step.
    Uniform {
        bound: f64,
        hold: Option<f64>,
    },
    Table(Table),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub input: InputSignal,
    pub disturbance: DisturbanceSignal,
}

impl SignalSpec {
    pub fn quiet() -> Self {
        Self {
            input: InputSignal::Zero,
            disturbance: DisturbanceSignal::Zero,
        }
    }

    pub fn without_disturbance(&self) -> Self {
        Self {
            input: self.input.clone(),
            disturbance: DisturbanceSignal::Zero,
        }
    }

    pub fn check_dims(&self, input_dim: usize, disturbance_dim: usize) -> Result<()> {
        if let InputSignal::Table(t) = &self.input {
            if t.dim() != input_dim {
                return Err(Error::Dimension {
                    context: "input table",
                    expected: input_dim,
                    found: t.dim(),
                });
            }
        }
        if let DisturbanceSignal::Table(t) = &self.disturbance {
            if t.dim() != disturbance_dim {
                return Err(Error::Dimension {
                    context: "disturbance table",
                    expected: disturbance_dim,
                    found: t.dim(),
                });
            }
        }
        Ok(())
    }
}

/// Produces the disturbance value for each integration step.
#[derive(Debug, Clone)]
pub struct DisturbanceSource {
    signal: DisturbanceSignal,
    dim: usize,
    hold_steps: u64,
    rng: ChaCha8Rng,
    current: Vector,
}

impl DisturbanceSource {
    pub fn new(signal: &DisturbanceSignal, dim: usize, dt: f64, seed: u64) -> Result<Self> {
        let hold_steps = match signal {
            DisturbanceSignal::Uniform { bound, hold } => {
                if !(*bound >= 0.0) || !bound.is_finite() {
                    return Err(Error::Config(
                        "disturbance bound must be finite and nonnegative".into(),
                    ));
                }
                match hold {
                    None => 1,
                    Some(h) => steps_in(*h, dt).ok_or_else(|| {
                        Error::Config(format!(
                            "disturbance hold {h} is not a positive multiple of dt {dt}"
                        ))
                    })?,
                }
            }
            _ => 1,
        };
        Ok(Self {
            signal: signal.clone(),
            dim,
            hold_steps,
            rng: ChaCha8Rng::seed_from_u64(seed),
            current: Vector::zeros(dim),
        })
    }

    /// Value held over step `[step·dt, (step+1)·dt)`. Steps must be
    /// requested in increasing order.
    pub fn value(&mut self, step: u64, t: f64) -> &Vector {
        match &self.signal {
            DisturbanceSignal::Zero => {}
            DisturbanceSignal::Uniform { bound, .. } => {
                if step.is_multiple_of(self.hold_steps) {
                    let b = *bound;
                    let rng = &mut self.rng;
                    self.current = Vector::new(
                        (0..self.dim)
                            .map(|_| if b > 0.0 { rng.gen_range(-b..=b) } else { 0.0 })
                            .collect(),
                    );
                }
            }
            DisturbanceSignal::Table(table) => self.current = table.at(t).clone(),
        }
        &self.current
    }
}

/// `Some(m)` when `span = m · dt` for a positive integer `m`.
pub fn steps_in(span: f64, dt: f64) -> Option<u64> {
    if !(span > 0.0) || !(dt > 0.0) || !span.is_finite() {
        return None;
    }
    let m = (span / dt).round();
    (m >= 1.0 && (m * dt - span).abs() <= 1e-9 * span).then_some(m as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lookup_is_left_continuous() {
        let t = Table::new(
            vec![0.0, 1.0, 2.5],
            vec![
                Vector::from([1.0]),
                Vector::from([2.0]),
                Vector::from([3.0]),
            ],
        )
        .unwrap();
        assert_eq!(t.at(0.0)[0], 1.0);
        assert_eq!(t.at(0.999)[0], 1.0);
        assert_eq!(t.at(1.0)[0], 2.0);
        assert_eq!(t.at(10.0)[0], 3.0);
        assert!(Table::new(
            vec![0.0, 0.0],
            vec![Vector::from([1.0]), Vector::from([1.0])]
        )
        .is_err());
        assert!(Table::new(vec![0.5], vec![Vector::from([1.0])]).is_err());
    }

    #[test]
    fn sinusoid_values() {
        let u = InputSignal::Sinusoid {
            amplitude: 0.5,
            frequency: 1.0,
            phase: 0.0,
        };
        assert_eq!(u.eval(0.0, 1)[0], 0.0);
        assert!((u.eval(1.0, 2)[1] - 0.5 * 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn uniform_disturbance_is_seeded_and_bounded() {
        let sig = DisturbanceSignal::Uniform {
            bound: 0.05,
            hold: None,
        };
        let mut a = DisturbanceSource::new(&sig, 2, 1e-3, 7).unwrap();
        let mut b = DisturbanceSource::new(&sig, 2, 1e-3, 7).unwrap();
        let mut c = DisturbanceSource::new(&sig, 2, 1e-3, 8).unwrap();
        let mut differs = false;
        for s in 0..1000 {
            let t = s as f64 * 1e-3;
            let va = a.value(s, t).clone();
            assert_eq!(&va, b.value(s, t));
            assert!(va.inf_norm() <= 0.05);
            differs |= &va != c.value(s, t);
        }
        assert!(differs);
    }

    #[test]
    fn held_disturbance_changes_on_hold_boundaries() {
        let sig = DisturbanceSignal::Uniform {
            bound: 1.0,
            hold: Some(0.01),
        };
        let mut src = DisturbanceSource::new(&sig, 1, 1e-3, 0).unwrap();
        let first = src.value(0, 0.0).clone();
        for s in 1..10 {
            assert_eq!(src.value(s, s as f64 * 1e-3), &first);
        }
        assert_ne!(src.value(10, 0.01), &first);
        assert!(DisturbanceSource::new(
            &DisturbanceSignal::Uniform {
                bound: 1.0,
                hold: Some(0.0015)
            },
            1,
            1e-3,
            0
        )
        .is_err());
    }

    #[test]
    fn step_counts() {
        assert_eq!(steps_in(0.1, 1e-3), Some(100));
        assert_eq!(steps_in(20.0, 1e-3), Some(20_000));
        assert_eq!(steps_in(0.1005, 1e-3), None);
        assert_eq!(steps_in(0.0, 1e-3), None);
    }
}
