//! Terminal reachable-set over-approximation for `ẋ = Ax + w`, `|w| ≤ μ`,
//! over one inter-transmission interval, and the input inflation radii the
//! quantization schemes are built from.

use crate::error::{Error, Result};
use crate::numerics::{induced_inf_norm, mat_exp, Matrix, Vector};
use crate::observer::{BoundFunctions, ObserverGains};
use crate::plant::{BoundsConfig, PlantModel};
use crate::sets::{hyperrect_to_zonotope, linear_map, minkowski_sum, Hyperrectangle, Zonotope};

/// What to do when `|A| = 0`, where the inflation formula divides by zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroNormPolicy {
    /// Return [`Error::DegenerateDynamics`].
    #[default]
    Reject,
    /// Use the `|A| → 0` limit of the integral bound, `T·μ`.
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachParams {
    pub a: Matrix,
    /// Interval length `T > 0`.
    pub period: f64,
    /// `μ = sup |Bu|`.
    pub mu: f64,
}

impl ReachParams {
    pub fn new(a: Matrix, period: f64, mu: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidArgument("interval length must be positive"));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument("input bound must be nonnegative"));
        }
        Ok(Self { a, period, mu })
    }
}

/// `|A|⁻¹ e^{T|A|} c` with the zero-norm policy applied.
fn inflate(a_norm: f64, period: f64, drive: f64, policy: ZeroNormPolicy) -> Result<f64> {
    if drive == 0.0 {
        return Ok(0.0);
    }
    if a_norm == 0.0 {
        return match policy {
            ZeroNormPolicy::Reject => Err(Error::DegenerateDynamics),
            ZeroNormPolicy::Limit => Ok(period * drive),
        };
    }
    Ok((a_norm * period).exp() / a_norm * drive)
}

/// `β(T, μ) = |A|⁻¹ e^{T|A|} μ`.
pub fn beta_inflation(params: &ReachParams, policy: ZeroNormPolicy) -> Result<f64> {
    inflate(
        induced_inf_norm(&params.a),
        params.period,
        params.mu,
        policy,
    )
}

/// `e^{AT} X₀ ⊕ B(0, β(T, μ))`.
pub fn terminal_reach_overapprox(
    params: &ReachParams,
    initial: &Zonotope,
    policy: ZeroNormPolicy,
) -> Result<Zonotope> {
    let n = params.a.rows();
    if initial.dim() != n {
        return Err(Error::Dimension {
            context: "initial set",
            expected: n,
            found: initial.dim(),
        });
    }
    let flow = mat_exp(&params.a, params.period)?;
    let beta = beta_inflation(params, policy)?;
    let ball = Hyperrectangle::cube(Vector::zeros(n), beta)?;
    minkowski_sum(&linear_map(&flow, initial)?, &hyperrect_to_zonotope(&ball))
}

/// `β_ue = |A|⁻¹ e^{|A|T} (u_b + |KH| β_d(t_k))`.
pub fn beta_ue(
    a_norm: f64,
    period: f64,
    u_b: f64,
    kh_norm: f64,
    beta_d_at_tk: f64,
    policy: ZeroNormPolicy,
) -> Result<f64> {
    if u_b < 0.0 || kh_norm < 0.0 || beta_d_at_tk < 0.0 {
        return Err(Error::InvalidArgument(
            "inflation arguments must be nonnegative",
        ));
    }
    inflate(a_norm, period, u_b + kh_norm * beta_d_at_tk, policy)
}

/// Radius of the ball containing the local estimation error at time `t`.
/// Delegates to [`BoundFunctions::local_error_envelope`].
pub fn beta_d(bounds: &BoundFunctions, t: f64) -> f64 {
    bounds.local_error_envelope(t)
}

/// The per-step inflation radii `β_ue^k` for one plant/observer/period.
#[derive(Debug, Clone, PartialEq)]
pub struct InflationSchedule {
    pub a_norm: f64,
    pub kh_norm: f64,
    pub period: f64,
    pub u_b: f64,
    pub bounds: BoundFunctions,
    pub policy: ZeroNormPolicy,
}

impl InflationSchedule {
    pub fn new(
        plant: &PlantModel,
        gains: &ObserverGains,
        limits: &BoundsConfig,
        bounds: BoundFunctions,
        period: f64,
        policy: ZeroNormPolicy,
    ) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::InvalidArgument("interval length must be positive"));
        }
        Ok(Self {
            a_norm: induced_inf_norm(&plant.a),
            kh_norm: induced_inf_norm(&gains.k.try_mul(&plant.h)?),
            period,
            u_b: limits.u_b,
            bounds,
            policy,
        })
    }

    /// `β_ue^k`, using `β_d(kT)`.
    pub fn beta_ue(&self, k: u64) -> Result<f64> {
        let t = k as f64 * self.period;
        beta_ue(
            self.a_norm,
            self.period,
            self.u_b,
            self.kh_norm,
            beta_d(&self.bounds, t),
            self.policy,
        )
    }

    /// `lim_{k→∞} β_ue^k = |A|⁻¹ e^{|A|T} (u_b + |KH| γ̂(d_b))`.
    pub fn beta_ue_limit(&self) -> Result<f64> {
        beta_ue(
            self.a_norm,
            self.period,
            self.u_b,
            self.kh_norm,
            self.bounds.gamma_hat(self.bounds.d_b),
            self.policy,
        )
    }

    /// `|A|⁻¹ (e^{|A|T} - 1)(u_b + |KH| (β̂(x_b, 0) + γ̂(d_b)))`: the
    /// tighter uniform bound with the `-1`. Diagnostic only; the update
    /// laws use [`Self::beta_ue`].
    pub fn beta_ue_bar(&self) -> f64 {
        let drive = self.u_b + self.kh_norm * beta_d(&self.bounds, 0.0);
        if self.a_norm == 0.0 {
            return self.period * drive;
        }
        (self.a_norm * self.period).exp_m1() / self.a_norm * drive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rk4_step;
    use crate::observer::{derive_gains, make_bound_functions, ObserverCertificate};
    use crate::sets::interval_hull;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_a() -> Matrix {
        Matrix::from_rows(&[vec![-1.0, -4.0], vec![4.0, -1.0]]).unwrap()
    }

    #[test]
    fn inflation_examples() {
        let p = ReachParams::new(reference_a(), 0.1, 0.0).unwrap();
        assert_eq!(beta_inflation(&p, ZeroNormPolicy::Reject).unwrap(), 0.0);
        let p1 = ReachParams::new(reference_a(), 0.1, 1.0).unwrap();
        let b1 = beta_inflation(&p1, ZeroNormPolicy::Reject).unwrap();
        assert!((b1 - 0.5f64.exp() / 5.0).abs() < 1e-15);
        assert!((b1 - 0.32974).abs() < 1e-5);
        let p2 = ReachParams::new(reference_a(), 0.1, 2.0).unwrap();
        assert!((beta_inflation(&p2, ZeroNormPolicy::Reject).unwrap() - 2.0 * b1).abs() < 1e-15);
    }

    #[test]
    fn zero_norm_policy() {
        let p = ReachParams::new(Matrix::zeros(2, 2), 0.3, 2.0).unwrap();
        assert!(matches!(
            beta_inflation(&p, ZeroNormPolicy::Reject),
            Err(Error::DegenerateDynamics)
        ));
        assert!((beta_inflation(&p, ZeroNormPolicy::Limit).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn inflation_is_monotone() {
        let mut prev = 0.0;
        for i in 1..20 {
            let p = ReachParams::new(reference_a(), 0.05 * i as f64, 0.5).unwrap();
            let b = beta_inflation(&p, ZeroNormPolicy::Reject).unwrap();
            assert!(b > prev);
            prev = b;
        }
        let lo = ReachParams::new(reference_a(), 0.1, 0.4).unwrap();
        let hi = ReachParams::new(reference_a(), 0.1, 0.41).unwrap();
        assert!(
            beta_inflation(&hi, ZeroNormPolicy::Reject).unwrap()
                > beta_inflation(&lo, ZeroNormPolicy::Reject).unwrap()
        );
    }

    #[test]
    fn reach_identity_and_singleton() {
        let x0 = Zonotope::new(Vector::from([1.0, 2.0]), vec![Vector::from([0.5, 0.5])]).unwrap();
        let p = ReachParams::new(Matrix::zeros(2, 2), 1.0, 0.0).unwrap();
        assert_eq!(
            terminal_reach_overapprox(&p, &x0, ZeroNormPolicy::Reject).unwrap(),
            x0
        );

        let single = Zonotope::singleton(Vector::from([10.0, -5.0]));
        let p = ReachParams::new(reference_a(), 0.1, 0.0).unwrap();
        let r = terminal_reach_overapprox(&p, &single, ZeroNormPolicy::Reject).unwrap();
        assert_eq!(r.order(), 0);
        let expected = &mat_exp(&reference_a(), 0.1).unwrap() * &Vector::from([10.0, -5.0]);
        assert_eq!(r.center(), &expected);
    }

    #[test]
    fn reach_reference_composition() {
        let x0 = Zonotope::new(
            Vector::from([10.0, -5.0]),
            vec![Vector::from([1.0, 0.0]), Vector::from([0.0, 1.0])],
        )
        .unwrap();
        let p = ReachParams::new(reference_a(), 0.1, 0.5).unwrap();
        let r = terminal_reach_overapprox(&p, &x0, ZeroNormPolicy::Reject).unwrap();
        let lam = mat_exp(&reference_a(), 0.1).unwrap();
        let beta = 0.5 * 0.5f64.exp() / 5.0;
        assert_eq!(r.order(), 4);
        assert_eq!(r.center(), &(&lam * &Vector::from([10.0, -5.0])));
        assert_eq!(r.generators()[0], lam.col(0));
        assert_eq!(r.generators()[1], lam.col(1));
        assert!((r.generators()[2][0] - beta).abs() < 1e-15);
        assert!((r.generators()[3][1] - beta).abs() < 1e-15);
        assert!(terminal_reach_overapprox(
            &p,
            &Zonotope::singleton(Vector::zeros(3)),
            ZeroNormPolicy::Reject
        )
        .is_err());
    }

    #[test]
    fn sampled_trajectories_stay_in_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..=3);
            let a = Matrix::from_row_major(
                n,
                n,
                (0..n * n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            )
            .unwrap();
            let period = rng.gen_range(0.05..1.0);
            let mu = rng.gen_range(0.1..1.0);
            let center: Vector = (0..n)
                .map(|_| rng.gen_range(-3.0..3.0))
                .collect::<Vec<_>>()
                .into();
            let widths: Vector = (0..n)
                .map(|_| rng.gen_range(0.0..1.0))
                .collect::<Vec<_>>()
                .into();
            let x0 = Hyperrectangle::new(center, widths).unwrap();
            let params = ReachParams::new(a.clone(), period, mu).unwrap();
            let hull = interval_hull(
                &terminal_reach_overapprox(
                    &params,
                    &hyperrect_to_zonotope(&x0),
                    ZeroNormPolicy::Reject,
                )
                .unwrap(),
            );
            for _ in 0..10 {
                let mut z: Vector = (0..n)
                    .map(|i| x0.center()[i] + rng.gen_range(-1.0..=1.0) * x0.half_widths()[i])
                    .collect::<Vec<_>>()
                    .into();
                let w: Vector = (0..n)
                    .map(|_| rng.gen_range(-mu..=mu))
                    .collect::<Vec<_>>()
                    .into();
                let h = period / 100.0;
                for s in 0..100 {
                    z = rk4_step(|_, x| (&a * x).axpy(1.0, &w), s as f64 * h, &z, h).unwrap();
                }
                assert!(hull.contains(&z).unwrap());
            }
        }
    }

    fn reference_schedule() -> InflationSchedule {
        let plant = PlantModel::new(
            reference_a(),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let cert = ObserverCertificate::new(
            Matrix::from_rows(&[vec![2.0648, 0.9237], vec![0.9237, 1.9195]]).unwrap(),
            Matrix::from_rows(&[vec![-7.7353], vec![-0.0248]]).unwrap(),
            8.2561,
            7.2571,
        )
        .unwrap();
        let limits = BoundsConfig::new(Vector::from([10.0, -5.0]), 1.0, 0.5, 0.05).unwrap();
        let gains = derive_gains(&cert, &plant).unwrap();
        let bf = make_bound_functions(&cert, &gains, &plant, &limits).unwrap();
        InflationSchedule::new(&plant, &gains, &limits, bf, 0.1, ZeroNormPolicy::Reject).unwrap()
    }

    #[test]
    fn reference_inflation_schedule() {
        let s = reference_schedule();
        assert_eq!(s.a_norm, 5.0);
        assert!((s.kh_norm - 4.7666).abs() < 5e-4);
        // frozen from an independent numpy evaluation of the same chain
        assert!((s.beta_ue(0).unwrap() - 4.087522203943685).abs() < 1e-9);
        assert!((s.beta_ue_limit().unwrap() - 0.4087550460263365).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for k in 0..300 {
            let b = s.beta_ue(k).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        assert!((s.beta_ue(2000).unwrap() - s.beta_ue_limit().unwrap()).abs() < 1e-12);
        assert!(s.beta_ue_bar() < s.beta_ue(0).unwrap());
        assert_eq!(
            beta_ue(5.0, 0.1, 0.0, 4.0, 0.0, ZeroNormPolicy::Reject).unwrap(),
            0.0
        );
    }
}
