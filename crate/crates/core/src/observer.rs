//! Observer certificate checking, gain derivation and the closed-form error
//! envelopes for the local estimate and the remote reconstruction.
//!
//! The certificate `(P, Q, ν₁, ν₂)` is computed offline; this module only
//! verifies it. All norms are the vector infinity norm and the matrix norm
//! it induces (maximum row sum).

use crate::error::{Error, Result};
use crate::numerics::{induced_inf_norm, max_eig_symmetric, min_eig_symmetric, Matrix};
use crate::plant::{BoundsConfig, PlantModel};

/// Largest eigenvalue of the assembled block matrix that still counts as
/// negative semidefinite. Certificates printed to four decimals move the
/// spectrum at the 1e-4 scale, so the exact maximum eigenvalue is reported
/// alongside the verdict.
pub const LMI_TOLERANCE: f64 = 1e-7;

/// The block inequality that is checked. `Q` is `n x n_y`, so the output
/// coupling appears as `HᵀQᵀ + QH`.
pub const LMI_FORM: &str = "[[A'P + PA + H'Q' + QH + nu1*I, P], [P, -nu2*I]] <= 0";

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverCertificate {
    pub p: Matrix,
    pub q: Matrix,
    pub nu1: f64,
    pub nu2: f64,
}

impl ObserverCertificate {
    /// Checks `P = Pᵀ` (within 1e-9), `P ≻ 0` and `ν₁, ν₂ > 0`.
    pub fn new(p: Matrix, q: Matrix, nu1: f64, nu2: f64) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::NotSquare {
                rows: p.rows(),
                cols: p.cols(),
            });
        }
        if !p.is_symmetric(1e-9) {
            return Err(Error::NotSymmetric);
        }
        let min_eig = min_eig_symmetric(&p)?;
        if !(min_eig > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        if !(nu1 > 0.0 && nu2 > 0.0) || !nu1.is_finite() || !nu2.is_finite() {
            return Err(Error::InvalidArgument("nu1 and nu2 must be positive"));
        }
        if q.rows() != p.rows() {
            return Err(Error::Dimension {
                context: "certificate Q rows",
                expected: p.rows(),
                found: q.rows(),
            });
        }
        Ok(Self { p, q, nu1, nu2 })
    }

    pub fn lambda_max(&self) -> f64 {
        max_eig_symmetric(&self.p).expect("square by construction")
    }

    pub fn lambda_min(&self) -> f64 {
        min_eig_symmetric(&self.p).expect("square by construction")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmiReport {
    pub passed: bool,
    pub max_eigenvalue: f64,
    pub tolerance: f64,
    pub form: &'static str,
}

/// The symmetrised `2n x 2n` block matrix of the observer inequality.
pub fn lmi_matrix(plant: &PlantModel, cert: &ObserverCertificate) -> Result<Matrix> {
    let n = plant.state_dim();
    if cert.p.rows() != n {
        return Err(Error::Dimension {
            context: "certificate P",
            expected: n,
            found: cert.p.rows(),
        });
    }
    if cert.q.cols() != plant.output_dim() {
        return Err(Error::Dimension {
            context: "certificate Q columns",
            expected: plant.output_dim(),
            found: cert.q.cols(),
        });
    }
    let a = &plant.a;
    let qh = &cert.q * &plant.h;
    let top_left = (&a.transpose() * &cert.p)
        .try_add(&(&cert.p * a))?
        .try_add(&qh.transpose())?
        .try_add(&qh)?
        .try_add(&Matrix::identity(n).scale(cert.nu1))?;
    let block = Matrix::block2x2(
        &top_left,
        &cert.p,
        &cert.p,
        &Matrix::identity(n).scale(-cert.nu2),
    )?;
    block.symmetrized()
}

/// PASS iff the largest eigenvalue of [`lmi_matrix`] is at most
/// [`LMI_TOLERANCE`].
pub fn verify_certificate(plant: &PlantModel, cert: &ObserverCertificate) -> Result<LmiReport> {
    let max_eigenvalue = max_eig_symmetric(&lmi_matrix(plant, cert)?)?;
    Ok(LmiReport {
        passed: max_eigenvalue <= LMI_TOLERANCE,
        max_eigenvalue,
        tolerance: LMI_TOLERANCE,
        form: LMI_FORM,
    })
}

/// Observer gain `K`, reconstructor gain `K_r` (equal to `K`) and the decay
/// rate `λ_e = ν₁ / (n λ_max(P))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGains {
    pub k: Matrix,
    pub kr: Matrix,
    pub lambda_e: f64,
}

pub fn derive_gains(cert: &ObserverCertificate, plant: &PlantModel) -> Result<ObserverGains> {
    let n = plant.state_dim();
    if cert.p.rows() != n {
        return Err(Error::Dimension {
            context: "certificate P",
            expected: n,
            found: cert.p.rows(),
        });
    }
    let k = cert.p.solve(&cert.q)?;
    let lambda_e = cert.nu1 / (n as f64 * cert.lambda_max());
    Ok(ObserverGains {
        kr: k.clone(),
        k,
        lambda_e,
    })
}

/// The class-KL / class-K functions bounding the local estimation error
/// and the reconstruction error, together with the configured `x_b`, `d_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundFunctions {
    pub n: usize,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub lambda_e: f64,
    /// `√(n λ_max / λ_min)`
    pub decay_gain: f64,
    /// `√(n ν₂ / (λ_min λ_e))`
    pub disturbance_gain: f64,
    /// `|E| + |B| + |K_r H|`
    pub reconstruction_input_gain: f64,
    pub x_b: f64,
    pub d_b: f64,
}

pub fn make_bound_functions(
    cert: &ObserverCertificate,
    gains: &ObserverGains,
    plant: &PlantModel,
    bounds: &BoundsConfig,
) -> Result<BoundFunctions> {
    let n = plant.state_dim();
    let lambda_max = cert.lambda_max();
    let lambda_min = cert.lambda_min();
    let nf = n as f64;
    let kr_h = gains.kr.try_mul(&plant.h)?;
    Ok(BoundFunctions {
        n,
        lambda_max,
        lambda_min,
        lambda_e: gains.lambda_e,
        decay_gain: (nf * lambda_max / lambda_min).sqrt(),
        disturbance_gain: (nf * cert.nu2 / (lambda_min * gains.lambda_e)).sqrt(),
        reconstruction_input_gain: induced_inf_norm(&plant.e)
            + induced_inf_norm(&plant.b)
            + induced_inf_norm(&kr_h),
        x_b: bounds.x_b,
        d_b: bounds.d_b,
    })
}

impl BoundFunctions {
    /// `β̂(r, s) = √(nλ_max/λ_min) e^{-λ_e s / 2} r`
    pub fn beta_hat(&self, r: f64, s: f64) -> f64 {
        self.decay_gain * (-self.lambda_e * s / 2.0).exp() * r
    }

    /// `γ̂(r) = √(nν₂/(λ_min λ_e)) r`
    pub fn gamma_hat(&self, r: f64) -> f64 {
        self.disturbance_gain * r
    }

    /// Decaying KL term of the reconstruction bound. Same form as
    /// [`Self::beta_hat`].
    pub fn beta_r(&self, r: f64, s: f64) -> f64 {
        self.decay_gain * (-self.lambda_e * s / 2.0).exp() * r
    }

    /// Growing-exponent variant `√(nλ_max/λ_min) e^{+λ_e s / 2} r`. Not a
    /// KL function; kept for diagnostics only.
    pub fn beta_r_growing(&self, r: f64, s: f64) -> f64 {
        self.decay_gain * (self.lambda_e * s / 2.0).exp() * r
    }

    /// `γ_r(s) = √(nν₂/(λ_min λ_e)) (|E| + |B| + |K_r H|) s`
    pub fn gamma_r(&self, s: f64) -> f64 {
        self.disturbance_gain * self.reconstruction_input_gain * s
    }

    /// `β̂(x_b, t) + γ̂(d_b)`, the radius of the ball that contains the
    /// local estimation error at time `t`.
    pub fn local_error_envelope(&self, t: f64) -> f64 {
        self.beta_hat(self.x_b, t) + self.gamma_hat(self.d_b)
    }

    /// `β_r(|e_r(t_k)|, t - t_k) + γ_r(max{sup|u|, sup|d|, sup|ê|, sup|e_q|})`
    pub fn reconstruction_error_envelope(
        &self,
        er_tk: f64,
        t_minus_tk: f64,
        sup_u: f64,
        sup_d: f64,
        sup_ehat: f64,
        sup_eq: f64,
    ) -> f64 {
        let drive = sup_u.max(sup_d).max(sup_ehat).max(sup_eq);
        self.beta_r(er_tk, t_minus_tk) + self.gamma_r(drive)
    }
}
