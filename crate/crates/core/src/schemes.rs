//! Region update laws between transmissions and their feasibility tests.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{induced_inf_norm, mat_exp, spectral_radius_nonneg, Matrix, Vector};
use crate::quantizer::{abs_matrix, DecodedPacket, QuantizerState};
use crate::sets::{
    hyperrect_to_zonotope, interval_hull, linear_map, minkowski_sum, Hyperrectangle, Zonotope,
};

/// A feasibility left-hand side must sit below `1 - FEASIBILITY_MARGIN`.
pub const FEASIBILITY_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    SetBased,
    NormBased,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::SetBased, SchemeKind::NormBased];

    pub fn short_name(self) -> &'static str {
        match self {
            SchemeKind::SetBased => "set",
            SchemeKind::NormBased => "norm",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "set" | "set-based" => Ok(SchemeKind::SetBased),
            "norm" | "norm-based" => Ok(SchemeKind::NormBased),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub scheme: SchemeKind,
    /// `ρ(Λ̄/N)` or `e^{|A|T}/N`.
    pub lhs: f64,
    pub feasible: bool,
    /// `1 - lhs`
    pub margin: f64,
}

impl FeasibilityReport {
    fn new(scheme: SchemeKind, lhs: f64) -> Self {
        Self {
            scheme,
            lhs,
            feasible: lhs < 1.0 - FEASIBILITY_MARGIN,
            margin: 1.0 - lhs,
        }
    }
}

/// `Λ = e^{AT}`, `Λ̄ = |Λ|` entrywise, and `|A|` for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMaps {
    pub lambda: Matrix,
    pub lambda_bar: Matrix,
    pub a_norm: f64,
    pub period: f64,
}

impl TransitionMaps {
    pub fn new(a: &Matrix, period: f64) -> Result<Self> {
        check_period(period)?;
        let lambda = mat_exp(a, period)?;
        Ok(Self {
            lambda_bar: abs_matrix(&lambda),
            lambda,
            a_norm: induced_inf_norm(a),
            period,
        })
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidArgument("interval length must be positive"));
    }
    Ok(())
}

fn check_levels(levels: u32) -> Result<()> {
    if levels < 2 {
        return Err(Error::InvalidArgument("quantizer needs at least 2 levels"));
    }
    Ok(())
}

fn check_packet(qs: &QuantizerState, pd: &DecodedPacket) -> Result<()> {
    if pd.value.dim() != qs.dim() {
        return Err(Error::Dimension {
            context: "decoded packet",
            expected: qs.dim(),
            found: pd.value.dim(),
        });
    }
    Ok(())
}

/// `C^{k+1} = Λ P_d^k`, `L^{k+1} = Λ̄ (L^k / N) + β_ue^k 1`.
pub fn set_based_update(
    qs: &QuantizerState,
    pd: &DecodedPacket,
    lambda: &Matrix,
    lambda_bar: &Matrix,
    beta_ue_k: f64,
    levels: u32,
) -> Result<QuantizerState> {
    check_levels(levels)?;
    check_packet(qs, pd)?;
    let center = lambda.try_mul_vec(&pd.value)?;
    let spread = lambda_bar.try_mul_vec(&qs.max_error(levels))?;
    let range = Vector::new(spread.iter().map(|s| s + beta_ue_k).collect());
    QuantizerState::new(center, range, qs.k + 1)
}

/// The same update computed through zonotopes: the cell `H(P_d^k, L^k/N)`
/// is mapped by `Λ`, inflated by the cube of radius `β_ue^k`, and hulled.
pub fn set_based_update_via_sets(
    qs: &QuantizerState,
    pd: &DecodedPacket,
    lambda: &Matrix,
    beta_ue_k: f64,
    levels: u32,
) -> Result<QuantizerState> {
    check_levels(levels)?;
    check_packet(qs, pd)?;
    let cell = Hyperrectangle::new(pd.value.clone(), qs.max_error(levels))?;
    let image = linear_map(lambda, &hyperrect_to_zonotope(&cell))?;
    let inflation =
        hyperrect_to_zonotope(&Hyperrectangle::cube(Vector::zeros(qs.dim()), beta_ue_k)?);
    let hull = interval_hull(&minkowski_sum(&image, &inflation)?);
    QuantizerState::new(hull.center().clone(), hull.half_widths().clone(), qs.k + 1)
}

/// The terminal set of one interval before hulling, for plotting.
pub fn set_based_terminal_zonotope(
    qs: &QuantizerState,
    pd: &DecodedPacket,
    lambda: &Matrix,
    beta_ue_k: f64,
    levels: u32,
) -> Result<Zonotope> {
    check_packet(qs, pd)?;
    let cell = Hyperrectangle::new(pd.value.clone(), qs.max_error(levels))?;
    let image = linear_map(lambda, &hyperrect_to_zonotope(&cell))?;
    let inflation =
        hyperrect_to_zonotope(&Hyperrectangle::cube(Vector::zeros(qs.dim()), beta_ue_k)?);
    minkowski_sum(&image, &inflation)
}

/// `C^{k+1} = Λ P_d^k`, scalar `L^{k+1} = (e^{|A|T}/N) L^k + β_ue^k` on
/// every axis.
pub fn norm_based_update(
    qs: &QuantizerState,
    pd: &DecodedPacket,
    lambda: &Matrix,
    a_norm: f64,
    period: f64,
    beta_ue_k: f64,
    levels: u32,
) -> Result<QuantizerState> {
    check_levels(levels)?;
    check_packet(qs, pd)?;
    let l = qs.range[0];
    if qs.range.iter().any(|&li| li != l) {
        return Err(Error::UnequalRanges);
    }
    let center = lambda.try_mul_vec(&pd.value)?;
    let next = (a_norm * period).exp() / levels as f64 * l + beta_ue_k;
    QuantizerState::new(center, Vector::filled(qs.dim(), next), qs.k + 1)
}

/// `ρ(Λ̄/N)`.
pub fn feasibility_set(a: &Matrix, period: f64, levels: u32) -> Result<FeasibilityReport> {
    check_period(period)?;
    check_levels(levels)?;
    let lambda_bar = abs_matrix(&mat_exp(a, period)?);
    let lhs = spectral_radius_nonneg(&lambda_bar.scale(1.0 / levels as f64))?;
    Ok(FeasibilityReport::new(SchemeKind::SetBased, lhs))
}

/// `e^{|A|T}/N`.
pub fn feasibility_norm(a: &Matrix, period: f64, levels: u32) -> Result<FeasibilityReport> {
    check_period(period)?;
    check_levels(levels)?;
    let lhs = (induced_inf_norm(a) * period).exp() / levels as f64;
    Ok(FeasibilityReport::new(SchemeKind::NormBased, lhs))
}

pub fn feasibility(
    scheme: SchemeKind,
    a: &Matrix,
    period: f64,
    levels: u32,
) -> Result<FeasibilityReport> {
    match scheme {
        SchemeKind::SetBased => feasibility_set(a, period, levels),
        SchemeKind::NormBased => feasibility_norm(a, period, levels),
    }
}

/// Both reports, set-based first.
pub fn compare_schemes(
    a: &Matrix,
    period: f64,
    levels: u32,
) -> Result<(FeasibilityReport, FeasibilityReport)> {
    Ok((
        feasibility_set(a, period, levels)?,
        feasibility_norm(a, period, levels)?,
    ))
}

/// Smallest `N ≤ max_levels` for which the scheme is feasible.
pub fn min_feasible_levels(
    scheme: SchemeKind,
    a: &Matrix,
    period: f64,
    max_levels: u32,
) -> Result<Option<u32>> {
    for levels in 2..=max_levels {
        if feasibility(scheme, a, period, levels)?.feasible {
            return Ok(Some(levels));
        }
    }
    Ok(None)
}

/// Limit of `ē_q^k`: solves `(I - Λ̄/N) ē = (β_ue^∞/N) 1`.
pub fn set_error_fixed_point(
    lambda_bar: &Matrix,
    levels: u32,
    beta_ue_limit: f64,
) -> Result<Vector> {
    let n = lambda_bar.rows();
    let nf = levels as f64;
    let lhs = Matrix::identity(n).try_add(&lambda_bar.scale(-1.0 / nf))?;
    let rhs = Matrix::column(&Vector::filled(n, beta_ue_limit / nf));
    Ok(lhs.solve(&rhs)?.col(0))
}

/// `L* = β_ue^∞ / (1 - e^{|A|T}/N)`, or `None` when infeasible.
pub fn norm_range_fixed_point(
    a_norm: f64,
    period: f64,
    levels: u32,
    beta_ue_limit: f64,
) -> Option<f64> {
    let ratio = (a_norm * period).exp() / levels as f64;
    (ratio < 1.0 - FEASIBILITY_MARGIN).then(|| beta_ue_limit / (1.0 - ratio))
}

/// Contraction factors of the norm-based range recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormContraction {
    /// `e^{|A|T}/N`, used by the update law.
    pub update_ratio: f64,
    /// `|A|T/N`, the factor appearing in the closed-form range bound.
    pub linearized_ratio: f64,
}

pub fn norm_contraction(a_norm: f64, period: f64, levels: u32) -> NormContraction {
    let nf = levels as f64;
    NormContraction {
        update_ratio: (a_norm * period).exp() / nf,
        linearized_ratio: a_norm * period / nf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference_a() -> Matrix {
        Matrix::from_rows(&[vec![-1.0, -4.0], vec![4.0, -1.0]]).unwrap()
    }

    fn packet(v: &[f64]) -> DecodedPacket {
        DecodedPacket {
            value: Vector::from(v),
            k: 0,
        }
    }

    #[test]
    fn set_update_examples() {
        let qs =
            QuantizerState::new(Vector::from([1.0, 2.0]), Vector::from([4.0, 8.0]), 3).unwrap();
        let id = Matrix::identity(2);
        let next = set_based_update(&qs, &packet(&[1.5, 2.5]), &id, &id, 0.0, 4).unwrap();
        assert_eq!(next.center, Vector::from([1.5, 2.5]));
        assert_eq!(next.range, Vector::from([1.0, 2.0]));
        assert_eq!(next.k, 4);

        let maps = TransitionMaps::new(&reference_a(), 0.1).unwrap();
        let q0 =
            QuantizerState::new(Vector::from([10.0, -5.0]), Vector::filled(2, 1.0), 0).unwrap();
        let beta = 4.087522203943685;
        let q1 = set_based_update(
            &q0,
            &packet(&[10.0, -5.0]),
            &maps.lambda,
            &maps.lambda_bar,
            beta,
            4,
        )
        .unwrap();
        let (s, c) = 0.4f64.sin_cos();
        let e = (-0.1f64).exp();
        let expected_c = [e * (10.0 * c + 5.0 * s), e * (10.0 * s - 5.0 * c)];
        let expected_l = 0.25 * e * (c + s) + beta;
        for (i, want) in expected_c.iter().enumerate() {
            assert!((q1.center[i] - want).abs() < 1e-12);
            assert!((q1.range[i] - expected_l).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_update_examples() {
        let qs = QuantizerState::new(Vector::from([0.0, 0.0]), Vector::filled(2, 2.0), 0).unwrap();
        let id = Matrix::identity(2);
        let next = norm_based_update(&qs, &packet(&[0.1, 0.2]), &id, 0.0, 0.1, 0.0, 4).unwrap();
        assert_eq!(next.range, Vector::filled(2, 0.5));

        let maps = TransitionMaps::new(&reference_a(), 0.1).unwrap();
        let q0 =
            QuantizerState::new(Vector::from([10.0, -5.0]), Vector::filled(2, 1.0), 0).unwrap();
        let q1 = norm_based_update(
            &q0,
            &packet(&[10.0, -5.0]),
            &maps.lambda,
            5.0,
            0.1,
            4.0875,
            4,
        )
        .unwrap();
        assert!((q1.range[0] - (0.5f64.exp() / 4.0 + 4.0875)).abs() < 1e-14);

        let uneven = QuantizerState::new(Vector::zeros(2), Vector::from([1.0, 2.0]), 0).unwrap();
        assert!(matches!(
            norm_based_update(&uneven, &packet(&[0.0, 0.0]), &id, 0.0, 0.1, 0.0, 4),
            Err(Error::UnequalRanges)
        ));
    }

    #[test]
    fn norm_range_reaches_fixed_point() {
        let beta = 0.4;
        let fixed = norm_range_fixed_point(5.0, 0.1, 4, beta).unwrap();
        let id = Matrix::identity(2);
        let mut qs = QuantizerState::new(Vector::zeros(2), Vector::filled(2, 1.0), 0).unwrap();
        for _ in 0..100 {
            qs = norm_based_update(&qs, &packet(&[0.0, 0.0]), &id, 5.0, 0.1, beta, 4).unwrap();
        }
        assert!((qs.range[0] - fixed).abs() < 1e-6);
        assert!(norm_range_fixed_point(5.0, 4f64.ln() / 5.0, 4, beta).is_none());
    }

    #[test]
    fn feasibility_examples() {
        let (set, norm) = compare_schemes(&reference_a(), 0.1, 4).unwrap();
        // symmetric 2x2 oracle: Λ̄/4 = [[a, b], [b, a]] has ρ = a + b
        let (s, c) = 0.4f64.sin_cos();
        let oracle = (-0.1f64).exp() * (c + s) / 4.0;
        assert!((set.lhs - oracle).abs() < 1e-8);
        assert!((set.lhs - 0.29646).abs() < 1e-4);
        assert!((norm.lhs - 0.5f64.exp() / 4.0).abs() < 1e-15);
        assert!(set.feasible && norm.feasible);
        assert!(set.lhs <= norm.lhs);

        let zero = Matrix::zeros(2, 2);
        let (zs, zn) = compare_schemes(&zero, 0.3, 5).unwrap();
        assert!((zs.lhs - 0.2).abs() < 1e-9);
        assert_eq!(zn.lhs, 0.2);

        // exact boundary is infeasible
        let boundary = feasibility_norm(&Matrix::diag(&[1.0]), 2f64.ln(), 2).unwrap();
        assert!(!boundary.feasible);

        assert!(feasibility_set(&reference_a(), 0.1, 1).is_err());
        assert!(feasibility_set(&reference_a(), 0.0, 4).is_err());
    }

    #[test]
    fn large_levels_always_feasible() {
        let a = Matrix::from_rows(&[vec![3.0, 1.0], vec![0.5, 2.0]]).unwrap();
        assert!(!feasibility_set(&a, 1.0, 4).unwrap().feasible);
        assert!(feasibility_set(&a, 1.0, 1 << 12).unwrap().feasible);
        let set_min = min_feasible_levels(SchemeKind::SetBased, &a, 1.0, 1 << 12)
            .unwrap()
            .unwrap();
        let norm_min = min_feasible_levels(SchemeKind::NormBased, &a, 1.0, 1 << 12)
            .unwrap()
            .unwrap();
        assert!(set_min <= norm_min);
    }

    #[test]
    fn error_fixed_point_matches_iteration() {
        let maps = TransitionMaps::new(&reference_a(), 0.1).unwrap();
        let beta = 0.4087550460263365;
        let fixed = set_error_fixed_point(&maps.lambda_bar, 4, beta).unwrap();
        let mut e = Vector::filled(2, 0.25);
        for _ in 0..200 {
            e = crate::quantizer::max_qerror_step(&e, &maps.lambda_bar, beta, 4).unwrap();
        }
        assert!((&e - &fixed).inf_norm() < 1e-12);
    }

    #[test]
    fn contraction_diagnostic() {
        let c = norm_contraction(5.0, 0.1, 4);
        assert!((c.update_ratio - 0.41218).abs() < 1e-5);
        assert!((c.linearized_ratio - 0.125).abs() < 1e-15);
        assert!(c.linearized_ratio < c.update_ratio);
    }

    fn draw() -> impl Strategy<Value = (Matrix, f64, u32)> {
        (1usize..=4)
            .prop_flat_map(|n| {
                prop::collection::vec(-2.0..2.0f64, n * n)
                    .prop_map(move |d| Matrix::from_row_major(n, n, d).unwrap())
            })
            .prop_flat_map(|a| (Just(a), 1e-3..=1.0f64, 2u32..=8))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn set_lhs_never_exceeds_norm_lhs((a, t, n) in draw()) {
            let (set, norm) = compare_schemes(&a, t, n).unwrap();
            prop_assert!(set.lhs <= norm.lhs + 1e-8);
            if norm.feasible {
                prop_assert!(set.feasible || set.lhs >= 1.0 - FEASIBILITY_MARGIN - 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn update_paths_agree_exactly(
            (a, t, _) in draw(),
            seed in prop::collection::vec((-20.0..20.0f64, 1e-3..5.0f64, -1.0..1.0f64), 4),
            beta in 0.0..3.0f64,
            levels in 2u32..=16,
        ) {
            let n = a.rows();
            let center = Vector::new(seed[..n].iter().map(|s| s.0).collect());
            let range = Vector::new(seed[..n].iter().map(|s| s.1).collect());
            let pd = Vector::new(seed[..n].iter().map(|s| s.0 + s.2 * s.1).collect());
            let qs = QuantizerState::new(center, range, 0).unwrap();
            let maps = TransitionMaps::new(&a, t).unwrap();
            let pkt = DecodedPacket { value: pd, k: 0 };
            let direct = set_based_update(&qs, &pkt, &maps.lambda, &maps.lambda_bar, beta, levels).unwrap();
            let via = set_based_update_via_sets(&qs, &pkt, &maps.lambda, beta, levels).unwrap();
            prop_assert_eq!(direct, via);
        }
    }
}
