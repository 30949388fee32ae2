//! Zonotopes and axis-aligned hyperrectangles.
//!
//! Generators are kept as an ordered list and never reduced. The
//! quantization schemes only ever hull a one-step image, so the generator
//! count stays at `2n`.

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// Slack used by [`Hyperrectangle::contains`] to absorb integration
/// round-off on the boundary.
pub const CONTAINMENT_TOL: f64 = 1e-12;

/// `{ c + Σ εᵢ gᵢ : εᵢ ∈ [-1, 1] }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    center: Vector,
    generators: Vec<Vector>,
}

impl Zonotope {
    pub fn new(center: Vector, generators: Vec<Vector>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.dim() != center.dim()) {
            return Err(Error::Dimension {
                context: "zonotope generator",
                expected: center.dim(),
                found: g.dim(),
            });
        }
        Ok(Self { center, generators })
    }

    pub fn singleton(center: Vector) -> Self {
        Self {
            center,
            generators: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.generators.len()
    }

    /// The point `c + Σ εᵢ gᵢ` for a coefficient vector `ε`.
    pub fn point(&self, coeffs: &[f64]) -> Result<Vector> {
        if coeffs.len() != self.order() {
            return Err(Error::Dimension {
                context: "zonotope coefficients",
                expected: self.order(),
                found: coeffs.len(),
            });
        }
        Ok(self
            .generators
            .iter()
            .zip(coeffs)
            .fold(self.center.clone(), |acc, (g, &e)| acc.axpy(e, g)))
    }

    /// Vertices of a planar zonotope in counter-clockwise order. Used for
    /// drawing; errors for any dimension other than two.
    pub fn polygon_2d(&self) -> Result<Vec<[f64; 2]>> {
        if self.dim() != 2 {
            return Err(Error::Dimension {
                context: "planar zonotope",
                expected: 2,
                found: self.dim(),
            });
        }
        // Orient every generator into the upper half plane, sort by angle,
        // then walk the boundary from the lowest vertex.
        let mut gens: Vec<[f64; 2]> = self
            .generators
            .iter()
            .filter(|g| g[0] != 0.0 || g[1] != 0.0)
            .map(|g| {
                if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) {
                    [-g[0], -g[1]]
                } else {
                    [g[0], g[1]]
                }
            })
            .collect();
        if gens.is_empty() {
            return Ok(vec![[self.center[0], self.center[1]]]);
        }
        gens.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
        let mut start = [self.center[0], self.center[1]];
        for g in &gens {
            start[0] -= g[0];
            start[1] -= g[1];
        }
        let mut verts = Vec::with_capacity(2 * gens.len());
        let mut p = start;
        for g in gens.iter() {
            verts.push(p);
            p = [p[0] + 2.0 * g[0], p[1] + 2.0 * g[1]];
        }
        for g in gens.iter() {
            verts.push(p);
            p = [p[0] - 2.0 * g[0], p[1] - 2.0 * g[1]];
        }
        Ok(verts)
    }
}

/// Axis-aligned box `{ x : |xᵢ - cᵢ| ≤ hᵢ }`. Also serves as the hypercube
/// `B(c, l)` when all half-widths are equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperrectangle {
    center: Vector,
    half_widths: Vector,
}

impl Hyperrectangle {
    pub fn new(center: Vector, half_widths: Vector) -> Result<Self> {
        if center.dim() != half_widths.dim() {
            return Err(Error::Dimension {
                context: "hyperrectangle half-widths",
                expected: center.dim(),
                found: half_widths.dim(),
            });
        }
        if half_widths.iter().any(|&h| !(h >= 0.0)) {
            return Err(Error::InvalidArgument("half-widths must be nonnegative"));
        }
        Ok(Self {
            center,
            half_widths,
        })
    }

    /// Hypercube with a common radius.
    pub fn cube(center: Vector, radius: f64) -> Result<Self> {
        let n = center.dim();
        Self::new(center, Vector::filled(n, radius))
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn half_widths(&self) -> &Vector {
        &self.half_widths
    }

    pub fn lower(&self) -> Vector {
        &self.center - &self.half_widths
    }

    pub fn upper(&self) -> Vector {
        &self.center + &self.half_widths
    }

    /// Closed-set membership with [`CONTAINMENT_TOL`] slack.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        contains_point(self, x)
    }

    /// Largest per-axis excess `|xᵢ - cᵢ| - hᵢ`; nonpositive when inside.
    pub fn excess(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.center.iter().zip(self.half_widths.iter()))
            .map(|(xi, (c, h))| (xi - c).abs() - h)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `Za ⊕ Zb`: centers add, generator lists concatenate.
pub fn minkowski_sum(a: &Zonotope, b: &Zonotope) -> Result<Zonotope> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            context: "Minkowski sum",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut generators = a.generators.clone();
    generators.extend(b.generators.iter().cloned());
    Ok(Zonotope {
        center: &a.center + &b.center,
        generators,
    })
}

/// `K Z = Z(Kc, K G)`.
pub fn linear_map(k: &Matrix, z: &Zonotope) -> Result<Zonotope> {
    if k.cols() != z.dim() {
        return Err(Error::Dimension {
            context: "zonotope linear map",
            expected: z.dim(),
            found: k.cols(),
        });
    }
    Ok(Zonotope {
        center: k * &z.center,
        generators: z.generators.iter().map(|g| k * g).collect(),
    })
}

/// Tightest axis-aligned box: half-width on axis `i` is `Σ_l |g_l[i]|`.
pub fn interval_hull(z: &Zonotope) -> Hyperrectangle {
    let n = z.dim();
    let mut h = Vector::zeros(n);
    for g in &z.generators {
        for i in 0..n {
            h[i] += g[i].abs();
        }
    }
    Hyperrectangle {
        center: z.center.clone(),
        half_widths: h,
    }
}

/// `H(c, l) = Z(c, (l₁σ₁, …, lₙσₙ))`, dropping zero-width axes.
pub fn hyperrect_to_zonotope(h: &Hyperrectangle) -> Zonotope {
    let n = h.dim();
    let generators = (0..n)
        .filter(|&i| h.half_widths[i] != 0.0)
        .map(|i| Vector::basis(n, i).scale(h.half_widths[i]))
        .collect();
    Zonotope {
        center: h.center.clone(),
        generators,
    }
}

pub fn contains_point(h: &Hyperrectangle, x: &[f64]) -> Result<bool> {
    if x.len() != h.dim() {
        return Err(Error::Dimension {
            context: "containment test",
            expected: h.dim(),
            found: x.len(),
        });
    }
    Ok(h.excess(x) <= CONTAINMENT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v<const N: usize>(a: [f64; N]) -> Vector {
        Vector::from(a)
    }

    #[test]
    fn minkowski_examples() {
        let c = v([3.0, -1.0]);
        let z = Zonotope::new(c.clone(), vec![v([1.0, 2.0])]).unwrap();
        let zero = Zonotope::singleton(Vector::zeros(2));
        assert_eq!(minkowski_sum(&zero, &z).unwrap(), z);

        let a = Zonotope::new(v([1.0, 0.0]), vec![v([1.0, 0.0])]).unwrap();
        let b = Zonotope::new(v([0.0, 1.0]), vec![v([0.0, 1.0])]).unwrap();
        let s = minkowski_sum(&a, &b).unwrap();
        assert_eq!(s.center(), &v([1.0, 1.0]));
        assert_eq!(s.generators(), &[v([1.0, 0.0]), v([0.0, 1.0])]);

        assert_eq!(minkowski_sum(&z, &z).unwrap().order(), 2 * z.order());
        let z3 = Zonotope::singleton(Vector::zeros(3));
        assert!(matches!(
            minkowski_sum(&z, &z3),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn linear_map_examples() {
        let z = Zonotope::new(v([10.0, -5.0]), vec![v([0.25, 0.0]), v([0.0, 0.25])]).unwrap();
        assert_eq!(linear_map(&Matrix::identity(2), &z).unwrap(), z);
        let doubled = linear_map(&Matrix::identity(2).scale(2.0), &z).unwrap();
        assert_eq!(doubled.center(), &v([20.0, -10.0]));
        assert_eq!(doubled.generators()[0], v([0.5, 0.0]));

        // closed-form e^{0.1 A} for A = [[-1,-4],[4,-1]]
        let (s, c) = 0.4f64.sin_cos();
        let e = (-0.1f64).exp();
        let lam = Matrix::from_rows(&[vec![e * c, -e * s], vec![e * s, e * c]]).unwrap();
        let mapped = linear_map(&lam, &z).unwrap();
        assert!((mapped.center()[0] - e * (10.0 * c + 5.0 * s)).abs() < 1e-12);
        assert!((mapped.center()[1] - e * (10.0 * s - 5.0 * c)).abs() < 1e-12);
        assert!((mapped.generators()[1][0] + 0.25 * e * s).abs() < 1e-15);
        assert!(linear_map(&Matrix::identity(3), &z).is_err());
    }

    #[test]
    fn interval_hull_examples() {
        let z = Zonotope::new(Vector::zeros(2), vec![v([1.0, 0.0]), v([1.0, 1.0])]).unwrap();
        let h = interval_hull(&z);
        assert_eq!(h.half_widths(), &v([2.0, 1.0]));

        let s = interval_hull(&Zonotope::singleton(v([4.0, 5.0])));
        assert_eq!(s.center(), &v([4.0, 5.0]));
        assert_eq!(s.half_widths(), &v([0.0, 0.0]));

        let one = Zonotope::new(v([1.0, 1.0]), vec![v([-3.0, 0.5])]).unwrap();
        assert_eq!(interval_hull(&one).half_widths(), &v([3.0, 0.5]));
    }

    #[test]
    fn hyperrect_zonotope_conversion() {
        let h = Hyperrectangle::cube(v([10.0, -5.0]), 1.0).unwrap();
        let z = hyperrect_to_zonotope(&h);
        assert_eq!(z.center(), &v([10.0, -5.0]));
        assert_eq!(z.generators(), &[v([1.0, 0.0]), v([0.0, 1.0])]);
        assert_eq!(interval_hull(&z), h);

        let flat = Hyperrectangle::new(v([1.0, 2.0]), Vector::zeros(2)).unwrap();
        assert_eq!(hyperrect_to_zonotope(&flat).order(), 0);

        let partial = Hyperrectangle::new(v([0.0, 0.0, 0.0]), v([1.0, 0.0, 2.0])).unwrap();
        let zp = hyperrect_to_zonotope(&partial);
        assert_eq!(zp.order(), 2);
        assert_eq!(interval_hull(&zp), partial);
    }

    #[test]
    fn containment_examples() {
        let h = Hyperrectangle::cube(v([0.0, 0.0]), 1.0).unwrap();
        assert!(h.contains(&[0.0, 0.0]).unwrap());
        assert!(h.contains(&[1.0, -1.0]).unwrap());
        assert!(!h.contains(&[1.001, 0.0]).unwrap());
        assert!(h.contains(&[1.0 + 5e-13, 0.0]).unwrap());
        assert!(h.contains(&[0.0]).is_err());
        assert!(Hyperrectangle::new(v([0.0]), v([-1.0])).is_err());
    }

    #[test]
    fn planar_polygon_vertices() {
        let z = Zonotope::new(v([1.0, 2.0]), vec![v([1.0, 0.0]), v([0.0, 1.0])]).unwrap();
        let poly = z.polygon_2d().unwrap();
        assert_eq!(poly.len(), 4);
        for p in &poly {
            assert!((p[0] - 1.0).abs() == 1.0 && (p[1] - 2.0).abs() == 1.0);
        }
        assert!(Zonotope::singleton(Vector::zeros(3)).polygon_2d().is_err());
    }

    fn zonotope(n: usize, p: usize) -> impl Strategy<Value = Zonotope> {
        (
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(prop::collection::vec(-2.0..2.0f64, n), p),
        )
            .prop_map(|(c, gs)| {
                Zonotope::new(Vector::new(c), gs.into_iter().map(Vector::new).collect()).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sampled_points_lie_in_hull(
            (z, eps) in (1usize..=4, 0usize..=6).prop_flat_map(|(n, p)| {
                (zonotope(n, p), prop::collection::vec(-1.0..=1.0f64, p))
            })
        ) {
            let h = interval_hull(&z);
            prop_assert!(h.contains(&z.point(&eps).unwrap()).unwrap());
        }
    }

    proptest! {
        #[test]
        fn hull_bound_is_attained_per_axis(z in (1usize..=4, 1usize..=6).prop_flat_map(|(n, p)| zonotope(n, p))) {
            let h = interval_hull(&z);
            for i in 0..z.dim() {
                let eps: Vec<f64> = z.generators().iter()
                    .map(|g| if g[i] >= 0.0 { 1.0 } else { -1.0 })
                    .collect();
                let p = z.point(&eps).unwrap();
                prop_assert!((p[i] - z.center()[i] - h.half_widths()[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn linear_map_distributes_over_minkowski_sum(
            (za, zb, k) in (1usize..=3).prop_flat_map(|n| (
                zonotope(n, 2),
                zonotope(n, 3),
                prop::collection::vec(-3.0..3.0f64, n * n)
                    .prop_map(move |d| Matrix::from_row_major(n, n, d).unwrap()),
            ))
        ) {
            let lhs = linear_map(&k, &minkowski_sum(&za, &zb).unwrap()).unwrap();
            let rhs = minkowski_sum(&linear_map(&k, &za).unwrap(), &linear_map(&k, &zb).unwrap()).unwrap();
            prop_assert_eq!(lhs.generators(), rhs.generators());
            prop_assert!((lhs.center() - rhs.center()).inf_norm() < 1e-12);
        }
    }
}
