use dynquant_web::{feasibility_curve_impl, reach_step_impl, simulate_impl};

#[test]
fn feasibility_curve_orders_schemes() {
    let c = feasibility_curve_impl(4, 1.0, 50).unwrap();
    let (t, set, norm) = (c.periods(), c.set(), c.norm());
    assert_eq!(t.len(), 50);
    assert!((t[49] - 1.0).abs() < 1e-12);
    assert!(set.iter().zip(&norm).all(|(s, n)| s <= &(n + 1e-8)));
    let i = t.iter().position(|&x| (x - 0.1).abs() < 1e-12).unwrap();
    assert!((set[i] - 0.29646).abs() < 1e-4);
    assert!((norm[i] - 0.41218).abs() < 1e-5);
}

#[test]
fn simulate_returns_downsampled_run() {
    let r = simulate_impl("set", 4, 0.1, 5.0, 1, false, 10).unwrap();
    assert_eq!(r.t().len(), 501);
    assert_eq!(r.x().len(), 2 * r.t().len());
    assert_eq!(r.range().len(), 2 * r.t().len());
    assert_eq!(r.tx_t().len(), 50);
    assert!(r.invariants_ok());
    assert!(r.eq_inf() > 0.0 && r.er_inf() > 0.0);
    assert!(simulate_impl("norm", 2, 0.5, 5.0, 1, false, 10).is_err());
    assert!(simulate_impl("other", 4, 0.1, 5.0, 1, false, 10).is_err());
}

#[test]
fn reach_step_hull_contains_polygon_and_image_of_cell() {
    let v = reach_step_impl(1.0, -0.5, 1.0, 4, 0.1, 0.4).unwrap();
    let hull = v.hull();
    let poly = v.polygon();
    assert!(poly.len() >= 8);
    for p in poly.chunks(2) {
        assert!((p[0] - hull[0]).abs() <= hull[2] + 1e-12);
        assert!((p[1] - hull[1]).abs() <= hull[3] + 1e-12);
    }
    assert_eq!(v.cell(), vec![1.0, -0.5, 0.25, 0.25]);
}
