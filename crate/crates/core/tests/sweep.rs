use std::fs;

use dynquant::cli::{main_with_args, EXIT_OK};

#[test]
fn sweep_grid_respects_dominance_and_leaves_infeasible_cells_empty() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "dynquant",
        "sweep",
        "--horizon",
        "5",
        "--periods",
        "0.1,0.3,0.5",
        "--levels",
        "2,4,16",
        "--out",
        dir.path().to_str().unwrap(),
    ];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with_args(args, &mut out, &mut err);
    assert_eq!(code, EXIT_OK, "{}", String::from_utf8_lossy(&err));

    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 10);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);

    let mut set_only = 0;
    for r in &rows {
        let lhs_set: f64 = r[2].parse().unwrap();
        let lhs_norm: f64 = r[4].parse().unwrap();
        let feasible_set: bool = r[3].parse().unwrap();
        let feasible_norm: bool = r[5].parse().unwrap();
        assert!(lhs_set <= lhs_norm + 1e-8, "{r:?}");
        assert!(!(feasible_norm && !feasible_set), "{r:?}");
        for (feasible, cols) in [(feasible_set, &r[6..8]), (feasible_norm, &r[8..10])] {
            assert_eq!(cols.iter().all(|c| !c.is_empty()), feasible, "{r:?}");
            assert_eq!(cols.iter().all(|c| c.is_empty()), !feasible, "{r:?}");
        }
        if feasible_set && !feasible_norm {
            set_only += 1;
        }
    }
    assert!(set_only > 0);
}
