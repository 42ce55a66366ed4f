use ckns::grid::*;

#[test]
fn rejects_non_power_of_two() {
    assert!(Grid::cubic(12, 1.0).is_err());
    assert!(Grid::cubic(16, 0.0).is_err());
    assert!(Grid::cubic(16, 1.0).is_ok());
}

#[test]
fn index_roundtrip() {
    let g = Grid::new([4, 8, 2], 1.0).unwrap();
    for idx in 0..g.len() {
        let [i, j, k] = g.unravel(idx);
        assert_eq!(g.index(i, j, k), idx);
    }
}

#[test]
fn ball_nodes_wrap_periodically() {
    let g = Grid::cubic(16, 1.0).unwrap();
    let near_corner = g.ball_nodes([0.0, 0.0, 0.0], 0.2);
    let centered = g.ball_nodes([0.5, 0.5, 0.5], 0.2);
    assert_eq!(near_corner.len(), centered.len());
    assert!(near_corner
        .iter()
        .all(|(_, d)| d.iter().all(|v| v.abs() < 0.2)));
}

#[test]
fn series_rejects_non_increasing_times() {
    let g = Grid::planar(4, 1.0).unwrap();
    let mut s = SnapshotSeries::default();
    s.push(State::zeros(g, 0.0)).unwrap();
    assert!(s.push(State::zeros(g, 0.0)).is_err());
    s.push(State::zeros(g, 0.5)).unwrap();
    assert_eq!(s.dt_max(), 0.5);
}

#[test]
fn cylinder_must_fit_in_box() {
    let g = Grid::cubic(8, 2.0).unwrap();
    assert!(ParabolicCylinder::new([0.0; 3], 0.0, 1.0)
        .unwrap()
        .check_fits(&g)
        .is_err());
    assert!(ParabolicCylinder::new([0.0; 3], 0.0, 0.9)
        .unwrap()
        .check_fits(&g)
        .is_ok());
    assert!(ParabolicCylinder::new([0.0; 3], 0.0, -1.0).is_err());
}
