//! Flags cylinders around three concentrated velocity blobs on a planar
//! lattice of centers, extracts a Vitali subcover and prints the
//! `r^{5/3}` premeasure.
//!
//! ```text
//! cargo run --release --example vitali_hausdorff
//! ```

use ckns::regularity::{flag_singular_candidates, vitali_cover, Criterion};
use ckns::sampling::{ClosedFormSource, PointState};

const BLOBS: [[f64; 3]; 3] = [[-0.5, -0.5, 0.0], [0.5, 0.0, 0.0], [0.0, 0.6, 0.0]];

fn field(x: [f64; 3], _t: f64) -> PointState {
    let sigma: f64 = 0.05;
    let s2 = sigma * sigma;
    let mut s = PointState::default();
    for b in BLOBS {
        let d = [x[0] - b[0], x[1] - b[1], x[2] - b[2]];
        let e = (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (2.0 * s2)).exp() / s2;
        let rot = [-d[1], d[0], 0.0];
        let drot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]];
        for a in 0..3 {
            s.u[a] += e * rot[a];
            for c in 0..3 {
                s.grad_u[a][c] += e * (drot[a][c] - rot[a] * d[c] / s2);
            }
        }
    }
    s
}

fn main() -> ckns::Result<()> {
    let m = 9;
    let centers: Vec<[f64; 3]> = (0..m * m)
        .map(|i| {
            let (a, b) = ((i % m) as f64, (i / m) as f64);
            [
                -1.0 + (a + 0.5) * 2.0 / m as f64,
                -1.0 + (b + 0.5) * 2.0 / m as f64,
                0.0,
            ]
        })
        .collect();
    let src = ClosedFormSource::new(field, 8, 16);
    let threshold = 1e-2;
    let flagged =
        flag_singular_candidates(&src, &centers, 0.0, Criterion::Thm19, threshold, 2..=4)?;
    let est = vitali_cover(&flagged);
    println!(
        "{} of {} centers flagged at threshold {threshold:e}",
        flagged.len(),
        centers.len()
    );
    for q in &est.chosen {
        println!(
            "  chosen ({:+.3}, {:+.3}) r = {}",
            q.center[0], q.center[1], q.radius
        );
    }
    println!(
        "{} cylinders chosen, δ = {}, Σ r^(5/3) = {:.6}",
        est.chosen.len(),
        est.delta,
        est.premeasure
    );
    Ok(())
}
