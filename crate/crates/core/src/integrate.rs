//! Ball and parabolic-cylinder quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ParabolicCylinder, ScalarField};
use crate::sampling::{window_integral, CylinderSource, PointState, Slice};

/// Resolution contract of a cylinder integral: `h ≤ r/8`, `dt ≤ r²/16` and
/// `r < L/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub spacing: f64,
    pub dt_max: f64,
    pub spacing_ok: bool,
    pub dt_ok: bool,
    /// `L/2 − r`, the margin left before the ball meets its periodic image.
    pub box_margin: Option<f64>,
}

impl Resolution {
    pub fn resolved(&self) -> bool {
        self.spacing_ok && self.dt_ok
    }

    pub fn for_cylinder(source: &dyn CylinderSource, q: &ParabolicCylinder) -> Self {
        let r = q.radius;
        let spacing = source.spacing(r);
        let dt_max = source.dt_max(q.t_start(), q.t0);
        Self {
            spacing,
            dt_max,
            spacing_ok: spacing <= r / 8.0 * (1.0 + 1e-12),
            dt_ok: dt_max <= r * r / 16.0 * (1.0 + 1e-12),
            box_margin: source.box_length().map(|l| 0.5 * l - r),
        }
    }
}

/// A ball integral with its resolution flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallIntegral {
    pub value: f64,
    pub under_resolved: bool,
}

/// Riemann sum of `f` over the grid nodes of `B_r(x0)` with weight `h³`.
pub fn integrate_ball(f: &ScalarField, x0: [f64; 3], r: f64) -> Result<BallIntegral> {
    f.check_finite("integrand")?;
    let grid = f.grid;
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} must be positive"
        )));
    }
    if r >= 0.5 * grid.length() {
        return Err(Error::CylinderExceedsBox {
            radius: r,
            half_box: 0.5 * grid.length(),
        });
    }
    let sum: f64 = grid
        .ball_nodes(x0, r)
        .iter()
        .map(|&(idx, _)| f.values[idx])
        .sum();
    Ok(BallIntegral {
        value: sum * grid.cell_volume(),
        under_resolved: grid.max_spacing() > r / 8.0,
    })
}

/// A cylinder integral with its resolution record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderIntegral {
    pub value: f64,
    pub resolution: Resolution,
}

/// Checks that the cylinder fits the source's box.
pub fn check_cylinder(source: &dyn CylinderSource, q: &ParabolicCylinder) -> Result<()> {
    if !(q.radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius {} must be positive",
            q.radius
        )));
    }
    if let Some(l) = source.box_length() {
        if q.radius >= 0.5 * l {
            return Err(Error::CylinderExceedsBox {
                radius: q.radius,
                half_box: 0.5 * l,
            });
        }
    }
    Ok(())
}

/// Ball samples of `Q` at every time node covering `(t0 − r², t0)`.
pub fn cylinder_slices(source: &dyn CylinderSource, q: &ParabolicCylinder) -> Result<Vec<Slice>> {
    check_cylinder(source, q)?;
    source
        .time_nodes(q.t_start(), q.t0)?
        .iter()
        .map(|node| source.sample_ball(node, q.center, q.radius))
        .collect()
}

/// `∫∫_Q integrand` by trapezoid in time over ball slices.
pub fn integrate_cylinder(
    source: &dyn CylinderSource,
    q: &ParabolicCylinder,
    integrand: impl Fn(&PointState) -> f64,
) -> Result<CylinderIntegral> {
    let slices = cylinder_slices(source, q)?;
    let times: Vec<f64> = slices.iter().map(|s| s.t).collect();
    let values: Vec<f64> = slices
        .iter()
        .map(|s| s.integrate(|p| integrand(&p.state)))
        .collect();
    Ok(CylinderIntegral {
        value: window_integral(&times, &values, q.t_start(), q.t0),
        resolution: Resolution::for_cylinder(source, q),
    })
}
