//! Classical uniform linear array design: spacing matched to a target
//! distance so the channel eigenvalues equalize there.

use crate::error::{Error, Result};
use crate::geometry::{generate_grid, ArrayLayout, GridSpec, Point3};

/// How to split the spacing product between the two arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpacingRule {
    /// Equal Tx and Rx spacing: `d = sqrt(lambda * D* / max(N, M))`.
    Symmetric,
    /// The other array's spacing is fixed; return the complement satisfying
    /// `d_t * d_r = lambda * D* / max(N, M)`.
    FixedOther(f64),
}

/// A resolved uniform-array design.
#[derive(Debug, Clone, PartialEq)]
pub struct UlaDesign {
    pub spacing: f64,
    pub aperture: f64,
    pub count: usize,
    pub d_star: f64,
    pub lambda: f64,
}

/// Antenna spacing that maximizes capacity at distance `d_star` for uniform
/// linear arrays, from the product rule `d_t * d_r = lambda * D* / max(N, M)`.
///
/// Full precision is kept; display rounding is the caller's business.
pub fn ula_spacing(lambda: f64, d_star: f64, n_max: usize, rule: SpacingRule) -> Result<f64> {
    if !(lambda > 0.0) || !(d_star > 0.0) || n_max == 0 {
        return Err(Error::InvalidSpec(
            "ula_spacing needs positive wavelength, distance and antenna count".into(),
        ));
    }
    let product = lambda * d_star / n_max as f64;
    match rule {
        SpacingRule::Symmetric => Ok(product.sqrt()),
        SpacingRule::FixedOther(other) => {
            if !(other > 0.0) {
                return Err(Error::InvalidSpec("fixed spacing must be positive".into()));
            }
            Ok(product / other)
        }
    }
}

/// Spacing plus derived aperture for an `count`-element array designed
/// against `n_max = max(N, M)`.
pub fn ula_design(
    lambda: f64,
    d_star: f64,
    count: usize,
    n_max: usize,
    rule: SpacingRule,
) -> Result<UlaDesign> {
    let spacing = ula_spacing(lambda, d_star, n_max, rule)?;
    Ok(UlaDesign {
        spacing,
        aperture: (count.saturating_sub(1)) as f64 * spacing,
        count,
        d_star,
        lambda,
    })
}

/// Collinear, equispaced, centered layout.
pub fn build_ula(count: usize, spacing: f64, center: Point3) -> Result<ArrayLayout> {
    generate_grid(&GridSpec::linear(count, spacing).with_center(center))
}
