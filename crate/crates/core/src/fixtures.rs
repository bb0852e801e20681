//! Small named problems with closed-form answers.

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::metric::Point;
use crate::problem::{Matrix, ModelClass, NoiseClass, Problem};

/// `F(x, e) = x₁` on `M1 = {(0,0), (0,1)}`, noiseless, with the measure
/// `α δ_(0,0) + (1 − α) δ_(0,1)`.
///
/// Both points measure `y = 0`, so the kernel size is 1 and the
/// worst-case decoder returns the midpoint.
pub fn two_point(alpha: f64) -> Result<(Problem, DiscreteMeasure)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidMeasure(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    let problem = Problem::linear_additive(
        Matrix::from_rows(vec![vec![1.0, 0.0]])?,
        ModelClass::new(vec![Point::new(vec![0.0, 0.0])?, Point::new(vec![0.0, 1.0])?])?,
        NoiseClass::noiseless(1)?,
    )?;
    let mu = DiscreteMeasure::from_rows(&[vec![alpha], vec![1.0 - alpha]])?;
    Ok((problem, mu))
}
