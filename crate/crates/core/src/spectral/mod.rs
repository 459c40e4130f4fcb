//! Spectral analysis of weighted combs: densities, autocorrelation,
//! diffraction, almost periods, and injectivity checks, each closed form
//! paired with an independent estimator.

pub mod almost;
pub mod autocorr;
pub mod compare;
pub mod diffraction;
pub mod injectivity;

use num_complex::Complex64;

use crate::comb::{Decoration, WeightedComb};
use crate::error::{Error, Result};
use crate::lattice::BoxRegion;
use crate::scheme::SchemeSpec;
use crate::weights::WeightFunction;

/// A nested family of boxes with a pinned lower corner and geometrically
/// growing extents, used for averaging limits.
#[derive(Debug, Clone)]
pub struct BoxSequence {
    boxes: Vec<BoxRegion>,
}

impl BoxSequence {
    pub fn geometric(base: &BoxRegion, growth: f64, steps: usize) -> Result<Self> {
        if !(growth > 1.0) || steps == 0 {
            return Err(Error::InvalidParameter(
                "box sequence needs growth > 1 and at least one step".into(),
            ));
        }
        let mut boxes = Vec::with_capacity(steps);
        let mut factor = 1.0;
        for _ in 0..steps {
            let hi: Vec<f64> = base
                .lo()
                .iter()
                .zip(base.hi())
                .map(|(lo, hi)| lo + (hi - lo) * factor)
                .collect();
            boxes.push(BoxRegion::new(base.lo().to_vec(), hi)?);
            factor *= growth;
        }
        Ok(BoxSequence { boxes })
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub fn largest(&self) -> &BoxRegion {
        self.boxes.last().expect("sequence is nonempty")
    }
}

/// Mean weight per unit volume in the averaging limit:
/// `(sum of decoration weights / det) * integral of f`.
pub fn density_closed(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    tol: f64,
) -> Result<Complex64> {
    let mass = f.integral(tol)?;
    Ok(deco.total_weight() * mass / scheme.det_abs())
}

/// Finite-box average of the comb weights: total weight over box volume.
pub fn weyl_average(comb: &WeightedComb) -> Complex64 {
    comb.weight_sum_in(comb.region()) / comb.region().volume()
}
