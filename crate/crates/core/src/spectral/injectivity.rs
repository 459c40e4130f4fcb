//! Injectivity of the torus parametrization of hull elements.
//!
//! A torus translation is invisible exactly when it annihilates every dual
//! character the comb responds to. The response at a dual lattice point
//! `(k, eta)` is `rho = S(k, eta) F(eta)`; if `rho` is nonzero on the integer
//! generators of the dual, the responding characters separate torus points
//! and the parametrization is injective. Zeros elsewhere are reported as
//! diagnostics, and a weight with its own translation period breaks
//! injectivity regardless of the characters.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::comb::Decoration;
use crate::error::{Error, Result};
use crate::numeric::KahanComplex;
use crate::scheme::SchemeSpec;
use crate::tol;
use crate::weights::WeightFunction;

#[derive(Debug, Clone)]
pub struct InjectivityReport {
    /// `|rho|` at each integer generator of the dual lattice.
    pub generator_moduli: Vec<f64>,
    /// Smallest `|rho|` over the scan (excluding zero), with its location.
    pub min_rho_modulus: f64,
    pub minimizer: Vec<i64>,
    pub has_weight_period: bool,
    pub weight_period_witness: Option<Vec<f64>>,
    pub injective: bool,
    pub dual_search_radius: i64,
}

fn rho(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    z: &[i64],
    tol: f64,
) -> Result<Complex64> {
    let dual = scheme.basis().dual();
    let point = dual.apply(z);
    let (k, eta) = scheme.split(&point);
    let ft = f.fourier(eta, tol)?;
    let mut s = KahanComplex::default();
    for a in deco.atoms() {
        let phase: f64 = k.iter().zip(&a.shift_physical).map(|(x, y)| x * y).sum::<f64>()
            + eta.iter().zip(&a.shift_internal).map(|(x, y)| x * y).sum::<f64>();
        s.add(a.weight * Complex64::from_polar(1.0, -2.0 * PI * phase));
    }
    Ok(s.value() * ft)
}

/// Scan the dual lattice for vanishing character responses and decide
/// injectivity from the integer generators plus a weight period scan.
pub fn injectivity_report(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    dual_search_radius: i64,
    tol: f64,
) -> Result<InjectivityReport> {
    if !f.is_smooth() {
        return Err(Error::NonSmoothWeight);
    }
    if dual_search_radius < 1 {
        return Err(Error::InvalidParameter("dual search radius must be at least 1".into()));
    }
    let n = scheme.dim_total();
    let mut generator_moduli = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = vec![0i64; n];
        z[i] = 1;
        generator_moduli.push(rho(scheme, f, deco, &z, tol)?.norm());
    }

    let mut min_rho = f64::INFINITY;
    let mut minimizer = vec![0i64; n];
    let mut z = vec![-dual_search_radius; n];
    'scan: loop {
        if z.iter().any(|&v| v != 0) {
            let modulus = rho(scheme, f, deco, &z, tol)?.norm();
            if modulus < min_rho {
                min_rho = modulus;
                minimizer = z.clone();
            }
        }
        let mut axis = 0;
        loop {
            if axis == n {
                break 'scan;
            }
            z[axis] += 1;
            if z[axis] <= dual_search_radius {
                break;
            }
            z[axis] = -dual_search_radius;
            axis += 1;
        }
    }

    let (has_weight_period, weight_period_witness) = f.has_nontrivial_period(5.0, 1e-9);
    let injective = generator_moduli
        .iter()
        .all(|&v| v > tol::RHO_MODULUS_FLOOR)
        && !has_weight_period;
    Ok(InjectivityReport {
        generator_moduli,
        min_rho_modulus: min_rho,
        minimizer,
        has_weight_period,
        weight_period_witness,
        injective,
        dual_search_radius,
    })
}
