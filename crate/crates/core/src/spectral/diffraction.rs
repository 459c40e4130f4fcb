//! Pure point diffraction: peak positions on the dual lattice projection and
//! closed-form amplitudes, with a Fourier averaging estimator.
//!
//! Peaks sit at physical parts `k` of dual lattice points `(k, eta)`. The
//! amplitude is `S(k, eta) F(eta) / det` with the structure factor
//! `S = sum_j w_j e^{-2 pi i (k.s_j + eta.k_j)}` and `F` the weight's Fourier
//! transform; the intensity is its squared modulus and does not depend on
//! which hull element the comb was generated from.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{self, Write};

use crate::comb::{Decoration, WeightedComb};
use crate::error::{Error, Result};
use crate::lattice::BoxRegion;
use crate::numeric::KahanComplex;
use crate::scheme::SchemeSpec;
use crate::weights::WeightFunction;

#[derive(Debug, Clone)]
pub struct Peak {
    /// Physical wave vector.
    pub k: Vec<f64>,
    /// Integer coordinates of the dual lattice point.
    pub int_coords: Vec<i64>,
    /// Internal part of the dual lattice point.
    pub eta: Vec<f64>,
    pub amplitude: Complex64,
    pub intensity: f64,
}

#[derive(Debug, Clone)]
pub struct PeakList {
    peaks: Vec<Peak>,
    k_range: BoxRegion,
    intensity_floor: f64,
}

impl PeakList {
    /// Peaks sorted by decreasing intensity, ties broken by integer coordinates.
    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn k_range(&self) -> &BoxRegion {
        &self.k_range
    }

    pub fn intensity_floor(&self) -> f64 {
        self.intensity_floor
    }

    /// The peak whose wave vector is within `tol` of `k` in every coordinate.
    pub fn find(&self, k: &[f64], tol: f64) -> Option<&Peak> {
        self.peaks
            .iter()
            .find(|p| p.k.iter().zip(k).all(|(a, b)| (a - b).abs() <= tol))
    }

    /// CSV with one peak per row, 12 significant digits.
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        let d = self.k_range.dim();
        let total = if self.peaks.is_empty() { 0 } else { self.peaks[0].int_coords.len() };
        let m = total.saturating_sub(d);
        for i in 1..=d {
            write!(out, "k_{i},")?;
        }
        for i in 1..=total.max(d + m) {
            write!(out, "z_{i},")?;
        }
        for i in 1..=m {
            write!(out, "eta_{i},")?;
        }
        writeln!(out, "amplitude_re,amplitude_im,intensity")?;
        for p in &self.peaks {
            for x in &p.k {
                write!(out, "{x:.11e},")?;
            }
            for z in &p.int_coords {
                write!(out, "{z},")?;
            }
            for e in &p.eta {
                write!(out, "{e:.11e},")?;
            }
            writeln!(
                out,
                "{:.11e},{:.11e},{:.11e}",
                p.amplitude.re, p.amplitude.im, p.intensity
            )?;
        }
        Ok(())
    }
}

/// Internal cut radius beyond which every peak falls below the intensity
/// floor, derived from the weight's certified Fourier modulus decay. Errors
/// for weights without one (quadrature-only Fourier transforms).
pub fn default_internal_cut(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    intensity_floor: f64,
) -> Result<f64> {
    if !(intensity_floor > 0.0) {
        return Err(Error::InvalidParameter("intensity floor must be positive".into()));
    }
    let total = deco.total_abs_weight();
    if total == 0.0 {
        return Ok(1.0);
    }
    let threshold = scheme.det_abs() * intensity_floor.sqrt() / total;
    let bound = |r: f64| {
        f.ft_modulus_tail(r).ok_or_else(|| {
            Error::InvalidParameter(
                "internal cut must be given explicitly for weights without a certified Fourier decay"
                    .into(),
            )
        })
    };
    let mut hi = 1.0f64;
    while bound(hi)? > threshold {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvalidParameter(
                "intensity floor is too small to derive an internal cut".into(),
            ));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bound(mid)? <= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// All diffraction peaks with wave vector in `k_range`, internal part within
/// `internal_cut`, and intensity at or above `intensity_floor`.
pub fn diffraction_peaks(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    k_range: &BoxRegion,
    internal_cut: f64,
    intensity_floor: f64,
    tol: f64,
) -> Result<PeakList> {
    if !f.is_smooth() {
        return Err(Error::NonSmoothWeight);
    }
    let d = scheme.d();
    let m = scheme.m();
    if k_range.dim() != d {
        return Err(Error::InvalidParameter(
            "wave vector range dimension does not match the scheme".into(),
        ));
    }
    if !(internal_cut > 0.0) || !(intensity_floor >= 0.0) {
        return Err(Error::InvalidParameter(
            "internal cut must be positive and the intensity floor nonnegative".into(),
        ));
    }
    let dual = scheme.basis().dual();
    let cube = BoxRegion::centered_cube(m, internal_cut)?;
    let full = k_range.product(&cube);
    let points = dual.enumerate_in_box_default(&full)?;
    let det = scheme.det_abs();
    let mut peaks = Vec::new();
    for p in points {
        let (k, eta) = scheme.split(&p.point);
        let ft = f.fourier(eta, tol)?;
        let mut s = KahanComplex::default();
        for a in deco.atoms() {
            let phase: f64 = k.iter().zip(&a.shift_physical).map(|(x, y)| x * y).sum::<f64>()
                + eta.iter().zip(&a.shift_internal).map(|(x, y)| x * y).sum::<f64>();
            s.add(a.weight * Complex64::from_polar(1.0, -2.0 * PI * phase));
        }
        let amplitude = s.value() * ft / det;
        let intensity = amplitude.norm_sqr();
        if intensity >= intensity_floor {
            peaks.push(Peak {
                k: k.to_vec(),
                int_coords: p.int_coords.clone(),
                eta: eta.to_vec(),
                amplitude,
                intensity,
            });
        }
    }
    peaks.sort_by(|a, b| {
        b.intensity
            .partial_cmp(&a.intensity)
            .unwrap()
            .then_with(|| a.int_coords.cmp(&b.int_coords))
    });
    Ok(PeakList { peaks, k_range: k_range.clone(), intensity_floor })
}

/// Fourier averaging estimator `(1/vol) sum_x w_x e^{-2 pi i k.x}` over the
/// comb's box; converges to the peak amplitude (up to a unimodular factor
/// fixed by the hull element) at peak positions and to zero elsewhere.
pub fn fourier_bohr_estimate(comb: &WeightedComb, k: &[f64]) -> Complex64 {
    assert_eq!(k.len(), comb.d(), "wave vector has wrong dimension");
    let mut acc = KahanComplex::default();
    for a in comb.atoms() {
        let phase: f64 = k.iter().zip(&a.position).map(|(x, y)| x * y).sum();
        acc.add(a.weight * Complex64::from_polar(1.0, -2.0 * PI * phase));
    }
    acc.value() / comb.region().volume()
}
