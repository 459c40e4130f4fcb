//! Autocorrelation of weighted combs, closed form and pair-sum estimator.
//!
//! The autocorrelation is itself a pure point measure supported on
//! differences of comb positions. In closed form the coefficient at
//! displacement `phys(z) + s_i - s_j` collects
//! `w_i conj(w_j) (f * f~)(int(z) + k_i - k_j) / det` over all decoration
//! pairs `(i, j)` and lattice points `z` landing there.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::comb::{Decoration, WeightedComb};
use crate::error::{Error, Result};
use crate::lattice::BoxRegion;
use crate::numeric::KahanComplex;
use crate::scheme::SchemeSpec;
use crate::tol;
use crate::weights::WeightFunction;

/// One autocorrelation atom: `coefficient` is the normalized mass at
/// `displacement`; `int_coords` holds the lattice point behind it for closed
/// tables and stays empty for estimated ones.
#[derive(Debug, Clone)]
pub struct AutocorrEntry {
    pub displacement: Vec<f64>,
    pub int_coords: Vec<i64>,
    pub coefficient: Complex64,
}

#[derive(Debug, Clone)]
pub struct AutocorrelationTable {
    entries: Vec<AutocorrEntry>,
    displacement_range: BoxRegion,
}

impl AutocorrelationTable {
    /// Entries sorted by decreasing coefficient modulus, then by displacement.
    pub fn entries(&self) -> &[AutocorrEntry] {
        &self.entries
    }

    pub fn displacement_range(&self) -> &BoxRegion {
        &self.displacement_range
    }

    /// The entry whose displacement is within `tol` of `u` in every coordinate.
    pub fn find(&self, u: &[f64], tol: f64) -> Option<&AutocorrEntry> {
        self.entries
            .iter()
            .find(|e| e.displacement.iter().zip(u).all(|(a, b)| (a - b).abs() <= tol))
    }

    /// CSV with one displacement per row, 12 significant digits.
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        let d = self.displacement_range.dim();
        for i in 1..=d {
            write!(out, "u_{i},")?;
        }
        writeln!(out, "coeff_re,coeff_im")?;
        for e in &self.entries {
            for x in &e.displacement {
                write!(out, "{x:.11e},")?;
            }
            writeln!(out, "{:.11e},{:.11e}", e.coefficient.re, e.coefficient.im)?;
        }
        Ok(())
    }
}

fn sort_entries(entries: &mut [AutocorrEntry]) {
    entries.sort_by(|a, b| {
        b.coefficient
            .norm()
            .partial_cmp(&a.coefficient.norm())
            .unwrap()
            .then_with(|| {
                a.displacement
                    .iter()
                    .zip(&b.displacement)
                    .map(|(x, y)| x.partial_cmp(y).unwrap())
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
}

/// Closed-form autocorrelation over all displacements in `displacement_range`
/// whose internal argument stays inside the cut radius.
pub fn autocorr_closed(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    displacement_range: &BoxRegion,
    internal_cut: f64,
    tol: f64,
) -> Result<AutocorrelationTable> {
    if !f.is_smooth() {
        return Err(Error::NonSmoothWeight);
    }
    let d = scheme.d();
    let m = scheme.m();
    if displacement_range.dim() != d {
        return Err(Error::InvalidParameter(
            "displacement range dimension does not match the scheme".into(),
        ));
    }
    if !(internal_cut > 0.0) {
        return Err(Error::InvalidParameter("internal cut must be positive".into()));
    }
    let mut merged: BTreeMap<Vec<i64>, (Vec<f64>, Vec<i64>, KahanComplex)> = BTreeMap::new();
    for ai in deco.atoms() {
        for aj in deco.atoms() {
            let pair_w = ai.weight * aj.weight.conj();
            if pair_w.norm() == 0.0 {
                continue;
            }
            let shift: Vec<f64> = ai
                .shift_physical
                .iter()
                .zip(&aj.shift_physical)
                .map(|(a, b)| a - b)
                .collect();
            let internal_shift: Vec<f64> = ai
                .shift_internal
                .iter()
                .zip(&aj.shift_internal)
                .map(|(a, b)| a - b)
                .collect();
            let neg_shift: Vec<f64> = shift.iter().map(|v| -v).collect();
            let phys_box = displacement_range.translate(&neg_shift);
            let neg_internal: Vec<f64> = internal_shift.iter().map(|v| -v).collect();
            let cube = BoxRegion::centered_cube(m, internal_cut)?.translate(&neg_internal);
            let points = scheme
                .basis()
                .enumerate_in_box_default(&phys_box.product(&cube))?;
            for p in points {
                let (phys, int) = scheme.split(&p.point);
                let mut arg = vec![0.0; m];
                for a in 0..m {
                    arg[a] = int[a] + internal_shift[a];
                }
                let corr = f.self_correlation(&arg, tol)?;
                let contrib = pair_w * corr / scheme.det_abs();
                if contrib.norm() == 0.0 {
                    continue;
                }
                let mut u = vec![0.0; d];
                let mut key = vec![0i64; d];
                for a in 0..d {
                    u[a] = phys[a] + shift[a];
                    key[a] = (u[a] / tol::POSITION_MERGE).round() as i64;
                }
                merged
                    .entry(key)
                    .or_insert_with(|| (u, p.int_coords.clone(), KahanComplex::default()))
                    .2
                    .add(contrib);
            }
        }
    }
    let mut entries: Vec<AutocorrEntry> = merged
        .into_values()
        .filter_map(|(displacement, int_coords, acc)| {
            let coefficient = acc.value();
            (coefficient.norm() != 0.0).then_some(AutocorrEntry {
                displacement,
                int_coords,
                coefficient,
            })
        })
        .collect();
    sort_entries(&mut entries);
    Ok(AutocorrelationTable { entries, displacement_range: displacement_range.clone() })
}

/// Pair-sum estimator of the autocorrelation from a finite comb.
///
/// Each ordered atom pair `(x, y)` contributes `w_x conj(w_y)` at `x - y`;
/// displacements closer than `match_tol` merge. Coefficients are normalized
/// by the overlap volume `|box cap (box + u)|`, which removes the finite-box
/// boundary bias of the plain `1/vol` normalization.
pub fn autocorr_estimate(
    comb: &WeightedComb,
    displacement_range: &BoxRegion,
    match_tol: f64,
) -> Result<AutocorrelationTable> {
    let d = comb.d();
    if displacement_range.dim() != d {
        return Err(Error::InvalidParameter(
            "displacement range dimension does not match the comb".into(),
        ));
    }
    if !(match_tol > 0.0) {
        return Err(Error::InvalidParameter("match tolerance must be positive".into()));
    }
    let atoms = comb.atoms();
    let mut merged: BTreeMap<Vec<i64>, (Vec<f64>, KahanComplex)> = BTreeMap::new();
    // atoms are sorted by position, so candidate partners for the first axis
    // window can be found by a moving lower bound
    let lo0 = displacement_range.lo()[0];
    let hi0 = displacement_range.hi()[0];
    let mut start = 0usize;
    for x in atoms {
        // partners y with x - y inside the range need y[0] in [x0 - hi0, x0 - lo0]
        let y_min = x.position[0] - hi0 - match_tol;
        let y_max = x.position[0] - lo0 + match_tol;
        while start < atoms.len() && atoms[start].position[0] < y_min {
            start += 1;
        }
        for y in &atoms[start..] {
            if y.position[0] > y_max {
                break;
            }
            let u: Vec<f64> =
                x.position.iter().zip(&y.position).map(|(xa, ya)| xa - ya).collect();
            if !displacement_range.contains(&u, match_tol) {
                continue;
            }
            let w = x.weight * y.weight.conj();
            if w.norm() == 0.0 {
                continue;
            }
            let mut key = vec![0i64; d];
            for a in 0..d {
                key[a] = (u[a] / match_tol).round() as i64;
            }
            merged
                .entry(key)
                .or_insert_with(|| (u, KahanComplex::default()))
                .1
                .add(w);
        }
    }
    // merge adjacent clusters that quantization may have split
    let mut clustered: Vec<(Vec<f64>, Complex64)> = Vec::new();
    for (u, acc) in merged.into_values().map(|(u, a)| (u, a.value())) {
        if let Some(last) = clustered.last_mut() {
            if last.0.iter().zip(&u).all(|(a, b)| (a - b).abs() <= match_tol) {
                last.1 += acc;
                continue;
            }
        }
        clustered.push((u, acc));
    }
    let region = comb.region();
    let mut entries: Vec<AutocorrEntry> = clustered
        .into_iter()
        .filter_map(|(u, total)| {
            let mut overlap = 1.0;
            for (a, ua) in u.iter().enumerate() {
                let len = region.hi()[a] - region.lo()[a];
                overlap *= (len - ua.abs()).max(0.0);
            }
            if overlap <= 0.0 {
                return None;
            }
            let coefficient = total / overlap;
            (coefficient.norm() != 0.0).then_some(AutocorrEntry {
                displacement: u,
                int_coords: Vec::new(),
                coefficient,
            })
        })
        .collect();
    sort_entries(&mut entries);
    Ok(AutocorrelationTable { entries, displacement_range: displacement_range.clone() })
}
