//! Statistical almost periods of a weighted comb.
//!
//! A lattice translation `t = phys(z)` with small internal part `t* = int(z)`
//! nearly reproduces the comb: the translated-minus-original difference has
//! atom weights `f(l* - t*) - f(l*)`, which vanish as `t* -> 0`. Candidates
//! are lattice points with small internal norm inside a search box;
//! verification smooths the exact difference against a wide normalized bump
//! kernel and samples its sup on a grid. Candidates verify when that sup
//! stays at or below `eps`.

use std::collections::BTreeMap;

use crate::comb::Decoration;
use crate::error::{Error, Result};
use crate::lattice::BoxRegion;
use crate::numeric::Kahan;
use crate::scheme::SchemeSpec;
use crate::weights::WeightFunction;

#[derive(Debug, Clone)]
pub struct AlmostPeriod {
    /// The physical translation.
    pub t: Vec<f64>,
    /// Integer coordinates of the lattice point behind it.
    pub int_coords: Vec<i64>,
    /// Internal norm `|t*|_inf`.
    pub internal_norm: f64,
    /// Sampled sup of the smoothed difference.
    pub verified_sup: f64,
}

#[derive(Debug, Clone)]
pub struct AlmostPeriodReport {
    /// Verified periods ordered by physical position.
    pub periods: Vec<AlmostPeriod>,
    pub eps: f64,
    /// Internal norm cutoff used to collect candidates.
    pub delta: f64,
    pub kernel_scale: f64,
    pub candidates_considered: usize,
    /// Largest gap between consecutive verified translations (one dimension only).
    pub max_gap: Option<f64>,
    pub search: BoxRegion,
}

/// Candidate collection plus verification. `delta` overrides the internal
/// cutoff; by default it is sized so the search box holds about
/// `max_candidates` candidates. Verification is parallel over candidates and
/// independent of the worker count.
#[allow(clippy::too_many_arguments)]
pub fn almost_periods(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    search: &BoxRegion,
    eps: f64,
    kernel_scale: f64,
    delta: Option<f64>,
    max_candidates: usize,
    workers: usize,
) -> Result<AlmostPeriodReport> {
    if !f.is_smooth() {
        return Err(Error::NonSmoothWeight);
    }
    let d = scheme.d();
    let m = scheme.m();
    if search.dim() != d {
        return Err(Error::InvalidParameter(
            "search box dimension does not match the scheme".into(),
        ));
    }
    if !(eps > 0.0) || !(kernel_scale > 0.0) || max_candidates == 0 {
        return Err(Error::InvalidParameter(
            "eps, kernel scale, and candidate budget must be positive".into(),
        ));
    }
    let delta = match delta {
        Some(v) if v > 0.0 => v,
        Some(_) => {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        None => {
            let expected = (max_candidates as f64 * scheme.det_abs() / search.volume())
                .powf(1.0 / m as f64)
                / 2.0;
            expected.max(1e-6)
        }
    };

    // candidates: nonzero lattice points in the search box with small star image
    let cube = BoxRegion::centered_cube(m, delta)?;
    let mut candidates = scheme
        .basis()
        .enumerate_in_box_default(&search.product(&cube))?;
    candidates.retain(|p| p.int_coords.iter().any(|&v| v != 0));
    if candidates.is_empty() {
        return Err(Error::NoCandidatesInRange);
    }
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    candidates.sort_by(|a, b| {
        let (_, ia) = scheme.split(&a.point);
        let (_, ib) = scheme.split(&b.point);
        inf(ia)
            .partial_cmp(&inf(ib))
            .unwrap()
            .then_with(|| a.int_coords.cmp(&b.int_coords))
    });
    candidates.truncate(max_candidates);
    let candidates_considered = candidates.len();
    let delta_max = candidates
        .iter()
        .map(|p| inf(scheme.split(&p.point).1))
        .fold(0.0, f64::max);

    // smoothing kernel: mass-normalized bump of half-width kernel_scale
    let kernel = WeightFunction::bump(d, kernel_scale)?;
    let kernel_mass = kernel.integral(1e-9)?.re;
    // sample window and grid, anchored at the origin
    let window = BoxRegion::centered_cube(d, 2.0 * kernel_scale)?;
    let grid_per_axis: i64 = 50;

    // shared atom set: lattice points feeding any kernel evaluation on the window
    let max_shift_phys = deco
        .atoms()
        .iter()
        .map(|a| inf(&a.shift_physical))
        .fold(0.0, f64::max);
    let max_shift_int = deco
        .atoms()
        .iter()
        .map(|a| inf(&a.shift_internal))
        .fold(0.0, f64::max);
    let kernel_sup = 1.0 / kernel_mass;
    let comb_scale = (2.0 * kernel_scale + 2.0 * max_shift_phys).powi(d as i32)
        * kernel_sup
        * 2.0
        * deco.total_abs_weight().max(1.0);
    let internal_radius =
        f.truncation_radius(scheme, eps * 1e-3, comb_scale.max(1.0))? + delta_max + max_shift_int;
    let pad = kernel_scale + max_shift_phys;
    let phys_box = BoxRegion::new(
        window.lo().iter().map(|v| v - pad).collect(),
        window.hi().iter().map(|v| v + pad).collect(),
    )?;
    let internal_box = BoxRegion::centered_cube(m, internal_radius)?;
    let lattice_points = scheme
        .basis()
        .enumerate_in_box_default(&phys_box.product(&internal_box))?;

    // flatten (lattice point, decoration atom) into positions and internal args
    struct SmoothAtom {
        position: Vec<f64>,
        internal: Vec<f64>,
        weight: num_complex::Complex64,
    }
    let mut atoms = Vec::with_capacity(lattice_points.len() * deco.atoms().len());
    for p in &lattice_points {
        let (phys, int) = scheme.split(&p.point);
        for a in deco.atoms() {
            atoms.push(SmoothAtom {
                position: phys
                    .iter()
                    .zip(&a.shift_physical)
                    .map(|(x, s)| x + s)
                    .collect(),
                internal: int
                    .iter()
                    .zip(&a.shift_internal)
                    .map(|(x, k)| x + k)
                    .collect(),
                weight: a.weight,
            });
        }
    }

    // grid points over the window
    let mut grid: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0i64; d];
    'grid: loop {
        grid.push(
            idx.iter()
                .enumerate()
                .map(|(a, &i)| {
                    window.lo()[a]
                        + (window.hi()[a] - window.lo()[a]) * i as f64 / grid_per_axis as f64
                })
                .collect(),
        );
        let mut axis = 0;
        loop {
            if axis == d {
                break 'grid;
            }
            idx[axis] += 1;
            if idx[axis] <= grid_per_axis {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }

    // kernel matrix: grid point x atom, computed once
    let mut kernel_rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(grid.len());
    for x in &grid {
        let mut row = Vec::new();
        for (ai, atom) in atoms.iter().enumerate() {
            let dx: Vec<f64> = x.iter().zip(&atom.position).map(|(a, b)| a - b).collect();
            let v = kernel.eval(&dx).re / kernel_mass;
            if v != 0.0 {
                row.push((ai, v));
            }
        }
        kernel_rows.push(row);
    }
    let base_values: Vec<num_complex::Complex64> =
        atoms.iter().map(|a| a.weight * f.eval(&a.internal)).collect();

    // verify candidates in parallel; the result only depends on the candidate
    let verify = |cand_idx: usize| -> (f64, f64) {
        let p = &candidates[cand_idx];
        let (_, t_star) = scheme.split(&p.point);
        let mut shifted = Vec::with_capacity(atoms.len());
        for a in &atoms {
            let arg: Vec<f64> = a.internal.iter().zip(t_star).map(|(v, ts)| v - ts).collect();
            shifted.push(a.weight * f.eval(&arg));
        }
        let mut sup = 0.0f64;
        for row in &kernel_rows {
            let mut acc_re = Kahan::default();
            let mut acc_im = Kahan::default();
            for &(ai, kv) in row {
                let dw = shifted[ai] - base_values[ai];
                acc_re.add(dw.re * kv);
                acc_im.add(dw.im * kv);
            }
            let v = (acc_re.value().powi(2) + acc_im.value().powi(2)).sqrt();
            sup = sup.max(v);
        }
        (inf(t_star), sup)
    };
    let workers = workers.max(1).min(candidates.len());
    let mut results: Vec<(f64, f64)> = vec![(0.0, 0.0); candidates.len()];
    if workers <= 1 {
        for (i, slot) in results.iter_mut().enumerate() {
            *slot = verify(i);
        }
    } else {
        let chunks: Vec<Vec<usize>> = (0..workers)
            .map(|w| (0..candidates.len()).filter(|i| i % workers == w).collect())
            .collect();
        let verify_ref = &verify;
        let outputs: Vec<Vec<(usize, (f64, f64))>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|&i| (i, verify_ref(i)))
                            .collect::<Vec<(usize, (f64, f64))>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("verifier panicked")).collect()
        });
        for out in outputs {
            for (i, r) in out {
                results[i] = r;
            }
        }
    }

    let mut periods: Vec<AlmostPeriod> = candidates
        .iter()
        .zip(&results)
        .filter(|(_, (_, sup))| *sup <= eps)
        .map(|(p, (internal_norm, sup))| {
            let (phys, _) = scheme.split(&p.point);
            AlmostPeriod {
                t: phys.to_vec(),
                int_coords: p.int_coords.clone(),
                internal_norm: *internal_norm,
                verified_sup: *sup,
            }
        })
        .collect();
    periods.sort_by(|a, b| {
        a.t.iter()
            .zip(&b.t)
            .map(|(x, y)| x.partial_cmp(y).unwrap())
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let max_gap = (d == 1 && periods.len() >= 2).then(|| {
        periods
            .windows(2)
            .map(|w| w[1].t[0] - w[0].t[0])
            .fold(0.0f64, f64::max)
    });
    Ok(AlmostPeriodReport {
        periods,
        eps,
        delta,
        kernel_scale,
        candidates_considered,
        max_gap,
        search: search.clone(),
    })
}

/// Verified periods per candidate internal norm, for kernel scale calibration.
pub fn amplification_profile(report: &AlmostPeriodReport) -> BTreeMap<String, f64> {
    report
        .periods
        .iter()
        .map(|p| (format!("{:.6}", p.internal_norm), p.verified_sup))
        .collect()
}
