//! Side-by-side validation of closed-form spectral quantities against their
//! independent estimators on finite boxes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::comb::{generate_comb, Decoration};
use crate::error::{Error, Result};
use crate::lattice::BoxRegion;
use crate::scheme::SchemeSpec;
use crate::weights::WeightFunction;

use super::autocorr::{autocorr_closed, autocorr_estimate};
use super::diffraction::{default_internal_cut, diffraction_peaks, fourier_bohr_estimate};
use super::{density_closed, weyl_average};

/// One closed-vs-estimated line item. `closed` and `estimated` are moduli;
/// the relative error is taken on the complex values when the phases are
/// comparable and on the moduli otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct QuantityComparison {
    pub name: String,
    pub closed: f64,
    pub estimated: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub box_volume: f64,
    pub quantities: Vec<QuantityComparison>,
    pub skipped: Vec<String>,
    pub all_pass: bool,
}

#[derive(Debug, Clone)]
pub struct CompareSettings {
    /// Estimation box for every estimator.
    pub region: BoxRegion,
    pub displacement_range: BoxRegion,
    pub k_range: BoxRegion,
    pub trunc_eps: f64,
    pub quad_tol: f64,
    pub match_tol: f64,
    pub intensity_floor: f64,
    /// Internal cut for diffraction enumeration; derived from the floor when absent.
    pub internal_cut: Option<f64>,
    /// Internal cut for the autocorrelation table; derived from the weight when absent.
    pub autocorr_internal_cut: Option<f64>,
    pub top_n_autocorr: usize,
    pub top_n_peaks: usize,
    pub density_rel_tol: f64,
    pub autocorr_rel_tol: f64,
    pub diffraction_rel_tol: f64,
    /// Random hull elements probed for density uniformity.
    pub uniformity_probes: usize,
    pub seed: u64,
    pub workers: usize,
}

impl CompareSettings {
    pub fn defaults(scheme: &SchemeSpec) -> Self {
        let d = scheme.d();
        CompareSettings {
            region: BoxRegion::new(vec![0.0; d], vec![1e4; d]).expect("static box"),
            displacement_range: BoxRegion::centered_cube(d, 50.0).expect("static box"),
            k_range: BoxRegion::centered_cube(d, 10.0).expect("static box"),
            trunc_eps: 1e-12,
            quad_tol: 1e-9,
            match_tol: 1e-6,
            intensity_floor: 1e-8,
            internal_cut: None,
            autocorr_internal_cut: None,
            top_n_autocorr: 15,
            top_n_peaks: 10,
            density_rel_tol: 0.01,
            autocorr_rel_tol: 0.02,
            diffraction_rel_tol: 0.03,
            uniformity_probes: 10,
            seed: 20_26,
            workers: 8,
        }
    }
}

fn line(
    name: String,
    closed: Complex64,
    estimated: Complex64,
    tolerance: f64,
) -> QuantityComparison {
    let abs_err = (closed - estimated).norm();
    let scale = closed.norm().max(f64::MIN_POSITIVE);
    let rel_err = abs_err / scale;
    QuantityComparison {
        name,
        closed: closed.norm(),
        estimated: estimated.norm(),
        abs_err,
        rel_err,
        tolerance,
        pass: rel_err <= tolerance,
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    parts.join(",")
}

/// Run every applicable closed-vs-estimator comparison. Sharp windows keep
/// the density lines and skip the spectral ones; everything else runs the
/// full battery. Deterministic for a fixed seed, independent of `workers`.
pub fn run_comparison(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    settings: &CompareSettings,
) -> Result<ComparisonReport> {
    let mut quantities = Vec::new();
    let mut skipped = Vec::new();
    let xi0 = scheme.torus_zero();
    let comb = generate_comb(scheme, f, deco, &xi0, &settings.region, settings.trunc_eps)?;
    let rho = density_closed(scheme, f, deco, settings.quad_tol)?;
    quantities.push(line(
        "density".into(),
        rho,
        weyl_average(&comb),
        settings.density_rel_tol,
    ));

    // density over random hull elements: the worst probe is reported
    if settings.uniformity_probes > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let probes: Vec<crate::scheme::TorusPoint> = (0..settings.uniformity_probes)
            .map(|_| {
                let frac: Vec<f64> =
                    (0..scheme.dim_total()).map(|_| rng.gen_range(0.0..1.0)).collect();
                let lift = scheme.basis().apply_real(&frac);
                let (s, k) = scheme.split(&lift);
                scheme.torus_point(s, k)
            })
            .collect();
        let combs = parallel_map(settings.workers, &probes, |xi| {
            generate_comb(scheme, f, deco, xi, &settings.region, settings.trunc_eps)
        });
        let mut worst: Option<QuantityComparison> = None;
        for (i, c) in combs.into_iter().enumerate() {
            let c = c?;
            let q = line(
                format!("density probe {i}"),
                rho,
                weyl_average(&c),
                settings.density_rel_tol,
            );
            if worst.as_ref().is_none_or(|w| q.rel_err > w.rel_err) {
                worst = Some(q);
            }
        }
        let mut worst = worst.expect("at least one probe");
        worst.name = format!("density uniformity (worst of {})", settings.uniformity_probes);
        quantities.push(worst);
    }

    if f.is_smooth() {
        // autocorrelation: top closed coefficients against the pair estimator
        let autocorr_cut = match settings.autocorr_internal_cut {
            Some(v) => v,
            None => {
                2.0 * f.truncation_radius(
                    scheme,
                    settings.trunc_eps,
                    settings.region.volume().max(1.0),
                )?
            }
        };
        let closed_table = autocorr_closed(
            scheme,
            f,
            deco,
            &settings.displacement_range,
            autocorr_cut,
            settings.quad_tol,
        )?;
        let est_table = autocorr_estimate(&comb, &settings.displacement_range, settings.match_tol)?;
        for e in closed_table.entries().iter().take(settings.top_n_autocorr) {
            let est = est_table
                .find(&e.displacement, settings.match_tol)
                .map(|x| x.coefficient)
                .unwrap_or_default();
            quantities.push(line(
                format!("autocorr u=({})", fmt_vec(&e.displacement)),
                e.coefficient,
                est,
                settings.autocorr_rel_tol,
            ));
        }

        // diffraction: top closed peaks against Fourier averaging
        let cut = match settings.internal_cut {
            Some(v) => v,
            None => default_internal_cut(scheme, f, deco, settings.intensity_floor)?,
        };
        let peaks = diffraction_peaks(
            scheme,
            f,
            deco,
            &settings.k_range,
            cut,
            settings.intensity_floor,
            settings.quad_tol,
        )?;
        let top: Vec<_> = peaks.peaks().iter().take(settings.top_n_peaks).collect();
        let estimates = parallel_map(settings.workers, &top, |p| {
            Ok::<_, Error>(fourier_bohr_estimate(&comb, &p.k))
        });
        for (p, est) in top.iter().zip(estimates) {
            quantities.push(line(
                format!("peak k=({})", fmt_vec(&p.k)),
                p.amplitude,
                est?,
                settings.diffraction_rel_tol,
            ));
        }
    } else {
        skipped.push("autocorrelation (weight is not smooth)".into());
        skipped.push("diffraction (weight is not smooth)".into());
    }

    let all_pass = quantities.iter().all(|q| q.pass);
    Ok(ComparisonReport {
        box_volume: settings.region.volume(),
        quantities,
        skipped,
        all_pass,
    })
}

/// Apply `op` to every item on a small thread pool, preserving order.
fn parallel_map<T: Sync, U: Send, F>(workers: usize, items: &[T], op: F) -> Vec<U>
where
    F: Fn(&T) -> U + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(&op).collect();
    }
    let op_ref = &op;
    let mut slots: Vec<Option<U>> = (0..items.len()).map(|_| None).collect();
    let outputs: Vec<Vec<(usize, U)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    items
                        .iter()
                        .enumerate()
                        .skip(w)
                        .step_by(workers)
                        .map(|(i, item)| (i, op_ref(item)))
                        .collect::<Vec<(usize, U)>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    for out in outputs {
        for (i, v) in out {
            slots[i] = Some(v);
        }
    }
    slots.into_iter().map(|v| v.expect("every slot filled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeBasis, PHI};
    use crate::scheme::{validate_scheme, ValidationOptions};

    fn golden() -> SchemeSpec {
        let basis = LatticeBasis::from_columns(&[vec![1.0, 1.0], vec![PHI, -1.0 / PHI]]).unwrap();
        validate_scheme(1, 1, basis, &ValidationOptions::default()).unwrap()
    }

    fn quick_settings(scheme: &SchemeSpec) -> CompareSettings {
        let mut s = CompareSettings::defaults(scheme);
        s.region = BoxRegion::new(vec![0.0], vec![2000.0]).unwrap();
        s.displacement_range = BoxRegion::centered_cube(1, 15.0).unwrap();
        s.k_range = BoxRegion::centered_cube(1, 3.0).unwrap();
        s.top_n_autocorr = 8;
        s.top_n_peaks = 6;
        s.uniformity_probes = 4;
        s.workers = 4;
        s
    }

    #[test]
    fn golden_gaussian_battery_passes() {
        let s = golden();
        let f = WeightFunction::gaussian(1, 1.0).unwrap();
        let deco = Decoration::single_default(&s);
        let settings = quick_settings(&s);
        let report = run_comparison(&s, &f, &deco, &settings).unwrap();
        assert!(report.skipped.is_empty());
        // density + uniformity + autocorr + peaks
        assert_eq!(report.quantities.len(), 2 + 8 + 6);
        for q in &report.quantities {
            assert!(q.pass, "{} rel_err {}", q.name, q.rel_err);
        }
        assert!(report.all_pass);
    }

    #[test]
    fn sharp_window_runs_density_only() {
        let s = golden();
        let w = BoxRegion::new(vec![-0.5], vec![0.5]).unwrap();
        let f = WeightFunction::sharp_window(w).unwrap();
        let deco = Decoration::single_default(&s);
        let mut settings = quick_settings(&s);
        settings.region = BoxRegion::new(vec![0.0], vec![5000.0]).unwrap();
        let report = run_comparison(&s, &f, &deco, &settings).unwrap();
        assert_eq!(report.skipped.len(), 2);
        assert_eq!(report.quantities.len(), 2);
        assert!(report.all_pass, "{:?}", report.quantities);
    }

    #[test]
    fn impossible_tolerance_fails_the_report() {
        let s = golden();
        let f = WeightFunction::gaussian(1, 1.0).unwrap();
        let deco = Decoration::single_default(&s);
        let mut settings = quick_settings(&s);
        settings.region = BoxRegion::new(vec![0.0], vec![500.0]).unwrap();
        settings.density_rel_tol = 1e-12;
        settings.uniformity_probes = 0;
        settings.top_n_autocorr = 2;
        settings.top_n_peaks = 2;
        let report = run_comparison(&s, &f, &deco, &settings).unwrap();
        assert!(!report.all_pass);
        assert!(!report.quantities[0].pass);
    }

    #[test]
    fn report_is_deterministic_across_worker_counts() {
        let s = golden();
        let f = WeightFunction::gaussian(1, 1.0).unwrap();
        let deco = Decoration::single_default(&s);
        let mut a_settings = quick_settings(&s);
        a_settings.region = BoxRegion::new(vec![0.0], vec![800.0]).unwrap();
        a_settings.workers = 1;
        let mut b_settings = a_settings.clone();
        b_settings.workers = 6;
        let a = run_comparison(&s, &f, &deco, &a_settings).unwrap();
        let b = run_comparison(&s, &f, &deco, &b_settings).unwrap();
        assert_eq!(a.quantities.len(), b.quantities.len());
        for (x, y) in a.quantities.iter().zip(&b.quantities) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.closed, y.closed);
            assert_eq!(x.estimated, y.estimated);
            assert_eq!(x.rel_err, y.rel_err);
        }
    }
}
