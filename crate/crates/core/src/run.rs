//! Orchestration for the command-line operations: build the objects a config
//! describes, run one operation, write its artifacts into the output
//! directory, and return a JSON summary for stdout.

use num_complex::Complex64;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::comb::{generate_comb, Decoration, WeightedComb};
use crate::config::{ConfigError, RunConfig};
use crate::error::Error;
use crate::lattice::BoxRegion;
use crate::scheme::SchemeSpec;
use crate::spectral::almost::almost_periods;
use crate::spectral::autocorr::autocorr_closed;
use crate::spectral::compare::run_comparison;
use crate::spectral::diffraction::{
    default_internal_cut, diffraction_peaks, fourier_bohr_estimate, PeakList,
};
use crate::spectral::injectivity::injectivity_report;
use crate::spectral::density_closed;
use crate::weights::WeightFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Validate,
    Generate,
    Density,
    Autocorr,
    Diffract,
    FourierBohr,
    AlmostPeriods,
    Injectivity,
    Compare,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    /// Process exit code the CLI maps this error to. A failed comparison is
    /// not an error; the CLI reads `all_pass` from the summary instead.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Domain(_) | RunError::Io { .. } => 3,
        }
    }

    /// Machine-readable error document printed to stderr.
    pub fn error_json(&self) -> Value {
        let (kind, code) = match self {
            RunError::Config(ConfigError::Parse { .. }) => ("config", "parse".to_string()),
            RunError::Config(ConfigError::Invalid { .. }) => {
                ("config", "invalid_field".to_string())
            }
            RunError::Config(ConfigError::Io(_)) => ("config", "io".to_string()),
            RunError::Domain(e) => ("domain", e.code().to_string()),
            RunError::Io { .. } => ("io", "io".to_string()),
        };
        json!({"error": {"kind": kind, "code": code, "message": self.to_string()}})
    }
}

fn io_err(path: &Path, source: std::io::Error) -> RunError {
    RunError::Io { path: path.display().to_string(), source }
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn box_json(b: &BoxRegion) -> Value {
    json!({"lo": b.lo(), "hi": b.hi()})
}

/// Output sink honoring the `output.formats` selection. Every file written
/// is recorded so the summary can list it.
struct Artifacts {
    dir: PathBuf,
    csv: bool,
    json: bool,
    written: Vec<String>,
}

impl Artifacts {
    fn new(cfg: &RunConfig, dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            csv: cfg.output.formats.iter().any(|f| f == "csv"),
            json: cfg.output.formats.iter().any(|f| f == "json"),
            written: Vec::new(),
        })
    }

    fn write_json(&mut self, name: &str, value: &Value) -> Result<(), RunError> {
        if !self.json {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).expect("serializable value");
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    fn write_csv<F>(&mut self, name: &str, emit: F) -> Result<(), RunError>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        if !self.csv {
            return Ok(());
        }
        let path = self.dir.join(name);
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut buf = std::io::BufWriter::new(file);
        emit(&mut buf).and_then(|_| buf.flush()).map_err(|e| io_err(&path, e))?;
        self.written.push(path.display().to_string());
        Ok(())
    }
}

struct Built {
    scheme: SchemeSpec,
    f: WeightFunction,
    deco: Decoration,
}

fn build(cfg: &RunConfig) -> Result<Built, RunError> {
    let scheme = cfg.build_scheme()?;
    let f = cfg.build_weight()?;
    let deco = cfg.build_decoration(&scheme)?;
    Ok(Built { scheme, f, deco })
}

fn build_comb(cfg: &RunConfig, b: &Built, region: &BoxRegion) -> Result<WeightedComb, RunError> {
    let origin = cfg.build_origin(&b.scheme);
    Ok(generate_comb(&b.scheme, &b.f, &b.deco, &origin, region, cfg.thresholds.eps_trunc)?)
}

fn autocorr_cut(cfg: &RunConfig, b: &Built, region: &BoxRegion) -> Result<f64, RunError> {
    match cfg.thresholds.autocorr_internal_cut {
        Some(v) => Ok(v),
        None => Ok(2.0
            * b.f.truncation_radius(&b.scheme, cfg.thresholds.eps_trunc, region.volume().max(1.0))?),
    }
}

fn diffraction_cut(cfg: &RunConfig, b: &Built) -> Result<f64, RunError> {
    match cfg.thresholds.internal_cut {
        Some(v) => Ok(v),
        None => Ok(default_internal_cut(
            &b.scheme,
            &b.f,
            &b.deco,
            cfg.thresholds.intensity_floor,
        )?),
    }
}

fn closed_peaks(cfg: &RunConfig, b: &Built) -> Result<(PeakList, f64), RunError> {
    let cut = diffraction_cut(cfg, b)?;
    let peaks = diffraction_peaks(
        &b.scheme,
        &b.f,
        &b.deco,
        &cfg.k_range()?,
        cut,
        cfg.thresholds.intensity_floor,
        cfg.thresholds.quad_tol,
    )?;
    Ok((peaks, cut))
}

/// Run one operation against a parsed config. `out_dir` is the resolved
/// output directory (the CLI lets a flag override the config). The returned
/// JSON object is the stdout summary; detailed artifacts go to files.
pub fn execute(op: Operation, cfg: &RunConfig, out_dir: &Path) -> Result<Value, RunError> {
    let mut art = Artifacts::new(cfg, out_dir)?;
    let mut value = match op {
        Operation::Validate => op_validate(cfg, &mut art)?,
        Operation::Generate => op_generate(cfg, &mut art)?,
        Operation::Density => op_density(cfg, &mut art)?,
        Operation::Autocorr => op_autocorr(cfg, &mut art)?,
        Operation::Diffract => op_diffract(cfg, &mut art)?,
        Operation::FourierBohr => op_fourier_bohr(cfg, &mut art)?,
        Operation::AlmostPeriods => op_almost_periods(cfg, &mut art)?,
        Operation::Injectivity => op_injectivity(cfg, &mut art)?,
        Operation::Compare => op_compare(cfg, &mut art)?,
    };
    value["outputs"] = json!(art.written);
    Ok(value)
}

fn op_validate(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let cert = b.scheme.certificate();
    let n = b.scheme.dim_total();
    let dual = b.scheme.basis().dual();
    let dual_rows: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| dual.entry(i, j)).collect()).collect();
    let weight = if b.f.is_smooth() {
        match b.f.admissibility_certificate(&b.scheme) {
            Ok(c) => json!({
                "smooth": true,
                "admissible": true,
                "c": c.c,
                "alpha": c.alpha,
                "c_tilde": c.c_tilde,
                "observed_max": c.observed_max,
            }),
            Err(Error::NotAdmissible { reason }) => {
                json!({"smooth": true, "admissible": false, "reason": reason})
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        json!({
            "smooth": false,
            "admissible": Value::Null,
            "note": "sharp window: only density operations apply",
        })
    };
    let value = json!({
        "d": b.scheme.d(),
        "m": b.scheme.m(),
        "det_abs": b.scheme.det_abs(),
        "injectivity_radius": cert.injectivity_radius,
        "denseness_ok": cert.denseness_ok,
        "coverage_eps": cert.coverage_eps,
        "basis_rows": cfg.scheme.basis_rows,
        "dual_basis_rows": dual_rows,
        "weight": weight,
        "decoration_atoms": b.deco.atoms().len(),
    });
    art.write_json("validate.json", &value)?;
    Ok(value)
}

fn op_generate(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let region = cfg.build_boxes()?.largest().clone();
    let comb = build_comb(cfg, &b, &region)?;
    art.write_csv("comb.csv", |w| comb.write_csv(w))?;
    let value = json!({
        "atom_count": comb.len(),
        "region": box_json(&region),
        "internal_radius": comb.internal_radius(),
        "trunc_eps": comb.trunc_eps(),
        "weight_sum": pair(comb.weight_sum_in(&region)),
        "origin_fractional": comb.origin().fractional,
    });
    art.write_json("generate.json", &value)?;
    Ok(value)
}

fn op_density(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let boxes = cfg.build_boxes()?;
    let closed = density_closed(&b.scheme, &b.f, &b.deco, cfg.thresholds.quad_tol)?;
    let comb = build_comb(cfg, &b, boxes.largest())?;
    let mut rows = Vec::new();
    for region in boxes.boxes() {
        let est = comb.weight_sum_in(region) / region.volume();
        let abs_err = (est - closed).norm();
        rows.push(json!({
            "box": box_json(region),
            "volume": region.volume(),
            "estimate": pair(est),
            "abs_err": abs_err,
            "rel_err": abs_err / closed.norm().max(f64::MIN_POSITIVE),
        }));
    }
    art.write_csv("density.csv", |w| {
        writeln!(w, "volume,estimate_re,estimate_im,abs_err,rel_err")?;
        for r in &rows {
            writeln!(
                w,
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                r["volume"].as_f64().unwrap(),
                r["estimate"][0].as_f64().unwrap(),
                r["estimate"][1].as_f64().unwrap(),
                r["abs_err"].as_f64().unwrap(),
                r["rel_err"].as_f64().unwrap(),
            )?;
        }
        Ok(())
    })?;
    let value = json!({
        "closed": pair(closed),
        "closed_abs": closed.norm(),
        "boxes": rows,
    });
    art.write_json("density.json", &value)?;
    Ok(value)
}

fn op_autocorr(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let range = cfg.displacement_range()?;
    let region = cfg.build_boxes()?.largest().clone();
    let cut = autocorr_cut(cfg, &b, &region)?;
    let table =
        autocorr_closed(&b.scheme, &b.f, &b.deco, &range, cut, cfg.thresholds.quad_tol)?;
    art.write_csv("autocorr.csv", |w| table.write_csv(w))?;
    let top: Vec<Value> = table
        .entries()
        .iter()
        .take(cfg.thresholds.top_n_autocorr)
        .map(|e| {
            json!({
                "u": e.displacement,
                "z": e.int_coords,
                "coefficient": pair(e.coefficient),
                "abs": e.coefficient.norm(),
            })
        })
        .collect();
    let value = json!({
        "entry_count": table.entries().len(),
        "internal_cut": cut,
        "displacement_range": box_json(&range),
        "top": top,
    });
    art.write_json("autocorr.json", &value)?;
    Ok(value)
}

fn op_diffract(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let (peaks, cut) = closed_peaks(cfg, &b)?;
    art.write_csv("peaks.csv", |w| peaks.write_csv(w))?;
    let top: Vec<Value> = peaks
        .peaks()
        .iter()
        .take(cfg.thresholds.top_n_peaks)
        .map(|p| {
            json!({
                "k": p.k,
                "z": p.int_coords,
                "eta": p.eta,
                "amplitude": pair(p.amplitude),
                "intensity": p.intensity,
            })
        })
        .collect();
    let value = json!({
        "peak_count": peaks.peaks().len(),
        "internal_cut": cut,
        "intensity_floor": peaks.intensity_floor(),
        "k_range": box_json(peaks.k_range()),
        "top": top,
    });
    art.write_json("diffract.json", &value)?;
    Ok(value)
}

fn op_fourier_bohr(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let (peaks, _) = closed_peaks(cfg, &b)?;
    let boxes = cfg.build_boxes()?;
    let d = b.scheme.d();

    // probe set: top closed peaks, plus an off-peak control near each of the
    // first three (shifted by an offset no dual point in range matches)
    let mut probes: Vec<(Vec<f64>, Complex64, &'static str)> = Vec::new();
    for p in peaks.peaks().iter().take(cfg.thresholds.top_n_peaks) {
        probes.push((p.k.clone(), p.amplitude, "peak"));
    }
    for p in peaks.peaks().iter().take(3) {
        let mut k = p.k.clone();
        for v in k.iter_mut() {
            *v += 0.2371;
        }
        if peaks.find(&k, 1e-6).is_none() {
            probes.push((k, Complex64::new(0.0, 0.0), "off_peak"));
        }
    }
    if probes.is_empty() {
        return Err(RunError::Domain(Error::InvalidParameter(
            "no diffraction peaks in range; nothing to average".into(),
        )));
    }

    let combs: Vec<WeightedComb> = boxes
        .boxes()
        .iter()
        .map(|region| build_comb(cfg, &b, region))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (k, closed, kind) in &probes {
        for (region, comb) in boxes.boxes().iter().zip(&combs) {
            let est = fourier_bohr_estimate(comb, k);
            rows.push(json!({
                "k": k,
                "kind": kind,
                "volume": region.volume(),
                "estimate": pair(est),
                "estimate_abs": est.norm(),
                "closed": pair(*closed),
                "abs_err": (est - closed).norm(),
            }));
        }
    }
    art.write_csv("fourier_bohr.csv", |w| {
        let ks: Vec<String> = (1..=d).map(|i| format!("k_{i}")).collect();
        writeln!(
            w,
            "{},kind,volume,estimate_re,estimate_im,estimate_abs,closed_re,closed_im,abs_err",
            ks.join(",")
        )?;
        for r in &rows {
            let k: Vec<String> = r["k"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| format!("{:.11e}", x.as_f64().unwrap()))
                .collect();
            writeln!(
                w,
                "{},{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                k.join(","),
                r["kind"].as_str().unwrap(),
                r["volume"].as_f64().unwrap(),
                r["estimate"][0].as_f64().unwrap(),
                r["estimate"][1].as_f64().unwrap(),
                r["estimate_abs"].as_f64().unwrap(),
                r["closed"][0].as_f64().unwrap(),
                r["closed"][1].as_f64().unwrap(),
                r["abs_err"].as_f64().unwrap(),
            )?;
        }
        Ok(())
    })?;
    let value = json!({
        "probe_count": probes.len(),
        "box_count": boxes.boxes().len(),
        "rows": rows,
    });
    art.write_json("fourier_bohr.json", &value)?;
    Ok(value)
}

fn op_almost_periods(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let t = &cfg.thresholds;
    let report = almost_periods(
        &b.scheme,
        &b.f,
        &b.deco,
        &cfg.almost_period_search()?,
        t.almost_period_eps,
        t.kernel_scale,
        t.almost_delta,
        t.max_candidates,
        t.workers,
    )?;
    let d = b.scheme.d();
    let m = b.scheme.m();
    art.write_csv("almost_periods.csv", |w| {
        let ts: Vec<String> = (1..=d).map(|i| format!("t_{i}")).collect();
        let zs: Vec<String> = (1..=d + m).map(|i| format!("z_{i}")).collect();
        writeln!(w, "{},{},internal_norm,verified_sup", ts.join(","), zs.join(","))?;
        for p in &report.periods {
            let t: Vec<String> = p.t.iter().map(|x| format!("{x:.11e}")).collect();
            let z: Vec<String> = p.int_coords.iter().map(|x| x.to_string()).collect();
            writeln!(
                w,
                "{},{},{:.11e},{:.11e}",
                t.join(","),
                z.join(","),
                p.internal_norm,
                p.verified_sup
            )?;
        }
        Ok(())
    })?;
    let periods: Vec<Value> = report
        .periods
        .iter()
        .map(|p| {
            json!({
                "t": p.t,
                "z": p.int_coords,
                "internal_norm": p.internal_norm,
                "verified_sup": p.verified_sup,
            })
        })
        .collect();
    let value = json!({
        "eps": report.eps,
        "delta": report.delta,
        "kernel_scale": report.kernel_scale,
        "candidates_considered": report.candidates_considered,
        "verified_count": report.periods.len(),
        "max_gap": report.max_gap,
        "search": box_json(&report.search),
        "periods": periods,
    });
    art.write_json("almost_periods.json", &value)?;
    Ok(value)
}

fn op_injectivity(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let report = injectivity_report(
        &b.scheme,
        &b.f,
        &b.deco,
        cfg.thresholds.dual_search_radius,
        cfg.thresholds.quad_tol,
    )?;
    let value = json!({
        "injective": report.injective,
        "generator_moduli": report.generator_moduli,
        "min_rho_modulus": report.min_rho_modulus,
        "minimizer": report.minimizer,
        "has_weight_period": report.has_weight_period,
        "weight_period_witness": report.weight_period_witness,
        "dual_search_radius": report.dual_search_radius,
    });
    art.write_json("injectivity.json", &value)?;
    Ok(value)
}

fn op_compare(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, RunError> {
    let b = build(cfg)?;
    let settings = cfg.compare_settings(&b.scheme)?;
    let report = run_comparison(&b.scheme, &b.f, &b.deco, &settings)?;
    let value = serde_json::to_value(&report).expect("report serializes");
    art.write_json("compare.json", &value)?;
    Ok(value)
}
