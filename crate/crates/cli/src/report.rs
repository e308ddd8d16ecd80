//! JSON views of library results, the experiment pipeline and CSV export.

use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use visilat::counting::{
    count_visible_direct_with_caps, count_visible_sieve_with_caps, ideal_count_check, mc_estimate, CountResult,
    Method, Region,
};
use visilat::density::{exact_window_density_capped, predicted_density, to_f64, ExactDensity, PredictionInterval};
use visilat::numfield::FieldSpec;
use visilat::primes::{primes_up_to_norm, PrimeIdeal, PrimeWindow};

use crate::config::{ExperimentConfig, Mode, Validated};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalJson {
    fn from(r: &BigRational) -> Self {
        RationalJson { num: r.numer().to_string(), den: r.denom().to_string() }
    }
}

/// One prime ideal: `{"norm":5,"p":5,"f":1,"e":1,"g":[3,1]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeJson {
    pub norm: u64,
    pub p: u64,
    pub f: u32,
    pub e: u32,
    pub g: Vec<u64>,
}

impl From<&PrimeIdeal> for PrimeJson {
    fn from(q: &PrimeIdeal) -> Self {
        PrimeJson { norm: q.norm(), p: q.under_p(), f: q.f(), e: q.e(), g: q.gpoly().coeffs().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionJson {
    pub lo: String,
    pub hi: String,
    #[serde(rename = "X")]
    pub x: u64,
    pub zero: Option<PrimeJson>,
}

impl From<&PredictionInterval> for PredictionJson {
    fn from(iv: &PredictionInterval) -> Self {
        PredictionJson {
            lo: iv.lo_decimal(),
            hi: iv.hi_decimal(),
            x: iv.cutoff_x,
            zero: iv.zero_certificate.as_ref().map(PrimeJson::from),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub descriptor: visilat::numfield::FieldKind,
    pub degree: usize,
    pub minpoly: Vec<i64>,
    pub basis: Vec<String>,
    pub discriminant: String,
    pub known_pid: bool,
}

impl From<&FieldSpec> for FieldJson {
    fn from(k: &FieldSpec) -> Self {
        FieldJson {
            descriptor: k.kind().clone(),
            degree: k.degree(),
            minpoly: k.minpoly().to_vec(),
            basis: k.basis_labels().to_vec(),
            discriminant: k.discriminant().to_string(),
            known_pid: k.is_known_pid(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountJson {
    pub region: String,
    pub mode: Method,
    pub total: u64,
    pub visible: u64,
    /// `visible / total`.
    pub density: f64,
    pub density_exact: RationalJson,
    /// Visible tuples per unit of `vol(A)^m`.
    pub volume_density: f64,
    pub stderr: Option<f64>,
    pub prime_norm_bound: Option<u64>,
    pub basis_transform: Option<Vec<Vec<i64>>>,
    /// `|density - midpoint of the predicted interval|`.
    pub discrepancy: Option<f64>,
    /// Distance from `density` to the predicted interval.
    pub distance: Option<f64>,
    pub wall_time_ms: f64,
}

impl CountJson {
    pub fn new(result: &CountResult, prediction: Option<&PredictionInterval>, wall_time_ms: f64) -> Self {
        let density = result.density();
        CountJson {
            region: result.region.label(),
            mode: result.method,
            total: result.total_tuples,
            visible: result.visible_count,
            density,
            density_exact: (&result.density_estimate).into(),
            volume_density: result.volume_density,
            stderr: result.mc_stderr,
            prime_norm_bound: result.prime_norm_bound,
            basis_transform: result.region.basis_transform().map(<[_]>::to_vec),
            discrepancy: prediction.map(|iv| (density - to_f64(&iv.midpoint())).abs()),
            distance: prediction.map(|iv| iv.distance(density)),
            wall_time_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorJson {
    pub prime: PrimeJson,
    pub num: String,
    pub den: String,
}

/// `{"num":"2","den":"3",...}`: the product value first, then the
/// enumeration value it must equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleJson {
    pub num: String,
    pub den: String,
    pub crt_num: String,
    pub crt_den: String,
    pub agree: bool,
    pub states: u64,
    pub window_primes: Vec<u64>,
    pub factors: Vec<FactorJson>,
}

impl From<&ExactDensity> for OracleJson {
    fn from(e: &ExactDensity) -> Self {
        let mut window_primes: Vec<u64> = e.window.primes().iter().map(|p| p.under_p()).collect();
        window_primes.dedup();
        OracleJson {
            num: e.value.numer().to_string(),
            den: e.value.denom().to_string(),
            crt_num: e.crt_value.numer().to_string(),
            crt_den: e.crt_value.denom().to_string(),
            agree: e.agrees(),
            states: e.crt_states,
            window_primes,
            factors: e
                .per_prime_factors
                .iter()
                .map(|(p, f)| FactorJson { prime: p.into(), num: f.numer().to_string(), den: f.denom().to_string() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRegionJson {
    pub region: String,
    pub max_normalized_error: f64,
    pub worst_prime: PrimeJson,
    pub count: u64,
    pub main_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaJson {
    pub max_norm: u64,
    pub primes: usize,
    pub regions: Vec<LemmaRegionJson>,
    /// Least-squares slope of log(max normalized error) against log(size);
    /// absent with fewer than two regions.
    pub growth_exponent: Option<f64>,
}

fn region_size(region: &Region) -> f64 {
    match region.shape() {
        visilat::counting::Shape::Cube { l } => l as f64,
        visilat::counting::Shape::Ball { r } => r,
    }
}

/// Worst normalized error of the ideal counting lemma over all primes of norm
/// up to `max_norm`, per region.
pub fn lemma_check(field: &FieldSpec, regions: &[Region], max_norm: u64) -> Result<LemmaJson, CliError> {
    let primes = primes_up_to_norm(field, max_norm)?;
    if primes.is_empty() {
        return Err(CliError::InvalidConfig(format!("no prime ideals of norm at most {max_norm}")));
    }
    let mut rows = Vec::with_capacity(regions.len());
    for region in regions {
        let mut worst: Option<(f64, &PrimeIdeal, u64, f64)> = None;
        for p in &primes {
            let c = ideal_count_check(field, p.hnf(), region)?;
            if worst.map_or(true, |w| c.normalized_error > w.0) {
                worst = Some((c.normalized_error, p, c.count, c.main_term));
            }
        }
        let (err, p, count, main_term) = worst.expect("at least one prime");
        rows.push(LemmaRegionJson {
            region: region.label(),
            max_normalized_error: err,
            worst_prime: p.into(),
            count,
            main_term,
        });
    }
    let growth_exponent = (regions.len() >= 2).then(|| {
        let pts: Vec<(f64, f64)> = regions
            .iter()
            .zip(&rows)
            .map(|(r, row)| (region_size(r).ln(), row.max_normalized_error.ln()))
            .collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let cov: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let var: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        cov / var
    });
    Ok(LemmaJson { max_norm, primes: primes.len(), regions: rows, growth_exponent })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
}

/// Everything an experiment produced, in a fixed field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub version: String,
    pub status: Status,
    pub config: ExperimentConfig,
    pub field: FieldJson,
    pub prediction: Option<PredictionJson>,
    pub counts: Vec<CountJson>,
    pub oracle: Option<OracleJson>,
    pub lemma: Option<LemmaJson>,
    /// Tolerance checks that did not hold.
    pub failures: Vec<String>,
    /// Computations that could not run.
    pub errors: Vec<String>,
    pub wall_time_ms: f64,
}

impl DensityReport {
    /// 0 when everything passed, 2 when a step errored, else 1.
    pub fn exit_code(&self) -> u8 {
        if !self.errors.is_empty() {
            2
        } else if !self.failures.is_empty() {
            1
        } else {
            0
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, text + "\n")
            .map_err(|source| CliError::Io { context: format!("writing {}", path.display()), source })
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn count_once(v: &Validated, region: &Region, mode: Mode) -> Result<CountResult, visilat::error::Error> {
    let c = &v.config;
    let caps = c.caps.counting();
    match mode {
        Mode::Direct => count_visible_direct_with_caps(&v.field, &v.set, c.m, region, &caps),
        Mode::Sieve => count_visible_sieve_with_caps(&v.field, &v.set, c.m, region, &caps),
        Mode::Mc => mc_estimate(&v.field, &v.set, c.m, region, c.samples, c.seed),
        _ => unreachable!("not a counting mode"),
    }
}

/// Runs prediction, every count mode on every region, the exact oracle and
/// the lemma check as configured. Validation errors abort; errors inside a
/// step are recorded in the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<DensityReport, CliError> {
    let start = Instant::now();
    let v = config.validate()?;
    let mut report = DensityReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: Status::Passed,
        config: config.clone(),
        field: (&v.field).into(),
        prediction: None,
        counts: Vec::new(),
        oracle: None,
        lemma: None,
        failures: Vec::new(),
        errors: Vec::new(),
        wall_time_ms: 0.0,
    };
    let mut modes = config.modes.clone();
    modes.sort();
    modes.dedup();

    let prediction = if modes.contains(&Mode::Predict) {
        match predicted_density(&v.field, &v.set, config.m, config.cutoff_x) {
            Ok(iv) => {
                report.prediction = Some((&iv).into());
                Some(iv)
            }
            Err(e) => {
                report.errors.push(format!("predict: {e}"));
                None
            }
        }
    } else {
        None
    };

    let count_modes: Vec<Mode> =
        modes.iter().copied().filter(|m| matches!(m, Mode::Direct | Mode::Sieve | Mode::Mc)).collect();
    for (i, region) in v.regions.iter().enumerate() {
        let last = i + 1 == v.regions.len();
        for &mode in &count_modes {
            let t = Instant::now();
            match count_once(&v, region, mode) {
                Ok(result) => {
                    let row = CountJson::new(&result, prediction.as_ref(), elapsed_ms(t));
                    if let (true, Some(distance)) = (last, row.distance) {
                        let allowed = config.tolerances.density
                            + config.tolerances.mc_sigmas * row.stderr.unwrap_or(0.0);
                        if distance > allowed {
                            report.failures.push(format!(
                                "{} {}: density {} is {distance:.3e} from the interval (allowed {allowed:.3e})",
                                row.region, row.mode, row.density
                            ));
                        }
                    }
                    report.counts.push(row);
                }
                Err(e) => report.errors.push(format!("{} {}: {e}", region.label(), mode_name(mode))),
            }
        }
    }

    if modes.contains(&Mode::Oracle) {
        let result = PrimeWindow::first_t(&v.field, config.oracle_window)
            .and_then(|w| exact_window_density_capped(&v.field, &v.set, config.m, &w, config.caps.crt));
        match result {
            Ok(exact) => {
                if !exact.agrees() {
                    report.failures.push("oracle: product and enumeration disagree".into());
                }
                report.oracle = Some((&exact).into());
            }
            Err(e) => report.errors.push(format!("oracle: {e}")),
        }
    }

    if modes.contains(&Mode::LemmaCheck) {
        match lemma_check(&v.field, &v.regions, config.lemma_max_norm) {
            Ok(lemma) => {
                if let Some(g) = lemma.growth_exponent.filter(|&g| g > config.tolerances.lemma_growth) {
                    report.failures.push(format!(
                        "lemma-check: normalized error grows with exponent {g:.4} (allowed {})",
                        config.tolerances.lemma_growth
                    ));
                }
                report.lemma = Some(lemma);
            }
            Err(e) => report.errors.push(format!("lemma-check: {e}")),
        }
    }

    if !(report.failures.is_empty() && report.errors.is_empty()) {
        report.status = Status::Failed;
    }
    report.wall_time_ms = elapsed_ms(start);
    Ok(report)
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Predict => "predict",
        Mode::Direct => "direct",
        Mode::Sieve => "sieve",
        Mode::Mc => "mc",
        Mode::Oracle => "oracle",
        Mode::LemmaCheck => "lemma-check",
    }
}

/// One row per count: `region,mode,total,visible,density,lo,hi,discrepancy`,
/// plus a trailing `stderr` column when the report has Monte Carlo rows.
pub fn emit_csv(report: &DensityReport, path: &Path) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io {
        context: format!("writing {}", path.display()),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let with_stderr = report.counts.iter().any(|c| c.mode == Method::Mc);
    let mut header = vec!["region", "mode", "total", "visible", "density", "lo", "hi", "discrepancy"];
    if with_stderr {
        header.push("stderr");
    }
    w.write_record(&header).map_err(io)?;
    let (lo, hi) = match &report.prediction {
        Some(p) => (Some(p.lo.as_str()), Some(p.hi.as_str())),
        None => (None, None),
    };
    for c in &report.counts {
        let mut record = vec![
            c.region.clone(),
            c.mode.to_string(),
            c.total.to_string(),
            c.visible.to_string(),
            c.density.to_string(),
            lo.unwrap_or_default().to_string(),
            hi.unwrap_or_default().to_string(),
            c.discrepancy.map(|d| d.to_string()).unwrap_or_default(),
        ];
        if with_stderr {
            record.push(c.stderr.map(|s| s.to_string()).unwrap_or_default());
        }
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|source| CliError::Io { context: format!("writing {}", path.display()), source })
}
