//! Experiment runner behind the CLI: dispatches a command over seeded
//! instances and renders CSV rows plus a JSON artifact.
//!
//! Repetition `r` uses seed `seed + r`; for `random:` generators that seed
//! replaces the one in the spec, other families are deterministic. Output
//! rows are sorted by `(seed, n)`, so files never depend on scheduling.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::approx::{ptas_cover_detailed, ptas_packing_detailed};
use crate::error::{Error, Result};
use crate::geom::{Ball, Point, Tolerance};
use crate::indset::{brute_force_independent_set, separator_independent_set_detailed, UnitBallInstance};
use crate::nets::{
    default_box_scales, default_fractal_scales, estimate_box_counting_dimension, estimate_doubling_dimension,
    estimate_fractal_dimension, DoublingBudget,
};
use crate::par;
use crate::pathdecomp::{build_path_decomposition, verify_path_decomposition};
use crate::pointgen::{generate, GeneratorKind, GeneratorSpec, PointSet};
use crate::regression::ols;
use crate::rsmt::{exact_rsmt, rsmt_diamond_check};
use crate::separator::{search_separator, Constants, Family, SweepCenter};
use crate::spanner::{build_spanner, prune_shortcuts, verify_dilation};
use crate::tsp::{held_karp_tsp, separator_tsp_detailed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    Generate,
    EstimateDim,
    Separator,
    Tsp,
    TspCompare,
    Rsmt,
    Is,
    Cover,
    Pack,
    Spanner,
    Pathwidth,
    Scaling,
}

impl Command {
    pub const ALL: [Command; 12] = [
        Command::Generate,
        Command::EstimateDim,
        Command::Separator,
        Command::Tsp,
        Command::TspCompare,
        Command::Rsmt,
        Command::Is,
        Command::Cover,
        Command::Pack,
        Command::Spanner,
        Command::Pathwidth,
        Command::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::EstimateDim => "estimate-dim",
            Command::Separator => "separator",
            Command::Tsp => "tsp",
            Command::TspCompare => "tsp-compare",
            Command::Rsmt => "rsmt",
            Command::Is => "is",
            Command::Cover => "cover",
            Command::Pack => "pack",
            Command::Spanner => "spanner",
            Command::Pathwidth => "pathwidth",
            Command::Scaling => "scaling",
        }
    }

    pub fn csv_header(self) -> &'static str {
        match self {
            Command::Generate => "seed,n,dim,label",
            Command::EstimateDim => "seed,n,method,delta_hat,fit_r2",
            Command::Separator => "seed,n,radius,inside,outside,crossing,balance",
            Command::Tsp => "seed,n,length,budget,inside,outside",
            Command::TspCompare => "seed,n,separator_length,held_karp_length,length_ratio",
            Command::Rsmt => "seed,n,length,steiner_points,diamonds_disjoint",
            Command::Is => "seed,n,k,found,chosen,nodes,max_h,oracle_agrees",
            Command::Cover | Command::Pack => "seed,n,eps,ell,size,shift",
            Command::Spanner => "seed,n,eps,edges,edges_pruned,dilation,dilation_pruned",
            Command::Pathwidth => "seed,n,eps,edges,width,valid",
            Command::Scaling => "seed,n,eps,width",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub generator: GeneratorSpec,
    pub eps: Option<f64>,
    pub ell: Option<usize>,
    pub k: Option<usize>,
    pub seed: u64,
    pub repetitions: usize,
    pub tol: Tolerance,
    /// Output stem; `run_experiment` never writes, see [`write_outputs`].
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(command: Command, generator: GeneratorSpec) -> Self {
        Self {
            command,
            generator,
            eps: None,
            ell: None,
            k: None,
            seed: 0,
            repetitions: 1,
            tol: Tolerance::default(),
            out: None,
        }
    }

    fn eps_or(&self, default: f64) -> Result<f64> {
        let e = self.eps.unwrap_or(default);
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::InvalidInput(format!("eps must be positive, got {e}")));
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentOutput {
    pub csv: String,
    pub json: String,
}

struct RepResult {
    seed: u64,
    n: usize,
    rows: Vec<String>,
    json: Value,
}

fn seeded(spec: &GeneratorSpec, seed: u64) -> GeneratorSpec {
    match spec.kind {
        GeneratorKind::RandomUniform { n, d, .. } => GeneratorSpec {
            kind: GeneratorKind::RandomUniform { n, d, seed },
            scale: spec.scale,
        },
        _ => *spec,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.repetitions == 0 {
        return Err(Error::InvalidInput("repetitions must be at least 1".into()));
    }
    if cfg.command == Command::Scaling {
        return run_scaling(cfg);
    }
    let results = par::map_range(cfg.repetitions, |r| {
        let seed = cfg.seed + r as u64;
        let p = generate(&seeded(&cfg.generator, seed))?;
        run_one(cfg, seed, p)
    });
    let mut results = results.into_iter().collect::<Result<Vec<_>>>()?;
    results.sort_by_key(|r| (r.seed, r.n));

    let mut csv = String::from(cfg.command.csv_header());
    csv.push('\n');
    for r in &results {
        for row in &r.rows {
            csv.push_str(row);
            csv.push('\n');
        }
    }
    let json = if cfg.command == Command::Generate && results.len() == 1 {
        results[0].json.clone()
    } else {
        Value::Array(results.into_iter().map(|r| r.json).collect())
    };
    Ok(ExperimentOutput {
        csv,
        json: serde_json::to_string_pretty(&json).expect("json renders"),
    })
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("value serializes")
}

fn run_one(cfg: &ExperimentConfig, seed: u64, p: PointSet) -> Result<RepResult> {
    let n = p.len();
    let tol = cfg.tol;
    let (rows, json) = match cfg.command {
        Command::Generate => (vec![format!("{seed},{n},{},{}", p.dim, p.label)], to_value(&p)),
        Command::EstimateDim => {
            let ests = [
                estimate_fractal_dimension(&p, &default_fractal_scales(&p))?,
                estimate_box_counting_dimension(&p, &default_box_scales(&p))?,
                estimate_doubling_dimension(&p, &DoublingBudget::default())?,
            ];
            let rows = ests
                .iter()
                .map(|e| format!("{seed},{n},{},{:.6},{:.6}", e.method.name(), e.delta_hat, e.fit_r2))
                .collect();
            (rows, json!({ "seed": seed, "estimates": ests }))
        }
        Command::Separator => {
            let radius = cfg.eps_or(0.5)?;
            let balls: Vec<Ball> = p.points.iter().map(|c| Ball::new(c.clone(), radius)).collect::<Result<_>>()?;
            let mut centers: Vec<SweepCenter> = p
                .points
                .iter()
                .map(|c| SweepCenter {
                    center: c.clone(),
                    range: None,
                })
                .collect();
            if let Some((lo, hi)) = p.bounds() {
                let mid = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                centers.push(SweepCenter {
                    center: Point::new(mid)?,
                    range: None,
                });
            }
            let bf = Constants::for_dim(p.dim).balance_fraction();
            let s = search_separator(Family::Balls(&balls), bf, &centers, tol)?;
            let row = format!(
                "{seed},{n},{:.9},{},{},{},{:.6}",
                s.sphere.radius,
                s.inside_count,
                s.outside_count,
                s.crossing.len(),
                s.balance
            );
            (vec![row], json!({ "seed": seed, "ball_radius": radius, "separator": s }))
        }
        Command::Tsp => {
            let rep = separator_tsp_detailed(&p, tol)?;
            let row = format!(
                "{seed},{n},{:.9},{},{},{}",
                rep.tour.length,
                rep.budget,
                rep.inside.len(),
                rep.outside.len()
            );
            (vec![row], json!({ "seed": seed, "report": rep }))
        }
        Command::TspCompare => {
            let sep = separator_tsp_detailed(&p, tol)?.tour;
            let hk = held_karp_tsp(&p)?;
            let ratio = if hk.length > 0.0 { sep.length / hk.length } else { 1.0 };
            let row = format!("{seed},{n},{:.9},{:.9},{:.6}", sep.length, hk.length, ratio);
            (vec![row], json!({ "seed": seed, "separator": sep, "held_karp": hk }))
        }
        Command::Rsmt => {
            let t = exact_rsmt(&p, n.saturating_sub(2))?;
            let ok = rsmt_diamond_check(&t);
            let row = format!("{seed},{n},{:.9},{},{ok}", t.length, t.steiner.len());
            (vec![row], json!({ "seed": seed, "tree": t }))
        }
        Command::Is => {
            let k = cfg.k.unwrap_or(3);
            let inst = UnitBallInstance::new(p)?;
            let rep = separator_independent_set_detailed(&inst, k, tol)?;
            let found = rep.solution.is_some();
            let agrees = brute_force_independent_set(&inst, k)?.is_some() == found;
            let chosen = rep
                .solution
                .as_ref()
                .map(|s| s.chosen.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            let row = format!("{seed},{n},{k},{found},{chosen},{},{},{agrees}", rep.stats.nodes, rep.stats.max_h);
            (vec![row], json!({ "seed": seed, "k": k, "report": rep }))
        }
        Command::Cover | Command::Pack => {
            let eps = cfg.eps_or(1.0)?;
            let ell = cfg.ell.unwrap_or(4);
            let rep = if cfg.command == Command::Cover {
                ptas_cover_detailed(&p, eps, ell)?
            } else {
                ptas_packing_detailed(&p, eps, ell)?
            };
            let shift = rep.shift_index.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            let row = format!("{seed},{n},{eps},{ell},{},{shift}", rep.solution.chosen.len());
            (vec![row], json!({ "seed": seed, "eps": eps, "ell": ell, "report": rep }))
        }
        Command::Spanner => {
            let eps = cfg.eps_or(1.0)?;
            let g = build_spanner(&p, eps)?;
            let gp = prune_shortcuts(&g, &p);
            let (dg, dgp) = (verify_dilation(&g, &p)?, verify_dilation(&gp, &p)?);
            let row = format!("{seed},{n},{eps},{},{},{dg:.6},{dgp:.6}", g.edges.len(), gp.edges.len());
            (vec![row], json!({ "seed": seed, "eps": eps, "pruned": gp }))
        }
        Command::Pathwidth => {
            let eps = cfg.eps_or(1.0)?;
            let gp = prune_shortcuts(&build_spanner(&p, eps)?, &p);
            let pd = build_path_decomposition(&gp, &p)?;
            let check = verify_path_decomposition(&gp, &pd);
            let row = format!("{seed},{n},{eps},{},{},{}", gp.edges.len(), pd.width, check.valid);
            (vec![row], json!({ "seed": seed, "eps": eps, "decomposition": pd }))
        }
        Command::Scaling => unreachable!("handled by run_scaling"),
    };
    Ok(RepResult { seed, n, rows, json })
}

/// Smaller members of the generator's family, largest last.
pub fn scaling_family(spec: &GeneratorSpec) -> Vec<GeneratorSpec> {
    let with = |kind| GeneratorSpec { kind, scale: spec.scale };
    match spec.kind {
        GeneratorKind::Carpet { k } => (k.saturating_sub(2).max(1)..=k).map(|k| with(GeneratorKind::Carpet { k })).collect(),
        GeneratorKind::CantorDust { k, d } => (k.saturating_sub(2).max(1)..=k)
            .map(|k| with(GeneratorKind::CantorDust { k, d }))
            .collect(),
        GeneratorKind::Grid { m, d } => [m / 4, m / 2, m]
            .into_iter()
            .filter(|&m| m >= 2)
            .map(|m| with(GeneratorKind::Grid { m, d }))
            .collect(),
        GeneratorKind::Line { n } => [n / 4, n / 2, n]
            .into_iter()
            .filter(|&n| n >= 2)
            .map(|n| with(GeneratorKind::Line { n }))
            .collect(),
        GeneratorKind::RandomUniform { n, d, seed } => [n / 4, n / 2, n]
            .into_iter()
            .filter(|&n| n >= 2)
            .map(|n| with(GeneratorKind::RandomUniform { n, d, seed }))
            .collect(),
    }
}

/// Pathwidth of the pruned spanner over the generator's family, with the
/// fitted exponent of width against n.
fn run_scaling(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let eps = cfg.eps_or(1.0)?;
    let mut jobs = Vec::new();
    for r in 0..cfg.repetitions {
        let seed = cfg.seed + r as u64;
        for spec in scaling_family(&seeded(&cfg.generator, seed)) {
            jobs.push((seed, spec));
        }
    }
    let measured = par::map(&jobs, |(seed, spec)| -> Result<(u64, usize, usize)> {
        let p = generate(spec)?;
        let gp = prune_shortcuts(&build_spanner(&p, eps)?, &p);
        let pd = build_path_decomposition(&gp, &p)?;
        Ok((*seed, p.len(), pd.width))
    });
    let mut measured = measured.into_iter().collect::<Result<Vec<_>>>()?;
    measured.sort_unstable();
    let mut csv = String::from(Command::Scaling.csv_header());
    csv.push('\n');
    for (seed, n, w) in &measured {
        csv.push_str(&format!("{seed},{n},{eps},{w}\n"));
    }
    let pairs: Vec<(f64, f64)> = measured.iter().map(|&(_, n, w)| (n as f64, w as f64)).collect();
    let report = fit_scaling_exponent(&pairs)?;
    Ok(ExperimentOutput {
        csv,
        json: serde_json::to_string_pretty(&report).expect("json renders"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub pairs: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    pub fit_r2: f64,
}

/// Least-squares slope of `ln(value)` against `ln(n)`.
pub fn fit_scaling_exponent(pairs: &[(f64, f64)]) -> Result<ScalingReport> {
    if pairs.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 pairs, got {}", pairs.len())));
    }
    if let Some(&(n, v)) = pairs.iter().find(|&&(n, v)| !(n > 0.0 && v > 0.0 && n.is_finite() && v.is_finite())) {
        return Err(Error::InvalidInput(format!("pairs must be positive, got ({n}, {v})")));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let fit = ols(&xs, &ys)?;
    Ok(ScalingReport {
        pairs: pairs.to_vec(),
        fitted_exponent: fit.slope,
        fit_r2: fit.r2,
    })
}

/// Writes `<out>.csv` and `<out>.json`, creating parent directories.
pub fn write_outputs(out: &Path, output: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let csv = out.with_extension("csv");
    let json = out.with_extension("json");
    std::fs::write(&csv, &output.csv)?;
    std::fs::write(&json, &output.json)?;
    Ok(vec![csv, json])
}

/// Machine-readable failure record.
pub fn error_record(command: Option<Command>, err: &Error) -> String {
    json!({
        "error": err.kind(),
        "message": err.to_string(),
        "command": command.map(Command::name),
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_examples() {
        let r = fit_scaling_exponent(&[(10.0, 10f64.sqrt()), (100.0, 10.0), (1000.0, 1000f64.sqrt())]).unwrap();
        assert!((r.fitted_exponent - 0.5).abs() < 1e-12);
        let flat = fit_scaling_exponent(&[(10.0, 3.0), (100.0, 3.0), (1000.0, 3.0)]).unwrap();
        assert_eq!(flat.fitted_exponent, 0.0);
        assert!(fit_scaling_exponent(&[(10.0, 0.0), (100.0, 1.0), (1000.0, 2.0)]).is_err());
        assert!(fit_scaling_exponent(&[(10.0, 1.0), (100.0, 2.0)]).is_err());
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("nope".parse::<Command>().is_err());
    }

    #[test]
    fn tsp_compare_rows() {
        let mut cfg = ExperimentConfig::new(Command::TspCompare, GeneratorSpec::random(9, 2, 0));
        cfg.repetitions = 4;
        let out = run_experiment(&cfg).unwrap();
        let rows: Vec<&str> = out.csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.ends_with(",1.000000")));
        assert_eq!(run_experiment(&cfg).unwrap(), out);
    }

    #[test]
    fn generate_json_round_trips() {
        let cfg = ExperimentConfig::new(Command::Generate, GeneratorSpec::carpet(2));
        let out = run_experiment(&cfg).unwrap();
        let p = PointSet::from_json(&out.json).unwrap();
        assert_eq!(p, generate(&GeneratorSpec::carpet(2)).unwrap());
    }

    #[test]
    fn error_records_are_json() {
        let rec = error_record(Some(Command::Tsp), &Error::NoBalancedCandidate);
        let v: Value = serde_json::from_str(&rec).unwrap();
        assert_eq!(v["error"], "no_balanced_candidate");
        assert_eq!(v["command"], "tsp");
    }
}
