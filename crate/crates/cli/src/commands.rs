use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use szego_core::expansion::exterior_kernel_expansion;
use szego_core::general_kernel::{berezin_belt_density, kernel_asymptotic, tail_kernel, KernelOptions, SequenceCuts};
use szego_core::geometry::{default_classifier, trace_curve_k, trace_szego_curve, Classifier, DEFAULT_STEP};
use szego_core::ginibre::{ginibre_berezin, ginibre_kernel_exact};
use szego_core::oracle::{build_basis, kernel_oracle, GridSpec, OrthonormalBasis, PrecisionMode};
use szego_core::potential::{boundary_speed, droplet as droplet_geometry, make_elliptic_ginibre, make_ginibre, make_radial, radial_profile, Potential, PotentialKind};
use szego_core::validate::{run_suite, suite};
use szego_core::ward::{loop_residual, KernelSource};
use szego_core::{BoundaryPoint, LogComplex};

use crate::config::{parse_complex, PotentialSpec, RunConfig};
use crate::output::{emit, json_bytes, num, write_file, CsvOut, Meta};
use crate::CliError;

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn single_n(cfg: &RunConfig, what: &str) -> Result<usize, CliError> {
    match cfg.n_ladder.as_slice() {
        [n] => Ok(*n),
        _ => Err(cfg_err(format!("{what} takes a single --n, got ladder {:?}", cfg.n_ladder))),
    }
}

fn kernel_options(cfg: &RunConfig) -> KernelOptions {
    KernelOptions { m_const: cfg.m_const, eta: cfg.eta, ..KernelOptions::default() }
}

fn full_basis(pot: &Potential, n: usize, mode: PrecisionMode) -> Result<OrthonormalBasis, CliError> {
    Ok(build_basis(pot, n, n - 1, &GridSpec::default(), mode)?)
}

fn read_points(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| cfg_err(format!("cannot read points {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed = match (rec.get(0), rec.get(1)) {
            (Some(re), Some(im)) => re.parse::<f64>().ok().zip(im.parse::<f64>().ok()),
            (Some(one), None) => parse_complex(one).ok().map(|c| (c.re, c.im)),
            _ => None,
        };
        match parsed {
            Some((re, im)) => out.push(Complex64::new(re, im)),
            None if i == 0 => continue,
            None => return Err(cfg_err(format!("{}: row {} is not a point", path.display(), i + 1))),
        }
    }
    Ok(out)
}

pub fn classify(cfg: &RunConfig, points: Option<&Path>) -> Result<(), CliError> {
    let zetas = match points {
        Some(p) => read_points(p)?,
        None => cfg.z_points(),
    };
    let owned;
    let classifier = if cfg.step == DEFAULT_STEP {
        default_classifier()
    } else {
        owned = Classifier::new(cfg.step)?;
        &owned
    };
    let meta = Meta::new("classify", cfg, &(points, &zetas.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()));
    let mut out = CsvOut::new(&meta, &[("tol", num(cfg.tol))], &["re", "im", "region", "in_e_sz"])?;
    let labels: Vec<_> = zetas.par_iter().map(|&z| classifier.classify(z, cfg.tol)).collect();
    for (z, l) in zetas.iter().zip(labels) {
        out.row([num(z.re), num(z.im), l.region.name().to_string(), l.in_e_sz.to_string()])?;
    }
    emit(cfg, "classify.csv", &out.finish()?)?;
    Ok(())
}

pub fn expand(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.potential != PotentialSpec::Ginibre {
        return Err(cfg_err("expand compares against the exact Ginibre kernel; use --potential ginibre"));
    }
    let (z, w) = cfg.pair()?;
    let k = cfg.k_terms;
    let rows = cfg
        .n_ladder
        .par_iter()
        .map(|&n| {
            let exact = ginibre_kernel_exact(n, z, w).value;
            let approx = exterior_kernel_expansion(n, z, w, k, cfg.eta)?;
            let rel = exact.ratio_minus_one(approx)?.norm();
            Ok((n, exact, approx, rel))
        })
        .collect::<Result<Vec<_>, szego_core::Error>>()?;
    let meta = Meta::new("expand", cfg, &());
    let extra = [("z", format!("{z}")), ("w", format!("{w}")), ("k", k.to_string())];
    let mut out = CsvOut::new(&meta, &extra, &["n", "exact_logmag", "exact_arg", "approx_logmag", "approx_arg", "rel_error"])?;
    for (n, e, a, rel) in rows {
        out.row([n.to_string(), num(e.log_mag), num(e.arg), num(a.log_mag), num(a.arg), num(rel)])?;
    }
    emit(cfg, "expand.csv", &out.finish()?)?;
    Ok(())
}

/// Basis as written by `szego oracle`.
#[derive(Serialize, Deserialize)]
pub struct BasisDump {
    pub meta: Option<serde_json::Value>,
    pub potential: PotentialSpec,
    pub nodes: usize,
    pub n: usize,
    pub max_degree: usize,
    pub precision: String,
    pub p0: f64,
    pub residual: f64,
    pub moment_residual: f64,
    pub cond_estimate: f64,
    /// recurrence[j][i] = H_ij as [re, im]
    pub recurrence: Vec<Vec<[f64; 2]>>,
    /// monomial coefficients of P_j as [re, im]
    pub coeffs: Vec<Vec<[f64; 2]>>,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn build_named(spec: &PotentialSpec, nodes: usize) -> Result<Potential, CliError> {
    let cfg = RunConfig { potential: spec.clone(), nodes, ..RunConfig::default() };
    cfg.build_potential()
}

pub fn load_basis(path: &Path) -> Result<OrthonormalBasis, CliError> {
    let text = fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read basis {}: {e}", path.display())))?;
    let d: BasisDump = serde_json::from_str(&text).map_err(|e| cfg_err(format!("malformed basis {}: {e}", path.display())))?;
    let pot = build_named(&d.potential, d.nodes)?;
    let rec = d.recurrence.iter().map(|col| col.iter().map(|p| Complex64::new(p[0], p[1])).collect()).collect();
    let mode = d.precision.parse::<PrecisionMode>()?;
    Ok(OrthonormalBasis::from_recurrence(&pot, d.n, mode, d.p0, rec, d.residual, d.moment_residual, d.cond_estimate)?)
}

const KERNEL_MODES: [&str; 4] = ["exact", "asymptotic", "tail", "oracle"];

pub fn kernel(cfg: &RunConfig, mode: &str, basis_path: Option<&Path>) -> Result<(), CliError> {
    let loaded = basis_path.map(load_basis).transpose()?;
    let (pot, ladder) = match &loaded {
        Some(b) => (b.potential().clone(), vec![b.n]),
        None => (cfg.build_potential()?, cfg.n_ladder.clone()),
    };
    let ginibre = pot.kind == PotentialKind::Ginibre;
    let modes: Vec<&str> = if mode == "all" {
        KERNEL_MODES.iter().copied().filter(|m| ginibre || *m != "exact").collect()
    } else {
        mode.split(',').map(str::trim).collect()
    };
    for m in &modes {
        if !KERNEL_MODES.contains(m) {
            return Err(cfg_err(format!("unknown kernel mode '{m}' (exact|asymptotic|tail|oracle|all)")));
        }
        if *m == "exact" && !ginibre {
            return Err(cfg_err("exact mode is closed form for Ginibre only; use oracle"));
        }
    }
    let (z, w) = cfg.pair()?;
    let opts = kernel_options(cfg);
    let prec = cfg.precision_mode()?;
    let mut table = Vec::new();
    for &n in &ladder {
        let built;
        let basis = match &loaded {
            Some(b) => Some(b),
            None if modes.contains(&"oracle") => {
                built = full_basis(&pot, n, prec)?;
                Some(&built)
            }
            None => None,
        };
        let values = modes
            .iter()
            .map(|m| -> Result<LogComplex, CliError> {
                Ok(match *m {
                    "exact" => ginibre_kernel_exact(n, z, w).value,
                    "asymptotic" => kernel_asymptotic(&pot, n, z, w, &opts)?.value,
                    "tail" => tail_kernel(&pot, n, z, w, &opts)?,
                    _ => kernel_oracle(basis.expect("basis is built for oracle mode"), z, w)?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.push((n, values));
    }
    let mut header = vec!["n".to_string()];
    for m in &modes {
        header.push(format!("{m}_logmag"));
        header.push(format!("{m}_arg"));
    }
    for (i, a) in modes.iter().enumerate() {
        for b in &modes[i + 1..] {
            header.push(format!("ratio_{a}_{b}_abs"));
            header.push(format!("ratio_{a}_{b}_arg"));
        }
    }
    let meta = Meta::new("kernel", cfg, &(mode, basis_path, &modes));
    let extra = [("potential", pot_label(&pot)), ("z", format!("{z}")), ("w", format!("{w}"))];
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = CsvOut::new(&meta, &extra, &hdr)?;
    for (n, vals) in table {
        let mut row = vec![n.to_string()];
        for v in &vals {
            row.push(num(v.log_mag));
            row.push(num(v.arg));
        }
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                let r = vals[i].div(vals[j])?;
                row.push(num(r.log_mag.exp()));
                row.push(num(r.arg));
            }
        }
        out.row(row)?;
    }
    emit(cfg, "kernel.csv", &out.finish()?)?;
    Ok(())
}

fn pot_label(pot: &Potential) -> String {
    match &pot.kind {
        PotentialKind::Ginibre => "ginibre".into(),
        PotentialKind::Radial { coeffs } => format!("radial{coeffs:?}").replace(' ', ""),
        PotentialKind::Elliptic { a, b } => format!("elliptic(a={a},b={b})"),
    }
}

/// log B_n(z, w) = 2 log|K(z, w)| − log K(z, z).
fn log_berezin(pot: &Potential, basis: Option<&OrthonormalBasis>, n: usize, z: Complex64, w: Complex64, log_rz: f64) -> Result<f64, CliError> {
    match basis {
        None => Ok(ginibre_berezin(n, z, w).ln()),
        Some(b) => {
            let _ = pot;
            let k = kernel_oracle(b, z, w)?;
            Ok(if k.is_zero() { f64::NEG_INFINITY } else { 2.0 * k.log_mag - log_rz })
        }
    }
}

pub fn berezin(cfg: &RunConfig, angular: usize, ell_points: usize) -> Result<(), CliError> {
    if angular < 4 || ell_points == 0 {
        return Err(cfg_err("need --angular ≥ 4 and --ell-points ≥ 1"));
    }
    let pot = cfg.build_potential()?;
    let z = match cfg.z_points().as_slice() {
        [z] => *z,
        _ => return Err(cfg_err("berezin takes exactly one z")),
    };
    let opts = kernel_options(cfg);
    let prec = cfg.precision_mode()?;
    let geom = droplet_geometry(&pot, 1.0, angular)?;
    let arc = geom.arclength();
    let meta = Meta::new("berezin", cfg, &(angular, ell_points));
    let extra = [("potential", pot_label(&pot)), ("z", format!("{z}"))];
    let header = ["n", "p_index", "arclength", "ell", "density_exact_or_oracle", "density_gaussian", "ratio"];
    let mut out = CsvOut::new(&meta, &extra, &header)?;
    for &n in &cfg.n_ladder {
        let cuts = SequenceCuts::new(n, cfg.m_const)?;
        let basis = if pot.kind == PotentialKind::Ginibre { None } else { Some(full_basis(&pot, n, prec)?) };
        let log_rz = match &basis {
            Some(b) => kernel_oracle(b, z, z)?.log_mag,
            None => 0.0,
        };
        let ells: Vec<f64> = if ell_points == 1 {
            vec![0.0]
        } else {
            (0..ell_points).map(|i| -cuts.delta_n + 2.0 * cuts.delta_n * i as f64 / (ell_points - 1) as f64).collect()
        };
        let rows = (0..angular)
            .into_par_iter()
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / angular as f64;
                let bp = BoundaryPoint { p: geom.boundary[k], normal: geom.map.normal(theta), tau: 1.0 };
                ells.iter()
                    .map(|&ell| {
                        let wpt = bp.p + bp.normal * ell;
                        let exact = log_berezin(&pot, basis.as_ref(), n, z, wpt, log_rz)?.exp() / PI;
                        let model = berezin_belt_density(&pot, n, z, bp, ell, &opts, false)?.density;
                        Ok((k, ell, exact, model))
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        for (k, ell, exact, model) in rows.into_iter().flatten() {
            out.row([n.to_string(), k.to_string(), num(arc[k]), num(ell), num(exact), num(model), num(exact / model)])?;
        }
    }
    emit(cfg, "berezin.csv", &out.finish()?)?;
    Ok(())
}

fn parse_taus(s: &str) -> Result<Vec<f64>, CliError> {
    let taus = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| cfg_err(format!("invalid τ '{p}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    if taus.is_empty() || taus.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(cfg_err(format!("τ values must be positive, got '{s}'")));
    }
    Ok(taus)
}

fn droplet_rows(pot: &Potential, tau: f64, angular: usize) -> Result<Vec<[f64; 7]>, CliError> {
    let geom = droplet_geometry(pot, tau, angular)?;
    (0..angular)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / angular as f64;
            let p = geom.boundary[k];
            let nrm = geom.map.normal(theta);
            Ok([k as f64, theta, p.re, p.im, nrm.re, nrm.im, boundary_speed(pot, tau, p)?])
        })
        .collect()
}

pub fn droplet(cfg: &RunConfig, tau: &str, angular: usize) -> Result<(), CliError> {
    if angular < 4 {
        return Err(cfg_err("need --angular ≥ 4"));
    }
    let taus = parse_taus(tau)?;
    let pot = cfg.build_potential()?;
    let meta = Meta::new("droplet", cfg, &(&taus, angular));
    let mut out = CsvOut::new(&meta, &[("potential", pot_label(&pot))], &["tau", "index", "theta", "x", "y", "nx", "ny", "normal_speed"])?;
    for &t in &taus {
        for r in droplet_rows(&pot, t, angular)? {
            out.row([num(t), (r[0] as usize).to_string(), num(r[1]), num(r[2]), num(r[3]), num(r[4]), num(r[5]), num(r[6])])?;
        }
    }
    emit(cfg, "droplet.csv", &out.finish()?)?;
    Ok(())
}

pub fn oracle(cfg: &RunConfig, max_degree: Option<usize>, refine: usize) -> Result<(), CliError> {
    let n = single_n(cfg, "oracle")?;
    let md = max_degree.unwrap_or(n.saturating_sub(1));
    let pot = cfg.build_potential()?;
    let grid = GridSpec { refine, ..GridSpec::default() };
    let b = build_basis(&pot, n, md, &grid, cfg.precision_mode()?)?;
    let meta = Meta::new("oracle", cfg, &(md, refine));
    let dump = BasisDump {
        meta: Some(serde_json::to_value(&meta).map_err(|e| CliError::Io(e.to_string()))?),
        potential: PotentialSpec::from_kind(&pot.kind)?,
        nodes: cfg.nodes,
        n,
        max_degree: b.max_degree,
        precision: b.precision_mode.name().into(),
        p0: b.p0,
        residual: b.residual,
        moment_residual: b.moment_residual,
        cond_estimate: b.cond_estimate,
        recurrence: b.recurrence.iter().map(|c| pairs(c)).collect(),
        coeffs: b.coeffs.iter().map(|c| pairs(c)).collect(),
    };
    emit(cfg, "oracle.json", &json_bytes(&dump)?)?;
    Ok(())
}

#[derive(Serialize)]
struct WardPoint {
    n: usize,
    z: [f64; 2],
    lhs: [f64; 2],
    rhs: f64,
    residual: [f64; 2],
    residual_abs: f64,
    budget: f64,
    within_budget: bool,
    fd_step: f64,
    fd_error: f64,
    quad_error: f64,
    quad_refine: usize,
}

#[derive(Serialize)]
struct WardReport {
    meta: Meta,
    source: String,
    potential: PotentialSpec,
    points: Vec<WardPoint>,
    all_within_budget: bool,
}

pub fn ward(cfg: &RunConfig, source: &str, fd_step: Option<f64>, refine: usize) -> Result<(), CliError> {
    if refine == 0 {
        return Err(cfg_err("--refine must be positive"));
    }
    let use_oracle = match source {
        "ginibre" => {
            if cfg.potential != PotentialSpec::Ginibre {
                return Err(cfg_err("source ginibre needs --potential ginibre; use --source oracle"));
            }
            false
        }
        "oracle" => true,
        other => return Err(cfg_err(format!("unknown ward source '{other}' (ginibre|oracle)"))),
    };
    let pot = cfg.build_potential()?;
    let prec = cfg.precision_mode()?;
    let mut points = Vec::new();
    for &n in &cfg.n_ladder {
        let basis = if use_oracle { Some(full_basis(&pot, n, prec)?) } else { None };
        let src = match &basis {
            Some(b) => KernelSource::Oracle(b),
            None => KernelSource::Ginibre { n },
        };
        for z in cfg.z_points() {
            let r = loop_residual(&src, z, fd_step, refine)?;
            points.push(WardPoint {
                n,
                z: [z.re, z.im],
                lhs: [r.lhs.re, r.lhs.im],
                rhs: r.rhs,
                residual: [r.residual.re, r.residual.im],
                residual_abs: r.residual.norm(),
                budget: r.budget,
                within_budget: r.within_budget(),
                fd_step: r.fd_step,
                fd_error: r.fd_error,
                quad_error: r.quad_error,
                quad_refine: r.quad_refine,
            });
        }
    }
    let report = WardReport {
        meta: Meta::new("ward", cfg, &(source, fd_step, refine)),
        source: source.into(),
        potential: cfg.potential.clone(),
        all_within_budget: points.iter().all(|p| p.within_budget),
        points,
    };
    emit(cfg, "ward.json", &json_bytes(&report)?)?;
    Ok(())
}

#[derive(Serialize)]
struct CriterionJson {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    metrics: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct ValidationReport {
    meta: Meta,
    suite: String,
    seed: u64,
    passed: bool,
    failed: Vec<usize>,
    criteria: Vec<CriterionJson>,
}

pub fn validate(cfg: &RunConfig, suite_name: &str) -> Result<(), CliError> {
    let ids = suite(suite_name)?;
    let reports = run_suite(&ids, cfg.seed);
    for r in &reports {
        eprintln!("{r} ({:.1}s)", r.seconds);
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    let report = ValidationReport {
        meta: Meta::new("validate", cfg, &suite_name),
        suite: suite_name.into(),
        seed: cfg.seed,
        passed: failed.is_empty(),
        failed: failed.clone(),
        criteria: reports
            .into_iter()
            .map(|r| CriterionJson { id: r.id, name: r.name, passed: r.passed, detail: r.detail, metrics: r.metrics.into_iter().collect() })
            .collect(),
    };
    emit(cfg, "validate.json", &json_bytes(&report)?)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(failed.len()))
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FigureArgs {
    /// traced Szegő curve
    #[arg(long = "szego-curve")]
    pub szego_curve: bool,
    /// traced branch of Im u = 0 through 1
    #[arg(long = "curve-k")]
    pub curve_k: bool,
    /// region labels on a ζ grid
    #[arg(long = "e-sz")]
    pub e_sz: bool,
    /// Berezin density on a square grid for the first z and n
    #[arg(long = "berezin-surface")]
    pub berezin_surface: bool,
    /// boundaries of built-in droplets at several τ
    #[arg(long)]
    pub droplets: bool,
    /// grid points per side
    #[arg(long, default_value_t = 81)]
    pub grid: usize,
    /// half-width of the Berezin surface window
    #[arg(long, default_value_t = 2.5)]
    pub extent: f64,
    /// half-height of the traced curve K
    #[arg(long = "k-extent", default_value_t = 3.0)]
    pub k_extent: f64,
}

fn linspace(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect()
}

fn curve_csv(meta: &Meta, points: &[Complex64], closed: bool) -> Result<Vec<u8>, CliError> {
    let mut out = CsvOut::new(meta, &[("closed", closed.to_string())], &["index", "re", "im"])?;
    for (i, p) in points.iter().enumerate() {
        out.row([i.to_string(), num(p.re), num(p.im)])?;
    }
    out.finish()
}

pub fn figures(cfg: &RunConfig, args: &FigureArgs) -> Result<(), CliError> {
    if args.grid < 2 || !(args.extent > 0.0) || !(args.k_extent > 0.0) {
        return Err(cfg_err("need --grid ≥ 2 and positive extents"));
    }
    let any = args.szego_curve || args.curve_k || args.e_sz || args.berezin_surface || args.droplets;
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let mut written = Vec::new();
    if args.szego_curve || !any {
        let meta = Meta::new("figures/szego-curve", cfg, args);
        let c = trace_szego_curve(cfg.step, 1e-13)?;
        written.push(write_file(&dir, "szego_curve.csv", &curve_csv(&meta, &c.points, c.closed)?)?);
    }
    if args.curve_k || !any {
        let meta = Meta::new("figures/curve-k", cfg, args);
        let c = trace_curve_k(args.k_extent, cfg.step, 1e-13)?;
        written.push(write_file(&dir, "curve_k.csv", &curve_csv(&meta, &c.points, c.closed)?)?);
    }
    if args.e_sz || !any {
        let meta = Meta::new("figures/e-sz", cfg, args);
        let classifier = default_classifier();
        let xs = linspace(-1.5, 3.5, args.grid);
        let ys = linspace(-2.5, 2.5, args.grid);
        let labels: Vec<Vec<_>> = ys.par_iter().map(|&y| xs.iter().map(|&x| classifier.classify(Complex64::new(x, y), cfg.tol)).collect()).collect();
        let mut out = CsvOut::new(&meta, &[], &["re", "im", "region", "in_e_sz"])?;
        for (y, row) in ys.iter().zip(labels) {
            for (x, l) in xs.iter().zip(row) {
                out.row([num(*x), num(*y), l.region.name().to_string(), l.in_e_sz.to_string()])?;
            }
        }
        written.push(write_file(&dir, "e_sz_grid.csv", &out.finish()?)?);
    }
    if args.berezin_surface || !any {
        let meta = Meta::new("figures/berezin-surface", cfg, args);
        let pot = cfg.build_potential()?;
        let n = cfg.n_ladder[0];
        let z = *cfg.z_points().first().ok_or_else(|| cfg_err("berezin surface needs a z"))?;
        let basis = if pot.kind == PotentialKind::Ginibre { None } else { Some(full_basis(&pot, n, cfg.precision_mode()?)?) };
        let log_rz = match &basis {
            Some(b) => kernel_oracle(b, z, z)?.log_mag,
            None => 0.0,
        };
        let xs = linspace(-args.extent, args.extent, args.grid);
        let rows = xs
            .par_iter()
            .map(|&y| xs.iter().map(|&x| Ok(log_berezin(&pot, basis.as_ref(), n, z, Complex64::new(x, y), log_rz)?.exp())).collect::<Result<Vec<f64>, CliError>>())
            .collect::<Result<Vec<_>, CliError>>()?;
        let extra = [("potential", pot_label(&pot)), ("n", n.to_string()), ("z", format!("{z}"))];
        let mut out = CsvOut::new(&meta, &extra, &["x", "y", "density"])?;
        for (y, row) in xs.iter().zip(rows) {
            for (x, d) in xs.iter().zip(row) {
                out.row([num(*x), num(*y), num(d)])?;
            }
        }
        written.push(write_file(&dir, "berezin_surface.csv", &out.finish()?)?);
    }
    if args.droplets || !any {
        let meta = Meta::new("figures/droplets", cfg, args);
        let builtins: Vec<(String, Potential)> = vec![
            ("ginibre".into(), make_ginibre()),
            ("radial-r4".into(), make_radial(&radial_profile("r4")?)?),
            ("radial-r2+r4".into(), make_radial(&radial_profile("r2+r4")?)?),
            ("elliptic-a1-b3".into(), make_elliptic_ginibre(1.0, 3.0)?),
        ];
        let mut out = CsvOut::new(&meta, &[], &["potential", "tau", "index", "x", "y"])?;
        for (name, pot) in &builtins {
            for tau in [0.25, 0.5, 0.75, 1.0] {
                for r in droplet_rows(pot, tau, 256)? {
                    out.row([name.clone(), num(tau), (r[0] as usize).to_string(), num(r[2]), num(r[3])])?;
                }
            }
        }
        written.push(write_file(&dir, "droplets.csv", &out.finish()?)?);
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}
