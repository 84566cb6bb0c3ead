use std::path::Path;

use log::{debug, info};
use serde::Serialize;
use spectral_sens::deriv_eig::{eig_directional_derivative, ensure_unit, normalize, DerivativeReport};
use spectral_sens::deriv_sv::{sv_decomposition, sv_derivative_reduced, sv_directional_derivative};
use spectral_sens::directions::{coordinate_axes, sphere_directions};
use spectral_sens::fd::{default_step, fd_directional, FdEstimate, DEFAULT_LEVELS};
use spectral_sens::hermitian::{hermitian_eig, DEFAULT_CONVERGENCE_TOL};
use spectral_sens::ikramov::{
    classify_critical_point, coarse_maximizer, level_function_report, CriticalPointAnalysis,
    LevelFunctionReport, MaximizerConfig, MaximizerResult,
};
use spectral_sens::{kato_family, AffineFamily, ComplexMatrix, Error, MatrixFamily};

use crate::args::{Builtin, Command, Format, GlobalArgs};
use crate::error::{CliError, CliResult};
use crate::output::{num, nums, render_csv, render_json, Table};

/// Rendered output plus the exit status it implies.
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub warnings: bool,
    pub failed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failed {
            1
        } else if self.warnings {
            2
        } else {
            0
        }
    }
}

pub fn run(command: Command, args: &GlobalArgs) -> CliResult<Outcome> {
    match command {
        Command::Eig => eig(args),
        Command::Sv => sv(args),
        Command::Scan => scan(args),
        Command::Verify => verify(args),
        Command::Ikramov => ikramov(args),
        Command::Selftest => crate::selftest::run(args),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn load_family(args: &GlobalArgs) -> CliResult<MatrixFamily> {
    match (&args.family, args.builtin) {
        (Some(path), _) => {
            let affine: AffineFamily = read_json(path)?;
            affine.into_family().map_err(CliError::Input)
        }
        (None, Some(Builtin::Kato)) => Ok(kato_family()),
        (None, None) => Err(CliError::Usage("one of --family or --builtin is required".into())),
    }
}

fn point(args: &GlobalArgs, family: &MatrixFamily) -> CliResult<Vec<f64>> {
    let p = family.param_dim();
    let x0 = args.x0.clone().unwrap_or_else(|| vec![0.0; p]);
    if x0.len() != p {
        return Err(CliError::Usage(format!(
            "--x0 has {} entries, family has {p} parameters",
            x0.len()
        )));
    }
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage("--x0 entries must be finite".into()));
    }
    Ok(x0)
}

fn parse_vector(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("bad number {s:?} in direction {text:?}")))
        })
        .collect()
}

/// Explicit `--d` values, else `--n-directions` seeded sphere points, else
/// `default_count` sphere points or the coordinate axes.
fn directions(args: &GlobalArgs, dim: usize, default_count: Option<usize>) -> CliResult<Vec<Vec<f64>>> {
    if !args.directions.is_empty() {
        return args
            .directions
            .iter()
            .map(|text| {
                let d = parse_vector(text)?;
                if d.len() != dim {
                    return Err(CliError::Usage(format!("direction {text:?} needs {dim} entries")));
                }
                if args.normalize {
                    normalize(&d).map_err(CliError::Input)
                } else {
                    ensure_unit(&d).map_err(CliError::Input)?;
                    Ok(d)
                }
            })
            .collect();
    }
    match args.n_directions.or(default_count) {
        Some(0) => Err(CliError::Usage("at least one direction is required".into())),
        Some(count) => sphere_directions(dim, count, args.seed).map_err(CliError::Input),
        None => Ok(coordinate_axes(dim)),
    }
}

fn ranks(given: &Option<Vec<usize>>, max: usize, flag: &str) -> CliResult<Vec<usize>> {
    let ranks = given.clone().unwrap_or_else(|| (1..=max).collect());
    if ranks.is_empty() {
        return Err(CliError::Usage(format!("{flag} needs at least one rank")));
    }
    if let Some(&bad) = ranks.iter().find(|&&r| r == 0 || r > max) {
        return Err(CliError::Usage(format!("{flag} {bad} outside 1..={max}")));
    }
    Ok(ranks)
}

fn require_hermitian(family: &MatrixFamily) -> CliResult<()> {
    if family.is_hermitian() {
        Ok(())
    } else {
        Err(CliError::Usage(
            "eigenvalue derivatives need a Hermitian family".into(),
        ))
    }
}

fn render<T: Serialize>(args: &GlobalArgs, value: &T, table: impl FnOnce() -> Table) -> CliResult<Vec<u8>> {
    match args.format.unwrap_or(Format::Json) {
        Format::Json => render_json(value),
        Format::Csv => render_csv(&table()),
    }
}

fn direction_header(prefix: &[&str], dim: usize) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain((1..=dim).map(|j| format!("d{j}")))
        .collect()
}

#[derive(Serialize)]
struct EigOutput<'a> {
    command: &'static str,
    x0: &'a [f64],
    reports: &'a [DerivativeReport],
}

fn eig(args: &GlobalArgs) -> CliResult<Outcome> {
    let family = load_family(args)?;
    require_hermitian(&family)?;
    let x0 = point(args, &family)?;
    let dirs = directions(args, family.param_dim(), None)?;
    let ms = ranks(&args.m, family.rows(), "--m")?;
    let mut reports = Vec::new();
    for &m in &ms {
        for d in &dirs {
            reports.push(eig_directional_derivative(&family, &x0, m, d, args.cluster_tol)?);
        }
    }
    info!("eig: {} reports", reports.len());
    let warnings = reports.iter().any(|r| !r.warnings.is_empty());
    let out = EigOutput {
        command: "eig",
        x0: &x0,
        reports: &reports,
    };
    let bytes = render(args, &out, || {
        let mut header = direction_header(&["m", "direction_index"], family.param_dim());
        header.extend(["derivative", "selected_index", "cluster_size", "guard"].map(String::from));
        let mut t = Table::new(header);
        for (k, r) in reports.iter().enumerate() {
            let mut row = vec![r.cluster.m.to_string(), (k % dirs.len()).to_string()];
            row.extend(nums(&r.direction));
            row.push(num(r.derivative));
            row.push(r.selected_index.to_string());
            row.push(r.cluster.r.to_string());
            row.push(r.guard.map(num).unwrap_or_default());
            t.push(row);
        }
        t
    })?;
    Ok(Outcome {
        bytes,
        warnings,
        failed: false,
    })
}

#[derive(Serialize)]
struct SvItem {
    k: usize,
    direction_index: usize,
    derivative: f64,
    path_delta: f64,
    embedding: DerivativeReport,
    reduced: DerivativeReport,
}

#[derive(Serialize)]
struct SvOutput<'a> {
    command: &'static str,
    x0: &'a [f64],
    reports: &'a [SvItem],
}

fn sv(args: &GlobalArgs) -> CliResult<Outcome> {
    let family = load_family(args)?;
    let x0 = point(args, &family)?;
    let dirs = directions(args, family.param_dim(), None)?;
    let ks = ranks(&args.k, family.rows().min(family.cols()), "--k")?;
    let mut items = Vec::new();
    for &k in &ks {
        for (index, d) in dirs.iter().enumerate() {
            let embedding = sv_directional_derivative(&family, &x0, k, d, args.cluster_tol)?;
            let reduced = sv_derivative_reduced(&family, &x0, k, d, args.cluster_tol)?;
            let path_delta = (embedding.derivative - reduced.derivative).abs();
            debug!("sv k={k} d#{index}: path delta {path_delta:e}");
            items.push(SvItem {
                k,
                direction_index: index,
                derivative: reduced.derivative,
                path_delta,
                embedding,
                reduced,
            });
        }
    }
    let warnings = items.iter().any(|i| !i.embedding.warnings.is_empty());
    let out = SvOutput {
        command: "sv",
        x0: &x0,
        reports: &items,
    };
    let bytes = render(args, &out, || {
        let mut header = direction_header(&["k", "direction_index"], family.param_dim());
        header.extend(["embedding", "reduced", "path_delta", "cluster_size"].map(String::from));
        let mut t = Table::new(header);
        for item in &items {
            let mut row = vec![item.k.to_string(), item.direction_index.to_string()];
            row.extend(nums(&item.embedding.direction));
            row.push(num(item.embedding.derivative));
            row.push(num(item.reduced.derivative));
            row.push(num(item.path_delta));
            row.push(item.embedding.cluster.r.to_string());
            t.push(row);
        }
        t
    })?;
    Ok(Outcome {
        bytes,
        warnings,
        failed: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Eig,
    Sv,
}

/// `--k` selects singular values; otherwise eigenvalues of a Hermitian family.
fn targets(args: &GlobalArgs, family: &MatrixFamily) -> CliResult<Vec<(Kind, usize)>> {
    let mut out = Vec::new();
    if let Some(ms) = &args.m {
        require_hermitian(family)?;
        out.extend(
            ranks(&Some(ms.clone()), family.rows(), "--m")?
                .into_iter()
                .map(|m| (Kind::Eig, m)),
        );
    }
    if args.k.is_some() {
        let q = family.rows().min(family.cols());
        out.extend(ranks(&args.k, q, "--k")?.into_iter().map(|k| (Kind::Sv, k)));
    }
    if out.is_empty() {
        if family.is_hermitian() {
            out.extend((1..=family.rows()).map(|m| (Kind::Eig, m)));
        } else {
            out.extend((1..=family.rows().min(family.cols())).map(|k| (Kind::Sv, k)));
        }
    }
    Ok(out)
}

fn derivative(
    kind: Kind,
    family: &MatrixFamily,
    x0: &[f64],
    rank: usize,
    d: &[f64],
    tol: Option<f64>,
) -> CliResult<DerivativeReport> {
    Ok(match kind {
        Kind::Eig => eig_directional_derivative(family, x0, rank, d, tol)?,
        Kind::Sv => sv_derivative_reduced(family, x0, rank, d, tol)?,
    })
}

#[derive(Serialize)]
struct ScanRow {
    kind: Kind,
    rank: usize,
    direction_index: usize,
    direction: Vec<f64>,
    derivative: f64,
    mu: Vec<f64>,
    selected_index: usize,
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    command: &'static str,
    x0: &'a [f64],
    seed: u64,
    rows: &'a [ScanRow],
}

const SCAN_DEFAULT_DIRECTIONS: usize = 64;

fn scan(args: &GlobalArgs) -> CliResult<Outcome> {
    let family = load_family(args)?;
    let x0 = point(args, &family)?;
    let dirs = directions(args, family.param_dim(), Some(SCAN_DEFAULT_DIRECTIONS))?;
    let mut rows = Vec::new();
    let mut warnings = false;
    for (kind, rank) in targets(args, &family)? {
        for (index, d) in dirs.iter().enumerate() {
            let r = derivative(kind, &family, &x0, rank, d, args.cluster_tol)?;
            warnings |= !r.warnings.is_empty();
            rows.push(ScanRow {
                kind,
                rank,
                direction_index: index,
                direction: r.direction,
                derivative: r.derivative,
                mu: r.mu,
                selected_index: r.selected_index,
            });
        }
    }
    let out = ScanOutput {
        command: "scan",
        x0: &x0,
        seed: args.seed,
        rows: &rows,
    };
    let bytes = render(args, &out, || {
        let widest = rows.iter().map(|r| r.mu.len()).max().unwrap_or(0);
        let mut header = direction_header(&["kind", "rank", "direction_index"], family.param_dim());
        header.push("derivative".into());
        header.extend((1..=widest).map(|i| format!("mu{i}")));
        let mut t = Table::new(header);
        for r in &rows {
            let kind = match r.kind {
                Kind::Eig => "eig",
                Kind::Sv => "sv",
            };
            let mut row = vec![
                kind.to_string(),
                r.rank.to_string(),
                r.direction_index.to_string(),
            ];
            row.extend(nums(&r.direction));
            row.push(num(r.derivative));
            row.extend(nums(&r.mu));
            t.push(row);
        }
        t
    })?;
    Ok(Outcome {
        bytes,
        warnings,
        failed: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Serialize)]
struct VerifyItem {
    kind: Kind,
    rank: usize,
    direction_index: usize,
    direction: Vec<f64>,
    analytic: f64,
    fd: FdEstimate,
    abs_delta: f64,
    rel_delta: f64,
    status: Status,
}

#[derive(Serialize)]
struct VerifySummary {
    pass: bool,
    passed: usize,
    failed: usize,
    inconclusive: usize,
    tolerance: f64,
    h0: f64,
    levels: usize,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    command: &'static str,
    x0: &'a [f64],
    summary: VerifySummary,
    items: &'a [VerifyItem],
}

fn ordered_value(kind: Kind, family: &MatrixFamily, rank: usize, x: &[f64]) -> f64 {
    let value = || -> spectral_sens::Result<f64> {
        let a = family.evaluate(x)?;
        Ok(match kind {
            Kind::Eig => hermitian_eig(&a, DEFAULT_CONVERGENCE_TOL)?.eigenvalues[rank - 1],
            Kind::Sv => sv_decomposition(&a)?.sigma[rank - 1],
        })
    };
    value().unwrap_or(f64::NAN)
}

fn verify(args: &GlobalArgs) -> CliResult<Outcome> {
    let family = load_family(args)?;
    let x0 = point(args, &family)?;
    let dirs = directions(args, family.param_dim(), None)?;
    let h0 = args.h0.unwrap_or_else(|| default_step(&x0));
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(CliError::Usage("--h0 must be positive".into()));
    }
    let tol = args.verify_tol;
    let mut items = Vec::new();
    let mut warnings = false;
    for (kind, rank) in targets(args, &family)? {
        for (index, d) in dirs.iter().enumerate() {
            let report = derivative(kind, &family, &x0, rank, d, args.cluster_tol)?;
            warnings |= !report.warnings.is_empty();
            let fd = fd_directional(
                |x| ordered_value(kind, &family, rank, x),
                &x0,
                d,
                h0,
                DEFAULT_LEVELS,
            )?;
            let analytic = report.derivative;
            let abs_delta = (analytic - fd.extrapolated).abs();
            let scale = analytic.abs().max(1.0);
            let status = if !fd.is_trusted() {
                Status::Inconclusive
            } else if abs_delta <= tol * scale {
                Status::Pass
            } else {
                Status::Fail
            };
            items.push(VerifyItem {
                kind,
                rank,
                direction_index: index,
                direction: d.clone(),
                analytic,
                fd,
                abs_delta,
                rel_delta: abs_delta / scale,
                status,
            });
        }
    }
    let count = |s: Status| items.iter().filter(|i| i.status == s).count();
    let summary = VerifySummary {
        pass: count(Status::Fail) == 0,
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        inconclusive: count(Status::Inconclusive),
        tolerance: tol,
        h0,
        levels: DEFAULT_LEVELS,
    };
    let failed = !summary.pass;
    let out = VerifyOutput {
        command: "verify",
        x0: &x0,
        summary,
        items: &items,
    };
    let bytes = render(args, &out, || {
        let mut header = direction_header(&["kind", "rank", "direction_index"], family.param_dim());
        header.extend(["analytic", "fd", "abs_delta", "rel_delta", "stability", "status"].map(String::from));
        let mut t = Table::new(header);
        for i in &items {
            let (kind, status) = (
                match i.kind {
                    Kind::Eig => "eig",
                    Kind::Sv => "sv",
                },
                match i.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                    Status::Inconclusive => "inconclusive",
                },
            );
            let mut row = vec![
                kind.to_string(),
                i.rank.to_string(),
                i.direction_index.to_string(),
            ];
            row.extend(nums(&i.direction));
            row.extend(
                [
                    i.analytic,
                    i.fd.extrapolated,
                    i.abs_delta,
                    i.rel_delta,
                    i.fd.stability_indicator,
                ]
                .map(num),
            );
            row.push(status.to_string());
            t.push(row);
        }
        t
    })?;
    Ok(Outcome {
        bytes,
        warnings,
        failed,
    })
}

#[derive(Serialize)]
struct IkramovOutput<'a> {
    command: &'static str,
    xi0_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    maximizer: Option<&'a MaximizerResult>,
    analysis: &'a CriticalPointAnalysis,
    level_function: &'a LevelFunctionReport,
}

const IKRAMOV_DEFAULT_DIRECTIONS: usize = 64;

fn ikramov(args: &GlobalArgs) -> CliResult<Outcome> {
    let path = args
        .matrix
        .as_ref()
        .ok_or_else(|| CliError::Usage("ikramov needs --matrix FILE".into()))?;
    let a: ComplexMatrix = read_json(path)?;
    if !a.is_square() || a.rows() < 3 {
        return Err(CliError::Input(Error::Dimension(format!(
            "need a square matrix of order at least 3, got {}x{}",
            a.rows(),
            a.cols()
        ))));
    }
    let dirs = directions(args, 4, Some(IKRAMOV_DEFAULT_DIRECTIONS))?;
    let (xi0, maximizer) = match &args.xi0 {
        Some(xi) if xi.len() != 4 || xi.iter().any(|v| !v.is_finite()) => {
            return Err(CliError::Usage("--xi0 needs 4 finite entries".into()));
        }
        Some(xi) => (xi.clone(), None),
        None => {
            let found = coarse_maximizer(&a, &MaximizerConfig::default())?;
            info!(
                "maximizer: f = {} after {} evaluations",
                found.value, found.evaluations
            );
            (found.xi.clone(), Some(found))
        }
    };
    let analysis = classify_critical_point(&a, &xi0, &dirs, args.cluster_tol)?;
    let level = level_function_report(&a, &xi0, args.cluster_tol)?;
    let out = IkramovOutput {
        command: "ikramov",
        xi0_source: if maximizer.is_some() { "maximizer" } else { "given" },
        maximizer: maximizer.as_ref(),
        analysis: &analysis,
        level_function: &level,
    };
    let bytes = render(args, &out, || {
        let mut header = direction_header(&["direction_index"], 4);
        header.extend(["f_fwd", "f_bwd", "f_bwd_direct", "trace"].map(String::from));
        let mut t = Table::new(header);
        for (k, r) in analysis.per_direction.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(nums(&r.d));
            row.push(num(r.f_fwd));
            row.push(num(r.f_bwd));
            row.push(r.f_bwd_direct.map(num).unwrap_or_default());
            row.push(num(r.trace));
            t.push(row);
        }
        t
    })?;
    Ok(Outcome {
        bytes,
        warnings: false,
        failed: false,
    })
}
