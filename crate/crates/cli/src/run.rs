use crate::args::{Cli, Command};
use crate::config::{self, CarpetConfig, FieldKind, GaussConfig, PairConfig, RevivalConfig, SweepRun};
use crate::json;
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use talbot_core::carpet::{self, revival_comb, smoothed_comb_check};
use talbot_core::gauss::{gamma_sum, gamma_via_cases, gauss_sum};
use talbot_core::pairings::{self, n_max_for_tolerance, pair_line, rate_fit};
use talbot_core::{Column, Error, Field, LineSpec, RenderParams, SweepConfig};

/// Why a run stopped; each variant maps to an exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("cannot write {}: {e}", path.display()))
}

/// Files and stdout text produced by a run, written once everything has
/// been computed.
#[derive(Default)]
struct Outputs {
    stdout: Vec<u8>,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn emit(&mut self, target: Option<&PathBuf>, bytes: Vec<u8>) {
        match target {
            Some(p) => self.files.push((p.clone(), bytes)),
            None => self.stdout.extend(bytes),
        }
    }

    fn flush(self) -> Result<(), Failure> {
        for (path, bytes) in &self.files {
            std::fs::write(path, bytes).map_err(|e| io_failure(path, e))?;
        }
        let mut out = std::io::stdout().lock();
        out.write_all(&self.stdout)
            .and_then(|_| out.flush())
            .map_err(|e| Failure::Input(format!("cannot write stdout: {e}")))
    }
}

pub fn main_code() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match configure_threads().and_then(|_| run(&cli)).and_then(Outputs::flush) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("TALBOT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("TALBOT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot start thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<Outputs, Failure> {
    let name = cli.command.name();
    let flags = cli.command.to_map();
    let file = cli.config.as_deref();
    let output = cli.output.as_ref();
    match &cli.command {
        Command::Gauss(_) => gauss(config::resolve(name, flags, file)?, output),
        Command::Revival(_) => revival(config::resolve(name, flags, file)?, output),
        Command::Carpet(_) => carpet(config::resolve(name, flags, file)?, output),
        Command::Pair(_) => pair(config::resolve(name, flags, file)?, output),
        Command::Sweep(_) => sweep(config::resolve(name, flags, file)?, output),
    }
}

fn json_output(value: &Value, output: Option<&PathBuf>) -> Outputs {
    let mut out = Outputs::default();
    out.emit(output, json::to_string(value).into_bytes());
    out
}

fn gauss(cfg: GaussConfig, output: Option<&PathBuf>) -> Result<Outputs, Failure> {
    let value = match (cfg.gamma, cfg.sum) {
        (Some([p, q, m]), None) => {
            let q = positive(q, "q")?;
            let g = gamma_sum(p, q, m)?;
            let cases = gamma_via_cases(p, q, m)?;
            json!({
                "p": p, "q": q, "m": m,
                "value_re": g.re, "value_im": g.im, "modulus": g.norm(),
                "sqrt_q": (q as f64).sqrt(),
                "via_cases_re": cases.re, "via_cases_im": cases.im,
            })
        }
        (None, Some([a, b, c])) => {
            let c = positive(c, "c")?;
            let g = gauss_sum(a, b, c)?;
            json!({
                "a": a, "b": b, "c": c,
                "value_re": g.re, "value_im": g.im, "modulus": g.norm(),
                "sqrt_c": (c as f64).sqrt(),
            })
        }
        _ => return Err(Failure::Input("give exactly one of --gamma P Q M or --sum A B C".into())),
    };
    Ok(json_output(&value, output))
}

fn positive(x: i64, name: &str) -> Result<u64, Failure> {
    u64::try_from(x)
        .ok()
        .filter(|&x| x > 0)
        .ok_or_else(|| Failure::Input(format!("{name} must be a positive integer, got {x}")))
}

fn revival(cfg: RevivalConfig, output: Option<&PathBuf>) -> Result<Outputs, Failure> {
    let comb = revival_comb(cfg.p, cfg.q)?;
    let mass = comb.mass();
    let weights: Vec<Value> =
        comb.weights.iter().map(|w| json!({"re": w.re, "im": w.im, "modulus": w.norm()})).collect();
    let mut value = json!({
        "p": comb.p, "q": comb.q, "shift": comb.shift,
        "locations": comb.locations(),
        "weights": weights,
        "mass_re": mass.re, "mass_im": mass.im,
    });
    match (cfg.sigma, cfg.n_max) {
        (Some(sigma), n_max) => {
            let n_max = n_max.unwrap_or_else(|| (10.0 / sigma).ceil() as u64);
            let report = smoothed_comb_check(cfg.p, cfg.q, sigma, n_max)?;
            let mut check = serde_json::to_value(&report).expect("report serialises");
            check["worst_peak_deviation"] = json!(report.worst_peak_deviation());
            value["check"] = check;
        }
        (None, Some(_)) => return Err(Failure::Input("--n-max needs --sigma".into())),
        (None, None) => {}
    }
    Ok(json_output(&value, output))
}

fn field_of(kind: FieldKind, r: Option<f64>) -> Result<Field, Failure> {
    match (kind, r) {
        (FieldKind::V, _) => Ok(Field::Schrodinger),
        (FieldKind::W, Some(r)) => Ok(Field::Helmholtz { r }),
        (FieldKind::W, None) => Err(Failure::Input("field w needs r".into())),
    }
}

fn carpet(cfg: CarpetConfig, output: Option<&PathBuf>) -> Result<Outputs, Failure> {
    let field = field_of(cfg.field, cfg.r)?;
    let params = RenderParams { width: cfg.width, height: cfg.height, n_max: cfg.n_max, sigma: cfg.sigma };
    if cfg.row_csv.is_some() && cfg.row >= cfg.height {
        return Err(Failure::Input(format!("row {} is outside 0..{}", cfg.row, cfg.height)));
    }
    let grid = carpet::render(field, &params)?;
    let mut out = Outputs::default();
    let mut pgm = Vec::new();
    carpet::write_pgm16(&grid, &mut pgm).expect("writing to memory cannot fail");
    out.files.push((output.cloned().unwrap_or_else(|| PathBuf::from("carpet.pgm")), pgm));
    if let Some(path) = cfg.row_csv {
        let mut csv = Vec::new();
        carpet::write_row_csv(&grid, cfg.row, &mut csv).expect("writing to memory cannot fail");
        out.files.push((path, csv));
    }
    Ok(out)
}

const DEFAULT_TOL: f64 = 1e-6;
/// Horizontal tails decay like `φ̂`, so a near-exact default is cheap.
const DEFAULT_HORIZONTAL_TOL: f64 = 1e-16;
const DEFAULT_BUDGET: u64 = 100_000_000;

fn pair(cfg: PairConfig, output: Option<&PathBuf>) -> Result<Outputs, Failure> {
    let field = field_of(cfg.field, cfg.r)?;
    cfg.line.validate()?;
    cfg.phi.validate()?;
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0) {
            return Err(Failure::Input(format!("tolerance must be positive, got {tol}")));
        }
    }
    let n_max = match cfg.n_max {
        Some(n) => n,
        None => {
            let default_tol = match cfg.line {
                LineSpec::Horizontal { .. } => DEFAULT_HORIZONTAL_TOL,
                _ => DEFAULT_TOL,
            };
            let n = n_max_for_tolerance(&cfg.line, &cfg.phi, cfg.tol.unwrap_or(default_tol), DEFAULT_BUDGET)?;
            match field {
                Field::Helmholtz { r } => n.max(r.ceil() as u64 + 2),
                Field::Schrodinger => n,
            }
        }
    };
    let pairing = pair_line(field, &cfg.line, &cfg.phi, n_max)?;
    if let Some(tol) = cfg.tol {
        pairing.check(tol)?;
    }
    let mut value = json!({ "field": cfg.field.name() });
    if let Field::Helmholtz { r } = field {
        value["r"] = json!(r);
    }
    value["value_re"] = json!(pairing.value.re);
    value["value_im"] = json!(pairing.value.im);
    value["modulus"] = json!(pairing.value.norm());
    value["n_max"] = json!(pairing.n_max);
    value["tail_bound"] = json!(pairing.tail_bound);
    Ok(json_output(&value, output))
}

fn sweep(run: SweepRun, output: Option<&PathBuf>) -> Result<Outputs, Failure> {
    let fits = run
        .fit
        .iter()
        .map(|c| c.parse::<Column>().map_err(|e| Failure::Input(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let config = SweepConfig {
        line: run.line,
        phi: run.phi,
        r_grid: run.r_grid,
        mu: run.mu,
        s: run.s,
        tol: run.tol,
        budget: run.budget,
    };
    config.validate()?;
    for r in config.integer_radii() {
        eprintln!("warning: r = {r} is an integer; the mode |n| = r has zero Helmholtz rate");
    }
    if config.s.is_some() && !matches!(config.line, LineSpec::Horizontal { .. }) {
        eprintln!("warning: s is ignored away from horizontal lines");
    }
    let records = pairings::sweep(&config)?;
    let mut csv = Vec::new();
    pairings::write_csv(&records, &mut csv).expect("writing to memory cannot fail");
    for column in fits {
        match rate_fit(&records, column) {
            Ok(slope) => eprintln!("fit {column}: slope {slope:.4}"),
            Err(e) => eprintln!("fit {column}: {e}"),
        }
    }
    let mut out = Outputs::default();
    out.emit(output, csv);
    Ok(out)
}
