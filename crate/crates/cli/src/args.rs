use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "talbot", version, about = "Gauss sums, Talbot carpets, revival combs and field pairings")]
pub struct Cli {
    /// JSON file of parameters; its keys override the matching flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Where to write the result (stdout if omitted; carpet defaults to carpet.pgm)
    #[arg(short, long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate Γ(p, q; m) or G(a, b, c)
    Gauss(GaussArgs),
    /// The delta comb of v at ζ = p/q, optionally checked against the mollified series
    Revival(RevivalArgs),
    /// Render |u|² over [0,1) × [0,2) as a 16-bit PGM
    Carpet(CarpetArgs),
    /// Pair v or w_r with a test function along a line
    Pair(PairArgs),
    /// Band errors of w_r − v over a grid of r, as CSV
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gauss(_) => "gauss",
            Command::Revival(_) => "revival",
            Command::Carpet(_) => "carpet",
            Command::Pair(_) => "pair",
            Command::Sweep(_) => "sweep",
        }
    }

    /// The flags that were actually given, as config keys.
    pub fn to_map(&self) -> Map<String, Value> {
        let mut m = Map::new();
        match self {
            Command::Gauss(a) => {
                put(&mut m, "gamma", a.gamma.as_ref().map(|v| json!(v)));
                put(&mut m, "sum", a.sum.as_ref().map(|v| json!(v)));
            }
            Command::Revival(a) => {
                put(&mut m, "p", a.p.map(|v| json!(v)));
                put(&mut m, "q", a.q.map(|v| json!(v)));
                put(&mut m, "sigma", a.sigma.map(|v| json!(v)));
                put(&mut m, "n_max", a.n_max.map(|v| json!(v)));
            }
            Command::Carpet(a) => {
                put(&mut m, "field", a.field.as_ref().map(|v| json!(v)));
                put(&mut m, "r", a.r.map(|v| json!(v)));
                put(&mut m, "width", a.width.map(|v| json!(v)));
                put(&mut m, "height", a.height.map(|v| json!(v)));
                put(&mut m, "n_max", a.n_max.map(|v| json!(v)));
                put(&mut m, "sigma", a.sigma.map(|v| json!(v)));
                put(&mut m, "row", a.row.map(|v| json!(v)));
                put(&mut m, "row_csv", a.row_csv.as_ref().map(|v| json!(v)));
            }
            Command::Pair(a) => {
                put(&mut m, "field", a.field.as_ref().map(|v| json!(v)));
                put(&mut m, "r", a.r.map(|v| json!(v)));
                put(&mut m, "line", a.line.to_value());
                put(&mut m, "phi", a.phi.to_value());
                put(&mut m, "n_max", a.n_max.map(|v| json!(v)));
                put(&mut m, "tol", a.tol.map(|v| json!(v)));
            }
            Command::Sweep(a) => {
                put(&mut m, "line", a.line.to_value());
                put(&mut m, "phi", a.phi.to_value());
                put(&mut m, "r_grid", a.r_grid.as_ref().map(|v| json!(v)));
                if a.mu_alpha.is_some() || a.mu_scale.is_some() {
                    let alpha = a.mu_alpha.unwrap_or(0.2);
                    let scale = a.mu_scale.unwrap_or(1.0);
                    m.insert("mu".into(), json!({ "alpha": alpha, "scale": scale }));
                }
                put(&mut m, "s", a.s.map(|v| json!(v)));
                put(&mut m, "tol", a.tol.map(|v| json!(v)));
                put(&mut m, "budget", a.budget.map(|v| json!(v)));
                if !a.fit.is_empty() {
                    m.insert("fit".into(), json!(a.fit));
                }
            }
        }
        m
    }
}

fn put(m: &mut Map<String, Value>, key: &str, v: Option<Value>) {
    if let Some(v) = v {
        m.insert(key.into(), v);
    }
}

#[derive(Args, Debug)]
pub struct GaussArgs {
    /// Γ(p, q; m) with gcd(p, q) = 1
    #[arg(long, num_args = 3, value_names = ["P", "Q", "M"], allow_negative_numbers = true)]
    pub gamma: Option<Vec<i64>>,

    /// G(a, b, c) = Σ_{r<c} e^{2πi(ar²+br)/c}
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"], allow_negative_numbers = true)]
    pub sum: Option<Vec<i64>>,
}

#[derive(Args, Debug)]
pub struct RevivalArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<i64>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Mollifier width; enables the comparison with the truncated series
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Truncation of the series (default ⌈10/σ⌉)
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Args, Debug)]
pub struct CarpetArgs {
    /// v (Schrödinger) or w (Helmholtz)
    #[arg(long)]
    pub field: Option<String>,
    /// r = d/λ, required for w
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Gaussian mollifier e^{−πσ²n²}
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Row index to dump with --row-csv
    #[arg(long)]
    pub row: Option<usize>,
    /// Write one row as CSV
    #[arg(long, value_name = "FILE")]
    pub row_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LineArgs {
    /// horizontal, vertical or oblique
    #[arg(long)]
    pub line: Option<String>,
    /// ζ of a horizontal line, as a decimal or p/q
    #[arg(long)]
    pub zeta: Option<String>,
    /// ξ of a vertical line
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Slope of the oblique line ζ = mξ − k
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// half (ζ > 0 only) or whole (even extension)
    #[arg(long)]
    pub restriction: Option<String>,
}

impl LineArgs {
    fn to_value(&self) -> Option<Value> {
        let kind = self.line.as_ref()?;
        let mut m = Map::new();
        m.insert("kind".into(), json!(kind));
        put(&mut m, "zeta", self.zeta.as_ref().map(|v| json!(v)));
        put(&mut m, "xi", self.xi.map(|v| json!(v)));
        put(&mut m, "m", self.m.map(|v| json!(v)));
        put(&mut m, "k", self.k.map(|v| json!(v)));
        put(&mut m, "restriction", self.restriction.as_ref().map(|v| json!(v)));
        Some(Value::Object(m))
    }
}

#[derive(Args, Debug)]
pub struct PhiArgs {
    /// gaussian or trigpoly
    #[arg(long)]
    pub phi: Option<String>,
    /// Gaussian centre
    #[arg(long, allow_negative_numbers = true)]
    pub center: Option<f64>,
    /// Gaussian width
    #[arg(long)]
    pub width: Option<f64>,
    /// Gaussian modulation frequency
    #[arg(long, allow_negative_numbers = true)]
    pub modulation: Option<f64>,
    /// Trigonometric polynomial coefficients as n:re:im,n:re:im,...
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
}

impl PhiArgs {
    fn to_value(&self) -> Option<Value> {
        let kind = self.phi.as_ref()?;
        let mut m = Map::new();
        m.insert("type".into(), json!(kind));
        put(&mut m, "center", self.center.map(|v| json!(v)));
        put(&mut m, "width", self.width.map(|v| json!(v)));
        put(&mut m, "modulation", self.modulation.map(|v| json!(v)));
        put(&mut m, "coeffs", self.coeffs.as_ref().map(|v| json!(v)));
        Some(Value::Object(m))
    }
}

#[derive(Args, Debug)]
pub struct PairArgs {
    /// v (Schrödinger) or w (Helmholtz)
    #[arg(long)]
    pub field: Option<String>,
    /// r = d/λ, required for w
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub line: LineArgs,
    #[command(flatten)]
    pub phi: PhiArgs,
    /// Truncation |n| ≤ n_max
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Required bound on the omitted terms
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub line: LineArgs,
    #[command(flatten)]
    pub phi: PhiArgs,
    /// Comma-separated, strictly increasing r values
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
    /// Exponent α in μ(r) = ⌊scale · r^α⌋
    #[arg(long)]
    pub mu_alpha: Option<f64>,
    #[arg(long)]
    pub mu_scale: Option<f64>,
    /// Sobolev order for err_hs (horizontal lines)
    #[arg(long)]
    pub s: Option<f64>,
    /// Tail tolerance for vertical and oblique truncations
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest admissible n_max
    #[arg(long)]
    pub budget: Option<u64>,
    /// Report the log–log slope of a column on stderr (repeatable)
    #[arg(long)]
    pub fit: Vec<String>,
}
