//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::chain::{
    check_detailed_balance, random_reversible_chain, spectral_gap, ChainSpec,
};
use crate::error::{Error, Result};
use crate::family::{
    asymptotic_profile_check, build_family_chain, separation_minorization_check, FamilyParams,
    ProductApproxCurve,
};
use crate::metrics::{equilibrium, fmt_sci, worst_case_profile, ChainCurve, DistanceKind};
use crate::mixing::{
    cutoff_diagnostics, mixing_report, DiagnosticsConfig, FamilyMember, ProductCurve,
    ProductMeasure,
};
use crate::product::{
    product_hellinger, product_separation, product_tv_bounds, tensor_product, ProductSpec,
};
use crate::suite::{log_grid, run_suite, GridPolicy, Inequality, SuiteConfig};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "MIXCUT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mixcut", version, about = "Mixing times, cutoff and product chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary law, spectral gap and reversibility of a chain.
    Chain(ChainCmd),
    /// Worst-case distance profile over a time grid.
    Profile(ProfileCmd),
    /// Product-chain distances from the marginal, or the explicit tensor chain.
    Product(ProductCmd),
    /// Mixing times and cutoff ratios.
    Mix(MixCmd),
    /// The `G_n` counterexample family.
    Family(FamilyCmd),
    /// Run the inequality suite.
    Verify(VerifyCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// `LO:HI:POINTS`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected LO:HI:POINTS, got `{s}`"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        let lo = num(parts[0])?;
        let hi = num(parts[1])?;
        let points: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("`{}`: {e}", parts[2]))?;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0) {
            return Err("grid bounds must be finite and nonnegative".into());
        }
        if points == 0 || (points > 1 && hi <= lo) {
            return Err("grid needs POINTS >= 1 and HI > LO".into());
        }
        Ok(GridSpec { lo, hi, points })
    }
}

impl GridSpec {
    pub fn times(&self, log: bool) -> Result<Vec<f64>> {
        if log {
            if self.lo <= 0.0 {
                return Err(Error::InvalidGrid("log grid needs LO > 0".into()));
            }
            return Ok(log_grid(self.lo, self.hi, self.points));
        }
        if self.points == 1 {
            return Ok(vec![self.lo]);
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| if i + 1 == self.points { self.hi } else { self.lo + step * i as f64 })
            .collect())
    }
}

/// `KEY=VAL` tolerance override.
#[derive(Debug, Clone, PartialEq)]
pub struct TolOverride {
    pub key: Inequality,
    pub value: f64,
}

impl std::str::FromStr for TolOverride {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got `{s}`"))?;
        let key = k.trim().parse::<Inequality>().map_err(|e| e.to_string())?;
        let value: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
        if !(value > 0.0) {
            return Err(format!("tolerance for `{k}` must be positive"));
        }
        Ok(TolOverride { key, value })
    }
}

fn parse_kind(s: &str) -> std::result::Result<DistanceKind, String> {
    s.parse::<DistanceKind>().map_err(|e| e.to_string())
}

/// Where the chain comes from: a JSON file, a family member or a random draw.
#[derive(Debug, Clone, Args)]
pub struct ChainSource {
    /// Chain JSON file.
    #[arg(long, value_name = "PATH")]
    pub chain: Option<PathBuf>,
    /// Use the family chain `G_n`.
    #[arg(long, conflicts_with = "chain")]
    pub n: Option<usize>,
    /// Backtrack rate of `G_n` (default `2^{-n^2}` up to n = 10, then 1e-6).
    #[arg(long, requires = "n")]
    pub epsilon: Option<f64>,
    /// Draw a random reversible chain with this many states.
    #[arg(long, conflicts_with_all = ["chain", "n"], requires = "seed")]
    pub states: Option<usize>,
    /// Seed of the random chain.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mean degree of the random chain.
    #[arg(long, default_value_t = 2.0)]
    pub degree: f64,
}

impl ChainSource {
    fn load(&self) -> Result<ChainSpec> {
        if let Some(path) = &self.chain {
            return ChainSpec::read_json(path);
        }
        if let Some(n) = self.n {
            return Ok(build_family_chain(family_params(n, self.epsilon)?)?.chain);
        }
        if let (Some(states), Some(seed)) = (self.states, self.seed) {
            return random_reversible_chain(seed, states, self.degree, (0.5, 2.0));
        }
        Err(Error::InvalidConfig("one of --chain, --n or --states is required".into()))
    }
}

fn family_params(n: usize, epsilon: Option<f64>) -> Result<FamilyParams> {
    match epsilon {
        Some(e) => FamilyParams::new(n, e),
        None => FamilyParams::with_default_epsilon(n),
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputOpts {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this path instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridOpts {
    /// Time grid; defaults to `0.01/gap .. 20/gap`, 25 log-spaced points.
    #[arg(long = "t", value_name = "LO:HI:POINTS")]
    pub t: Option<GridSpec>,
    /// Space grid points logarithmically.
    #[arg(long)]
    pub log: bool,
}

impl GridOpts {
    fn times(&self, chain: &ChainSpec) -> Result<Vec<f64>> {
        match &self.t {
            Some(g) => g.times(self.log),
            None => {
                let (pi, _) = equilibrium(chain)?;
                Ok(GridPolicy::default().times(spectral_gap(chain, &pi)?))
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct ChainCmd {
    #[command(flatten)]
    pub source: ChainSource,
    /// Also write the chain as JSON.
    #[arg(long, value_name = "PATH")]
    pub emit_chain: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct ProfileCmd {
    #[command(flatten)]
    pub source: ChainSource,
    #[arg(long, value_parser = parse_kind, default_value = "tv")]
    pub kind: DistanceKind,
    #[command(flatten)]
    pub grid: GridOpts,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct ProductCmd {
    #[command(flatten)]
    pub source: ChainSource,
    #[arg(long)]
    pub copies: usize,
    /// `sep`, `hellinger` or `tv` (Hellinger-derived bounds).
    #[arg(long, value_parser = parse_kind, default_value = "sep")]
    pub kind: DistanceKind,
    /// Evaluate on the explicit tensor-product chain.
    #[arg(long)]
    pub tensor: bool,
    /// Write the tensor-product chain as JSON.
    #[arg(long, value_name = "PATH", requires = "tensor")]
    pub emit_chain: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridOpts,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct MixCmd {
    #[arg(long, value_name = "PATH", conflicts_with = "n")]
    pub chain: Option<PathBuf>,
    /// Family sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_parser = parse_kind, default_value = "tv")]
    pub kind: DistanceKind,
    /// Product of this many copies (separation, hellinger, or tv lower envelope).
    #[arg(long)]
    pub copies: Option<usize>,
    /// For family sizes: the approximate product TV of n copies of `G_n`.
    #[arg(long, conflicts_with = "copies")]
    pub product: bool,
    /// Thresholds `eps`; `1 - eps` is added automatically.
    #[arg(long = "eps", value_delimiter = ',', default_value = "0.1,0.2,0.3")]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct FamilyCmd {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Scaled times `s = t/n`, linear grid.
    #[arg(long, value_name = "LO:HI:POINTS", default_value = "0.25:3:12")]
    pub s_grid: GridSpec,
    /// Directory for chain.json, profile.csv and verdicts.json.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub chains: usize,
    #[arg(long = "tol", value_name = "KEY=VAL")]
    pub tol: Vec<TolOverride>,
    /// Run only these inequalities (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = |s: &str| s.parse::<Inequality>().map_err(|e| e.to_string()))]
    pub only: Vec<Inequality>,
    /// Also run the Hellinger window check.
    #[arg(long)]
    pub hellinger_window: bool,
    /// Family sizes checked alongside the random batch.
    #[arg(long = "family", value_delimiter = ',')]
    pub family: Vec<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code: 0 on success, 1 on computation errors or a failed suite,
/// 2 on argument errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::InvalidConfig(_) | Error::InvalidGrid(_) | Error::Parse(_) => 2,
                _ => 1,
            }
        }
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Chain(c) => chain_cmd(c, stdout).map(|_| true),
        Command::Profile(c) => profile_cmd(c, stdout).map(|_| true),
        Command::Product(c) => product_cmd(c, stdout).map(|_| true),
        Command::Mix(c) => mix_cmd(c, stdout).map(|_| true),
        Command::Family(c) => family_cmd(c, stdout).map(|_| true),
        Command::Verify(c) => verify_cmd(c, stdout),
    }
}

fn chain_cmd(c: ChainCmd, stdout: &mut dyn Write) -> Result<()> {
    let chain = c.source.load()?;
    if let Some(p) = &c.emit_chain {
        fs::write(p, chain.to_json_string())?;
    }
    let (pi, reversible) = equilibrium(&chain)?;
    let balance = check_detailed_balance(&chain, &pi, 1e-10)?;
    let gap = if reversible { spectral_gap(&chain, &pi).ok() } else { None };
    let text = match c.output.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&json!({
            "states": chain.state_count(),
            "labels": chain.labels(),
            "stationary": pi.to_linear(),
            "ln_stationary": pi.ln_values(),
            "reversible": balance.balanced,
            "worst_balance_violation": balance.worst_violation,
            "gap": gap,
        })),
        Format::Csv => {
            let mut s = format!(
                "# gap={} reversible={}\nstate,label,pi,ln_pi\n",
                gap.map_or("none".into(), fmt_sci),
                balance.balanced
            );
            let lp = pi.ln_values();
            for (i, label) in chain.labels().iter().enumerate() {
                s.push_str(&format!("{i},{label},{},{}\n", fmt_sci(pi.prob(i)), fmt_sci(lp[i])));
            }
            s
        }
    };
    emit(&text, c.output.out.as_deref(), stdout)
}

fn profile_cmd(c: ProfileCmd, stdout: &mut dyn Write) -> Result<()> {
    let chain = c.source.load()?;
    let times = c.grid.times(&chain)?;
    let profile = worst_case_profile(&chain, c.kind, &times)?;
    let text = match c.output.format.unwrap_or(Format::Csv) {
        Format::Csv => profile.to_csv(),
        Format::Json => profile.to_json() + "\n",
    };
    emit(&text, c.output.out.as_deref(), stdout)
}

#[derive(Serialize)]
struct ProductRow {
    time: f64,
    value: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
}

fn product_cmd(c: ProductCmd, stdout: &mut dyn Write) -> Result<()> {
    let base = c.source.load()?;
    let times = c.grid.times(&base)?;
    let bounds = c.kind == DistanceKind::TotalVariation && !c.tensor;
    if matches!(c.kind, DistanceKind::PairwiseTv) && !c.tensor {
        return Err(Error::InvalidConfig(
            "pairwise distance has no product formula; use --tensor".into(),
        ));
    }
    let mut rows = Vec::with_capacity(times.len());
    if c.tensor {
        let tensor = tensor_product(&ProductSpec::new(base, c.copies)?)?;
        if let Some(p) = &c.emit_chain {
            fs::write(p, tensor.to_json_string())?;
        }
        let prof = worst_case_profile(&tensor, c.kind, &times)?;
        for (t, v) in prof.times.iter().zip(&prof.values) {
            rows.push(ProductRow { time: *t, value: Some(*v), lower: None, upper: None });
        }
    } else {
        let mut curve = ChainCurve::new(&base, c.kind)?;
        for &t in &times {
            let row = match c.kind {
                DistanceKind::Separation => ProductRow {
                    time: t,
                    value: Some(product_separation(curve.value_at(t)?, c.copies)?),
                    lower: None,
                    upper: None,
                },
                DistanceKind::Hellinger => ProductRow {
                    time: t,
                    value: Some(product_hellinger(curve.value_at(t)?, c.copies)?),
                    lower: None,
                    upper: None,
                },
                _ => {
                    let h = curve.value_of_kind(DistanceKind::Hellinger, t)?;
                    let tv = curve.value_of_kind(DistanceKind::TotalVariation, t)?;
                    let b = product_tv_bounds(h, tv, c.copies)?;
                    ProductRow { time: t, value: None, lower: Some(b.lower), upper: Some(b.upper) }
                }
            };
            rows.push(row);
        }
    }
    let text = match c.output.format.unwrap_or(Format::Csv) {
        Format::Json => pretty(&json!({
            "kind": c.kind,
            "copies": c.copies,
            "tensor": c.tensor,
            "rows": rows,
        })),
        Format::Csv => {
            let mode = if c.tensor { "tensor" } else { "formula" };
            let mut s = format!("# kind={} copies={} mode={mode}\n", c.kind, c.copies);
            if bounds {
                s.push_str("time,lower,upper\n");
                for r in &rows {
                    s.push_str(&format!(
                        "{},{},{}\n",
                        fmt_sci(r.time),
                        fmt_sci(r.lower.unwrap_or(f64::NAN)),
                        fmt_sci(r.upper.unwrap_or(f64::NAN))
                    ));
                }
            } else {
                s.push_str("time,value\n");
                for r in &rows {
                    s.push_str(&format!("{},{}\n", fmt_sci(r.time), fmt_sci(r.value.unwrap_or(f64::NAN))));
                }
            }
            s
        }
    };
    emit(&text, c.output.out.as_deref(), stdout)
}

fn product_measure(kind: DistanceKind) -> Result<ProductMeasure> {
    match kind {
        DistanceKind::Separation => Ok(ProductMeasure::Separation),
        DistanceKind::Hellinger => Ok(ProductMeasure::Hellinger),
        DistanceKind::TotalVariation => Ok(ProductMeasure::TvLower),
        DistanceKind::PairwiseTv => Err(Error::InvalidConfig(
            "pairwise distance has no product formula".into(),
        )),
    }
}

fn mix_cmd(c: MixCmd, stdout: &mut dyn Write) -> Result<()> {
    let format = c.output.format.unwrap_or(Format::Json);
    let text = if let Some(path) = &c.chain {
        let chain = ChainSpec::read_json(path)?;
        let (pi, reversible) = equilibrium(&chain)?;
        let gap = if reversible { spectral_gap(&chain, &pi).ok() } else { None };
        let report = match c.copies {
            Some(k) => {
                let mut curve = ProductCurve::new(&chain, k, product_measure(c.kind)?)?;
                mixing_report(&mut curve, k, &c.eps, gap)?
            }
            None => {
                let mut curve = ChainCurve::new(&chain, c.kind)?;
                mixing_report(&mut curve, chain.state_count(), &c.eps, gap)?
            }
        };
        match format {
            Format::Json => report.to_json() + "\n",
            Format::Csv => crate::mixing::ratio_table_csv(std::slice::from_ref(&report)),
        }
    } else if !c.n.is_empty() {
        let mut members = Vec::with_capacity(c.n.len());
        for &n in &c.n {
            let params = family_params(n, c.epsilon)?;
            let fam = build_family_chain(params)?;
            let pi = fam.stationary()?;
            let gap = spectral_gap(&fam.chain, &pi)?;
            let member = if c.product {
                FamilyMember::new(n, ProductApproxCurve::new(params)?, None)
            } else if let Some(k) = c.copies {
                FamilyMember::new(n, ProductCurve::new(&fam.chain, k, product_measure(c.kind)?)?, Some(gap))
            } else {
                FamilyMember::new(n, ChainCurve::new(&fam.chain, c.kind)?, Some(gap))
            };
            members.push(member);
        }
        let diag = cutoff_diagnostics(members, &c.eps, DiagnosticsConfig::default())?;
        match format {
            Format::Json => diag.to_json() + "\n",
            Format::Csv => diag.ratio_table_csv(),
        }
    } else {
        return Err(Error::InvalidConfig("one of --chain or --n is required".into()));
    };
    emit(&text, c.output.out.as_deref(), stdout)
}

fn family_cmd(c: FamilyCmd, stdout: &mut dyn Write) -> Result<()> {
    let params = family_params(c.n, c.epsilon)?;
    let s_grid = c.s_grid.times(false)?;
    let table = asymptotic_profile_check(params, &s_grid)?;
    let text = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Json => pretty(&table),
    };
    let Some(dir) = &c.out else {
        stdout.write_all(text.as_bytes())?;
        return Ok(());
    };
    fs::create_dir_all(dir)?;
    let fam = build_family_chain(params)?;
    fs::write(dir.join("chain.json"), fam.chain.to_json_string())?;
    let ext = if c.format == Some(Format::Json) { "json" } else { "csv" };
    fs::write(dir.join(format!("profile.{ext}")), &text)?;
    let pi = fam.stationary()?;
    let balance = check_detailed_balance(&fam.chain, &pi, 1e-10)?;
    let nf = params.n as f64;
    let minorization =
        separation_minorization_check(params, &[nf / 2.0, nf, 2.0 * nf, 3.0 * nf]).ok();
    let verdicts = json!({
        "n": params.n,
        "epsilon": params.epsilon,
        "detailed_balance": balance,
        "mass_outside_c": pi.mass_excluding(&[params.c()]),
        "underflow_risk": fam.underflow_risk,
        "separation_minorization": minorization,
    });
    fs::write(dir.join("verdicts.json"), pretty(&verdicts))?;
    Ok(())
}

fn verify_cmd(c: VerifyCmd, stdout: &mut dyn Write) -> Result<bool> {
    let mut config = SuiteConfig {
        master_seed: c.seed,
        chain_count: c.chains,
        ..SuiteConfig::default()
    };
    for t in &c.tol {
        config.tolerances.insert(t.key, t.value);
    }
    if !c.only.is_empty() {
        config.inequalities = c.only.clone();
    } else if c.hellinger_window {
        config.inequalities.push(Inequality::HellingerWindow);
    }
    if !c.family.is_empty() {
        config.family = c
            .family
            .iter()
            .map(|&n| FamilyParams::with_default_epsilon(n))
            .collect::<Result<_>>()?;
    }
    let report = run_suite(&config)?;
    emit(&(report.to_json() + "\n"), c.out.as_deref(), stdout)?;
    Ok(report.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parses() {
        let g: GridSpec = "0:5:50".parse().unwrap();
        assert_eq!(g, GridSpec { lo: 0.0, hi: 5.0, points: 50 });
        let t = g.times(false).unwrap();
        assert_eq!(t.len(), 50);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[49], 5.0);
        assert!(g.times(true).is_err());
        assert!("1:0:3".parse::<GridSpec>().is_err());
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("a:2:3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn tolerance_override_parses() {
        let t: TolOverride = "hellinger-doubling=1e-6".parse().unwrap();
        assert_eq!(t.key, Inequality::HellingerDoubling);
        assert_eq!(t.value, 1e-6);
        assert!("nope=1".parse::<TolOverride>().is_err());
        assert!("tv-pairwise=-1".parse::<TolOverride>().is_err());
    }

    #[test]
    fn bad_flag_exits_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["mixcut", "profile", "--bogus"], &mut o, &mut e), 2);
        assert!(!e.is_empty());
    }

    #[test]
    fn missing_file_exits_one() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(["mixcut", "chain", "--chain", "/nonexistent/chain.json"], &mut o, &mut e);
        assert_eq!(code, 1);
    }
}
