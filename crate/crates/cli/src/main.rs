//! `ktree`: batch front end for the checkers and experiments.
//!
//! Exit status: 0 on success, 1 when an assertion or oracle cross-check
//! fails (the witness goes to stderr), 2 on a configuration error.

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ktree::conditions::{
    ap_constant, extremal_search, levelwise_condition_sup, ms_bound, rho_optimize,
    sawyer_testing_constant, suffcond_levels_sup, ConditionParams, ConditionReport, ExtremalConfig,
    Mode, SawyerGrid,
};
use ktree::experiments::{
    content_hash, format_real, run_a1ap, run_kalpha, run_neg2, run_sawyer_vs_strong, run_thmneg1,
    write_atomic, A1ApConfig, Format, KalphaConfig, Neg2Config, ResultTable, SawyerConfig,
    ThmNeg1Config,
};
use ktree::fit::VerdictRule;
use ktree::selftest::{self, Module, SuiteOutcome};
use ktree::{logk, Error, Geometry, LevelWeight, LevelWeightPair, TreeParams, Weight, WeightPair};

use config::{parse_geometry, parse_mode, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "ktree", version, about = "Maximal operators and weight conditions on the rooted k-ary tree")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form sphere and ball counts against enumeration (--depth bounds j + r).
    GeometrySelftest(Flags),
    /// Sufficient condition on level slices E = T_j, F = T_i (--weight --p --beta --alpha --jmax --rmax).
    CheckSuffcond(Flags),
    /// Level-wise condition with exponent delta (--weight --p --delta --jmax --rmax).
    CheckLevelwise(Flags),
    /// Sphere or ball A_p constant (--weight --p --geometry --jmax --rmax).
    CheckAp(Flags),
    /// M_s w <= C w along the levels (--weight --s --jmax --horizon).
    CheckMs(Flags),
    /// Sawyer testing ratio over balls (--weight --p; centres <= --jmax, radii <= --rmax, truncation --depth).
    CheckSawyer(Flags),
    /// Seeded search for sets E, F maximizing the sufficient-condition ratio (--depth --rmax --seed).
    SearchExtremal(Flags),
    /// Power weight k^{-delta j}: sphere A_p blow-up along r = j, and M_s w <= C w.
    ExpThmneg1(Flags),
    /// Weight k^{(p-1) j}: exact norm of the level indicator, divergent strong partial sums, finite weak functional.
    ExpNeg2(Flags),
    /// Weight k^{(p-1) j} with delta = 1 - p: level-wise bound, strong type for q > p, weak type at p.
    ExpKalpha(Flags),
    /// Weights with M_s w <= C w: sufficient condition, convergent series, dual strong type.
    ExpA1ap(Flags),
    /// Weight k^{(p-1) j}: Sawyer testing ratio bounded while strong type fails.
    ExpSawyer(Flags),
    /// Closed-form minimizer of the pairing bound over rho (--p --delta --r --wE --wF).
    RhoOptimize(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// `power:a=<exponent>` or `table:[<log_k values>]`.
    #[arg(long, allow_hyphen_values = true)]
    weight: Option<String>,
    #[arg(long)]
    jmax: Option<usize>,
    #[arg(long)]
    rmax: Option<usize>,
    /// Truncation or search depth.
    #[arg(long)]
    depth: Option<usize>,
    /// Levels scanned past the support.
    #[arg(long)]
    horizon: Option<usize>,
    /// Level of the indicator test function.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long = "wE", allow_hyphen_values = true)]
    w_e: Option<f64>,
    #[arg(long = "wF", allow_hyphen_values = true)]
    w_f: Option<f64>,
    /// sphere or ball.
    #[arg(long, value_parser = parse_geometry)]
    geometry: Option<Geometry>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, value_parser = |s: &str| s.parse::<Format>())]
    format: Option<Format>,
    /// `report` or `assert:<C>`.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Print values as numbers instead of log base k.
    #[arg(long)]
    linear: bool,
    /// Run the oracle-equivalence suite behind this command.
    #[arg(long)]
    selftest: bool,
    /// Flat key=value file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            k: self.k,
            p: self.p,
            q: self.q,
            delta: self.delta,
            s: self.s,
            beta: self.beta,
            alpha: self.alpha,
            weight: self.weight.clone(),
            jmax: self.jmax,
            rmax: self.rmax,
            depth: self.depth,
            horizon: self.horizon,
            j: self.j,
            r: self.r,
            w_e: self.w_e,
            w_f: self.w_f,
            geometry: self.geometry,
            seed: self.seed,
            format: self.format,
            mode: self.mode,
            linear: self.linear.then_some(true),
            out: self.out.clone(),
        }
    }
}

enum Failure {
    Config(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OracleMismatch(_) => Failure::Violation(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn required<T>(v: Option<T>, name: &str) -> Run<T> {
    v.ok_or_else(|| Failure::Config(format!("parameter {name} is required")))
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::GeometrySelftest(f) => ("geometry-selftest", f),
            Command::CheckSuffcond(f) => ("check-suffcond", f),
            Command::CheckLevelwise(f) => ("check-levelwise", f),
            Command::CheckAp(f) => ("check-ap", f),
            Command::CheckMs(f) => ("check-ms", f),
            Command::CheckSawyer(f) => ("check-sawyer", f),
            Command::SearchExtremal(f) => ("search-extremal", f),
            Command::ExpThmneg1(f) => ("exp-thmneg1", f),
            Command::ExpNeg2(f) => ("exp-neg2", f),
            Command::ExpKalpha(f) => ("exp-kalpha", f),
            Command::ExpA1ap(f) => ("exp-a1ap", f),
            Command::ExpSawyer(f) => ("exp-sawyer", f),
            Command::RhoOptimize(f) => ("rho-optimize", f),
        }
    }
}

fn defaults(name: &str) -> RunConfig {
    let mut c = RunConfig {
        k: Some(2),
        seed: Some(0),
        format: Some(Format::Csv),
        mode: Some(Mode::Report),
        linear: Some(false),
        ..Default::default()
    };
    let grid = |c: &mut RunConfig, j: usize, r: usize| {
        c.jmax = Some(j);
        c.rmax = Some(r);
    };
    match name {
        "geometry-selftest" => c.depth = Some(10),
        "check-suffcond" => grid(&mut c, 20, 20),
        "check-levelwise" => grid(&mut c, 40, 40),
        "check-ap" => {
            grid(&mut c, 30, 30);
            c.geometry = Some(Geometry::Sphere);
        }
        "check-ms" => {
            c.jmax = Some(200);
            c.horizon = Some(400);
        }
        "check-sawyer" => {
            grid(&mut c, 8, 6);
            c.depth = Some(14);
        }
        "search-extremal" => {
            c.rmax = Some(16);
            c.depth = Some(8);
        }
        "exp-thmneg1" => {
            c.p = Some(2.0);
            c.delta = Some(0.75);
            c.s = Some(1.2);
            c.jmax = Some(30);
            c.horizon = Some(400);
        }
        "exp-neg2" => {
            c.p = Some(2.0);
            c.j = Some(5);
            c.horizon = Some(200);
        }
        "exp-kalpha" => {
            c.p = Some(2.0);
            grid(&mut c, 40, 40);
            c.horizon = Some(100);
        }
        "exp-a1ap" => {
            c.p = Some(2.0);
            c.s = Some(1.2);
            c.weight = Some("power:a=-3/4".into());
            c.rmax = Some(60);
            c.depth = Some(8);
        }
        "exp-sawyer" => {
            c.p = Some(2.0);
            grid(&mut c, 8, 6);
            c.depth = Some(14);
            c.j = Some(5);
        }
        _ => {}
    }
    c
}

fn effective(name: &str, flags: &Flags) -> Run<RunConfig> {
    let file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::from_kv(&text)?
        }
        None => RunConfig::default(),
    };
    Ok(defaults(name).layered(file).layered(flags.to_config()))
}

fn weight(c: &RunConfig) -> Run<LevelWeight> {
    Ok(required(c.weight.as_deref(), "weight")?.parse()?)
}

fn module_of(name: &str) -> Module {
    match name {
        "geometry-selftest" => Module::Geometry,
        n if n.starts_with("check-") || n == "search-extremal" || n == "rho-optimize" => Module::Conditions,
        _ => Module::Experiments,
    }
}

struct Output {
    file_name: String,
    body: String,
}

fn emit(c: &RunConfig, out: Output) -> Run<()> {
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(Error::from)?;
            let path = dir.join(&out.file_name);
            write_atomic(&path, out.body.as_bytes())?;
            println!("{}", path.display());
        }
        None => print!("{}", out.body),
    }
    Ok(())
}

fn table_output(c: &RunConfig, table: ResultTable) -> Run<Output> {
    let format = c.format.unwrap_or(Format::Csv);
    let table = if c.linear == Some(true) { table.to_linear() } else { table };
    let mut body = table.render(format)?;
    if !body.ends_with('\n') {
        body.push('\n');
    }
    Ok(Output {
        file_name: table.file_name(format),
        body,
    })
}

fn trace_index(condition: &str) -> &'static str {
    match condition {
        "ap" | "ms" => "j",
        "sawyer" => "center_depth",
        _ => "r",
    }
}

fn report_output(name: &str, c: &RunConfig, k: u32, rep: &ConditionReport) -> Run<Output> {
    let format = c.format.unwrap_or(Format::Csv);
    let linear = c.linear == Some(true);
    let body = match format {
        Format::Json => {
            let mut v = serde_json::to_value(rep).map_err(|e| Failure::Config(e.to_string()))?;
            if linear {
                let obj = v.as_object_mut().expect("report is an object");
                obj.remove("empirical_sup_logk");
                obj.insert("empirical_sup".into(), json!(rep.empirical_sup(k)));
            }
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| Failure::Config(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let value = if linear { "value" } else { "value_logk" };
            let mut s = format!("{},{value}\n", trace_index(&rep.condition));
            for (i, v) in &rep.trace {
                let v = if linear { logk::to_linear(k, *v) } else { *v };
                s.push_str(&format!("{i},{}\n", format_real(v)));
            }
            s
        }
    };
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let hash = content_hash(&[name.as_bytes(), c.content_key().as_bytes()]);
    Ok(Output {
        file_name: format!(
            "{}_{k}_{}_{hash}.{ext}",
            rep.condition,
            c.p.map(format_real).unwrap_or_else(|| "na".into())
        ),
        body,
    })
}

fn suites_output(name: &str, c: &RunConfig, outcomes: &[SuiteOutcome]) -> Run<Output> {
    let format = c.format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(outcomes).map_err(|e| Failure::Config(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("suite,checks,status\n");
            for o in outcomes {
                s.push_str(&format!("{},{},pass\n", o.suite, o.checks));
            }
            s
        }
    };
    let hash = content_hash(&[name.as_bytes(), c.content_key().as_bytes()]);
    let ext = if format == Format::Json { "json" } else { "csv" };
    Ok(Output {
        file_name: format!("selftest-{name}_{}_na_{hash}.{ext}", c.k.unwrap_or(2)),
        body,
    })
}

fn params(c: &RunConfig) -> ConditionParams {
    ConditionParams {
        p: c.p,
        q: c.q,
        beta: c.beta,
        alpha: c.alpha,
        delta: c.delta,
        s: c.s,
    }
}

fn run(cli: Cli) -> Run<()> {
    let (name, flags) = cli.command.parts();
    let c = effective(name, flags)?;
    let k = required(c.k, "k")?;
    let tree = TreeParams::new(k)?;
    let seed = c.seed.unwrap_or(0);
    let mode = c.mode.unwrap_or(Mode::Report);

    if flags.selftest || name == "geometry-selftest" {
        let outcomes = if name == "geometry-selftest" && !flags.selftest {
            let ks = if flags.k.is_some() { vec![k] } else { vec![2, 3] };
            vec![selftest::geometry_suite(&ks, required(c.depth, "depth")?)?]
        } else {
            selftest::run(module_of(name), seed)?
        };
        return emit(&c, suites_output(name, &c, &outcomes)?);
    }

    let report = |rep: ConditionReport| -> Run<()> {
        emit(&c, report_output(name, &c, k, &rep)?)?;
        rep.check(k, mode)
            .map_err(|v| Failure::Violation(format!("assertion failed: {v}")))
    };
    let experiment = |t: ResultTable| -> Run<()> {
        if let Mode::Assert(_) = mode {
            return Err(Failure::Config(
                "mode assert applies to check-* and search-extremal only".into(),
            ));
        }
        emit(&c, table_output(&c, t)?)
    };
    let rule = VerdictRule::default();
    let jmax = c.jmax.unwrap_or(0);
    let rmax = c.rmax.unwrap_or(0);

    match name {
        "check-suffcond" => {
            let pair = LevelWeightPair::single(weight(&c)?);
            report(suffcond_levels_sup(&tree, &pair, &params(&c), jmax, rmax, rule)?)
        }
        "check-levelwise" => {
            let pair = LevelWeightPair::single(weight(&c)?);
            report(levelwise_condition_sup(&tree, &pair, &params(&c), jmax, rmax, rule)?)
        }
        "check-ap" => {
            let pair = LevelWeightPair::single(weight(&c)?);
            let g = c.geometry.unwrap_or(Geometry::Sphere);
            report(ap_constant(&tree, &pair, &params(&c), g, jmax, rmax, rule)?)
        }
        "check-ms" => {
            let pair = LevelWeightPair::single(weight(&c)?);
            let horizon = required(c.horizon, "horizon")?;
            report(ms_bound(&tree, &pair, &params(&c), jmax, horizon, VerdictRule::doubling())?)
        }
        "check-sawyer" => {
            let pair = LevelWeightPair::single(weight(&c)?);
            let grid = SawyerGrid::new(jmax, rmax, required(c.depth, "depth")?);
            report(sawyer_testing_constant(&tree, &pair, &params(&c), &grid, Geometry::Ball, rule)?)
        }
        "search-extremal" => {
            let p = params(&c);
            let sp = p.suff()?;
            let cfg = ExtremalConfig {
                depth: required(c.depth, "depth")?,
                r_max: rmax,
                seed,
                ..Default::default()
            };
            let pair = WeightPair::single(Weight::level(weight(&c)?));
            report(extremal_search(&tree, &pair, sp, &p, &cfg, rule)?)
        }
        "rho-optimize" => {
            let (p, delta) = (required(c.p, "p")?, required(c.delta, "delta")?);
            let (r, we, wf) = (required(c.r, "r")?, required(c.w_e, "wE")?, required(c.w_f, "wF")?);
            let opt = rho_optimize(k, p, delta, r, we, wf)?;
            let mut t = ResultTable::new("rho", k, p, &["rho", "value_logk", "constant_logk", "bound_logk"]);
            t.meta("delta", delta);
            t.meta("r", r);
            t.meta("wE", we);
            t.meta("wF", wf);
            t.push(vec![
                opt.rho.into(),
                logk::from_linear(k, opt.value).into(),
                logk::from_linear(k, opt.constant).into(),
                logk::from_linear(k, opt.bound).into(),
            ]);
            experiment(t)
        }
        "exp-thmneg1" => experiment(run_thmneg1(&ThmNeg1Config {
            k,
            delta: required(c.delta, "delta")?,
            p: required(c.p, "p")?,
            j_max: jmax,
            s: required(c.s, "s")?,
            ms_horizon: required(c.horizon, "horizon")?,
            ..Default::default()
        })?),
        "exp-neg2" => experiment(run_neg2(&Neg2Config {
            k,
            p: required(c.p, "p")?,
            j: required(c.j, "j")?,
            horizon: required(c.horizon, "horizon")?,
            ..Default::default()
        })?),
        "exp-kalpha" => {
            let p = required(c.p, "p")?;
            let d = KalphaConfig::default();
            if let Some(q) = c.q {
                if !(q > p) {
                    return Err(Failure::Config(format!("need q > p, got q = {q}, p = {p}")));
                }
            }
            experiment(run_kalpha(&KalphaConfig {
                k,
                p,
                j_max: jmax,
                r_max: rmax,
                horizon: required(c.horizon, "horizon")?,
                q_factor: c.q.map(|q| q / p).unwrap_or(d.q_factor),
                ..d
            })?)
        }
        "exp-a1ap" => {
            let d = A1ApConfig::default();
            experiment(run_a1ap(&A1ApConfig {
                k,
                p: required(c.p, "p")?,
                weight: weight(&c)?,
                s: required(c.s, "s")?,
                series_r_max: rmax,
                search: ExtremalConfig {
                    depth: required(c.depth, "depth")?,
                    seed,
                    ..d.search
                },
                ..d
            })?)
        }
        "exp-sawyer" => experiment(run_sawyer_vs_strong(&SawyerConfig {
            k,
            p: required(c.p, "p")?,
            grid: SawyerGrid::new(jmax, rmax, required(c.depth, "depth")?),
            j: required(c.j, "j")?,
            ..Default::default()
        })?),
        other => Err(Failure::Config(format!("unknown command {other}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_defaults() {
        let flags = Flags { jmax: Some(3), ..Default::default() };
        let c = effective("check-levelwise", &flags).ok().unwrap();
        assert_eq!((c.jmax, c.rmax), (Some(3), Some(40)));
    }

    #[test]
    fn value_column_names() {
        assert_eq!(trace_index("ms"), "j");
        assert_eq!(trace_index("sawyer"), "center_depth");
    }
}
