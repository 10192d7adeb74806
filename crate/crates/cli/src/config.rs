//! `RunConfig`: every knob a subcommand can read, all optional so that
//! flags, a `key=value` file and per-command defaults can be layered.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use ktree::conditions::Mode;
use ktree::experiments::Format;
use ktree::{Error, Geometry, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub k: Option<u32>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub delta: Option<f64>,
    pub s: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub weight: Option<String>,
    pub jmax: Option<usize>,
    pub rmax: Option<usize>,
    pub depth: Option<usize>,
    pub horizon: Option<usize>,
    pub j: Option<usize>,
    pub r: Option<f64>,
    pub w_e: Option<f64>,
    pub w_f: Option<f64>,
    pub geometry: Option<Geometry>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub mode: Option<Mode>,
    pub linear: Option<bool>,
    pub out: Option<PathBuf>,
}

fn bad(key: &str, value: &str) -> Error {
    Error::Inadmissible(format!("cannot parse {key} = `{value}`"))
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    if s == "report" {
        return Ok(Mode::Report);
    }
    match s.strip_prefix("assert:").map(str::parse::<f64>) {
        Some(Ok(c)) if c.is_finite() && c > 0.0 => Ok(Mode::Assert(c)),
        _ => Err(bad("mode", s)),
    }
}

pub fn parse_geometry(s: &str) -> Result<Geometry> {
    match s {
        "sphere" => Ok(Geometry::Sphere),
        "ball" => Ok(Geometry::Ball),
        _ => Err(bad("geometry", s)),
    }
}

fn mode_str(m: Mode) -> String {
    match m {
        Mode::Report => "report".into(),
        Mode::Assert(c) => format!("assert:{c}"),
    }
}

impl RunConfig {
    /// Fields set in `over` win.
    pub fn layered(self, over: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            k, p, q, delta, s, beta, alpha, weight, jmax, rmax, depth, horizon, j, r, w_e, w_f,
            geometry, seed, format, mode, linear, out
        )
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "k" => self.k = Some(num(key, value)?),
            "p" => self.p = Some(num(key, value)?),
            "q" => self.q = Some(num(key, value)?),
            "delta" => self.delta = Some(num(key, value)?),
            "s" => self.s = Some(num(key, value)?),
            "beta" => self.beta = Some(num(key, value)?),
            "alpha" => self.alpha = Some(num(key, value)?),
            "weight" => self.weight = Some(value.to_string()),
            "jmax" => self.jmax = Some(num(key, value)?),
            "rmax" => self.rmax = Some(num(key, value)?),
            "depth" => self.depth = Some(num(key, value)?),
            "horizon" => self.horizon = Some(num(key, value)?),
            "j" => self.j = Some(num(key, value)?),
            "r" => self.r = Some(num(key, value)?),
            "wE" => self.w_e = Some(num(key, value)?),
            "wF" => self.w_f = Some(num(key, value)?),
            "geometry" => self.geometry = Some(parse_geometry(value)?),
            "seed" => self.seed = Some(num(key, value)?),
            "format" => self.format = Some(value.parse()?),
            "mode" => self.mode = Some(parse_mode(value)?),
            "linear" => self.linear = Some(num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::Inadmissible(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Flat `key=value` lines; blank lines and `#` comments are ignored.
    pub fn from_kv(text: &str) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Inadmissible(format!("config line {} is not key=value", n + 1)))?;
            c.set(key.trim(), value.trim())?;
        }
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut put = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                writeln!(s, "{key}={v}").expect("string write");
            }
        };
        put("k", self.k.map(|v| v.to_string()));
        put("p", self.p.map(|v| v.to_string()));
        put("q", self.q.map(|v| v.to_string()));
        put("delta", self.delta.map(|v| v.to_string()));
        put("s", self.s.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("alpha", self.alpha.map(|v| v.to_string()));
        put("weight", self.weight.clone());
        put("jmax", self.jmax.map(|v| v.to_string()));
        put("rmax", self.rmax.map(|v| v.to_string()));
        put("depth", self.depth.map(|v| v.to_string()));
        put("horizon", self.horizon.map(|v| v.to_string()));
        put("j", self.j.map(|v| v.to_string()));
        put("r", self.r.map(|v| v.to_string()));
        put("wE", self.w_e.map(|v| v.to_string()));
        put("wF", self.w_f.map(|v| v.to_string()));
        put(
            "geometry",
            self.geometry.map(|g| match g {
                Geometry::Sphere => "sphere".to_string(),
                Geometry::Ball => "ball".to_string(),
            }),
        );
        put("seed", self.seed.map(|v| v.to_string()));
        put(
            "format",
            self.format.map(|f| match f {
                Format::Csv => "csv".to_string(),
                Format::Json => "json".to_string(),
            }),
        );
        put("mode", self.mode.map(mode_str));
        put("linear", self.linear.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        s
    }

    /// The settings that determine output content, for file names.
    pub fn content_key(&self) -> String {
        RunConfig {
            out: None,
            mode: None,
            ..self.clone()
        }
        .to_kv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> RunConfig {
        RunConfig {
            k: Some(3),
            p: Some(1.5),
            q: Some(3.0),
            delta: Some(-0.5),
            s: Some(1.2),
            beta: Some(0.1 + 0.2),
            alpha: Some(2.0 / 3.0),
            weight: Some("power:a=-3/4".into()),
            jmax: Some(40),
            rmax: Some(12),
            depth: Some(9),
            horizon: Some(400),
            j: Some(5),
            r: Some(2.5),
            w_e: Some(1e-30),
            w_f: Some(7.0),
            geometry: Some(Geometry::Ball),
            seed: Some(u64::MAX),
            format: Some(Format::Json),
            mode: Some(Mode::Assert(1.5)),
            linear: Some(true),
            out: Some(PathBuf::from("out dir/x")),
        }
    }

    #[test]
    fn kv_round_trip() {
        let c = full();
        assert_eq!(RunConfig::from_kv(&c.to_kv()).unwrap(), c);
        assert_eq!(RunConfig::from_kv("").unwrap(), RunConfig::default());
    }

    #[test]
    fn layering_prefers_the_top() {
        let file = RunConfig::from_kv("k=3\np=3\n# note\n\njmax = 7").unwrap();
        let flags = RunConfig { p: Some(2.0), ..Default::default() };
        let c = file.layered(flags);
        assert_eq!((c.k, c.p, c.jmax), (Some(3), Some(2.0), Some(7)));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_kv("colour=red").is_err());
        assert!(RunConfig::from_kv("k=two").is_err());
        assert!(RunConfig::from_kv("mode=assert:-1").is_err());
        assert!(RunConfig::from_kv("just text").is_err());
    }
}
