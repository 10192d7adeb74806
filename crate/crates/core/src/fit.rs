//! Least-squares slopes and the bounded/growing verdict rule.

use serde::{Deserialize, Serialize};

use crate::logk;

/// Least-squares slope of `ys` against `xs`; `None` with fewer than two
/// distinct abscissae.
pub fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope over the last two thirds of the sample, where asymptotic rates
/// have set in.
pub fn tail_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    let start = n / 3;
    slope(&xs[start..n], &ys[start..n])
}

pub fn running_sup(values: &[f64]) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            best = best.max(v);
            best
        })
        .collect()
}

/// How far back the stabilization test looks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// The last `n` grid steps.
    Steps(usize),
    /// The second half of the grid (one doubling of the scan).
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundedOnGrid,
    Growing,
    Diverged,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::BoundedOnGrid => "bounded-on-grid",
            Verdict::Growing => "growing",
            Verdict::Diverged => "diverged",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRule {
    pub window: Window,
    /// Relative increase of the running sup over the window that still
    /// counts as bounded.
    pub threshold: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        VerdictRule {
            window: Window::Steps(10),
            threshold: 0.01,
        }
    }
}

impl VerdictRule {
    pub fn doubling() -> Self {
        VerdictRule {
            window: Window::Doubling,
            threshold: 0.01,
        }
    }

    /// Relative increase of the running sup across the window.
    pub fn increase(&self, k: u32, running_logk: &[f64]) -> f64 {
        let n = running_logk.len();
        if n < 2 {
            return 0.0;
        }
        let back = match self.window {
            Window::Steps(s) => s.min(n - 1),
            Window::Doubling => n / 2,
        };
        let last = running_logk[n - 1];
        let earlier = running_logk[n - 1 - back];
        if last == earlier {
            0.0
        } else {
            logk::relative_change(k, last, earlier)
        }
    }

    /// Classify a sequence of `log_k` values indexed by the grid parameter.
    pub fn classify(&self, k: u32, values_logk: &[f64]) -> Verdict {
        if values_logk.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Verdict::Diverged;
        }
        let running = running_sup(values_logk);
        if self.increase(k, &running) < self.threshold {
            return Verdict::BoundedOnGrid;
        }
        let xs: Vec<f64> = (0..running.len()).map(|i| i as f64).collect();
        let finite: Vec<(f64, f64)> = xs
            .iter()
            .zip(&running)
            .filter(|(_, y)| y.is_finite())
            .map(|(x, y)| (*x, *y))
            .collect();
        let (fx, fy): (Vec<f64>, Vec<f64>) = finite.into_iter().unzip();
        match tail_slope(&fx, &fy) {
            Some(s) if s > 0.0 => Verdict::Growing,
            _ => Verdict::BoundedOnGrid,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x - 3.0).collect();
        assert!((slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-12);
        assert!(slope(&[1.0], &[2.0]).is_none());
    }

    #[test]
    fn verdicts() {
        let rule = VerdictRule::default();
        let flat = vec![0.0; 30];
        assert_eq!(rule.classify(2, &flat), Verdict::BoundedOnGrid);
        let line: Vec<f64> = (0..30).map(|i| 0.3 * i as f64).collect();
        assert_eq!(rule.classify(2, &line), Verdict::Growing);
        assert_eq!(rule.classify(2, &[0.0, f64::INFINITY]), Verdict::Diverged);
        let saturating: Vec<f64> = (0..60).map(|i| 1.0 - 2f64.powi(-i)).collect();
        assert_eq!(rule.classify(2, &saturating), Verdict::BoundedOnGrid);
    }
}
