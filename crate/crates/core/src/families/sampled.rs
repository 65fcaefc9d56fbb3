use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TripleSample;
use crate::error::{LabError, Result};

/// Header of the tabulated-triple CSV format.
pub const SAMPLED_HEADER: [&str; 4] = ["t", "alpha", "phi", "gamma"];

/// A triple given as a table, evaluated by monotone (Fritsch–Carlson)
/// cubic interpolation with centered-difference derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTriple {
    t: Vec<f64>,
    alpha: Vec<f64>,
    phi: Vec<f64>,
    gamma: Vec<f64>,
}

impl SampledTriple {
    pub fn new(t: Vec<f64>, alpha: Vec<f64>, phi: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        let len = t.len();
        if len < 3 {
            return Err(LabError::usage("a sampled triple needs at least 3 rows"));
        }
        if alpha.len() != len || phi.len() != len || gamma.len() != len {
            return Err(LabError::usage("sampled triple columns differ in length"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::usage("sampled triple times must be strictly increasing"));
        }
        if t[0] <= 0.0 {
            return Err(LabError::domain("sampled triple times must be positive"));
        }
        let all = t.iter().chain(&alpha).chain(&phi).chain(&gamma);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(LabError::domain("sampled triple contains non-finite values"));
        }
        Ok(Self { t, alpha, phi, gamma })
    }

    /// Tabulates `f` on `times`; used to build perturbed copies of closed forms.
    pub fn tabulate(times: &[f64], mut f: impl FnMut(f64) -> Result<(f64, f64, f64)>) -> Result<Self> {
        let mut cols = (Vec::new(), Vec::new(), Vec::new());
        for &t in times {
            let (a, p, g) = f(t)?;
            cols.0.push(a);
            cols.1.push(p);
            cols.2.push(g);
        }
        Self::new(times.to_vec(), cols.0, cols.1, cols.2)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| LabError::io(path, e))?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| LabError::usage(format!("sampled triple CSV: {e}")))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != SAMPLED_HEADER {
            return Err(LabError::usage(format!(
                "sampled triple CSV header must be `{}`, got `{}`",
                SAMPLED_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut t, mut alpha, mut phi, mut gamma) = (vec![], vec![], vec![], vec![]);
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| LabError::usage(format!("sampled triple CSV: {e}")))?;
            let mut vals = [0.0; 4];
            for (j, v) in vals.iter_mut().enumerate() {
                let field = rec.get(j).ok_or_else(|| {
                    LabError::usage(format!("sampled triple CSV row {}: missing column", row + 2))
                })?;
                *v = field.parse().map_err(|_| {
                    LabError::usage(format!("sampled triple CSV row {}: bad number `{field}`", row + 2))
                })?;
            }
            t.push(vals[0]);
            alpha.push(vals[1]);
            phi.push(vals[2]);
            gamma.push(vals[3]);
        }
        Self::new(t, alpha, phi, gamma)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = SAMPLED_HEADER.join(",");
        out.push('\n');
        for i in 0..self.t.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                self.t[i], self.alpha[i], self.phi[i], self.gamma[i]
            ));
        }
        out
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    pub(super) fn eval(&self, t: f64) -> Result<TripleSample> {
        let (lo, hi) = self.span();
        if t < lo || t > hi {
            return Err(LabError::domain(format!(
                "t = {t} outside the sampled range [{lo}, {hi}]"
            )));
        }
        let value = |col: &[f64], t: f64| pchip(&self.t, col, t);
        // centered where possible, one-sided at the table ends
        let h = 1e-6 * (hi - lo).max(t.abs());
        let (a, b) = ((t - h).max(lo), (t + h).min(hi));
        let deriv = |col: &[f64]| (value(col, b) - value(col, a)) / (b - a);
        Ok(TripleSample {
            t,
            alpha: value(&self.alpha, t),
            alpha_prime: deriv(&self.alpha),
            phi: value(&self.phi, t),
            phi_prime: deriv(&self.phi),
            gamma: value(&self.gamma, t),
            gamma_prime: deriv(&self.gamma),
        })
    }
}

/// Fritsch–Carlson node slopes; zero at local extrema so the interpolant
/// preserves monotonicity of the data.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        d[0] = end(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    d
}

fn pchip(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    let i = match x.partition_point(|&xi| xi <= t) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let d = pchip_slopes(x, y);
    let (d0, d1) = (d[i], d[i + 1]);
    let h = x[i + 1] - x[i];
    let s = (t - x[i]) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y[i] + h10 * h * d0 + h01 * y[i + 1] + h11 * h * d1
}
