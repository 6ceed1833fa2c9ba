use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Modulus of continuity on [0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Modulus {
    /// The scale omega_s: s = 1 gives t(1 + ln 1/t), 0 < s < 1 gives t^s,
    /// s = 0 gives 1/(1 + ln 1/t).
    Scale(f64),
    /// Piecewise linear interpolation of (t, omega) knots.
    Table(Vec<(f64, f64)>),
}

impl Modulus {
    pub fn scale(s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ParamRange { name: "s".into(), value: s, range: "[0, 1]".into() });
        }
        Ok(Modulus::Scale(s))
    }

    /// A tabulated modulus; knots must start at (0,0), end at (1,1), and be
    /// nondecreasing and concave.
    pub fn table(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let bad = |m: &str| Err(Error::Invalid(format!("modulus table: {m}")));
        if knots.len() < 2 || knots[0] != (0.0, 0.0) || knots[knots.len() - 1] != (1.0, 1.0) {
            return bad("must start at (0,0) and end at (1,1)");
        }
        let mut last_slope = f64::INFINITY;
        for w in knots.windows(2) {
            let dt = w[1].0 - w[0].0;
            if dt <= 0.0 {
                return bad("duplicate abscissae");
            }
            let slope = (w[1].1 - w[0].1) / dt;
            if slope < 0.0 {
                return bad("not nondecreasing");
            }
            if slope > last_slope * (1.0 + 1e-12) {
                return bad("not concave");
            }
            last_slope = slope;
        }
        Ok(Modulus::Table(knots))
    }

    pub fn label(&self) -> String {
        match self {
            Modulus::Scale(s) => format!("omega_{s}"),
            Modulus::Table(k) => format!("table[{}]", k.len()),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParamRange { name: "t".into(), value: t, range: "[0, 1]".into() });
        }
        Ok(match self {
            Modulus::Scale(s) => {
                if t == 0.0 {
                    0.0
                } else if *s == 1.0 {
                    t * (1.0 - t.ln())
                } else if *s == 0.0 {
                    1.0 / (1.0 - t.ln())
                } else {
                    t.powf(*s)
                }
            }
            Modulus::Table(k) => {
                let i = k.partition_point(|p| p.0 <= t).clamp(1, k.len() - 1);
                let (a, b) = (k[i - 1], k[i]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        })
    }

    /// ln omega(t) given ln t <= 0, avoiding underflow for tiny t.
    pub fn ln_eval(&self, ln_t: f64) -> f64 {
        match self {
            Modulus::Scale(s) => {
                if ln_t == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else if *s == 1.0 {
                    ln_t + (1.0 - ln_t).ln()
                } else if *s == 0.0 {
                    -(1.0 - ln_t).ln()
                } else {
                    s * ln_t
                }
            }
            Modulus::Table(_) => self.eval(ln_t.exp().clamp(0.0, 1.0)).map(f64::ln).unwrap_or(f64::NAN),
        }
    }
}
