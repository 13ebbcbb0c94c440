use serde::Serialize;
use serde_json::Value;
use symred::report::{Check, Status};

use crate::files::InputDigest;

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub samples: usize,
    pub tol_sym: f64,
    pub tol_sol: f64,
}

/// What one invocation did and whether every check passed.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub settings: Settings,
    pub inputs: Vec<InputDigest>,
    pub status: Status,
    pub checks: Vec<Check>,
    pub payload: Value,
    /// Only with `--timing`, so default reports stay byte-reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// 17 significant digits.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn checks_csv(checks: &[Check]) -> String {
    let mut out = String::from("name,status,max_residual,max_scaled,tolerance\n");
    for c in checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&c.name),
            status,
            sig17(c.max_residual),
            sig17(c.max_scaled),
            sig17(c.tolerance)
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.1), "1.0000000000000001e-1");
        assert_eq!(sig17(-2.0), "-2.0000000000000000e0");
        let back: f64 = sig17(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn quotes_awkward_names() {
        assert_eq!(csv_field("q + B*P'"), "q + B*P'");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}
