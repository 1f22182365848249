//! JSON analysis configuration.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exprdsl::{self, Expr};
use crate::shifts::{CustomShift, ShiftKind, ShiftSystem};
use crate::timescale::{TimeCell, TimeScaleWindow};
use crate::transition::{MatrixFunction, VectorFunction};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub timescale: TimeScaleConfig,
    pub shifts: ShiftConfig,
    pub system: SystemConfig,
    #[serde(default)]
    pub analysis: AnalysisSettings,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeScaleConfig {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub window: [f64; 2],
    /// Cells `[lo, hi]` for kind `explicit`.
    #[serde(default)]
    pub cells: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftConfig {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub t0: f64,
    #[serde(rename = "T")]
    pub period: f64,
    /// δ₊(s, t) for kind `custom`.
    #[serde(default)]
    pub forward: Option<String>,
    /// δ₋(s, t) for kind `custom`.
    #[serde(default)]
    pub backward: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(rename = "F", default)]
    pub f: Option<Vec<String>>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSettings {
    pub horizon: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: usize,
    pub verify_samples: usize,
    pub tolerances: Tolerances,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings { horizon: None, t_max: None, samples: 50, verify_samples: 200, tolerances: Tolerances::default() }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub quadrature: f64,
    pub ode: f64,
    /// Eigenvalue-1 and unit-modulus tests on multipliers.
    pub eigen: f64,
    /// Threshold on |det(I − M)|.
    pub resonance: f64,
    pub eps_tol: f64,
    pub epsilon: f64,
    pub periodicity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: 1e-10,
            ode: 1e-11,
            eigen: 1e-8,
            resonance: 1e-8,
            eps_tol: 1e-9,
            epsilon: 0.0,
            periodicity: 1e-8,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 7] = ["quadrature", "ode", "eigen", "resonance", "eps_tol", "epsilon", "periodicity"];

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Config(format!("tolerance {key} must be finite and nonnegative")));
        }
        let slot = match key {
            "quadrature" => &mut self.quadrature,
            "ode" => &mut self.ode,
            "eigen" => &mut self.eigen,
            "resonance" => &mut self.resonance,
            "eps_tol" => &mut self.eps_tol,
            "epsilon" => &mut self.epsilon,
            "periodicity" => &mut self.periodicity,
            _ => return Err(Error::Config(format!("unknown tolerance key {key:?}; expected one of {:?}", Self::KEYS))),
        };
        *slot = value;
        Ok(())
    }

    /// Parses `key=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("tolerance override {spec:?} is not key=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("tolerance value {v:?} is not a number")))?;
        self.set(k.trim(), v)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub report_path: Option<PathBuf>,
    #[serde(default)]
    pub samples_path: Option<PathBuf>,
}

/// Validated objects built from a config.
#[derive(Debug)]
pub struct Built {
    pub window: TimeScaleWindow,
    pub shifts: ShiftSystem,
    pub a: MatrixFunction,
    pub f: Option<VectorFunction>,
    pub x0: Option<Vec<f64>>,
    pub horizon: f64,
    pub t_max: f64,
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn build(&self) -> Result<Built> {
        let window = self.build_window()?;
        let shifts = self.build_shifts()?;
        let (t0, t_end) = (shifts.t0(), shifts.period());
        if !window.contains(t0) {
            return Err(Error::Config(format!("t0 = {t0} is not a point of the window")));
        }
        if !(t_end > t0) {
            return Err(Error::Config(format!("T = {t_end} must exceed t0 = {t0}")));
        }
        let params = self.expression_params();
        let n = self.system.n;
        if n == 0 {
            return Err(Error::Config("system dimension n must be positive".into()));
        }
        if self.system.a.len() != n || self.system.a.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("A must be a {n}×{n} array of expressions")));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in self.system.a.iter().enumerate() {
            for (j, src) in row.iter().enumerate() {
                entries.push(parse_entry(src, &format!("A[{i}][{j}]"), &params, &["t"])?);
            }
        }
        let a = MatrixFunction::from_exprs(n, entries, params.clone())?;
        let f = match &self.system.f {
            None => None,
            Some(srcs) => {
                if srcs.len() != n {
                    return Err(Error::Config(format!("F has {} entries but n = {n}", srcs.len())));
                }
                let es = srcs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| parse_entry(s, &format!("F[{i}]"), &params, &["t"]))
                    .collect::<Result<Vec<_>>>()?;
                Some(VectorFunction::from_exprs(es, params))
            }
        };
        if let Some(x0) = &self.system.x0 {
            if x0.len() != n {
                return Err(Error::Config(format!("x0 has {} entries but n = {n}", x0.len())));
            }
        }
        let horizon = self.analysis.horizon.unwrap_or(t0);
        let t_max = self.analysis.t_max.unwrap_or(window.max());
        if horizon < t0 {
            return Err(Error::Config(format!("horizon H = {horizon} lies before t0 = {t0}")));
        }
        if t_max > window.max() || t_max < horizon {
            return Err(Error::Config(format!("t_max = {t_max} must lie in [H, {}]", window.max())));
        }
        if self.analysis.samples == 0 || self.analysis.verify_samples == 0 {
            return Err(Error::Config("sample counts must be positive".into()));
        }
        Ok(Built { window, shifts, a, f, x0: self.system.x0.clone(), horizon, t_max })
    }

    fn expression_params(&self) -> HashMap<String, f64> {
        let mut p: HashMap<String, f64> = self.timescale.params.clone().into_iter().collect();
        p.extend(self.shifts.params.clone());
        p.extend(self.system.params.clone());
        p
    }

    fn param(&self, key: &str) -> Result<f64> {
        self.timescale
            .params
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("time scale kind {:?} needs parameter {key:?}", self.timescale.kind)))
    }

    fn build_window(&self) -> Result<TimeScaleWindow> {
        let [a, b] = self.timescale.window;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Config(format!("window [{a}, {b}] is not a finite interval")));
        }
        match self.timescale.kind.as_str() {
            "real" => TimeScaleWindow::real(a, b),
            "integer" => TimeScaleWindow::integer(a, b),
            "q_scale" => TimeScaleWindow::q_scale(self.param("q")?, a, b),
            "geometric_union" => TimeScaleWindow::geometric_union(self.param("q")?, self.param("c")?, a, b),
            "sqrt_naturals" => TimeScaleWindow::sqrt_naturals(a, b),
            "signed_squares" => TimeScaleWindow::signed_squares(a, b),
            "logistic" => TimeScaleWindow::logistic(self.param("q")?, a, b),
            "explicit" => {
                let cells = self
                    .timescale
                    .cells
                    .as_ref()
                    .ok_or_else(|| Error::Config("kind explicit needs a cells array".into()))?;
                let cells = cells
                    .iter()
                    .filter(|[lo, hi]| *hi >= a && *lo <= b)
                    .map(|&[lo, hi]| if lo == hi { TimeCell::point(lo) } else { TimeCell::interval(lo.max(a), hi.min(b)) })
                    .collect();
                TimeScaleWindow::explicit(cells)
            }
            other => Err(Error::Config(format!("unknown time scale kind {other:?}"))),
        }
    }

    fn build_shifts(&self) -> Result<ShiftSystem> {
        let s = &self.shifts;
        let kind = match s.kind.as_str() {
            "additive" => ShiftKind::Additive,
            "multiplicative" => ShiftKind::Multiplicative,
            "sqrt" => ShiftKind::Sqrt,
            "signed_squares" => ShiftKind::SignedSquares,
            "logistic" => {
                let q = s
                    .params
                    .get("q")
                    .or_else(|| self.timescale.params.get("q"))
                    .copied()
                    .ok_or_else(|| Error::Config("logistic shifts need parameter q".into()))?;
                ShiftKind::Logistic { q }
            }
            "custom" => {
                let params: HashMap<String, f64> = self.expression_params();
                let get = |e: &Option<String>, name: &str| -> Result<Expr> {
                    let src = e.as_ref().ok_or_else(|| Error::Config(format!("custom shifts need a {name} expression")))?;
                    parse_entry(src, &format!("shifts.{name}"), &params, &["s", "t"])
                };
                ShiftKind::Custom(CustomShift { forward: get(&s.forward, "forward")?, backward: get(&s.backward, "backward")?, params })
            }
            other => return Err(Error::Config(format!("unknown shift kind {other:?}"))),
        };
        ShiftSystem::new(kind, s.t0, s.period)
    }
}

fn parse_entry(src: &str, label: &str, params: &HashMap<String, f64>, free: &[&str]) -> Result<Expr> {
    let e = exprdsl::parse(src).map_err(|e| e.context(label.to_string()))?;
    for v in e.variables() {
        if !free.contains(&v.as_str()) && !params.contains_key(&v) {
            return Err(Error::UnboundVariable { name: v }.context(label.to_string()));
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "timescale": {"kind": "q_scale", "params": {"q": 2}, "window": [1, 64]},
        "shifts": {"kind": "multiplicative", "t0": 1, "T": 2},
        "system": {"n": 2, "A": [["1/t", "0"], ["0", "1/t"]]}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = AnalysisConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.analysis.tolerances, Tolerances::default());
        let b = cfg.build().unwrap();
        assert_eq!((b.horizon, b.t_max), (1.0, 64.0));
        assert!(b.f.is_none());
    }

    #[test]
    fn config_errors() {
        let bad = MINIMAL.replace("\"1/t\", \"0\"", "\"1/t\"");
        assert!(matches!(AnalysisConfig::from_json(&bad).unwrap().build(), Err(Error::Config(_))));
        let bad = MINIMAL.replace("\"0\", \"1/t\"", "\"0\", \"1/x\"");
        let err = AnalysisConfig::from_json(&bad).unwrap().build().unwrap_err();
        assert!(matches!(err.root(), Error::UnboundVariable { .. }));
        let bad = MINIMAL.replace("\"T\": 2", "\"T\": 2, \"extra\": 1");
        assert!(AnalysisConfig::from_json(&bad).is_err());
        let mut t = Tolerances::default();
        t.apply_override("ode=1e-9").unwrap();
        assert_eq!(t.ode, 1e-9);
        assert!(t.apply_override("nope=1").is_err());
        assert!(t.apply_override("ode").is_err());
    }
}
