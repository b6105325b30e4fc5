use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::affine::{AffineComponent, ProductProcess};
use crate::error::{Error, Result};

/// Equally spaced tenor dates `T_k = k * delta`, `k = 1..=n`, with `T_0 = 0` as the spot date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TenorStructure {
    pub delta: f64,
    pub n: usize,
}

impl TenorStructure {
    /// Semiannual dates out to `years`.
    pub fn semiannual(years: usize) -> Self {
        TenorStructure {
            delta: 0.5,
            n: 2 * years,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig("tenor spacing must be positive".into()));
        }
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "number of tenor dates must be even and at least 2, got {}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn date(&self, k: usize) -> f64 {
        k as f64 * self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.date(self.n)
    }

    /// Number of annual periods, `M = N / 2`.
    pub fn years(&self) -> usize {
        self.n / 2
    }

    /// Index of the tenor date at time `t`, if `t` is one.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = (t / self.delta).round();
        if k >= 0.0 && (k * self.delta - t).abs() < 1e-9 && (k as usize) <= self.n {
            Some(k as usize)
        } else {
            None
        }
    }
}

/// Real parameters generating the vectors `u_k` and `v_k`.
///
/// Entry `k - 1` of each vector belongs to tenor index `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generators {
    pub u_tilde: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub v_tilde: Vec<f64>,
    pub v_bar: Vec<f64>,
}

impl Generators {
    /// All-zero generators for `n` tenor dates: a flat, inflation-free model.
    pub fn zeros(n: usize) -> Self {
        Generators {
            u_tilde: vec![0.0; n],
            u_bar: vec![0.0; n],
            v_tilde: vec![0.0; n],
            v_bar: vec![0.0; n],
        }
    }
}

/// Model time and driver state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub x: Vec<f64>,
}

impl StateVector {
    pub fn new(t: f64, x: Vec<f64>) -> Self {
        StateVector { t, x }
    }
}

/// Serialized form of [`ModelConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfigFile {
    pub tenor: TenorStructure,
    /// `P(0, T)` for the longest tenor date, the numeraire bond.
    pub numeraire_discount: f64,
    pub process: ProductProcess,
    pub generators: Generators,
}

/// Tenor structure, driving process and term-structure vectors of the affine market model.
///
/// The process has `1 + 2M` components: a common CIR driver, `M` nonnegative nominal
/// drivers and `M` real-valued inflation drivers. Vectors `u_k`, `v_k` follow the
/// sparse layout
///
/// ```text
/// u_k = u~_k e0 + u^_k e_{ceil(k/2)} + sum_{l > ceil(k/2)} u^_{2l-1} e_l
/// v_k = v~_k e0 + (nominal part of u_k)    + v^_k e_{M + ceil(k/2)}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelConfigFile", into = "ModelConfigFile")]
pub struct ModelConfig {
    tenor: TenorStructure,
    numeraire_discount: f64,
    process: ProductProcess,
    generators: Generators,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl TryFrom<ModelConfigFile> for ModelConfig {
    type Error = Error;

    fn try_from(f: ModelConfigFile) -> Result<Self> {
        ModelConfig::new(f.tenor, f.process, f.numeraire_discount, f.generators)
    }
}

impl From<ModelConfig> for ModelConfigFile {
    fn from(c: ModelConfig) -> Self {
        ModelConfigFile {
            tenor: c.tenor,
            numeraire_discount: c.numeraire_discount,
            process: c.process,
            generators: c.generators,
        }
    }
}

pub(crate) fn build_u(tenor: &TenorStructure, g: &Generators, k: usize) -> Vec<f64> {
    let years = tenor.years();
    let mut u = vec![0.0; 1 + 2 * years];
    let l = k.div_ceil(2);
    u[0] = g.u_tilde[k - 1];
    u[l] = g.u_bar[k - 1];
    for (lp, slot) in u.iter_mut().enumerate().take(years + 1).skip(l + 1) {
        *slot = g.u_bar[2 * lp - 2];
    }
    u
}

pub(crate) fn build_v(tenor: &TenorStructure, g: &Generators, k: usize) -> Vec<f64> {
    let years = tenor.years();
    let mut v = build_u(tenor, g, k);
    v[0] = g.v_tilde[k - 1];
    v[years + k.div_ceil(2)] = g.v_bar[k - 1];
    v
}

impl ModelConfig {
    pub fn new(
        tenor: TenorStructure,
        process: ProductProcess,
        numeraire_discount: f64,
        generators: Generators,
    ) -> Result<Self> {
        tenor.validate()?;
        let years = tenor.years();
        if process.dim() != 1 + 2 * years {
            return Err(Error::InvalidConfig(format!(
                "process has {} components, tenor needs {}",
                process.dim(),
                1 + 2 * years
            )));
        }
        if process.m() != 1 + years {
            return Err(Error::InvalidConfig(format!(
                "expected {} nonnegative components (common + nominal), found {}",
                1 + years,
                process.m()
            )));
        }
        if !(numeraire_discount > 0.0 && numeraire_discount.is_finite()) {
            return Err(Error::InvalidConfig(
                "numeraire discount factor must be positive".into(),
            ));
        }
        let g = &generators;
        for (name, vals) in [
            ("u_tilde", &g.u_tilde),
            ("u_bar", &g.u_bar),
            ("v_tilde", &g.v_tilde),
            ("v_bar", &g.v_bar),
        ] {
            if vals.len() != tenor.n {
                return Err(Error::InvalidConfig(format!(
                    "{name} has length {}, expected {}",
                    vals.len(),
                    tenor.n
                )));
            }
            if vals.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} is not finite")));
            }
        }
        let u: Vec<Vec<f64>> = (1..=tenor.n).map(|k| build_u(&tenor, g, k)).collect();
        let v: Vec<Vec<f64>> = (1..=tenor.n).map(|k| build_v(&tenor, g, k)).collect();
        for ui in u.iter().flatten() {
            if *ui < 0.0 {
                return Err(Error::InvalidConfig("u_k must be nonnegative".into()));
            }
        }
        let cfg = ModelConfig {
            tenor,
            numeraire_discount,
            process,
            generators,
            u,
            v,
        };
        cfg.check_admissible()?;
        Ok(cfg)
    }

    /// Every `u_k` and `v_k` lies in the admissible set at the horizon.
    fn check_admissible(&self) -> Result<()> {
        let bound = self.process.domain_bound(self.horizon());
        for k in 1..=self.tenor.n {
            for (name, w) in [("u", self.u(k)), ("v", self.v(k))] {
                let wc: Vec<Complex64> = w.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                bound.check(&wc).map_err(|e| {
                    Error::InvalidConfig(format!("{name}_{k} outside the admissible set: {e}"))
                })?;
            }
        }
        Ok(())
    }

    pub fn tenor(&self) -> &TenorStructure {
        &self.tenor
    }

    pub fn process(&self) -> &ProductProcess {
        &self.process
    }

    pub fn generators(&self) -> &Generators {
        &self.generators
    }

    pub fn numeraire_discount(&self) -> f64 {
        self.numeraire_discount
    }

    pub fn horizon(&self) -> f64 {
        self.tenor.horizon()
    }

    pub fn years(&self) -> usize {
        self.tenor.years()
    }

    pub fn n(&self) -> usize {
        self.tenor.n
    }

    pub fn dim(&self) -> usize {
        self.process.dim()
    }

    /// Component index of nominal driver `l` (1-based year).
    pub fn nominal_component(&self, l: usize) -> usize {
        l
    }

    /// Component index of inflation driver `l` (1-based year).
    pub fn inflation_component(&self, l: usize) -> usize {
        self.years() + l
    }

    /// `u_k`, `1 <= k <= N`.
    pub fn u(&self, k: usize) -> &[f64] {
        &self.u[k - 1]
    }

    /// `v_k`, `1 <= k <= N`.
    pub fn v(&self, k: usize) -> &[f64] {
        &self.v[k - 1]
    }

    /// State at time zero.
    pub fn initial_state(&self) -> StateVector {
        StateVector::new(0.0, self.process.x0())
    }

    /// Rebuild with new generators, keeping tenor, process and numeraire.
    pub fn with_generators(&self, generators: Generators) -> Result<Self> {
        ModelConfig::new(
            self.tenor,
            self.process.clone(),
            self.numeraire_discount,
            generators,
        )
    }

    /// Rebuild with one driver replaced.
    pub fn with_component(&self, index: usize, c: AffineComponent) -> Result<Self> {
        let mut process = self.process.clone();
        process.set_component(index, c)?;
        ModelConfig::new(
            self.tenor,
            process,
            self.numeraire_discount,
            self.generators.clone(),
        )
    }

    /// First tenor index where the sequence `u_k` fails to decrease componentwise.
    pub fn check_monotone(&self) -> Result<()> {
        let g = &self.generators;
        for k in 1..=self.n() {
            if g.u_tilde[k - 1] < 0.0 || g.u_bar[k - 1] < 0.0 {
                return Err(Error::NegativeForward { index: k });
            }
        }
        for k in 2..=self.n() {
            let prev = self.u(k - 1);
            let cur = self.u(k);
            if cur.iter().zip(prev).any(|(c, p)| c > p) {
                return Err(Error::NegativeForward { index: k });
            }
        }
        Ok(())
    }
}
