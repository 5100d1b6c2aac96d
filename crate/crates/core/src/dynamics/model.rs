use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance for generator row sums.
pub const GENERATOR_ROW_SUM_TOL: f64 = 1e-12;

/// The six concrete stochastic systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Linear1D,
    Linear2D,
    NonLinear1D,
    NonLinear2D,
    Switching1D,
    Switching2D,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Linear1D,
        ModelKind::Linear2D,
        ModelKind::NonLinear1D,
        ModelKind::NonLinear2D,
        ModelKind::Switching1D,
        ModelKind::Switching2D,
    ];

    /// State dimension m1.
    pub fn state_dim(self) -> usize {
        match self {
            ModelKind::Linear1D | ModelKind::NonLinear1D | ModelKind::Switching1D => 1,
            _ => 2,
        }
    }

    /// Observation dimension m2 (equal to the state dimension for all six systems).
    pub fn obs_dim(self) -> usize {
        self.state_dim()
    }

    pub fn is_switching(self) -> bool {
        matches!(self, ModelKind::Switching1D | ModelKind::Switching2D)
    }

    pub fn is_linear(self) -> bool {
        matches!(self, ModelKind::Linear1D | ModelKind::Linear2D)
    }

    pub fn is_nonlinear(self) -> bool {
        matches!(self, ModelKind::NonLinear1D | ModelKind::NonLinear2D)
    }

    /// Short label used by the CLI and report rows.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Linear1D => "lin1d",
            ModelKind::Linear2D => "lin2d",
            ModelKind::NonLinear1D => "nl1d",
            ModelKind::NonLinear2D => "nl2d",
            ModelKind::Switching1D => "swt1d",
            ModelKind::Switching2D => "swt2d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lin1d" | "linear1d" => Ok(ModelKind::Linear1D),
            "lin2d" | "linear2d" => Ok(ModelKind::Linear2D),
            "nl1d" | "nonlinear1d" => Ok(ModelKind::NonLinear1D),
            "nl2d" | "nonlinear2d" => Ok(ModelKind::NonLinear2D),
            "swt1d" | "switching1d" => Ok(ModelKind::Switching1D),
            "swt2d" | "switching2d" => Ok(ModelKind::Switching2D),
            other => Err(Error::Parse(format!("unknown model kind: {other}"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One of the six systems together with all of its scalar and matrix parameters.
///
/// `sigma`/`sigma0` scale the system and observation noises; `f_matrix`,
/// `g_matrix`, `h_matrix` are the drift, noise-loading, and observation maps;
/// `generator_q` and `regime_values` describe the regime chain of the
/// switching systems and are ignored elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub eta: f64,
    pub sigma: f64,
    pub sigma0: f64,
    pub f_matrix: DMatrix<f64>,
    pub g_matrix: DMatrix<f64>,
    pub h_matrix: DMatrix<f64>,
    pub x0: DVector<f64>,
    pub generator_q: Option<DMatrix<f64>>,
    pub regime_values: Vec<f64>,
}

impl ModelSpec {
    /// Baseline parameterization of each system.
    pub fn preset(kind: ModelKind) -> Self {
        let eta = 0.005;
        let coupling = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0]);
        let spec = match kind {
            ModelKind::Linear1D => ModelSpec {
                kind,
                eta,
                sigma: 0.7,
                sigma0: 0.5,
                f_matrix: DMatrix::identity(1, 1),
                g_matrix: DMatrix::identity(1, 1),
                h_matrix: DMatrix::identity(1, 1),
                x0: DVector::from_element(1, 1.0),
                generator_q: None,
                regime_values: Vec::new(),
            },
            ModelKind::Linear2D => ModelSpec {
                kind,
                eta,
                sigma: 1.0,
                sigma0: 0.5,
                f_matrix: coupling.clone(),
                g_matrix: DMatrix::identity(2, 2),
                h_matrix: DMatrix::identity(2, 2),
                x0: DVector::from_element(2, 1.0),
                generator_q: None,
                regime_values: Vec::new(),
            },
            ModelKind::NonLinear1D => ModelSpec {
                kind,
                eta,
                sigma: 1.0,
                sigma0: 0.5,
                f_matrix: DMatrix::identity(1, 1),
                g_matrix: DMatrix::identity(1, 1),
                h_matrix: DMatrix::identity(1, 1),
                x0: DVector::from_element(1, 1.0),
                generator_q: None,
                regime_values: Vec::new(),
            },
            ModelKind::NonLinear2D => ModelSpec {
                kind,
                eta,
                sigma: 1.0,
                sigma0: 0.5,
                f_matrix: coupling.clone(),
                g_matrix: DMatrix::identity(2, 2),
                h_matrix: DMatrix::identity(2, 2),
                x0: DVector::from_element(2, 1.0),
                generator_q: None,
                regime_values: Vec::new(),
            },
            ModelKind::Switching1D => ModelSpec {
                kind,
                eta,
                sigma: 0.1,
                sigma0: 0.3,
                f_matrix: DMatrix::identity(1, 1),
                g_matrix: DMatrix::identity(1, 1),
                h_matrix: DMatrix::identity(1, 1),
                x0: DVector::zeros(1),
                generator_q: Some(DMatrix::from_row_slice(2, 2, &[-2.0, 2.0, 2.0, -2.0])),
                regime_values: vec![1.0, 2.0],
            },
            ModelKind::Switching2D => ModelSpec {
                kind,
                eta,
                sigma: 0.3,
                sigma0: 2.0,
                f_matrix: DMatrix::identity(2, 2),
                g_matrix: DMatrix::identity(2, 2),
                h_matrix: coupling,
                x0: DVector::zeros(2),
                generator_q: Some(DMatrix::from_row_slice(2, 2, &[-2.0, 2.0, 2.0, -2.0])),
                regime_values: vec![1.0, 2.0],
            },
        };
        debug_assert!(spec.validate().is_ok());
        spec
    }

    /// Same model with a different observation noise scale (robustness sweeps).
    pub fn with_sigma0(&self, sigma0: f64) -> Self {
        ModelSpec {
            sigma0,
            ..self.clone()
        }
    }

    pub fn state_dim(&self) -> usize {
        self.kind.state_dim()
    }

    pub fn obs_dim(&self) -> usize {
        self.kind.obs_dim()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.sigma0 >= 0.0 && self.sigma0.is_finite()) {
            return Err(Error::Config(format!("sigma0 must be >= 0, got {}", self.sigma0)));
        }
        let m1 = self.state_dim();
        let m2 = self.obs_dim();
        for (name, m, dim) in [
            ("f_matrix", &self.f_matrix, m1),
            ("g_matrix", &self.g_matrix, m1),
            ("h_matrix", &self.h_matrix, m2),
        ] {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Config(format!(
                    "{name} must be {dim}x{dim} for {}, got {}x{}",
                    self.kind,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{name} has non-finite entries")));
            }
        }
        if self.x0.len() != m1 {
            return Err(Error::Config(format!(
                "x0 must have length {m1}, got {}",
                self.x0.len()
            )));
        }
        if self.kind.is_switching() {
            let q = self
                .generator_q
                .as_ref()
                .ok_or_else(|| Error::Config("switching model requires generator_q".into()))?;
            validate_generator(q, &self.regime_values)?;
        }
        Ok(())
    }
}

/// Check that `q` is a CTMC generator over `regime_values`.
pub fn validate_generator(q: &DMatrix<f64>, regime_values: &[f64]) -> Result<()> {
    let k = q.nrows();
    if k == 0 || q.ncols() != k {
        return Err(Error::Config(format!(
            "generator must be square and non-empty, got {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    if regime_values.len() != k {
        return Err(Error::Config(format!(
            "regime_values has length {} but generator is {k}x{k}",
            regime_values.len()
        )));
    }
    for i in 0..k {
        let mut row_sum = 0.0;
        for j in 0..k {
            let v = q[(i, j)];
            if !v.is_finite() {
                return Err(Error::Config("generator has non-finite entries".into()));
            }
            if i != j && v < 0.0 {
                return Err(Error::Config(format!(
                    "generator off-diagonal entry ({i},{j}) is negative: {v}"
                )));
            }
            row_sum += v;
        }
        if row_sum.abs() > GENERATOR_ROW_SUM_TOL {
            return Err(Error::Config(format!(
                "generator row {i} sums to {row_sum}, expected 0"
            )));
        }
    }
    Ok(())
}
