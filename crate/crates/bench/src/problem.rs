use std::path::PathBuf;

use hybrid_pipecg::sparse::{
    generate_poisson125, read_matrix_market, spmv, CsrMatrix, JacobiPreconditioner,
};
use hybrid_pipecg::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    MatrixMarket(PathBuf),
    /// 125-point Poisson operator on an `n^3` grid.
    Poisson(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub source: Source,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl ProblemSpec {
    pub fn new(source: Source) -> Self {
        Self {
            source,
            tolerance: 1e-5,
            max_iterations: 10_000,
        }
    }

    /// `poisson-<n>` or the matrix file stem.
    pub fn id(&self) -> String {
        match &self.source {
            Source::Poisson(n) => format!("poisson-{n}"),
            Source::MatrixMarket(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

/// A manufactured system: `b = A x_true` with `x_true = 1/sqrt(N)` everywhere,
/// solved from `x0 = 0` with Jacobi preconditioning.
#[derive(Debug, Clone)]
pub struct Problem {
    pub id: String,
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
    pub x0: Vec<f64>,
    pub pc: JacobiPreconditioner,
}

impl Problem {
    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    pub fn from_matrix(id: impl Into<String>, a: CsrMatrix) -> Result<Self> {
        a.check_solver_ready()?;
        let n = a.n_rows();
        let x_true = vec![1.0 / (n as f64).sqrt(); n];
        let b = spmv(&a, &x_true)?;
        let pc = JacobiPreconditioner::setup(&a)?;
        Ok(Self {
            id: id.into(),
            a,
            b,
            x_true,
            x0: vec![0.0; n],
            pc,
        })
    }

    /// `||x - x_true||_inf`.
    pub fn verify(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.x_true)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn build_problem(spec: &ProblemSpec) -> Result<Problem> {
    let a = match &spec.source {
        Source::Poisson(n) => generate_poisson125(*n)?,
        Source::MatrixMarket(path) => read_matrix_market(path).map_err(|e| match e {
            Error::Io(io) => Error::Io(std::io::Error::new(
                io.kind(),
                format!("{}: {io}", path.display()),
            )),
            other => other,
        })?,
    };
    Problem::from_matrix(spec.id(), a)
}
