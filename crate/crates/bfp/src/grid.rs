use hhk_core::expr::{Expr, Params};
use hhk_core::jet::C;
use hhk_core::{Error, Result};

/// Dirichlet data on the box boundary.
#[derive(Debug, Clone)]
pub enum Boundary {
    /// Closed form in the coordinates `(t, x, y, z)`; `z` is set to 0.
    Expr { expr: Expr, params: Params },
    /// Node values in grid order; only boundary entries are read.
    Table(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    /// `[t0, t1], [x0, x1], [y0, y1]`
    pub bounds: [[f64; 2]; 3],
    /// Points per axis.
    pub n: usize,
    pub bc: Boundary,
}

impl GridSpec {
    pub fn new(bounds: [[f64; 2]; 3], n: usize, bc: Boundary) -> Result<Self> {
        if n < 5 {
            return Err(Error::Invalid(format!("grid needs at least 5 points per axis, got {n}")));
        }
        if !(bounds[0][0] > 0.0) {
            return Err(Error::Invalid(format!("t0 must be positive, got {}", bounds[0][0])));
        }
        for b in &bounds {
            if !(b[1] > b[0]) || !b[0].is_finite() || !b[1].is_finite() {
                return Err(Error::Invalid(format!("empty interval {b:?}")));
            }
        }
        if let Boundary::Table(v) = &bc {
            if v.len() != n * n * n {
                return Err(Error::Invalid(format!("table has {} values, grid has {}", v.len(), n * n * n)));
            }
        }
        Ok(Self { bounds, n, bc })
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing along axis `a` (0 = t, 1 = x, 2 = y).
    pub fn h(&self, a: usize) -> f64 {
        (self.bounds[a][1] - self.bounds[a][0]) / (self.n - 1) as f64
    }

    pub fn coord(&self, a: usize, i: usize) -> f64 {
        self.bounds[a][0] + i as f64 * self.h(a)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn ijk(&self, p: usize) -> (usize, usize, usize) {
        (p / (self.n * self.n), (p / self.n) % self.n, p % self.n)
    }

    pub fn is_boundary(&self, i: usize, j: usize, k: usize) -> bool {
        let e = self.n - 1;
        i == 0 || j == 0 || k == 0 || i == e || j == e || k == e
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    /// Samples a closed form at every node.
    pub fn sample(&self, e: &Expr, params: &Params) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        for (p, slot) in out.iter_mut().enumerate() {
            let (i, j, k) = self.ijk(p);
            let [t, x, y] = self.point(i, j, k);
            let v = e.eval(&[t, x, y, 0.0].map(|c| C::new(c, 0.0)), params)?;
            if v.im.abs() > 1e-12 * v.re.abs().max(1.0) || !v.re.is_finite() {
                return Err(Error::Invalid(format!("boundary value {v} at {:?} is not a finite real", [t, x, y])));
            }
            *slot = v.re;
        }
        Ok(out)
    }

    /// Boundary values in grid order; interior entries are zero.
    pub fn boundary_values(&self) -> Result<Vec<f64>> {
        let full = match &self.bc {
            Boundary::Expr { expr, params } => self.sample(expr, params)?,
            Boundary::Table(v) => v.clone(),
        };
        let mut out = vec![0.0; self.len()];
        for (p, slot) in out.iter_mut().enumerate() {
            let (i, j, k) = self.ijk(p);
            if self.is_boundary(i, j, k) {
                if !full[p].is_finite() {
                    return Err(Error::Invalid("boundary data is not finite".into()));
                }
                *slot = full[p];
            }
        }
        Ok(out)
    }
}
