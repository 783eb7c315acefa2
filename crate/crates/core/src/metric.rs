//! Symmetric metric fields and their pointwise evaluation.

use nalgebra::Matrix4;

use crate::chart::{Chart, FieldTag};
use crate::error::{Error, Result};
use crate::expr::{Evaluator, Expr, Params};
use crate::jet::{hidx, C, DIM, HESS_LEN};

pub type Mat4 = [[C; DIM]; DIM];

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct MetricField {
    pub chart: Chart,
    /// Packed upper-triangular components, indexed by [`hidx`].
    pub g: [Expr; HESS_LEN],
    pub params: Params,
    pub orientation: i8,
    /// Oriented square root of `det g` in closed form, when known.
    pub volume: Option<Expr>,
}

/// Metric data at one point.
#[derive(Debug, Clone)]
pub struct MetricPoint {
    pub g: Mat4,
    /// `dg[e][a][b] = ∂_e g_ab`
    pub dg: [Mat4; DIM],
    /// `ddg[e][f][a][b] = ∂_e ∂_f g_ab`
    pub ddg: [[Mat4; DIM]; DIM],
    pub g_inv: Mat4,
    pub det: C,
    /// Oriented volume density, squares to `det`.
    pub vol: C,
    /// Largest component magnitude.
    pub scale: f64,
}

pub fn to_matrix(m: &Mat4) -> Matrix4<C> {
    Matrix4::from_fn(|i, j| m[i][j])
}

pub fn from_matrix(m: &Matrix4<C>) -> Mat4 {
    let mut out = [[ZERO; DIM]; DIM];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = m[(i, j)];
        }
    }
    out
}

impl MetricField {
    /// Builds a metric from a component function; only `i <= j` is queried.
    pub fn from_fn(chart: Chart, params: Params, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut g: [Expr; HESS_LEN] = std::array::from_fn(|_| Expr::zero());
        for i in 0..DIM {
            for j in i..DIM {
                g[hidx(i, j)] = f(i, j);
            }
        }
        Self { chart, g, params, orientation: 1, volume: None }
    }

    pub fn diagonal(chart: Chart, params: Params, d: [Expr; DIM]) -> Self {
        Self::from_fn(chart, params, |i, j| if i == j { d[i].clone() } else { Expr::zero() })
    }

    pub fn with_volume(mut self, vol: Expr) -> Self {
        self.volume = Some(vol);
        self
    }

    pub fn with_orientation(mut self, o: i8) -> Self {
        self.orientation = if o < 0 { -1 } else { 1 };
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.g[hidx(i, j)]
    }

    /// Component values only.
    pub fn values_at(&self, point: &[C; DIM]) -> Result<Mat4> {
        let mut ev = Evaluator::new(*point, &self.params);
        let mut g = [[ZERO; DIM]; DIM];
        for i in 0..DIM {
            for j in i..DIM {
                let v = ev.value(self.component(i, j))?;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Ok(g)
    }

    pub fn metric_at(&self, point: &[C; DIM]) -> Result<MetricPoint> {
        self.chart.check_point(point, &self.params)?;
        let mut ev = Evaluator::new(*point, &self.params);
        let mut g = [[ZERO; DIM]; DIM];
        let mut dg = [[[ZERO; DIM]; DIM]; DIM];
        let mut ddg = [[[[ZERO; DIM]; DIM]; DIM]; DIM];
        for a in 0..DIM {
            for b in a..DIM {
                let j = ev.jet(self.component(a, b))?;
                for (x, y) in [(a, b), (b, a)] {
                    g[x][y] = j.value;
                    for e in 0..DIM {
                        dg[e][x][y] = j.d(e);
                        for f in 0..DIM {
                            ddg[e][f][x][y] = j.dd(e, f);
                        }
                    }
                }
            }
        }
        let scale = g.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        let m = to_matrix(&g);
        let det = m.determinant();
        if scale == 0.0 || det.norm() <= 1e-12 * scale.powi(4) {
            return Err(Error::DegenerateMetric(format!("|det g| = {:.3e}", det.norm())));
        }
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::DegenerateMetric("metric not invertible".into()))?;
        let vol = self.volume_at(&mut ev, det)?;
        Ok(MetricPoint { g, dg, ddg, g_inv: from_matrix(&inv), det, vol, scale })
    }

    fn volume_at(&self, ev: &mut Evaluator, det: C) -> Result<C> {
        let o = self.orientation as f64;
        if let Some(v) = &self.volume {
            let v = ev.value(v)?;
            if (v * v - det).norm() > 1e-8 * det.norm() {
                return Err(Error::Invalid(format!(
                    "volume form squares to {} but det g = {}",
                    v * v,
                    det
                )));
            }
            return Ok(v * o);
        }
        let on_cut = det.re < 0.0 && det.im.abs() <= 1e-12 * det.norm();
        if on_cut {
            if self.chart.field_tag == FieldTag::Real {
                return Ok(C::new(0.0, det.norm().sqrt() * o));
            }
            return Err(Error::BranchAmbiguity(format!(
                "sqrt(det g) with det g = {det} on the negative real axis"
            )));
        }
        Ok(det.sqrt() * o)
    }

    /// Counts of positive and negative eigenvalues of the real part; errors if
    /// the metric is not real to `tol` at the point.
    pub fn signature_at(&self, point: &[C; DIM], tol: f64) -> Result<(usize, usize)> {
        let g = self.values_at(point)?;
        let scale = g.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        let leak = g.iter().flatten().map(|c| c.im.abs()).fold(0.0, f64::max);
        if leak > tol * scale.max(1.0) {
            return Err(Error::ComplexLeak(leak));
        }
        let re = nalgebra::Matrix4::from_fn(|i, j| g[i][j].re);
        let eig = re.symmetric_eigenvalues();
        let pos = eig.iter().filter(|&&l| l > 0.0).count();
        let neg = eig.iter().filter(|&&l| l < 0.0).count();
        Ok((pos, neg))
    }
}

/// Symbolic 4x4 determinant by cofactor expansion.
pub fn det_expr(m: &[[Expr; DIM]; DIM]) -> Expr {
    fn minor(m: &[Vec<Expr>], col_skip: usize) -> Vec<Vec<Expr>> {
        m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col_skip).map(|(_, e)| e.clone()).collect())
            .collect()
    }
    fn det(m: &[Vec<Expr>]) -> Expr {
        if m.len() == 1 {
            return m[0][0].clone();
        }
        let mut acc = Expr::zero();
        for j in 0..m.len() {
            if m[0][j].is_zero() {
                continue;
            }
            let term = m[0][j].clone() * det(&minor(m, j));
            acc = if j % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }
    let rows: Vec<Vec<Expr>> = m.iter().map(|r| r.to_vec()).collect();
    det(&rows)
}

/// Pulls `target` back along `map`, which expresses the target chart's
/// coordinates in terms of `source` coordinates.
pub fn pullback_metric(target: &MetricField, map: &[Expr; DIM], source: Chart) -> MetricField {
    let jac: [[Expr; DIM]; DIM] = std::array::from_fn(|c| std::array::from_fn(|a| map[c].diff(a)));
    let gb: [[Expr; DIM]; DIM] =
        std::array::from_fn(|c| std::array::from_fn(|d| target.component(c, d).subst_coords(map)));
    let mut chart = source;
    for l in &target.chart.singular_loci {
        chart.singular_loci.push(crate::chart::Locus {
            label: l.label.clone(),
            expr: l.expr.subst_coords(map),
            kind: l.kind,
        });
    }
    let mut out = MetricField::from_fn(chart, target.params.clone(), |a, b| {
        let mut acc = Expr::zero();
        for c in 0..DIM {
            if jac[c][a].is_zero() {
                continue;
            }
            for d in 0..DIM {
                if jac[d][b].is_zero() || gb[c][d].is_zero() {
                    continue;
                }
                acc = acc + jac[c][a].clone() * jac[d][b].clone() * gb[c][d].clone();
            }
        }
        acc
    });
    out.orientation = target.orientation;
    if let Some(v) = &target.volume {
        out.volume = Some(det_expr(&jac) * v.subst_coords(map));
    }
    out
}

/// Max componentwise deviation between two metrics at a point, relative to
/// the larger component scale.
pub fn compare_at(a: &MetricField, b: &MetricField, point: &[C; DIM]) -> Result<f64> {
    let ga = a.values_at(point)?;
    let gb = b.values_at(point)?;
    let scale = ga.iter().chain(gb.iter()).flatten().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            worst = worst.max((ga[i][j] - gb[i][j]).norm());
        }
    }
    Ok(worst / scale)
}
