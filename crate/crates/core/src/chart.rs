use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Evaluator, Expr, Params};
use crate::jet::{C, DIM};

/// Smallest magnitude a singular locus may take at an admissible point.
pub const ADMISSIBLE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

/// Which error a vanishing locus maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocusKind {
    General,
    Sigma,
    V,
}

#[derive(Debug, Clone)]
pub struct Locus {
    pub label: String,
    pub expr: Expr,
    pub kind: LocusKind,
}

impl Locus {
    pub fn error(&self, value: C) -> Error {
        let msg = format!("{} = {:.3e} at sample point", self.label, value.norm());
        match self.kind {
            LocusKind::General => Error::SingularPoint(msg),
            LocusKind::Sigma => Error::DegenerateSigma(msg),
            LocusKind::V => Error::DegenerateV(msg),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub names: [String; DIM],
    pub field_tag: FieldTag,
    pub singular_loci: Vec<Locus>,
}

impl Chart {
    pub fn new(names: [&str; DIM], field_tag: FieldTag) -> Self {
        Self { names: names.map(String::from), field_tag, singular_loci: Vec::new() }
    }

    pub fn with_locus(mut self, label: &str, expr: Expr, kind: LocusKind) -> Self {
        self.singular_loci.push(Locus { label: label.to_string(), expr, kind });
        self
    }

    pub fn coord(&self, name: &str) -> Option<Expr> {
        self.names.iter().position(|n| n == name).map(Expr::coord)
    }

    pub fn parse(&self, src: &str) -> Result<Expr> {
        parse(src, &self.names)
    }

    /// Index of the first locus smaller than `margin` at `point`, if any.
    pub fn blocking_locus(&self, point: &[C; DIM], params: &Params, margin: f64) -> Result<Option<usize>> {
        let mut ev = Evaluator::new(*point, params);
        for (i, l) in self.singular_loci.iter().enumerate() {
            let v = ev.value(&l.expr)?;
            if v.norm() <= margin {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Errors if `point` is not admissible.
    pub fn check_point(&self, point: &[C; DIM], params: &Params) -> Result<()> {
        let mut ev = Evaluator::new(*point, params);
        for l in &self.singular_loci {
            let v = ev.value(&l.expr)?;
            if v.norm() <= ADMISSIBLE_EPS {
                return Err(l.error(v));
            }
        }
        Ok(())
    }
}
