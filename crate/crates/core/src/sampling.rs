//! Deterministic admissible sample points.

use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::Params;
use crate::jet::{C, DIM};

/// Distance kept from every singular locus.
pub const LOCUS_MARGIN: f64 = 0.1;

const BASES: [u64; DIM] = [2, 3, 5, 7];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: [f64; DIM],
    pub hi: [f64; DIM],
}

impl SampleBox {
    pub fn new(lo: [f64; DIM], hi: [f64; DIM]) -> Self {
        Self { lo, hi }
    }

    pub fn cube(lo: f64, hi: f64) -> Self {
        Self { lo: [lo; DIM], hi: [hi; DIM] }
    }

    /// Parses `lo0:hi0,lo1:hi1,lo2:hi2,lo3:hi3`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != DIM {
            return Err(Error::Invalid(format!("box needs {DIM} intervals, got `{s}`")));
        }
        let mut lo = [0.0; DIM];
        let mut hi = [0.0; DIM];
        for (k, p) in parts.iter().enumerate() {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| Error::Invalid(format!("interval `{p}` is not lo:hi")))?;
            lo[k] = a.trim().parse().map_err(|_| Error::Invalid(format!("bad bound `{a}`")))?;
            hi[k] = b.trim().parse().map_err(|_| Error::Invalid(format!("bad bound `{b}`")))?;
            if !(lo[k] <= hi[k]) {
                return Err(Error::Invalid(format!("empty interval `{p}`")));
            }
        }
        Ok(Self { lo, hi })
    }
}

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

pub fn halton_point(index: u64, bx: &SampleBox) -> [f64; DIM] {
    std::array::from_fn(|k| bx.lo[k] + (bx.hi[k] - bx.lo[k]) * halton(index, BASES[k]))
}

/// First `n` Halton points of `bx` that keep `LOCUS_MARGIN` away from the
/// chart's singular loci.
pub fn sample_points(chart: &Chart, params: &Params, bx: &SampleBox, n: usize) -> Result<Vec<[C; DIM]>> {
    let mut out = Vec::with_capacity(n);
    let mut blocked = vec![0usize; chart.singular_loci.len()];
    let mut eval_err = None;
    let budget = 200 * n as u64 + 1000;
    for idx in 1..=budget {
        if out.len() == n {
            break;
        }
        let p = halton_point(idx, bx).map(|x| C::new(x, 0.0));
        match chart.blocking_locus(&p, params, LOCUS_MARGIN) {
            Ok(None) => out.push(p),
            Ok(Some(i)) => blocked[i] += 1,
            Err(e) => {
                if matches!(e, Error::UnboundParameter(_)) {
                    return Err(e);
                }
                eval_err.get_or_insert(e);
            }
        }
    }
    if out.len() == n {
        return Ok(out);
    }
    if let Some((i, _)) = blocked.iter().enumerate().filter(|(_, &c)| c > 0).max_by_key(|(_, &c)| c) {
        let l = &chart.singular_loci[i];
        let msg = format!("only {} of {n} admissible points; blocked by {}", out.len(), l.label);
        return Err(match l.kind {
            crate::chart::LocusKind::General => Error::SingularPoint(msg),
            crate::chart::LocusKind::Sigma => Error::DegenerateSigma(msg),
            crate::chart::LocusKind::V => Error::DegenerateV(msg),
        });
    }
    Err(eval_err.unwrap_or_else(|| Error::SingularPoint(format!("only {} of {n} admissible points", out.len()))))
}
