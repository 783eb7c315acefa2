//! CSV grid files: two comment lines then `i,j,k,U` rows.

use std::io::{BufRead, BufReader, Read, Write};

use hhk_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Row {
    i: usize,
    j: usize,
    k: usize,
    #[serde(rename = "U")]
    u: f64,
}

/// Grid values with their dimensions and box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub dims: [usize; 3],
    pub bounds: [[f64; 2]; 3],
    pub values: Vec<f64>,
}

pub fn write_grid<W: Write>(mut w: W, g: &GridFile) -> Result<()> {
    let io = |e: std::io::Error| Error::Invalid(format!("write failed: {e}"));
    let [nt, nx, ny] = g.dims;
    writeln!(w, "# dims {nt} {nx} {ny}").map_err(io)?;
    let b = g.bounds;
    writeln!(
        w,
        "# box {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
        b[0][0], b[0][1], b[1][0], b[1][1], b[2][0], b[2][1]
    )
    .map_err(io)?;
    writeln!(w, "i,j,k,U").map_err(io)?;
    for i in 0..nt {
        for j in 0..nx {
            for k in 0..ny {
                let u = g.values[(i * nx + j) * ny + k];
                writeln!(w, "{i},{j},{k},{u:.16e}").map_err(io)?;
            }
        }
    }
    Ok(())
}

fn header_nums<T: std::str::FromStr>(line: &str, tag: &str, count: usize) -> Result<Vec<T>> {
    let rest = line
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|l| l.strip_prefix(tag))
        .ok_or_else(|| Error::Invalid(format!("expected `# {tag} ...`, got `{line}`")))?;
    let v: Vec<T> = rest
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Invalid(format!("bad number `{s}` in `# {tag}`"))))
        .collect::<Result<_>>()?;
    if v.len() != count {
        return Err(Error::Invalid(format!("`# {tag}` needs {count} numbers")));
    }
    Ok(v)
}

pub fn read_grid<R: Read>(r: R) -> Result<GridFile> {
    let mut br = BufReader::new(r);
    let mut line = String::new();
    let mut next = |br: &mut BufReader<R>| -> Result<String> {
        line.clear();
        br.read_line(&mut line).map_err(|e| Error::Invalid(format!("read failed: {e}")))?;
        Ok(line.trim().to_string())
    };
    let d = header_nums::<usize>(&next(&mut br)?, "dims", 3)?;
    let b = header_nums::<f64>(&next(&mut br)?, "box", 6)?;
    let dims = [d[0], d[1], d[2]];
    let bounds = [[b[0], b[1]], [b[2], b[3]], [b[4], b[5]]];
    let total = dims.iter().product::<usize>();
    let mut values = vec![f64::NAN; total];
    let mut seen = vec![false; total];
    let mut rdr = csv::Reader::from_reader(br);
    for rec in rdr.deserialize::<Row>() {
        let row = rec.map_err(|e| Error::Invalid(format!("bad grid row: {e}")))?;
        if row.i >= dims[0] || row.j >= dims[1] || row.k >= dims[2] {
            return Err(Error::Invalid(format!("node ({},{},{}) outside dims {dims:?}", row.i, row.j, row.k)));
        }
        let p = (row.i * dims[1] + row.j) * dims[2] + row.k;
        if seen[p] {
            return Err(Error::Invalid(format!("duplicate node ({},{},{})", row.i, row.j, row.k)));
        }
        seen[p] = true;
        values[p] = row.u;
    }
    if let Some(p) = seen.iter().position(|s| !s) {
        return Err(Error::Invalid(format!("missing node {p} of {total}")));
    }
    Ok(GridFile { dims, bounds, values })
}
