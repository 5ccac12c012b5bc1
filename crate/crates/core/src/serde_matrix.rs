//! Complex matrices as `{rows, cols, entries}` with row-major `[re, im]` pairs.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::tensor::{CMat, C64};

#[derive(Serialize, Deserialize)]
struct Dense {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
    let mut entries = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            entries.push([z.re, z.im]);
        }
    }
    Dense { rows: m.nrows(), cols: m.ncols(), entries }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
    let dense = Dense::deserialize(d)?;
    if dense.entries.len() != dense.rows * dense.cols {
        return Err(serde::de::Error::custom("entry count does not match shape"));
    }
    let values: Vec<C64> = dense.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    Ok(CMat::from_row_slice(dense.rows, dense.cols, &values))
}

/// Row-major `[re, im]` pairs without shape.
pub fn entries(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

/// Complex vectors as a list of `[re, im]` pairs.
pub mod vector {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::tensor::{CVec, C64};

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CVec::from_iterator(pairs.len(), pairs.iter().map(|[re, im]| C64::new(*re, *im))))
    }
}
