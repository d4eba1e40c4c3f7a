//! JSON encoding of matrices.
//!
//! A matrix is a flat row-major list of `[re, im]` pairs; square matrices
//! infer their dimension from the length. Density matrices additionally
//! accept `{"bloch": [a1, a2, a3]}` or `{"ket": [[re, im], ...]}` on input.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{bloch_to_density, c, BlochVector, CMatrix, CVector, DensityMatrix, UnitaryOperator};

pub type Entries = Vec<[f64; 2]>;

pub fn matrix_to_entries(m: &CMatrix) -> Entries {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for s in 0..m.ncols() {
            let z = m[(r, s)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn entries_to_matrix(e: &[[f64; 2]], rows: usize, cols: usize) -> Result<CMatrix> {
    if e.len() != rows * cols {
        return Err(Error::Malformed(format!(
            "expected {} entries for a {rows}x{cols} matrix, found {}",
            rows * cols,
            e.len()
        )));
    }
    if e.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(CMatrix::from_row_iterator(rows, cols, e.iter().map(|[re, im]| c(*re, *im))))
}

pub fn entries_to_square(e: &[[f64; 2]]) -> Result<CMatrix> {
    let d = (e.len() as f64).sqrt().round() as usize;
    if d == 0 || d * d != e.len() {
        return Err(Error::Malformed(format!(
            "{} entries do not form a square matrix",
            e.len()
        )));
    }
    entries_to_matrix(e, d, d)
}

/// `#[serde(with = "square_matrix")]` for `CMatrix` fields.
pub mod square_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_entries(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let e = Entries::deserialize(d)?;
        entries_to_square(&e).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "option_square_matrix")]` for `Option<CMatrix>` fields.
pub mod option_square_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(
        m: &Option<CMatrix>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_to_entries).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<CMatrix>, D::Error> {
        match Option::<Entries>::deserialize(d)? {
            None => Ok(None),
            Some(e) => entries_to_square(&e).map(Some).map_err(D::Error::custom),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StateSpec {
    Entries(Entries),
    Bloch { bloch: [f64; 3] },
    Ket { ket: Entries },
}

impl StateSpec {
    fn resolve(self) -> Result<DensityMatrix> {
        match self {
            StateSpec::Entries(e) => DensityMatrix::new(entries_to_square(&e)?),
            StateSpec::Bloch { bloch } => Ok(bloch_to_density(&BlochVector::try_from(bloch)?)),
            StateSpec::Ket { ket } => {
                let m = entries_to_matrix(&ket, ket.len(), 1)?;
                DensityMatrix::from_ket(&CVector::from_column_slice(m.as_slice()))
            }
        }
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_entries(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        StateSpec::deserialize(d)?.resolve().map_err(D::Error::custom)
    }
}

impl Serialize for UnitaryOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_entries(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = Entries::deserialize(d)?;
        entries_to_square(&e)
            .and_then(UnitaryOperator::new)
            .map_err(D::Error::custom)
    }
}
