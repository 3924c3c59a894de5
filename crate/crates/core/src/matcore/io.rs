use serde::{Deserialize, Serialize};

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Real array in a matrix file: nested rows or one flat row-major list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealArray {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl RealArray {
    fn flatten(&self, n: usize, field: &str) -> Result<Vec<f64>> {
        let flat: Vec<f64> = match self {
            RealArray::Flat(v) => v.clone(),
            RealArray::Rows(rows) => {
                if rows.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "`{field}` has {} rows, expected {n}",
                        rows.len()
                    )));
                }
                if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                    return Err(Error::InvalidInput(format!(
                        "`{field}` row {i} has {} entries, expected {n}",
                        r.len()
                    )));
                }
                rows.concat()
            }
        };
        if flat.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "`{field}` has {} entries, expected {}",
                flat.len(),
                n * n
            )));
        }
        Ok(flat)
    }
}

/// On-disk matrix: `{"n": 2, "re": [[..], [..]], "im": [[..], [..]]}` with `im` optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub re: RealArray,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<RealArray>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.dim();
        let rows = |v: Vec<f64>| RealArray::Rows(v.chunks(n.max(1)).map(<[f64]>::to_vec).collect());
        let im = m.im_parts();
        Self {
            n,
            re: rows(m.re_parts()),
            im: im.iter().any(|&v| v != 0.0).then(|| rows(im)),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let re = self.re.flatten(self.n, "re")?;
        let im = self
            .im
            .as_ref()
            .map(|a| a.flatten(self.n, "im"))
            .transpose()?;
        CMatrix::from_parts(self.n, &re, im.as_deref())
    }

    pub fn parse(text: &str) -> Result<CMatrix> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| {
            Error::InvalidInput(format!(
                "matrix file, line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        file.to_matrix()
    }

    pub fn render(m: &CMatrix) -> String {
        serde_json::to_string_pretty(&Self::from_matrix(m)).expect("matrix file serializes")
    }
}
