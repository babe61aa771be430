use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Unscaled DCT-II: `out[k] = sum_n x[n] cos(pi k (n + 0.5) / N)`.
pub fn dct_ii(input: &[f64], num_out: usize) -> Result<Vec<f64>> {
    Ok(DctTable::new(input.len(), 0, num_out)?.apply(input))
}

/// Cosine table for a fixed input length and a contiguous run of outputs.
#[derive(Debug, Clone)]
pub struct DctTable {
    len: usize,
    first: usize,
    rows: Vec<Vec<f64>>,
}

impl DctTable {
    /// Table producing outputs `first..first + count` for inputs of `len`.
    pub fn new(len: usize, first: usize, count: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Domain("DCT of an empty vector".into()));
        }
        if first + count > len {
            return Err(Error::Domain(format!(
                "requested DCT outputs {first}..{} from {len} inputs",
                first + count
            )));
        }
        let rows = (first..first + count)
            .map(|k| {
                (0..len)
                    .map(|n| (PI * k as f64 * (n as f64 + 0.5) / len as f64).cos())
                    .collect()
            })
            .collect();
        Ok(DctTable { len, first, rows })
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows.len());
        self.apply_into(input, &mut out);
        out
    }

    pub fn apply_into(&self, input: &[f64], out: &mut Vec<f64>) {
        assert_eq!(input.len(), self.len);
        out.clear();
        out.extend(
            self.rows
                .iter()
                .map(|row| row.iter().zip(input).map(|(c, x)| c * x).sum::<f64>()),
        );
    }
}
