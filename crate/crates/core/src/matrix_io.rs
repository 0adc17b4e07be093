//! Plain-text layout for replaying sampled matrices.
//!
//! ```text
//! # htldp-matrix v1
//! # n=<N>
//! # seed=<seed>
//! # params=<TailParams as JSON>
//! i,j,re,im
//! 0,0,<re>,<im>
//! 0,1,...
//! ```
//!
//! Rows list the upper triangle of the unnormalized matrix in row-major
//! order. Values are written in shortest round-trip decimal form, so reading
//! a file back reproduces the matrix exactly.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heavy_tail::{TailParams, WignerSample};
use crate::linalg::Hermitian;

const MAGIC: &str = "# htldp-matrix v1";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    i: usize,
    j: usize,
    re: f64,
    im: f64,
}

/// A stored matrix with the metadata needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredMatrix {
    pub seed: u64,
    pub params: TailParams,
    pub sample: WignerSample,
}

pub fn write_matrix(out: &mut impl Write, sample: &WignerSample, seed: u64, params: &TailParams) -> Result<()> {
    let n = sample.n();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "# n={n}")?;
    writeln!(out, "# seed={seed}")?;
    writeln!(out, "# params={}", serde_json::to_string(params)?)?;
    let mut w = csv::Writer::from_writer(out);
    for i in 0..n {
        for j in i..n {
            let z = sample.raw().get(i, j);
            w.serialize(Row { i, j, re: z.re + 0.0, im: z.im + 0.0 }).map_err(|e| Error::Format(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix(input: impl BufRead) -> Result<StoredMatrix> {
    let mut lines = input.lines();
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| Error::Format("truncated header".into()))??;
        if key.is_empty() {
            return if line.trim_end() == MAGIC {
                Ok(String::new())
            } else {
                Err(Error::Format(format!("expected '{MAGIC}', found '{line}'")))
            };
        }
        let prefix = format!("# {key}=");
        line.strip_prefix(&prefix)
            .map(str::to_string)
            .ok_or_else(|| Error::Format(format!("expected header '{prefix}...', found '{line}'")))
    };
    header("")?;
    let n: usize = header("n")?.trim().parse().map_err(|e| Error::Format(format!("bad n: {e}")))?;
    let seed: u64 = header("seed")?.trim().parse().map_err(|e| Error::Format(format!("bad seed: {e}")))?;
    let params: TailParams = serde_json::from_str(&header("params")?)?;
    params.validate()?;
    if n == 0 {
        return Err(Error::Format("n must be positive".into()));
    }
    let body: String = lines.collect::<std::io::Result<Vec<_>>>()?.join("\n");
    let rows: Vec<Row> = csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Format(e.to_string()))?;
    if rows.len() != n * (n + 1) / 2 {
        return Err(Error::Format(format!("expected {} rows for n = {n}, found {}", n * (n + 1) / 2, rows.len())));
    }
    let complex = rows.iter().any(|r| r.im != 0.0) || params.complex_entries;
    let mut raw = Hermitian::zeros(n, complex);
    let expected = (0..n).flat_map(|i| (i..n).map(move |j| (i, j)));
    for (r, (i, j)) in rows.iter().zip(expected) {
        if (r.i, r.j) != (i, j) {
            return Err(Error::Format(format!("row ({}, {}) out of order, expected ({i}, {j})", r.i, r.j)));
        }
        if i == j && r.im != 0.0 {
            return Err(Error::Format(format!("diagonal entry ({i},{i}) has an imaginary part")));
        }
        raw.set_pair(i, j, Complex64::new(r.re, r.im));
    }
    Ok(StoredMatrix { seed, params, sample: WignerSample::from_raw(raw) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heavy_tail::{sample_wigner, EntryLaw, EntrySampler};
    use crate::rng::stream;

    #[test]
    fn round_trip_is_exact() {
        for complex in [false, true] {
            let params = if complex {
                let axes = vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::new(-1.0, 0.0),
                    Complex64::new(0.0, 1.0),
                    Complex64::new(0.0, -1.0),
                ];
                TailParams::new(0.8, 1.0, 1.0, 0.5, vec![Complex64::new(1.0, 0.0)], axes, true).unwrap()
            } else {
                TailParams::real(0.8, 1.0, 1.0, &[1.0, -1.0], &[1.0, -1.0]).unwrap()
            };
            let sampler = EntrySampler::new(&params, EntryLaw::Weibull).unwrap();
            let sample = sample_wigner(7, &sampler, &mut stream(11)).unwrap();
            let mut buf = Vec::new();
            write_matrix(&mut buf, &sample, 11, &params).unwrap();
            let back = read_matrix(buf.as_slice()).unwrap();
            assert_eq!(back.seed, 11);
            assert_eq!(back.params, params);
            assert_eq!(back.sample, sample);
            let mut again = Vec::new();
            write_matrix(&mut again, &back.sample, back.seed, &back.params).unwrap();
            assert_eq!(buf, again);
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_matrix("not a matrix\n".as_bytes()).is_err());
        let params = TailParams::real(1.0, 1.0, 1.0, &[1.0], &[1.0]).unwrap();
        let text = format!("{MAGIC}\n# n=2\n# seed=1\n# params={}\ni,j,re,im\n0,0,1,0\n", serde_json::to_string(&params).unwrap());
        assert!(matches!(read_matrix(text.as_bytes()), Err(Error::Format(_))));
    }
}
