//! Map files.
//!
//! CSV: header `t,tau,u,v`, one row per node in radial-major order.
//!
//! Binary: six little-endian `f64` header fields
//! `(n_radial, n_angular, t_min, t_max, R, j)` followed by `n_radial * n_angular`
//! pairs `(u, v)` of little-endian `f64`, radial-major.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DiscreteMap, PolarGrid};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    t: f64,
    tau: f64,
    u: f64,
    v: f64,
}

pub fn write_csv<W: Write>(m: &DiscreteMap, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let g = &m.grid;
    for i in 0..g.n_radial {
        let t = g.radius(i);
        for k in 0..g.n_angular {
            let w = m.at(i, k);
            wtr.serialize(CsvRow {
                t,
                tau: g.angle(k),
                u: w.re,
                v: w.im,
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a CSV map. The target radius and degree are not part of the format.
pub fn read_csv<R: Read>(input: R, target_r: f64, degree: i32) -> Result<DiscreteMap> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "tau", "u", "v"] {
        return Err(Error::Format(format!(
            "expected header t,tau,u,v, got {:?}",
            headers
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        let row: CsvRow = rec?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("empty map file".into()));
    }
    let first_t = rows[0].t;
    let n_angular = rows.iter().take_while(|r| r.t == first_t).count();
    if n_angular == 0 || rows.len() % n_angular != 0 {
        return Err(Error::Format(format!(
            "{} rows do not form a grid with {n_angular} angular nodes",
            rows.len()
        )));
    }
    let n_radial = rows.len() / n_angular;
    let grid = PolarGrid::new(first_t, rows[rows.len() - 1].t, n_radial, n_angular)?;
    for (idx, row) in rows.iter().enumerate() {
        let (i, k) = (idx / n_angular, idx % n_angular);
        let t = grid.radius(i);
        if (row.t - t).abs() > 1e-9 * t || (row.tau - grid.angle(k)).abs() > 1e-9 {
            return Err(Error::Format(format!(
                "row {idx}: node ({}, {}) is not on the log-polar grid",
                row.t, row.tau
            )));
        }
    }
    let values = rows.iter().map(|r| Complex64::new(r.u, r.v)).collect();
    DiscreteMap::from_values(grid, values, target_r, degree)
}

pub fn write_binary<W: Write>(m: &DiscreteMap, mut out: W) -> Result<()> {
    let g = &m.grid;
    let header = [
        g.n_radial as f64,
        g.n_angular as f64,
        g.t_min,
        g.t_max,
        m.target_r,
        m.degree as f64,
    ];
    let mut buf = Vec::with_capacity(8 * (header.len() + 2 * m.values.len()));
    for h in header {
        buf.extend_from_slice(&h.to_le_bytes());
    }
    for w in &m.values {
        buf.extend_from_slice(&w.re.to_le_bytes());
        buf.extend_from_slice(&w.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<DiscreteMap> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 || bytes.len() < 48 {
        return Err(Error::Format(format!(
            "binary map of {} bytes is truncated",
            bytes.len()
        )));
    }
    let doubles: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let as_count = |x: f64, what: &str| -> Result<usize> {
        if x.fract() == 0.0 && (0.0..1e12).contains(&x) {
            Ok(x as usize)
        } else {
            Err(Error::Format(format!("{what} = {x} is not a count")))
        }
    };
    let n_radial = as_count(doubles[0], "n_radial")?;
    let n_angular = as_count(doubles[1], "n_angular")?;
    let degree = doubles[5];
    if degree.fract() != 0.0 {
        return Err(Error::Format(format!("degree {degree} is not an integer")));
    }
    let grid = PolarGrid::new(doubles[2], doubles[3], n_radial, n_angular)?;
    let body = &doubles[6..];
    if body.len() != 2 * grid.len() {
        return Err(Error::Format(format!(
            "expected {} values, found {}",
            2 * grid.len(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    DiscreteMap::from_values(grid, values, doubles[4], degree as i32)
}
