//! Plain-text field snapshots.
//!
//! ```text
//! n L
//! kx ky kz re_x im_x re_y im_y re_z im_z
//! ...
//! ```
//! One line per nonzero mode; omitted modes are zero.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{FieldError, Grid, SpectralField};

pub fn write_snapshot<W: Write>(field: &SpectralField, mut out: W) -> Result<(), FieldError> {
    let grid = field.grid();
    writeln!(out, "{} {:.16e}", grid.n(), grid.length())?;
    for (k, v) in field.modes() {
        if v.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            continue;
        }
        write!(out, "{} {} {}", k[0], k[1], k[2])?;
        for z in v {
            write!(out, " {:.16e} {:.16e}", z.re, z.im)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(input: R) -> Result<SpectralField, FieldError> {
    let mut lines = input.lines().enumerate();
    let parse_err = |line: usize, msg: String| FieldError::Parse { line: line + 1, msg };

    let (hdr_no, header) = lines.next().ok_or_else(|| parse_err(0, "missing header".into()))?;
    let header = header?;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(hdr_no, "bad n".into()))?;
    let length: f64 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(hdr_no, "bad L".into()))?;
    let grid = Grid::new(n, length)?;
    let half = n as i64 / 2;

    let mut field = SpectralField::zeros(grid);
    for (no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 9 {
            return Err(parse_err(no, format!("expected 9 fields, found {}", tokens.len())));
        }
        let mut k = [0i64; 3];
        for i in 0..3 {
            k[i] = tokens[i]
                .parse()
                .map_err(|e| parse_err(no, format!("wavevector: {e}")))?;
            if !(-half..half).contains(&k[i]) {
                return Err(parse_err(no, format!("wavevector component {} out of range", k[i])));
            }
        }
        let mut vals = [0.0f64; 6];
        for i in 0..6 {
            vals[i] = tokens[3 + i]
                .parse()
                .map_err(|e| parse_err(no, format!("coefficient: {e}")))?;
        }
        field.set_mode(
            k,
            [
                Complex64::new(vals[0], vals[1]),
                Complex64::new(vals[2], vals[3]),
                Complex64::new(vals[4], vals[5]),
            ],
        );
    }
    Ok(field)
}
