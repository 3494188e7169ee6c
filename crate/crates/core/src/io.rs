//! Comma-separated text formats for loops, area blocks and per-node matrix fields.
//! Values are written with 17 significant digits so that `f64` data round-trips exactly.

use std::fmt::Write as _;

use crate::geometry::{Mat3, SampledLoop, Vec3};
use crate::rough::AreaBlocks;
use crate::{Error, Result, Scalar};

pub const LOOP_HEADER: &str = "xi,x,y,z";

fn matrix_header(prefix: char) -> String {
    let mut h = String::from("i");
    for r in 1..=3 {
        for c in 1..=3 {
            let _ = write!(h, ",{prefix}{r}{c}");
        }
    }
    h
}

fn num<T: Scalar>(out: &mut String, v: T) {
    let _ = write!(out, "{:.16e}", v.to_f64_lossy());
}

/// `xi,x,y,z` with `N + 1` rows.
pub fn loop_to_csv<T: Scalar>(lp: &SampledLoop<T>) -> String {
    let n = lp.intervals();
    let mut s = String::with_capacity((n + 2) * 96);
    s.push_str(LOOP_HEADER);
    s.push('\n');
    for (i, p) in lp.values().iter().enumerate() {
        num(&mut s, lp.grid().node::<T>(i));
        for k in 0..3 {
            s.push(',');
            num(&mut s, p[k]);
        }
        s.push('\n');
    }
    s
}

fn matrices_to_csv<T: Scalar>(prefix: char, rows: &[Mat3<T>]) -> String {
    let mut s = matrix_header(prefix);
    s.push('\n');
    for (i, m) in rows.iter().enumerate() {
        let _ = write!(s, "{i}");
        for r in 0..3 {
            for c in 0..3 {
                s.push(',');
                num(&mut s, m.0[r][c]);
            }
        }
        s.push('\n');
    }
    s
}

/// `i,b11..b33` with one row per elementary interval.
pub fn area_to_csv<T: Scalar>(a: &AreaBlocks<T>) -> String {
    matrices_to_csv('b', a.blocks())
}

/// `i,d11..d33` with one row per node (Gubinelli derivative).
pub fn derivative_to_csv<T: Scalar>(d: &[Mat3<T>]) -> String {
    matrices_to_csv('d', d)
}

/// `i,h11..h33` with one row per node (velocity gradient).
pub fn gradient_to_csv<T: Scalar>(h: &[Mat3<T>]) -> String {
    matrices_to_csv('h', h)
}

fn parse_field<T: Scalar>(f: &str, line: usize) -> Result<T> {
    let v: f64 = f
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("line {line}: cannot parse number {f:?}")))?;
    Ok(T::lit(v))
}

fn data_lines<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => Ok(lines.map(|(i, l)| (i + 1, l))),
        Some((_, h)) => Err(Error::InvalidInput(format!(
            "expected header {header:?}, found {:?}",
            h.trim()
        ))),
        None => Err(Error::InvalidInput("empty file".into())),
    }
}

/// Parses [`loop_to_csv`] output; the last row must equal the first.
pub fn loop_from_csv<T: Scalar>(text: &str) -> Result<SampledLoop<T>> {
    let mut pts = Vec::new();
    for (line, l) in data_lines(text, LOOP_HEADER)? {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 4 {
            return Err(Error::InvalidInput(format!("line {line}: expected 4 fields")));
        }
        pts.push(Vec3::new(
            parse_field(f[1], line)?,
            parse_field(f[2], line)?,
            parse_field(f[3], line)?,
        ));
    }
    if pts.len() < 2 {
        return Err(Error::InvalidInput("loop needs at least two rows".into()));
    }
    if pts[0] != pts[pts.len() - 1] {
        return Err(Error::InvalidInput("first and last loop rows differ".into()));
    }
    SampledLoop::new(pts)
}

fn matrices_from_csv<T: Scalar>(prefix: char, text: &str) -> Result<Vec<Mat3<T>>> {
    let header = matrix_header(prefix);
    let mut out = Vec::new();
    for (line, l) in data_lines(text, &header)? {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 10 {
            return Err(Error::InvalidInput(format!("line {line}: expected 10 fields")));
        }
        let idx: usize = f[0]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("line {line}: bad row index {:?}", f[0])))?;
        if idx != out.len() {
            return Err(Error::InvalidInput(format!(
                "line {line}: row index {idx}, expected {}",
                out.len()
            )));
        }
        let mut m = Mat3::zero();
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = parse_field(f[1 + 3 * r + c], line)?;
            }
        }
        out.push(m);
    }
    Ok(out)
}

pub fn area_from_csv<T: Scalar>(text: &str) -> Result<AreaBlocks<T>> {
    AreaBlocks::new(matrices_from_csv('b', text)?)
}

pub fn derivative_from_csv<T: Scalar>(text: &str) -> Result<Vec<Mat3<T>>> {
    matrices_from_csv('d', text)
}

pub fn gradient_from_csv<T: Scalar>(text: &str) -> Result<Vec<Mat3<T>>> {
    matrices_from_csv('h', text)
}
