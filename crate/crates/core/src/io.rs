//! CSV formats: sampled signals (`t,re,im`), point sets (`x,y`) and field
//! dumps (`x,y,re,im`).

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, PhasePoint};
use crate::pointsets::PointSet;
use crate::signals::Signal;
use crate::transforms::PhaseField;

/// Relative tolerance on the spacing of signal sample times.
pub const SPACING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    t: f64,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRow {
    x: f64,
    y: f64,
    re: f64,
    im: f64,
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

fn check_headers<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// Reads a uniformly sampled signal. Times must be increasing with constant
/// spacing.
pub fn read_signal<R: Read>(r: R) -> Result<Signal> {
    let mut rdr = reader(r);
    check_headers(&mut rdr, &["t", "re", "im"])?;
    let rows: Vec<SampleRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 2 {
        return Err(Error::Parse(format!(
            "a sampled signal needs at least 2 rows, found {}",
            rows.len()
        )));
    }
    let t0 = rows[0].t;
    let step = (rows[rows.len() - 1].t - t0) / (rows.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::Parse("sample times must increase".into()));
    }
    for (k, row) in rows.iter().enumerate() {
        let expected = t0 + k as f64 * step;
        if (row.t - expected).abs() > SPACING_TOLERANCE * step.max(expected.abs()) {
            return Err(Error::Parse(format!(
                "row {}: t = {} breaks the uniform spacing {step}",
                k + 2,
                row.t
            )));
        }
    }
    let values = rows.iter().map(|r| Complex64::new(r.re, r.im)).collect();
    Signal::from_samples(t0, step, values)
}

/// Writes `n` samples of `f` starting at `t0` with spacing `step`.
pub fn write_signal<W: Write>(w: W, f: &Signal, t0: f64, step: f64, n: usize) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for k in 0..n {
        let t = t0 + k as f64 * step;
        let v = f.eval(t);
        wtr.serialize(SampleRow { t, re: v.re, im: v.im })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a point set; the geometry comes from the caller.
pub fn read_point_set<R: Read>(r: R, geometry: Geometry) -> Result<PointSet> {
    let mut rdr = reader(r);
    check_headers(&mut rdr, &["x", "y"])?;
    let points = rdr
        .deserialize::<PointRow>()
        .map(|row| row.map(|p| PhasePoint::new(p.x, p.y)).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    PointSet::new(geometry, points)
}

pub fn write_point_set<W: Write>(w: W, set: &PointSet) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if set.is_empty() {
        wtr.write_record(["x", "y"])?;
    }
    for z in set.points() {
        wtr.serialize(PointRow { x: z.x, y: z.y })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Sidecar describing a field dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub label: String,
    pub geometry: Geometry,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hv: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub max_abs: f64,
    pub l2_norm: f64,
}

impl FieldHeader {
    pub fn of(field: &PhaseField, label: impl Into<String>) -> FieldHeader {
        let g = field.grid();
        FieldHeader {
            label: label.into(),
            geometry: g.geometry(),
            nx: g.nx(),
            ny: g.ny(),
            hx: g.hx(),
            hv: g.hv(),
            x_range: g.x_range(),
            y_range: g.y_range(),
            max_abs: field.max_abs(),
            l2_norm: field.l2_norm(),
        }
    }
}

/// Writes the field as `x,y,re,im` rows in grid order.
pub fn write_field<W: Write>(w: W, field: &PhaseField) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let g = field.grid();
    for (k, v) in field.values().iter().enumerate() {
        let z = g.point_at(k);
        wtr.serialize(FieldRow {
            x: z.x,
            y: z.y,
            re: v.re,
            im: v.im,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads back the values of a field dump as `(z, value)` pairs.
pub fn read_field<R: Read>(r: R) -> Result<Vec<(PhasePoint, Complex64)>> {
    let mut rdr = reader(r);
    check_headers(&mut rdr, &["x", "y", "re", "im"])?;
    rdr.deserialize::<FieldRow>()
        .map(|row| {
            let row = row?;
            Ok((PhasePoint::new(row.x, row.y), Complex64::new(row.re, row.im)))
        })
        .collect()
}
