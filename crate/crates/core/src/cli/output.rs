//! File formats: CSV point data with 17 significant digits, JSON reports.

use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::orbits::{Orbit, OrbitClass};

/// `x` with 17 significant digits, enough to round-trip every `f64`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&sig17(*x))
}

fn de_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    s.trim().parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitRow {
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub seed_x: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub seed_y: f64,
    pub iter: u64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub x: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub y: f64,
    pub escaped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub curve_id: String,
    #[serde(rename = "M1", serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub m1: f64,
    #[serde(rename = "M2", serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub m2: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub px: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub py: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldRow {
    pub owner_id: String,
    pub side: String,
    pub branch_sign: i8,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub x: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub y: f64,
}

/// Column names of a CSV schema, for writing a header when there are no
/// rows.
pub trait Schema {
    const HEADER: &'static [&'static str];
}

impl Schema for PortraitRow {
    const HEADER: &'static [&'static str] = &["seed_x", "seed_y", "iter", "x", "y", "escaped"];
}

impl Schema for CurveRow {
    const HEADER: &'static [&'static str] = &["curve_id", "M1", "M2", "px", "py", "residual"];
}

impl Schema for ManifoldRow {
    const HEADER: &'static [&'static str] = &["owner_id", "side", "branch_sign", "x", "y"];
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

pub fn write_csv<R: Serialize + Schema, W: Write>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(R::HEADER).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Invalid(format!("write: {e}")))
}

pub fn read_csv<R: for<'de> Deserialize<'de> + Schema, I: Read>(input: I) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(Error::Invalid(format!("unexpected csv header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Orbit in the documented JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub q: usize,
    pub points: Vec<[f64; 2]>,
    /// `[re, im]` pairs.
    pub multipliers: Vec<[f64; 2]>,
    pub jacobian: f64,
    pub class: OrbitClass,
    pub symmetric: bool,
    pub residual: f64,
}

impl From<&Orbit> for OrbitRecord {
    fn from(o: &Orbit) -> Self {
        OrbitRecord {
            q: o.q,
            points: o.points.iter().map(|p| [p.x, p.y]).collect(),
            multipliers: o.multipliers.iter().map(|l| [l.re, l.im]).collect(),
            jacobian: o.jacobian_product,
            class: o.class,
            symmetric: o.symmetric,
            residual: o.residual,
        }
    }
}

impl OrbitRecord {
    pub fn points(&self) -> Vec<Point> {
        self.points.iter().map(|&[x, y]| Point::new(x, y)).collect()
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Error::Invalid(format!("json: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_csv_has_a_header() {
        let mut buf = Vec::new();
        write_csv::<CurveRow, _>(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "curve_id,M1,M2,px,py,residual\n");
    }

    proptest! {
        #[test]
        fn sig17_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(sig17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }

        #[test]
        fn curve_csv_round_trips_byte_for_byte(rows in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -1.0f64..1.0), 0..20)) {
            let rows: Vec<CurveRow> = rows
                .into_iter()
                .map(|(a, b, c)| CurveRow { curve_id: "L13".into(), m1: a, m2: b, px: c, py: -c, residual: c * c })
                .collect();
            let mut first = Vec::new();
            write_csv(&mut first, &rows).unwrap();
            let back: Vec<CurveRow> = read_csv(first.as_slice()).unwrap();
            let mut second = Vec::new();
            write_csv(&mut second, &back).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
