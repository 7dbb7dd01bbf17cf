//! CSV and JSON serialization of coefficient tensors.
//!
//! CSV: header `j3,j2,j1,value`, one row per entry in storage order.
//! JSON: `{basis, interval: {t, T}, weights: {l1, l2, l3}, bounds: [p1, p2, p3],
//! values: [[[..j1..]..j2..]..j3..]}`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::basis::{BasisKind, BasisSpec, Interval};
use crate::coefficients::{CoefficientTensor, WeightExponents};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub t: f64,
    #[serde(rename = "T")]
    pub end: f64,
}

/// Serialized form of a [`CoefficientTensor`], always in `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub basis: BasisKind,
    pub interval: IntervalRecord,
    pub weights: WeightExponents,
    pub bounds: [usize; 3],
    pub values: Vec<Vec<Vec<f64>>>,
}

impl TensorRecord {
    pub fn from_tensor<T: Scalar>(tensor: &CoefficientTensor<T>) -> Self {
        let (p1, p2, p3) = tensor.bounds;
        let values = (0..=p3)
            .map(|j3| {
                (0..=p2)
                    .map(|j2| (0..=p1).map(|j1| tensor.get(j3, j2, j1).to_f64_lossy()).collect())
                    .collect()
            })
            .collect();
        Self {
            basis: tensor.basis.kind,
            interval: IntervalRecord {
                t: tensor.basis.interval.start().to_f64_lossy(),
                end: tensor.basis.interval.end().to_f64_lossy(),
            },
            weights: tensor.weights,
            bounds: [p1, p2, p3],
            values,
        }
    }

    pub fn into_tensor<T: Scalar>(self) -> Result<CoefficientTensor<T>> {
        let [p1, p2, p3] = self.bounds;
        let shape_ok = self.values.len() == p3 + 1
            && self
                .values
                .iter()
                .all(|plane| plane.len() == p2 + 1 && plane.iter().all(|row| row.len() == p1 + 1));
        if !shape_ok {
            return Err(Error::Mismatch(format!(
                "values array does not have shape [{}][{}][{}]",
                p3 + 1,
                p2 + 1,
                p1 + 1
            )));
        }
        let interval = Interval::new(T::lit(self.interval.t), T::lit(self.interval.end))?;
        let values = self.values.into_iter().flatten().flatten().map(T::lit).collect();
        CoefficientTensor::from_values(BasisSpec::new(self.basis, interval), self.weights, (p1, p2, p3), values)
    }
}

pub fn tensor_to_json<T: Scalar>(tensor: &CoefficientTensor<T>) -> Result<String> {
    Ok(serde_json::to_string(&TensorRecord::from_tensor(tensor))?)
}

pub fn write_tensor_json<T: Scalar, W: Write>(tensor: &CoefficientTensor<T>, writer: W) -> Result<()> {
    serde_json::to_writer(writer, &TensorRecord::from_tensor(tensor))?;
    Ok(())
}

pub fn read_tensor_json<T: Scalar, R: Read>(reader: R) -> Result<CoefficientTensor<T>> {
    let record: TensorRecord = serde_json::from_reader(reader)?;
    record.into_tensor()
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    j3: usize,
    j2: usize,
    j1: usize,
    value: f64,
}

pub fn write_tensor_csv<T: Scalar, W: Write>(tensor: &CoefficientTensor<T>, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for (j3, j2, j1, v) in tensor.entries() {
        out.serialize(CsvRow {
            j3,
            j2,
            j1,
            value: v.to_f64_lossy(),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the rows of a tensor CSV as `(j3, j2, j1, value)`. The CSV carries
/// no metadata, so callers rebuild a tensor with
/// [`CoefficientTensor::from_values`] if they need one.
pub fn read_values_csv<R: Read>(reader: R) -> Result<Vec<(usize, usize, usize, f64)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            Ok((row.j3, row.j2, row.j1, row.value))
        })
        .collect()
}
