//! Serde helpers: `DVector<f64>` as a plain JSON array of numbers.

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serializer};

pub mod list {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(vs: &[DVector<f64>], ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(vs.len()))?;
        for v in vs {
            seq.serialize_element(&v.iter().copied().collect::<Vec<f64>>())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<DVector<f64>>, D::Error> {
        let data = Vec::<Vec<f64>>::deserialize(de)?;
        Ok(data.into_iter().map(DVector::from_vec).collect())
    }
}
