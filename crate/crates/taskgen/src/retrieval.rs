//! Retrieval-style task generators over a frozen embedding table.
//!
//! Three families share one instance record:
//!   - token retrieval: inputs are rows 0–4 of E, labels are the rows shifted
//!     by a per-sequence offset s;
//!   - predict-then-retrieve: Gaussian inputs, label row
//!     floor(0.4·⟨w, φ(x)⟩) + s with φ the identity or the element-wise
//!     square;
//!   - word classification: inputs drawn from all of E, class by argmax of a
//!     random linear map on the first d' coordinates, label row class+offset.
//!
//! In every family `token_indices[i] + shift` is the label row of pair i.
//! Index overflow is an error, never a clamp: clamping would corrupt the
//! label distribution the experiments measure.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use mixprior_core::substream;

use crate::embedding::{EmbeddingId, EmbeddingTable};
use crate::error::{Result, TaskGenError};

pub const STREAM_RETRIEVAL: u64 = 0x74;
pub const SCHEMA: &str = "icl-lab/retrieval-instance/v1";

/// Token-retrieval inputs come from this many leading rows of E.
pub const INPUT_ROWS: usize = 5;

/// Feature map inside the predict-then-retrieve index formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    Linear,
    Quadratic,
}

impl PhiKind {
    pub fn apply(self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            PhiKind::Linear => x.clone(),
            PhiKind::Quadratic => x.map(|v| v * v),
        }
    }
}

/// The generator call that produced an instance; with the embedding id this
/// regenerates it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorMeta {
    TokenRetrieval {
        s_lo: i64,
        s_hi: i64,
        t: usize,
        seed: u64,
    },
    PredictRetrieve {
        s_lo: i64,
        s_hi: i64,
        t: usize,
        function_kind: PhiKind,
        seed: u64,
    },
    WordClassification {
        d_prime: usize,
        classes: usize,
        offset: i64,
        t: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalInstance {
    pub schema: String,
    pub embedding_id: EmbeddingId,
    /// Pre-shift index per pair; label row = token_indices[i] + shift.
    pub token_indices: Vec<i64>,
    pub shift: i64,
    #[serde(with = "serde_pairs")]
    pub pairs: Vec<(DVector<f64>, DVector<f64>)>,
    #[serde(with = "crate::serde_vec")]
    pub query: DVector<f64>,
    /// Label row index of the query.
    pub target_index: usize,
    pub generator: GeneratorMeta,
    /// Latent regression weight (predict-then-retrieve only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub latent_w: Option<Vec<f64>>,
}

mod serde_pairs {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        pairs: &[(DVector<f64>, DVector<f64>)],
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(pairs.len()))?;
        for (x, y) in pairs {
            let x: Vec<f64> = x.iter().copied().collect();
            let y: Vec<f64> = y.iter().copied().collect();
            seq.serialize_element(&(x, y))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Vec<(DVector<f64>, DVector<f64>)>, D::Error> {
        let raw = Vec::<(Vec<f64>, Vec<f64>)>::deserialize(de)?;
        Ok(raw
            .into_iter()
            .map(|(x, y)| (DVector::from_vec(x), DVector::from_vec(y)))
            .collect())
    }
}

impl RetrievalInstance {
    /// Check the defining invariant against a table.
    pub fn verify_labels(&self, table: &EmbeddingTable) -> Result<()> {
        for (base, (_, y)) in self.token_indices.iter().zip(&self.pairs) {
            let row = checked_row(table, base + self.shift, "label")?;
            if row != y {
                return Err(TaskGenError::BadParams {
                    reason: "pair label does not match its embedding row".into(),
                });
            }
        }
        Ok(())
    }
}

fn checked_row<'t>(table: &'t EmbeddingTable, index: i64, what: &'static str) -> Result<&'t DVector<f64>> {
    if index < 0 || index as usize >= table.n() {
        return Err(TaskGenError::IndexOverflow {
            what,
            index,
            n: table.n(),
        });
    }
    table.row(index as usize)
}

fn sample_shift<R: Rng>(rng: &mut R, s_range: (i64, i64)) -> Result<i64> {
    let (lo, hi) = s_range;
    if lo > hi {
        return Err(TaskGenError::Precondition {
            reason: format!("empty shift range [{lo}, {hi}]"),
        });
    }
    Ok(rng.gen_range(lo..=hi))
}

/// Token retrieval: inputs from rows 0–4 of E, one shared shift s per
/// sequence, labels the shifted rows.
pub fn make_retrieval_instance(
    table: &EmbeddingTable,
    s_range: (i64, i64),
    t: usize,
    seed: u64,
) -> Result<RetrievalInstance> {
    let n = table.n();
    if s_range.0 < 0 {
        return Err(TaskGenError::Precondition {
            reason: format!("shift range must be nonnegative, got {}", s_range.0),
        });
    }
    if s_range.1 + INPUT_ROWS as i64 >= n as i64 {
        return Err(TaskGenError::Precondition {
            reason: format!(
                "max shift {} + {INPUT_ROWS} input rows must stay below N = {n}",
                s_range.1
            ),
        });
    }
    let mut rng = substream(seed, STREAM_RETRIEVAL, 0);
    let s = sample_shift(&mut rng, s_range)?;

    let mut token_indices = Vec::with_capacity(t);
    let mut pairs = Vec::with_capacity(t);
    for _ in 0..t {
        let base = rng.gen_range(0..INPUT_ROWS) as i64;
        let x = checked_row(table, base, "input")?.clone();
        let y = checked_row(table, base + s, "label")?.clone();
        token_indices.push(base);
        pairs.push((x, y));
    }
    let query_base = rng.gen_range(0..INPUT_ROWS) as i64;
    let query = checked_row(table, query_base, "query")?.clone();
    let target = query_base + s;
    checked_row(table, target, "target")?;

    Ok(RetrievalInstance {
        schema: SCHEMA.into(),
        embedding_id: table.id(),
        token_indices,
        shift: s,
        pairs,
        query,
        target_index: target as usize,
        generator: GeneratorMeta::TokenRetrieval {
            s_lo: s_range.0,
            s_hi: s_range.1,
            t,
            seed,
        },
        latent_w: None,
    })
}

/// 8-sigma margin of the pre-shift index floor(0.4·⟨w, φ(x)⟩) for w, x
/// standard normal.
pub fn predict_retrieve_margin(d: usize, phi: PhiKind) -> i64 {
    let var = match phi {
        PhiKind::Linear => d as f64,
        // Var(⟨w, x²⟩) = Σ E[w_i²] E[x_i⁴] = 3d.
        PhiKind::Quadratic => 3.0 * d as f64,
    };
    (8.0 * 0.4 * var.sqrt()).ceil() as i64 + 1
}

/// Predict-then-retrieve: Gaussian inputs, label row
/// floor(0.4·⟨w, φ(x)⟩) + s.
pub fn make_predict_retrieve_instance(
    table: &EmbeddingTable,
    s_range: (i64, i64),
    t: usize,
    function_kind: PhiKind,
    seed: u64,
) -> Result<RetrievalInstance> {
    let n = table.n();
    let d = table.dim();
    let margin = predict_retrieve_margin(d, function_kind);
    if s_range.0 - margin < 0 || s_range.1 + margin >= n as i64 {
        return Err(TaskGenError::Precondition {
            reason: format!(
                "shift range [{}, {}] with 8-sigma margin {margin} must fit in [0, {n})",
                s_range.0, s_range.1
            ),
        });
    }
    let mut rng = substream(seed, STREAM_RETRIEVAL, 1);
    let s = sample_shift(&mut rng, s_range)?;
    let w = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));

    let base_of = |x: &DVector<f64>| -> i64 {
        (0.4 * w.dot(&function_kind.apply(x))).floor() as i64
    };

    let mut token_indices = Vec::with_capacity(t);
    let mut pairs = Vec::with_capacity(t);
    for _ in 0..t {
        let x = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let base = base_of(&x);
        let y = checked_row(table, base + s, "label")?.clone();
        token_indices.push(base);
        pairs.push((x, y));
    }
    let query = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let target = base_of(&query) + s;
    checked_row(table, target, "target")?;

    Ok(RetrievalInstance {
        schema: SCHEMA.into(),
        embedding_id: table.id(),
        token_indices,
        shift: s,
        pairs,
        query,
        target_index: target as usize,
        generator: GeneratorMeta::PredictRetrieve {
            s_lo: s_range.0,
            s_hi: s_range.1,
            t,
            function_kind,
            seed,
        },
        latent_w: Some(w.iter().copied().collect()),
    })
}

/// Word classification: inputs uniform over all rows of E, class
/// argmax_j (x[0..d']ᵀ W)_j (ties to the lowest class), label row
/// class + offset.
pub fn make_word_classification_instance(
    table: &EmbeddingTable,
    d_prime: usize,
    classes: usize,
    offset: i64,
    t: usize,
    seed: u64,
) -> Result<RetrievalInstance> {
    let n = table.n();
    let d = table.dim();
    if classes == 0 {
        return Err(TaskGenError::Precondition {
            reason: "need at least one class".into(),
        });
    }
    if d_prime == 0 || d_prime > d {
        return Err(TaskGenError::Precondition {
            reason: format!("d' = {d_prime} must lie in [1, d = {d}]"),
        });
    }
    if offset < 0 || offset + classes as i64 > n as i64 {
        return Err(TaskGenError::Precondition {
            reason: format!("offset {offset} + {classes} classes must fit in [0, {n}]"),
        });
    }
    let mut rng = substream(seed, STREAM_RETRIEVAL, 2);
    // W is d'×classes; scores are x[0..d']ᵀ W.
    let w_map: Vec<DVector<f64>> = (0..classes)
        .map(|_| DVector::from_fn(d_prime, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();

    let class_of = |x: &DVector<f64>| -> usize {
        let head = x.rows(0, d_prime);
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for (j, col) in w_map.iter().enumerate() {
            let score = col.dot(&head);
            // Strict inequality: argmax ties break toward the lowest class.
            if score > best_score {
                best_score = score;
                best = j;
            }
        }
        best
    };

    let mut token_indices = Vec::with_capacity(t);
    let mut pairs = Vec::with_capacity(t);
    for _ in 0..t {
        let x = checked_row(table, rng.gen_range(0..n) as i64, "input")?.clone();
        let class = class_of(&x) as i64;
        let y = checked_row(table, class + offset, "label")?.clone();
        token_indices.push(class);
        pairs.push((x, y));
    }
    let query = checked_row(table, rng.gen_range(0..n) as i64, "query")?.clone();
    let target = class_of(&query) as i64 + offset;
    checked_row(table, target, "target")?;

    Ok(RetrievalInstance {
        schema: SCHEMA.into(),
        embedding_id: table.id(),
        token_indices,
        shift: offset,
        pairs,
        query,
        target_index: target as usize,
        generator: GeneratorMeta::WordClassification {
            d_prime,
            classes,
            offset,
            t,
            seed,
        },
        latent_w: None,
    })
}

/// One instance per line, JSON, LF endings.
pub fn write_jsonl(path: &Path, instances: &[RetrievalInstance]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for inst in instances {
        serde_json::to_writer(&mut f, inst)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RetrievalInstance>> {
    let f = fs::File::open(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: RetrievalInstance = serde_json::from_str(&line)?;
        if inst.schema != SCHEMA {
            return Err(TaskGenError::SchemaMismatch {
                found: inst.schema,
                expected: SCHEMA.into(),
            });
        }
        out.push(inst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, d: usize) -> EmbeddingTable {
        EmbeddingTable::generate(EmbeddingId { n, d, seed: 1 })
    }

    #[test]
    fn retrieval_labels_live_in_the_shifted_band() {
        let table = table(1000, 6);
        for seed in 0..30 {
            let inst = make_retrieval_instance(&table, (50, 150), 12, seed).unwrap();
            for (&base, _) in inst.token_indices.iter().zip(&inst.pairs) {
                let label_row = base + inst.shift;
                assert!((50..155).contains(&label_row), "label row {label_row}");
            }
            assert!((50..155).contains(&(inst.target_index as i64)));
            inst.verify_labels(&table).unwrap();
        }
    }

    #[test]
    fn retrieval_rejects_overflowing_shift_range() {
        let table = table(100, 4);
        let err = make_retrieval_instance(&table, (50, 95), 4, 0);
        assert!(matches!(err, Err(TaskGenError::Precondition { .. })));
    }

    #[test]
    fn equal_input_rows_get_equal_labels() {
        let table = table(500, 4);
        let inst = make_retrieval_instance(&table, (20, 60), 40, 3).unwrap();
        for i in 0..inst.pairs.len() {
            for j in 0..inst.pairs.len() {
                if inst.token_indices[i] == inst.token_indices[j] {
                    assert_eq!(inst.pairs[i].1, inst.pairs[j].1);
                }
            }
        }
    }

    #[test]
    fn predict_retrieve_needs_margin_room() {
        let table = table(50, 20);
        // margin for d=20 linear is ceil(3.2·√20)+1 = 16; range [10,40] in N=50 fails.
        let err = make_predict_retrieve_instance(&table, (10, 40), 5, PhiKind::Linear, 0);
        assert!(matches!(err, Err(TaskGenError::Precondition { .. })));
    }

    #[test]
    fn predict_retrieve_instance_is_consistent() {
        let table = table(1000, 20);
        let inst =
            make_predict_retrieve_instance(&table, (100, 200), 50, PhiKind::Linear, 7).unwrap();
        inst.verify_labels(&table).unwrap();
        let w = DVector::from_vec(inst.latent_w.clone().unwrap());
        for (base, (x, _)) in inst.token_indices.iter().zip(&inst.pairs) {
            assert_eq!(*base, (0.4 * w.dot(x)).floor() as i64);
        }
    }

    #[test]
    fn word_classification_single_class_is_constant() {
        let table = table(200, 8);
        let inst = make_word_classification_instance(&table, 4, 1, 100, 20, 5).unwrap();
        for (_, y) in &inst.pairs {
            assert_eq!(y, table.row(100).unwrap());
        }
        assert_eq!(inst.target_index, 100);
    }

    #[test]
    fn word_classification_default_scale_works() {
        // The scaled-down word-classification setting: N = 10000, d = 20.
        let table = EmbeddingTable::generate(EmbeddingId {
            n: 10_000,
            d: 20,
            seed: 2,
        });
        let inst = make_word_classification_instance(&table, 10, 10, 5000, 30, 9).unwrap();
        inst.verify_labels(&table).unwrap();
        assert!(inst
            .token_indices
            .iter()
            .all(|&c| (0..10).contains(&c)));
    }

    #[test]
    fn generators_are_deterministic() {
        let table = table(800, 10);
        let a = make_predict_retrieve_instance(&table, (60, 120), 25, PhiKind::Quadratic, 77);
        let b = make_predict_retrieve_instance(&table, (60, 120), 25, PhiKind::Quadratic, 77);
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let table = table(300, 5);
        let instances: Vec<RetrievalInstance> = (0..3)
            .map(|s| make_retrieval_instance(&table, (10, 50), 8, s).unwrap())
            .collect();
        let path = dir.path().join("instances.jsonl");
        write_jsonl(&path, &instances).unwrap();
        let back = read_jsonl(&path).unwrap();
        assert_eq!(back, instances);
    }
}
