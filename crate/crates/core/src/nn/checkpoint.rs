//! Flat little-endian `f64` parameter file plus a JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HybridModel, ModelSpec, NnError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub len: usize,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: ModelSpec,
    pub param_count: usize,
    pub dtype: String,
    pub blocks: Vec<Block>,
}

impl Manifest {
    pub fn for_model(model: &HybridModel) -> Self {
        let mut blocks = Vec::new();
        let dense = |prefix: &str, layers: &[super::DenseLayer], blocks: &mut Vec<Block>| {
            for (i, l) in layers.iter().enumerate() {
                blocks.push(Block {
                    name: format!("{prefix}.{i}.weight"),
                    offset: l.offset,
                    len: l.n_in * l.n_out,
                    shape: vec![l.n_out, l.n_in],
                });
                blocks.push(Block {
                    name: format!("{prefix}.{i}.bias"),
                    offset: l.offset + l.n_in * l.n_out,
                    len: l.n_out,
                    shape: vec![l.n_out],
                });
            }
        };
        dense("pre", &model.pre, &mut blocks);
        let core = model.core_param_count();
        if core > 0 {
            blocks.push(Block {
                name: "core".into(),
                offset: model.core_offset,
                len: core,
                shape: vec![core],
            });
        }
        dense("post", &model.post, &mut blocks);
        Self {
            spec: model.spec,
            param_count: model.param_count(),
            dtype: "f64-le".into(),
            blocks,
        }
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn save_checkpoint(stem: &Path, model: &HybridModel, params: &[f64]) -> Result<(), NnError> {
    model.check_params(params)?;
    let (bin, json) = paths(stem);
    let bytes: Vec<u8> = params.iter().flat_map(|p| p.to_le_bytes()).collect();
    fs::write(bin, bytes)?;
    let manifest = serde_json::to_string_pretty(&Manifest::for_model(model))
        .map_err(|e| NnError::Manifest(e.to_string()))?;
    fs::write(json, manifest)?;
    Ok(())
}

pub fn load_checkpoint(stem: &Path) -> Result<(HybridModel, Vec<f64>), NnError> {
    let (bin, json) = paths(stem);
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(json)?)
        .map_err(|e| NnError::Manifest(e.to_string()))?;
    let bytes = fs::read(bin)?;
    if bytes.len() != manifest.param_count * 8 {
        return Err(NnError::Manifest(format!(
            "{} bytes for {} parameters",
            bytes.len(),
            manifest.param_count
        )));
    }
    let params: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let model = HybridModel::new(manifest.spec)?;
    model.check_params(&params)?;
    Ok((model, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dv::{Embedding, TopologyKind};
    use crate::nn::Architecture;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn checkpoint_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let model = HybridModel::new(ModelSpec {
            n_in: 3,
            n_out: 3,
            architecture: Architecture::Dv {
                topology: TopologyKind::Alternate,
                embedding: Embedding::Angle,
                qubits: 5,
                layers: 1,
            },
        })
        .unwrap();
        let params = model.init_params(&mut ChaCha8Rng::seed_from_u64(1));
        let stem = dir.path().join("model");
        save_checkpoint(&stem, &model, &params).unwrap();
        let (m, p) = load_checkpoint(&stem).unwrap();
        assert_eq!(m, model);
        assert_eq!(p, params);
        let manifest = Manifest::for_model(&model);
        assert_eq!(manifest.blocks.iter().map(|b| b.len).sum::<usize>(), 924);
        fs::write(stem.with_extension("bin"), [0u8; 16]).unwrap();
        assert!(matches!(load_checkpoint(&stem), Err(NnError::Manifest(_))));
    }
}
