//! Checkpoint container: a JSON manifest (model name, construction
//! parameters, seed, epoch) followed by raw little-endian f64 arrays with
//! per-array name/shape headers. The round trip is bit-exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

use crate::models::{AbstractModel, ModelRegistry};

use super::{Result, TrainerError};

const MAGIC: &[u8; 4] = b"DFCK";
const VERSION: u32 = 1;
const DTYPE_F64: u8 = 0;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    model: String,
    params: serde_json::Map<String, serde_json::Value>,
    seed: u64,
    epoch: usize,
}

/// Fully decoded checkpoint contents.
pub struct CheckpointData {
    pub model: String,
    pub params: serde_json::Map<String, serde_json::Value>,
    pub seed: u64,
    pub epoch: usize,
    pub arrays: BTreeMap<String, ArrayD<f64>>,
}

fn corrupt(detail: impl Into<String>) -> TrainerError {
    TrainerError::Checkpoint(detail.into())
}

pub fn save_checkpoint(
    model: &dyn AbstractModel,
    path: &Path,
    seed: u64,
    epoch: usize,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    let manifest = serde_json::to_vec(&Manifest {
        model: model.name().to_string(),
        params: model.construction_params(),
        seed,
        epoch,
    })
    .map_err(|e| corrupt(format!("manifest encoding failed: {e}")))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(manifest.len() as u64).to_le_bytes())?;
    w.write_all(&manifest)?;

    let entries: Vec<_> = model.store().iter().collect();
    w.write_all(&(entries.len() as u64).to_le_bytes())?;
    for (name, value) in entries {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&[DTYPE_F64])?;
        w.write_all(&(value.ndim() as u32).to_le_bytes())?;
        for &d in value.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for &v in value.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact(r: &mut impl Read, n: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)
        .map_err(|_| corrupt("unexpected end of checkpoint file"))?;
    Ok(buf)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(read_exact(r, 4)?.try_into().unwrap()))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_exact(r, 8)?.try_into().unwrap()))
}

pub fn read_checkpoint(path: &Path) -> Result<CheckpointData> {
    let mut r = BufReader::new(
        File::open(path).map_err(|e| corrupt(format!("cannot open {}: {e}", path.display())))?,
    );
    if read_exact(&mut r, 4)? != MAGIC {
        return Err(corrupt("not a checkpoint file (bad magic)"));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(corrupt(format!("unsupported checkpoint version {version}")));
    }
    let manifest_len = read_u64(&mut r)? as usize;
    let manifest: Manifest = serde_json::from_slice(&read_exact(&mut r, manifest_len)?)
        .map_err(|e| corrupt(format!("bad manifest: {e}")))?;

    let count = read_u64(&mut r)? as usize;
    let mut arrays = BTreeMap::new();
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        let name = String::from_utf8(read_exact(&mut r, name_len)?)
            .map_err(|_| corrupt("non-UTF-8 array name"))?;
        let dtype = read_exact(&mut r, 1)?[0];
        if dtype != DTYPE_F64 {
            return Err(corrupt(format!("unsupported dtype tag {dtype}")));
        }
        let ndim = read_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u64(&mut r)? as usize);
        }
        let len: usize = shape.iter().product();
        let bytes = read_exact(&mut r, len * 8)?;
        let data: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let array = ArrayD::from_shape_vec(IxDyn(&shape), data)
            .map_err(|e| corrupt(format!("array {name:?}: {e}")))?;
        arrays.insert(name, array);
    }
    Ok(CheckpointData {
        model: manifest.model,
        params: manifest.params,
        seed: manifest.seed,
        epoch: manifest.epoch,
        arrays,
    })
}

/// Rebuild the checkpointed model from scratch through the registry and
/// restore its parameters.
pub fn load_checkpoint(path: &Path, registry: &ModelRegistry) -> Result<Box<dyn AbstractModel>> {
    let data = read_checkpoint(path)?;
    let mut model = registry.resolve(&data.model, &data.params, data.seed)?;
    model.store_mut().load_named(&data.arrays)?;
    Ok(model)
}

/// Restore parameters into an existing model of the same architecture.
pub fn restore_into(model: &mut dyn AbstractModel, path: &Path) -> Result<usize> {
    let data = read_checkpoint(path)?;
    if data.model != model.name() {
        return Err(corrupt(format!(
            "checkpoint is for model {:?}, not {:?}",
            data.model,
            model.name()
        )));
    }
    model.store_mut().load_named(&data.arrays)?;
    Ok(data.epoch)
}
