use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AutodiffError, Tensor};

/// On-disk form of one parameter: shape plus row-major values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedTensor {
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

/// Named trainable tensors, addressed by insertion index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a parameter and returns its id.
    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> usize {
        let name = name.into();
        assert!(!self.names.contains(&name), "duplicate parameter {name}");
        self.names.push(name);
        self.tensors.push(value);
        self.tensors.len() - 1
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, id: usize) -> &Tensor {
        &self.tensors[id]
    }

    pub fn get_mut(&mut self, id: usize) -> &mut Tensor {
        &mut self.tensors[id]
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    /// Zero tensors shaped like every parameter, for gradient accumulation.
    pub fn zeros_like(&self) -> Vec<Tensor> {
        self.tensors.iter().map(|t| Tensor::zeros(t.rows(), t.cols())).collect()
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(|t| t.data().len()).sum()
    }

    pub fn to_saved(&self) -> BTreeMap<String, SavedTensor> {
        self.names
            .iter()
            .zip(&self.tensors)
            .map(|(n, t)| {
                (n.clone(), SavedTensor { shape: [t.rows(), t.cols()], values: t.data().to_vec() })
            })
            .collect()
    }

    /// Overwrites every parameter from `saved`. Names and shapes must match
    /// exactly.
    pub fn load_saved(&mut self, saved: &BTreeMap<String, SavedTensor>) -> Result<(), AutodiffError> {
        if saved.len() != self.len() {
            return Err(AutodiffError::InvalidArgument(format!(
                "checkpoint holds {} tensors, model expects {}",
                saved.len(),
                self.len()
            )));
        }
        for (name, t) in self.names.iter().zip(self.tensors.iter_mut()) {
            let s = saved
                .get(name)
                .ok_or_else(|| AutodiffError::InvalidArgument(format!("checkpoint lacks {name}")))?;
            if s.shape != [t.rows(), t.cols()] {
                return Err(AutodiffError::ShapeMismatch {
                    op: "load_checkpoint",
                    left: t.shape(),
                    right: (s.shape[0], s.shape[1]),
                });
            }
            *t = Tensor::from_vec(s.shape[0], s.shape[1], s.values.clone())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_saved()).expect("tensors serialise")
    }

    pub fn load_json(&mut self, json: &str) -> Result<(), AutodiffError> {
        let saved: BTreeMap<String, SavedTensor> =
            serde_json::from_str(json).map_err(|e| AutodiffError::InvalidArgument(e.to_string()))?;
        self.load_saved(&saved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..40)) {
            let mut store = ParamStore::new();
            let n = values.len();
            store.add("w", Tensor::from_vec(1, n, values.clone()).unwrap());
            store.add("b", Tensor::scalar(values[0]));
            let json = store.to_json();
            let mut other = store.clone();
            other.get_mut(0).fill_zero();
            other.get_mut(1).fill_zero();
            other.load_json(&json).unwrap();
            for (a, b) in store.tensors().iter().zip(other.tensors()) {
                let bits_a: Vec<u64> = a.data().iter().map(|v| v.to_bits()).collect();
                let bits_b: Vec<u64> = b.data().iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(bits_a, bits_b);
            }
        }
    }

    #[test]
    fn load_rejects_shape_change() {
        let mut store = ParamStore::new();
        store.add("w", Tensor::zeros(2, 2));
        let mut other = ParamStore::new();
        other.add("w", Tensor::zeros(1, 4));
        assert!(store.load_json(&other.to_json()).is_err());
    }
}
