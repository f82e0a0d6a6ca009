use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::nodes::weights_from_matrix;
use super::{lagrange_monomial_matrix, StageNodes};
use crate::{Error, Result};

/// `E_k = e^{-Δτ μ_k}` and `W_{i,k} = b_i(-Δτ μ_k)` for one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    step: f64,
    nodes: StageNodes,
    decay: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

impl WeightTable {
    pub fn build(nodes: &StageNodes, step: f64, eigenvalues: &[f64]) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::NonPositiveStep(step));
        }
        let a = lagrange_monomial_matrix(nodes);
        let s = nodes.len();
        let mut decay = Vec::with_capacity(eigenvalues.len());
        let mut weights = vec![Vec::with_capacity(eigenvalues.len()); s];
        for &mu in eigenvalues {
            let z = -step * mu;
            decay.push(z.exp());
            for (row, w) in weights.iter_mut().zip(weights_from_matrix(&a, z)) {
                row.push(w);
            }
        }
        Ok(Self {
            step,
            nodes: nodes.clone(),
            decay,
            weights,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> &StageNodes {
        &self.nodes
    }

    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    /// Weights of stage `i` across all eigenvalues.
    pub fn stage_weights(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }

    pub fn stages(&self) -> usize {
        self.weights.len()
    }

    pub fn len(&self) -> usize {
        self.decay.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decay.is_empty()
    }
}

type CacheKey = (u64, Vec<u64>);

/// Tables for one eigenvalue array keyed by the exact bits of the step and
/// the nodes.
#[derive(Debug)]
pub struct WeightTableCache {
    eigenvalues: Arc<[f64]>,
    tables: Mutex<HashMap<CacheKey, Arc<WeightTable>>>,
}

impl WeightTableCache {
    pub fn new(eigenvalues: &[f64]) -> Self {
        Self {
            eigenvalues: eigenvalues.into(),
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, nodes: &StageNodes, step: f64) -> Result<Arc<WeightTable>> {
        let key = (
            step.to_bits(),
            nodes.as_slice().iter().map(|c| c.to_bits()).collect(),
        );
        if let Some(t) = self.tables.lock().expect("cache lock").get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(WeightTable::build(nodes, step, &self.eigenvalues)?);
        self.tables
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| table.clone());
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.tables.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
