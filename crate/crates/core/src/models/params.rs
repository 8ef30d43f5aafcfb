use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffcore::{Graph, NdArray, NodeId};
use crate::error::{Error, Result};

/// Named parameter arrays, kept sorted by name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<NdArray>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: NdArray) {
        let name = name.into();
        match self.names.binary_search(&name) {
            Ok(i) => self.values[i] = value,
            Err(i) => {
                self.names.insert(i, name);
                self.values.insert(i, value);
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&NdArray> {
        self.position(name).map(|i| &self.values[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut NdArray> {
        self.position(name).map(|i| &mut self.values[i])
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[NdArray] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [NdArray] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &NdArray)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    pub fn count_scalars(&self) -> usize {
        self.values.iter().map(NdArray::len).sum()
    }

    /// Place every parameter on `g`, as variables when `trainable`.
    pub fn bind<'a>(&'a self, g: &mut Graph, trainable: bool) -> Bound<'a> {
        let ids =
            self.values.iter().map(|v| if trainable { g.variable(v.clone()) } else { g.constant(v.clone()) }).collect();
        Bound { set: self, ids }
    }
}

/// Parameters placed on a particular graph.
pub struct Bound<'a> {
    set: &'a ParamSet,
    ids: Vec<NodeId>,
}

impl Bound<'_> {
    pub fn id(&self, name: &str) -> Result<NodeId> {
        self.set
            .position(name)
            .map(|i| self.ids[i])
            .ok_or_else(|| Error::Checkpoint(format!("missing parameter '{name}'")))
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], bound: f64) -> NdArray {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
    NdArray::new(shape.to_vec(), data).expect("shape product")
}
