use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::PolicyConfig;
use crate::corpus::Label;

/// Offsets of the parameter blocks inside the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    vocab: usize,
}

impl Layout {
    pub fn new(config: &PolicyConfig) -> Self {
        Self {
            vocab: config.vocab_size,
        }
    }

    pub fn cls_dim(&self) -> usize {
        self.vocab + 1
    }

    pub fn seg_dim(&self) -> usize {
        2 * self.vocab + 3
    }

    pub fn cls(&self) -> Range<usize> {
        0..self.cls_dim()
    }

    pub fn seg(&self) -> Range<usize> {
        let s = self.cls().end;
        s..s + self.seg_dim()
    }

    /// Verbosity logits for one class.
    pub fn len(&self, class: Label) -> Range<usize> {
        let s = self.seg().end + 3 * class.index();
        s..s + 3
    }

    pub fn fmt(&self) -> usize {
        self.seg().end + 6
    }

    pub fn total(&self) -> usize {
        self.fmt() + 1
    }

    /// `(name, range)` for every block, in storage order.
    pub fn blocks(&self) -> [(&'static str, Range<usize>); 5] {
        [
            ("cls", self.cls()),
            ("seg", self.seg()),
            ("len_normal", self.len(Label::Normal)),
            ("len_abnormal", self.len(Label::Abnormal)),
            ("fmt", self.fmt()..self.fmt() + 1),
        ]
    }
}

/// Policy parameters as one flat vector with a fixed block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    config: PolicyConfig,
    values: Vec<f64>,
}

impl PolicyParams {
    /// All-zero parameters: a fair coin for the class, uniform segments and
    /// verbosities, and a 50% chance of a malformed completion.
    pub fn zeros(config: PolicyConfig) -> Self {
        let n = Layout::new(&config).total();
        Self {
            config,
            values: vec![0.0; n],
        }
    }

    /// `None` if `values` has the wrong length for `config`.
    pub fn from_values(config: PolicyConfig, values: Vec<f64>) -> Option<Self> {
        (values.len() == Layout::new(&config).total()).then_some(Self { config, values })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.config)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn cls(&self) -> &[f64] {
        &self.values[self.layout().cls()]
    }

    pub fn seg(&self) -> &[f64] {
        &self.values[self.layout().seg()]
    }

    pub fn len_logits(&self, class: Label) -> &[f64] {
        &self.values[self.layout().len(class)]
    }

    pub fn fmt(&self) -> f64 {
        self.values[self.layout().fmt()]
    }

    /// `self += scale * direction`.
    pub fn add_scaled(&mut self, direction: &[f64], scale: f64) {
        assert_eq!(direction.len(), self.values.len(), "direction has wrong dimension");
        for (v, d) in self.values.iter_mut().zip(direction) {
            *v += scale * d;
        }
    }

    /// Index of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }
}

/// Frozen copy of a policy, used as the KL anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference(PolicyParams);

impl Reference {
    pub fn params(&self) -> &PolicyParams {
        &self.0
    }
}

pub fn snapshot(params: &PolicyParams) -> Reference {
    Reference(params.clone())
}
