use crate::error::{Error, Result};

/// The admissible interline distances `d/k`, sorted in decreasing order,
/// together with the `(d, k)` pair each one comes from.
#[derive(Debug, Clone, PartialEq)]
pub struct InterlineLabelSet {
    labels: Vec<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Label {
    pub value: f64,
    pub diameter: usize,
    pub harmonic: usize,
}

impl InterlineLabelSet {
    pub fn new(diameters: &[usize], harmonics: &[usize]) -> Result<Self> {
        let mut labels: Vec<Label> = diameters
            .iter()
            .flat_map(|&d| {
                harmonics.iter().map(move |&k| Label {
                    value: d as f64 / k as f64,
                    diameter: d,
                    harmonic: k,
                })
            })
            .collect();
        labels.sort_by(|a, b| b.value.total_cmp(&a.value));
        if labels.windows(2).any(|w| (w[0].value - w[1].value).abs() < 1e-9) {
            return Err(Error::Config(format!(
                "diameters {diameters:?} and harmonics {harmonics:?} produce repeated interline labels"
            )));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, index: usize) -> Label {
        self.labels[index]
    }

    pub fn value(&self, index: usize) -> f64 {
        self.labels[index].value
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.labels.iter().map(|l| l.value)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Index of the label equal to `value` up to the one-decimal rounding
    /// the list is usually written with.
    pub fn index_of(&self, value: f64) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| (l.value - value).abs() <= 0.05 + 1e-9)
            .ok_or(Error::UnknownLabel(value))
    }

    pub fn index_of_pair(&self, diameter: usize, harmonic: usize) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l.diameter == diameter && l.harmonic == harmonic)
    }
}

impl Default for InterlineLabelSet {
    fn default() -> Self {
        Self::new(&[64, 128, 256, 512], &[3, 4, 5]).expect("distinct defaults")
    }
}

/// Cost of assigning labels `a` and `b` (list indices) to adjacent
/// superpixels: their index distance, saturating at `sigma` from four on.
pub fn smoothing_cost_index(a: usize, b: usize, sigma: f64) -> f64 {
    let diff = a.abs_diff(b);
    if diff >= 4 {
        sigma
    } else {
        diff as f64
    }
}

/// [`smoothing_cost_index`] on label values.
pub fn smoothing_cost(labels: &InterlineLabelSet, sa: f64, sb: f64, sigma: f64) -> Result<f64> {
    Ok(smoothing_cost_index(labels.index_of(sa)?, labels.index_of(sb)?, sigma))
}
