//! Reference classifiers to compare the CNN against: brute-force KNN and a
//! plain dense network.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::data::Examples;
use crate::error::invalid;
use crate::nn::{init_network, Architecture, Network};
use crate::{Result, NUM_CLASSES, NUM_SENSORS};

pub const DEFAULT_K: usize = 5;

/// Brute-force k-nearest-neighbours over normalized six-sensor vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    points: Vec<[f32; NUM_SENSORS]>,
    labels: Vec<usize>,
    k: usize,
}

/// Neighbour candidate ordered by (distance, training index).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    distance: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance.total_cmp(&other.distance).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn euclidean(a: &[f32; NUM_SENSORS], b: &[f32; NUM_SENSORS]) -> f64 {
    let sq: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    libm::sqrt(sq)
}

impl KnnModel {
    pub fn new(points: Vec<[f32; NUM_SENSORS]>, labels: Vec<usize>, k: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid!("knn needs at least one training point"));
        }
        if points.len() != labels.len() {
            return Err(invalid!("{} points but {} labels", points.len(), labels.len()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= NUM_CLASSES) {
            return Err(invalid!("label {bad} outside 0..{NUM_CLASSES}"));
        }
        if k == 0 || k > points.len() {
            return Err(invalid!("k = {k} must lie in 1..={}", points.len()));
        }
        Ok(Self { points, labels, k })
    }

    /// Stores normalized training examples.
    pub fn fit(examples: &Examples, k: usize) -> Result<Self> {
        let points = examples
            .inputs
            .iter()
            .map(|x| {
                <[f32; NUM_SENSORS]>::try_from(x.as_slice())
                    .map_err(|_| invalid!("knn expects {NUM_SENSORS}-value inputs"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, examples.targets.clone(), k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f32; NUM_SENSORS]] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Majority label among the `k` nearest points. Equidistant points are
    /// taken in training order; vote ties go to the smaller summed distance,
    /// then the lower class index.
    pub fn predict(&self, query: &[f32; NUM_SENSORS]) -> usize {
        // max-heap holding the k best candidates seen so far
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(self.k + 1);
        for (index, p) in self.points.iter().enumerate() {
            let c = Candidate { distance: euclidean(p, query), index };
            if heap.len() < self.k {
                heap.push(c);
            } else if c < *heap.peek().expect("k >= 1") {
                heap.pop();
                heap.push(c);
            }
        }
        let mut neighbours = heap.into_vec();
        // summing in ascending distance keeps tie-break sums reproducible
        neighbours.sort_unstable();
        vote(neighbours.iter().map(|c| (self.labels[c.index], c.distance)))
    }
}

fn vote(neighbours: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut votes = [0usize; NUM_CLASSES];
    let mut dist = [0.0f64; NUM_CLASSES];
    for (label, d) in neighbours {
        votes[label] += 1;
        dist[label] += d;
    }
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && dist[c] < dist[best]) {
            best = c;
        }
    }
    best
}

pub fn knn_predict(model: &KnnModel, query: &[f32; NUM_SENSORS]) -> usize {
    model.predict(query)
}

/// Fraction of `examples` classified correctly.
pub fn knn_accuracy(model: &KnnModel, examples: &Examples) -> Result<f64> {
    if examples.is_empty() {
        return Err(invalid!("no examples to score"));
    }
    let mut correct = 0usize;
    for (x, &t) in examples.inputs.iter().zip(&examples.targets) {
        let q = <[f32; NUM_SENSORS]>::try_from(x.as_slice()).map_err(|_| invalid!("bad query shape"))?;
        correct += usize::from(model.predict(&q) == t);
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Dense 6→128→64→4 network initialized like the CNN; trains through the
/// same training loop.
pub fn build_mlp(seed: u64) -> Result<Network> {
    init_network(&Architecture::reference_mlp(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;
    use alloc::vec;

    #[test]
    fn exact_match_with_k1() {
        let pts = vec![[0.0; 6], [1.0; 6], [-2.0, 0.5, 0.0, 0.0, 3.0, 1.0]];
        let m = KnnModel::new(pts.clone(), vec![0, 3, 2], 1).unwrap();
        for (p, l) in pts.iter().zip([0, 3, 2]) {
            assert_eq!(m.predict(p), l);
        }
    }

    #[test]
    fn single_class_with_k_equal_n() {
        let pts: Vec<[f32; 6]> = (0..7).map(|i| [i as f32; 6]).collect();
        let m = KnnModel::new(pts, vec![1; 7], 7).unwrap();
        assert_eq!(m.predict(&[100.0; 6]), 1);
    }

    #[test]
    fn vote_tie_goes_to_closer_class() {
        // k = 2: one neighbour of class 3 at distance 1, one of class 1 at distance 2
        let mut far = [0.0; 6];
        far[0] = 2.0;
        let mut near = [0.0; 6];
        near[0] = -1.0;
        let m = KnnModel::new(vec![far, near], vec![1, 3], 2).unwrap();
        assert_eq!(m.predict(&[0.0; 6]), 3);
        // equal sums fall back to the lower class index
        let m = KnnModel::new(vec![[1.0, 0., 0., 0., 0., 0.], [-1.0, 0., 0., 0., 0., 0.]], vec![2, 1], 2).unwrap();
        assert_eq!(m.predict(&[0.0; 6]), 1);
    }

    #[test]
    fn rejects_bad_k() {
        assert!(KnnModel::new(vec![[0.0; 6]; 3], vec![0; 3], 4).is_err());
        assert!(KnnModel::new(vec![[0.0; 6]; 3], vec![0; 3], 0).is_err());
        assert!(KnnModel::new(vec![], vec![], 1).is_err());
    }

    #[test]
    fn mlp_shape() {
        let net = build_mlp(3).unwrap();
        assert_eq!(net.count_params(), 6 * 128 + 128 + 128 * 64 + 64 + 64 * 4 + 4);
        assert_eq!(net.count_params(), 9412);
        assert!(!net.layers().iter().any(|l| matches!(l, Layer::Conv1d(_))));
        assert_eq!(build_mlp(3).unwrap().params(), net.params());
    }
}
