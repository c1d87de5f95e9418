//! The randomised sphere cover classifier.
//!
//! Building repeatedly picks an instance that is not yet covered, grows a
//! sphere around it up to (but excluding) the nearest instance of another
//! class, and keeps the sphere when it holds at least `alpha` instances.
//! Kept spheres cover their members; members of rejected spheres are set
//! aside as uncovered. Construction ends once every instance is covered or
//! set aside.
//!
//! Classification uses the covering sphere with the nearest centre and,
//! when no sphere covers the query, the sphere whose edge is nearest.

use std::borrow::Cow;

use rand::Rng as _;

use crate::data::{Dataset, MinMax};
use crate::error::{Error, Result};
use crate::rng;

/// Euclidean distance between two vectors of equal length.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(euclidean(a, b))
}

#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A pure ball of training instances around one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Sphere {
    /// Class index into the model's class domain.
    pub label: usize,
    pub center: Vec<f64>,
    /// Distance to the nearest instance of another class, or `+inf`.
    pub radius: f64,
    /// Training indices strictly inside the sphere. Empty for models loaded
    /// from disk, where only `member_count` survives.
    pub members: Vec<usize>,
    pub member_count: usize,
    /// Training index of the instance that set the radius.
    pub border: Option<usize>,
}

impl Sphere {
    pub fn contains(&self, z: &[f64]) -> bool {
        euclidean(z, &self.center) < self.radius
    }
}

/// `distance(z, centre) - radius`; negative inside, `-inf` for an unbounded
/// sphere.
pub fn edge_distance(s: &Sphere, z: &[f64]) -> f64 {
    if s.radius.is_infinite() {
        f64::NEG_INFINITY
    } else {
        euclidean(z, &s.center) - s.radius
    }
}

/// The spheres built by one run of the covering procedure, plus the mapping
/// from raw input vectors to the space they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereCoverModel {
    pub(crate) alpha: usize,
    pub(crate) classes: Vec<String>,
    pub(crate) input_dim: usize,
    pub(crate) attribute_subset: Vec<usize>,
    pub(crate) normalization: Option<MinMax>,
    pub(crate) spheres: Vec<Sphere>,
}

impl SphereCoverModel {
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn spheres(&self) -> &[Sphere] {
        &self.spheres
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Indices of input attributes the spheres are built on.
    pub fn attribute_subset(&self) -> &[usize] {
        &self.attribute_subset
    }

    pub fn normalization(&self) -> Option<&MinMax> {
        self.normalization.as_ref()
    }

    /// Length of the vectors accepted by [`classify`](Self::classify).
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn is_usable(&self) -> bool {
        !self.spheres.is_empty()
    }

    /// Maps an input vector into sphere space: normalise, then project.
    pub fn prepare<'a>(&self, x: &'a [f64]) -> Result<Cow<'a, [f64]>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        let identity = self.attribute_subset.len() == self.input_dim
            && self.attribute_subset.iter().enumerate().all(|(i, &a)| i == a);
        Ok(match (&self.normalization, identity) {
            (None, true) => Cow::Borrowed(x),
            (None, false) => Cow::Owned(self.attribute_subset.iter().map(|&a| x[a]).collect()),
            (Some(n), _) => Cow::Owned(
                self.attribute_subset
                    .iter()
                    .map(|&a| n.apply_value(a, x[a]))
                    .collect(),
            ),
        })
    }

    /// Spheres strictly containing `z` (already in sphere space), with the
    /// centre distances.
    pub fn covering_spheres(&self, z: &[f64]) -> Vec<(usize, f64)> {
        self.spheres
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                let d = euclidean(z, &s.center);
                (d < s.radius).then_some((i, d))
            })
            .collect()
    }

    /// Index of the sphere deciding the class of `z` (sphere space).
    pub fn deciding_sphere(&self, z: &[f64]) -> Result<usize> {
        if self.spheres.is_empty() {
            return Err(Error::UnusableModel);
        }
        // Rule 1: nearest covering centre. Rule 2: nearest edge. Strict
        // comparisons keep the lowest index on ties.
        let mut covered: Option<(usize, f64)> = None;
        let mut nearest_edge: Option<(usize, f64)> = None;
        for (i, s) in self.spheres.iter().enumerate() {
            let d = euclidean(z, &s.center);
            if d < s.radius {
                if covered.is_none_or(|(_, best)| d < best) {
                    covered = Some((i, d));
                }
            } else if covered.is_none() {
                let e = d - s.radius;
                if nearest_edge.is_none_or(|(_, best)| e < best) {
                    nearest_edge = Some((i, e));
                }
            }
        }
        Ok(covered.or(nearest_edge).map(|(i, _)| i).unwrap())
    }

    /// Class index of a vector already in sphere space.
    pub fn classify_prepared(&self, z: &[f64]) -> Result<usize> {
        Ok(self.spheres[self.deciding_sphere(z)?].label)
    }

    /// Class index of a raw input vector.
    pub fn classify(&self, x: &[f64]) -> Result<usize> {
        let z = self.prepare(x)?;
        self.classify_prepared(&z)
    }

    pub fn classify_name(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.classes[self.classify(x)?])
    }

    /// Re-targets the model at a wider input space: sphere attribute `j`
    /// becomes input attribute `subset_map[attribute_subset[j]]`, and inputs
    /// are normalised with `normalization` first.
    pub(crate) fn rebase(
        mut self,
        subset_map: &[usize],
        input_dim: usize,
        normalization: Option<MinMax>,
    ) -> Self {
        self.attribute_subset = self
            .attribute_subset
            .iter()
            .map(|&a| subset_map[a])
            .collect();
        self.input_dim = input_dim;
        self.normalization = normalization;
        self
    }

    pub(crate) fn with_attribute_subset(mut self, subset: Vec<usize>, input_dim: usize) -> Self {
        self.attribute_subset = subset;
        self.input_dim = input_dim;
        self
    }
}

/// Bookkeeping for the covered set C and the uncovered set U.
struct CoverState {
    /// D \ C, the candidates for the next centre.
    pool: Vec<usize>,
    slot: Vec<usize>,
    covered: Vec<bool>,
    set_aside: Vec<bool>,
    /// |C ∪ U|
    settled: usize,
}

impl CoverState {
    fn new(n: usize) -> Self {
        CoverState {
            pool: (0..n).collect(),
            slot: (0..n).collect(),
            covered: vec![false; n],
            set_aside: vec![false; n],
            settled: 0,
        }
    }

    fn cover(&mut self, i: usize) {
        if self.covered[i] {
            return;
        }
        self.covered[i] = true;
        if !self.set_aside[i] {
            self.settled += 1;
        }
        let p = self.slot[i];
        self.pool.swap_remove(p);
        if p < self.pool.len() {
            self.slot[self.pool[p]] = p;
        }
    }

    fn set_aside(&mut self, i: usize) {
        if self.set_aside[i] {
            return;
        }
        self.set_aside[i] = true;
        if !self.covered[i] {
            self.settled += 1;
        }
    }
}

/// Builds a sphere cover on `train`, whose attributes are expected to be
/// normalised already. Deterministic in `seed`.
pub fn build_rsc(train: &Dataset, alpha: usize, seed: u64) -> Result<SphereCoverModel> {
    let n = train.n_instances();
    if n == 0 {
        return Err(Error::Empty("cannot build a sphere cover on no data".into()));
    }
    let mut rng = rng::stream(seed, "rsc", 0);

    let mut state = CoverState::new(n);
    let mut dist = vec![0.0; n];
    let mut spheres = Vec::new();

    while state.settled < n {
        let centre = state.pool[rng.gen_range(0..state.pool.len())];
        state.cover(centre);

        let x = train.row(centre);
        let label = train.label(centre);
        let mut radius = f64::INFINITY;
        let mut border = None;
        for (j, dj) in dist.iter_mut().enumerate() {
            let d = euclidean(x, train.row(j));
            *dj = d;
            if train.label(j) != label && d < radius {
                radius = d;
                border = Some(j);
            }
        }
        let members: Vec<usize> = (0..n).filter(|&j| dist[j] < radius).collect();

        if members.len() >= alpha {
            for &j in &members {
                state.cover(j);
            }
            spheres.push(Sphere {
                label,
                center: x.to_vec(),
                radius,
                member_count: members.len(),
                members,
                border,
            });
        } else {
            for &j in &members {
                state.set_aside(j);
            }
        }
    }

    Ok(SphereCoverModel {
        alpha,
        classes: train.classes().to_vec(),
        input_dim: train.n_attributes(),
        attribute_subset: (0..train.n_attributes()).collect(),
        normalization: None,
        spheres,
    })
}
