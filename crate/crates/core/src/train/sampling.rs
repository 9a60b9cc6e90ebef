use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrainError;
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Training,
    Validation,
}

impl Role {
    fn stream(self) -> u64 {
        match self {
            Role::Training => 1,
            Role::Validation => 2,
        }
    }
}

/// Collocation points in scaled coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationBatch {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub role: Role,
}

impl CollocationBatch {
    pub fn from_points(dim: usize, coords: Vec<f64>, role: Role) -> Result<Self, TrainError> {
        if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
            return Err(TrainError::Config("batch must be nonempty with whole points".into()));
        }
        Ok(CollocationBatch { dim, coords, role })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Uniform i.i.d. points in `[0,1]^dim`. Training and validation use separate
/// ChaCha streams of the same seed, so they never share draws.
pub fn sample_points<P: Problem>(problem: &P, n: usize, seed: u64, role: Role) -> Result<CollocationBatch, TrainError> {
    if n == 0 {
        return Err(TrainError::Config("at least one collocation point is required".into()));
    }
    let dim = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role.stream());
    let mut coords = vec![0.0; n * dim];
    for (i, p) in coords.chunks_exact_mut(dim).enumerate() {
        for c in p.iter_mut() {
            *c = rng.gen::<f64>();
        }
        problem.prepare_point(i, p);
    }
    Ok(CollocationBatch { dim, coords, role })
}
