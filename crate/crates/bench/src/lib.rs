//! Fixtures shared by the kernel benchmarks.

use rmtlab::ensembles::{EnsembleSpec, RadialLaw};
use rmtlab::{CMatrix, MatrixSpace, SpaceKind};

pub const SIZES: [usize; 4] = [16, 32, 64, 128];

/// A Gaussian-coordinate sample of `kind` at size `n`, fixed by `seed`.
pub fn sample(kind: SpaceKind, n: usize, seed: u64) -> (MatrixSpace, CMatrix) {
    let space = MatrixSpace::new(kind, n).expect("valid size");
    let spec = EnsembleSpec::new(space.clone(), RadialLaw::GaussianCoords, seed).expect("valid ensemble");
    let x = spec.sample(0).expect("sample");
    (space, x)
}
