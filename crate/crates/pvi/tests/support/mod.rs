//! Shared generators for the oracle and property suites.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pvi::{ConvectionOperator, ConvexFunctional, DiscreteGelfand};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.gen_range(-scale..scale))
}

/// A randomly generated stationary instance on which coordinate relaxation
/// provably converges: diagonal mass, coercive (possibly nonsymmetric)
/// stiffness, dense random transport stencil, and a shift `λ` drawn at or
/// above the strict-diagonal-dominance threshold of `L = λM + S + N(w)`.
pub struct RandomInstance {
    pub gelfand: DiscreteGelfand,
    pub phi: ConvexFunctional,
    pub op: ConvectionOperator,
    pub lambda: f64,
    pub w: DVector<f64>,
    pub rhs: DVector<f64>,
}

pub enum InstanceKind {
    Zero,
    Obstacle,
    Friction,
}

pub fn random_instance<R: Rng>(rng: &mut R, dim: usize, kind: InstanceKind) -> RandomInstance {
    let mass_diag = DVector::from_fn(dim, |_, _| rng.gen_range(0.2..1.5));
    let mass = DMatrix::from_diagonal(&mass_diag);

    let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let sym = (&a * a.transpose()) / dim as f64
        + DMatrix::from_diagonal(&DVector::from_element(dim, rng.gen_range(0.5..1.5)));
    let k = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-0.3..0.3));
    let stiffness = &sym + (&k - k.transpose()) * 0.5;
    let gelfand = DiscreteGelfand::new(mass.clone(), stiffness.clone()).unwrap();

    let stencil = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-0.5..0.5));
    let op = ConvectionOperator::pointwise(stencil);
    let w = random_vector(rng, dim, 1.0);

    // λ large enough for strict diagonal dominance of L plus jitter.
    let n_mat = op.matrix(&w).unwrap();
    let l0 = &stiffness + n_mat;
    let mut lambda: f64 = 0.0;
    for i in 0..dim {
        let off: f64 = (0..dim)
            .filter(|&j| j != i)
            .map(|j| l0[(i, j)].abs())
            .sum();
        lambda = lambda.max((off - l0[(i, i)] + 0.5) / mass_diag[i]);
    }
    lambda = lambda.max(0.0) + rng.gen_range(0.0..1.0);

    let phi = match kind {
        InstanceKind::Zero => ConvexFunctional::zero(dim),
        InstanceKind::Obstacle => {
            let lower = DVector::from_fn(dim, |_, _| {
                if rng.gen_bool(0.2) {
                    f64::NEG_INFINITY
                } else {
                    rng.gen_range(-0.5..0.5)
                }
            });
            ConvexFunctional::obstacle(lower)
        }
        InstanceKind::Friction => {
            let weights = DVector::from_fn(dim, |_, _| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.1..1.2)
                }
            });
            ConvexFunctional::friction(weights).unwrap()
        }
    };
    let rhs = random_vector(rng, dim, 2.0);
    RandomInstance {
        gelfand,
        phi,
        op,
        lambda,
        w,
        rhs,
    }
}
