#![allow(dead_code)]

use std::sync::Arc;

use boundary_reps::multrep::{unit_forms, MultVector, SystemWithForms};
use boundary_reps::system::{normalize, MatrixSystem};
use boundary_reps::words::{Alphabet, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random system with dimensions in `1..=max_dim`, normalized, unit forms.
pub fn random_system(rank: usize, max_dim: usize, rng: &mut ChaCha8Rng) -> Arc<SystemWithForms> {
    let al = Alphabet::standard(rank);
    let dims: Vec<usize> = al.letters().map(|_| rng.random_range(1..=max_dim)).collect();
    let raw = MatrixSystem::random(al, dims, rng);
    let n = normalize(&raw).expect("random systems normalize");
    SystemWithForms::new(n.system, unit_forms(&n.forms)).expect("compatible").shared()
}

pub fn spherical() -> Arc<SystemWithForms> {
    let s = MatrixSystem::spherical(2, 1.0 / 3f64.sqrt());
    let b = boundary_reps::system::FormTuple::scalar(s.dims(), 1.0);
    SystemWithForms::new(s, b).unwrap().shared()
}

pub fn random_word(al: &Alphabet, len: usize, rng: &mut ChaCha8Rng) -> Word {
    let mut letters = Vec::with_capacity(len);
    while letters.len() < len {
        let l = rng.random_range(0..al.len());
        if letters.last().map(|&p| al.inverse(p)) != Some(l) {
            letters.push(l);
        }
    }
    Word::from_letters_unchecked(letters)
}

pub fn random_vector(sys: &Arc<SystemWithForms>, rng: &mut ChaCha8Rng) -> MultVector {
    let depth = rng.random_range(1..=2);
    MultVector::random(sys.clone(), depth, rng).unwrap()
}
