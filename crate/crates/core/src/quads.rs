//! Probe quads `(ω_a, ω_b, ω_c, ω_d)` for four-frequency correlators.
//!
//! Full `M⁴` tensors are never built; three structured families cover the
//! regions where the correlator is non-negligible:
//!
//! * `Degenerate`: all four frequencies equal.
//! * `Ridge`: both pairs anticorrelated, `ω_b = 2ω₀ − ω_a`, `ω_d = 2ω₀ − ω_c`.
//! * `Random`: a random exchange or ridge pairing, jittered by up to one
//!   `D` lobe so that every overlap factor takes generic values.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::gate::GateKernel;
use crate::stats::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quad {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl Quad {
    pub fn new(a: usize, b: usize, c: usize, d: usize) -> Self {
        Self { a, b, c, d }
    }

    pub fn swap_ab(self) -> Self {
        Self::new(self.b, self.a, self.c, self.d)
    }

    pub fn swap_cd(self) -> Self {
        Self::new(self.a, self.b, self.d, self.c)
    }

    pub fn indices(self) -> [usize; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadFamily {
    Degenerate,
    Ridge,
    Random,
}

impl QuadFamily {
    pub const ALL: [QuadFamily; 3] = [QuadFamily::Degenerate, QuadFamily::Ridge, QuadFamily::Random];

    fn stream(self) -> u64 {
        match self {
            QuadFamily::Degenerate => u64::MAX - 1,
            QuadFamily::Ridge => u64::MAX - 2,
            QuadFamily::Random => u64::MAX - 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadFamily::Degenerate => "degenerate",
            QuadFamily::Ridge => "ridge",
            QuadFamily::Random => "random",
        }
    }
}

/// Evenly spaced picks from `support`.
fn spread(support: &[usize], count: usize) -> Vec<usize> {
    if count == 1 {
        return vec![support[support.len() / 2]];
    }
    (0..count)
        .map(|i| support[i * (support.len() - 1) / (count - 1)])
        .collect()
}

/// Generates `count` quads of `family` with frequencies drawn from `support`
/// (lattice indices, typically where `|g|²` is appreciable).
pub fn generate(
    family: QuadFamily,
    count: usize,
    support: &[usize],
    kernel: &GateKernel,
    seed: u64,
) -> Vec<Quad> {
    assert!(!support.is_empty(), "empty quad support");
    let lat = kernel.lattice();
    let mut rng = stream_rng(seed, family.stream());
    match family {
        QuadFamily::Degenerate => spread(support, count)
            .into_iter()
            .map(|k| Quad::new(k, k, k, k))
            .collect(),
        QuadFamily::Ridge => spread(support, count)
            .into_iter()
            .map(|a| {
                let c = support[rng.random_range(0..support.len())];
                Quad::new(a, lat.mirror_index(a), c, lat.mirror_index(c))
            })
            .collect(),
        QuadFamily::Random => {
            // first zero of D sits at 2π/T
            let lobe = (2.0 * PI / (kernel.duration() * lat.d_omega())).ceil() as i64;
            let n = lat.len() as i64;
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let a = support[rng.random_range(0..support.len())] as i64;
                let c = support[rng.random_range(0..support.len())] as i64;
                let j: [i64; 3] = std::array::from_fn(|_| rng.random_range(-lobe..=lobe));
                let (b, c, d) = if rng.random_bool(0.5) {
                    // exchange pairing (a, c, c+j, a+j′)
                    (c, c + j[0], a + j[1])
                } else {
                    (n - 1 - a + j[0], c + j[2], n - 1 - c + j[1])
                };
                let q = [a, b, c, d];
                if q.iter().all(|&i| (0..n).contains(&i)) {
                    out.push(Quad::new(a as usize, b as usize, c as usize, d as usize));
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FrequencyLattice;

    fn kernel() -> GateKernel {
        GateKernel::new(20.0, FrequencyLattice::new(30.0, 3.0, 121).unwrap()).unwrap()
    }

    #[test]
    fn families_have_their_structure() {
        let k = kernel();
        let support: Vec<usize> = (30..=90).collect();
        let deg = generate(QuadFamily::Degenerate, 8, &support, &k, 1);
        assert_eq!(deg.len(), 8);
        assert!(deg.iter().all(|q| q.a == q.b && q.b == q.c && q.c == q.d));
        assert_eq!(deg[0].a, 30);
        assert_eq!(deg[7].a, 90);
        let ridge = generate(QuadFamily::Ridge, 8, &support, &k, 1);
        assert!(ridge.iter().all(|q| q.a + q.b == 120 && q.c + q.d == 120));
        let random = generate(QuadFamily::Random, 32, &support, &k, 1);
        assert_eq!(random.len(), 32);
        assert!(random.iter().all(|q| q.indices().iter().all(|&i| i < 121)));
    }

    #[test]
    fn generation_is_seeded() {
        let k = kernel();
        let support: Vec<usize> = (30..=90).collect();
        let a = generate(QuadFamily::Random, 16, &support, &k, 9);
        let b = generate(QuadFamily::Random, 16, &support, &k, 9);
        let c = generate(QuadFamily::Random, 16, &support, &k, 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
