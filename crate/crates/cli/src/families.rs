//! Built-in test functions.

use std::f64::consts::PI;

use mohardy_core::functionals::TentFunction;
use mohardy_core::halfspace::{HalfSpaceGrid, SpatialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian window times a cosine, band-limited up to its Gaussian tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    pub center: f64,
    pub width: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl WavePacket {
    pub fn at(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        (-0.5 * u * u).exp() * (2.0 * PI * self.frequency * x + self.phase).cos()
    }

    pub fn sample(&self, grid: &SpatialGrid) -> Vec<f64> {
        grid.sample(|x| self.at(x[0]))
    }
}

/// `count` packets with frequencies in `[1.2, 2.2]` cycles per unit, width 2 and
/// centers in `[-1, 1]`, drawn from `seed`.
pub fn wave_packets(count: usize, seed: u64) -> Vec<WavePacket> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| WavePacket {
            center: rng.gen_range(-1.0..1.0),
            width: 2.0,
            frequency: rng.gen_range(1.2..2.2),
            phase: rng.gen_range(0.0..2.0 * PI),
        })
        .collect()
}

/// Signs of a five-step dyadic martingale on `[-1, 1)`: level `k` adds `±1`
/// Haar functions on the `2^k` dyadic intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicSteps {
    signs: Vec<Vec<f64>>,
}

impl DyadicSteps {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let signs = (0..5).map(|k| (0..1usize << k).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()).collect();
        DyadicSteps { signs }
    }

    pub fn at(&self, x: f64) -> f64 {
        let u = (x + 1.0) / 2.0;
        if !(0.0..1.0).contains(&u) {
            return 0.0;
        }
        let mut v = 0.0;
        for (k, level) in self.signs.iter().enumerate() {
            let j = (u * (1usize << k) as f64).floor() as usize;
            let right = (u * (1usize << (k + 1)) as f64).floor() as usize % 2 == 1;
            v += level[j] * if right { -1.0 } else { 1.0 };
        }
        v
    }
}

/// `sign`, `log|x|` truncated at `1/64`, and five random dyadic step functions.
pub fn bmo_family(grid: &SpatialGrid, seed: u64) -> Vec<(String, Vec<f64>)> {
    let mut out = vec![
        ("sign".to_string(), grid.sample(|x| x[0].signum())),
        ("log".to_string(), grid.sample(|x| truncated_log(x[0]))),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..5 {
        let steps = DyadicSteps::random(&mut rng);
        out.push((format!("dyadic{r}"), grid.sample(|x| steps.at(x[0]))));
    }
    out
}

pub fn truncated_log(x: f64) -> f64 {
    x.abs().max(1.0 / 64.0).ln()
}

const TENT_FIXTURE: &str = include_str!("../fixtures/tent.csv");

/// The half-space grid the bundled tent fixture lives on.
pub fn fixture_grid() -> HalfSpaceGrid {
    let base = SpatialGrid::new(1, 4.0, 256).expect("fixture grid");
    HalfSpaceGrid::new(base, 1.0 / 16.0, 2f64.powf(0.25), 12).expect("fixture levels")
}

pub fn tent_fixture() -> TentFunction {
    let hs = fixture_grid();
    let mut f = TentFunction::zeros(&hs);
    for line in TENT_FIXTURE.lines().skip(1) {
        let mut it = line.split(',');
        let cell: usize = it.next().and_then(|s| s.parse().ok()).expect("fixture cell");
        let level: usize = it.next().and_then(|s| s.parse().ok()).expect("fixture level");
        let value: f64 = it.next().and_then(|s| s.parse().ok()).expect("fixture value");
        f.values_mut()[hs.node(cell, level)] = value;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_loads() {
        let f = tent_fixture();
        assert_eq!(f.values().iter().filter(|v| **v != 0.0).count(), 474);
    }

    #[test]
    fn dyadic_steps_have_mean_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = DyadicSteps::random(&mut rng);
        let grid = SpatialGrid::new(1, 1.0, 256).unwrap();
        let total: f64 = grid.sample(|x| s.at(x[0])).iter().sum();
        assert_eq!(total, 0.0);
    }
}
