//! Brute-force oracles for the fast paths of the core crate.

#![allow(clippy::needless_range_loop)]

use mohardy_core::bmo::{bmo_phi_norm, bmo_phi_p_norm};
use mohardy_core::fourier::Spectral;
use mohardy_core::functionals::{area_functional, TentFunction};
use mohardy_core::growth::{GrowthFunction, Orlicz, Weight};
use mohardy_core::halfspace::{gamma_density_complement, set_measure, Ball, HalfSpaceGrid, SpatialGrid};
use mohardy_core::norms::{lq_phi_ball_norm, luxembourg_norm, modular};
use mohardy_core::tent_atoms::{decompose, validate_tent_atom};
use mohardy_core::norms::BallNorms;
use mohardy_core::weights::{hardy_littlewood_maximal, muckenhoupt_constant, reverse_holder_constant, BallFamily, MaximalPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sqrt_weight() -> GrowthFunction {
    GrowthFunction::product(1, Weight::AbsPower(0.5), Orlicz::Power(1.0)).unwrap()
}

/// All `[i, j]` intervals with plain averages.
fn interval_sup(grid: &SpatialGrid, per_interval: impl Fn(&[f64]) -> f64, w: &[f64]) -> f64 {
    let n = grid.len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            best = best.max(per_interval(&w[i..=j]));
        }
    }
    best
}

#[test]
fn muckenhoupt_matches_interval_brute_force() {
    let grid = SpatialGrid::new(1, 1.0, 128).unwrap();
    let w = grid.sample(|x| x[0].abs().sqrt());
    let phi = sqrt_weight();
    for q in [1.5, 2.0, 3.0] {
        let want = interval_sup(
            &grid,
            |s| {
                let k = s.len() as f64;
                let avg = s.iter().sum::<f64>() / k;
                let dual = s.iter().map(|v| v.powf(-1.0 / (q - 1.0))).sum::<f64>() / k;
                avg * dual.powf(q - 1.0)
            },
            &w,
        );
        let got = muckenhoupt_constant(&phi, &grid, q, &BallFamily::AllIntervals, &[1.0]).unwrap();
        assert!((got - want).abs() <= 1e-6 * want, "q={q}: {got} vs {want}");
    }
    let want = interval_sup(
        &grid,
        |s| {
            let avg = s.iter().sum::<f64>() / s.len() as f64;
            avg * s.iter().map(|v| 1.0 / v).fold(0.0, f64::max)
        },
        &w,
    );
    let got = muckenhoupt_constant(&phi, &grid, 1.0, &BallFamily::AllIntervals, &[1.0]).unwrap();
    assert!((got - want).abs() <= 1e-6 * want);
}

#[test]
fn reverse_holder_matches_interval_brute_force() {
    let grid = SpatialGrid::new(1, 1.0, 96).unwrap();
    let w = grid.sample(|x| x[0].abs().sqrt());
    let phi = sqrt_weight();
    let want = interval_sup(
        &grid,
        |s| {
            let k = s.len() as f64;
            let avg = s.iter().sum::<f64>() / k;
            (s.iter().map(|v| v * v).sum::<f64>() / k).sqrt() / avg
        },
        &w,
    );
    let got = reverse_holder_constant(&phi, &grid, 2.0, &BallFamily::AllIntervals, &[1.0]).unwrap();
    assert!((got - want).abs() <= 1e-6 * want);
}

#[test]
fn maximal_function_matches_window_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = SpatialGrid::new(1, 1.0, 64).unwrap();
    let f: Vec<f64> = (0..64).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let got = hardy_littlewood_maximal(&grid, &f, MaximalPolicy::AllWindows).unwrap();
    for x in 0..64 {
        let mut best: f64 = 0.0;
        for i in 0..=x {
            for j in x..64 {
                let avg = f[i..=j].iter().map(|v| v.abs()).sum::<f64>() / (j - i + 1) as f64;
                best = best.max(avg);
            }
        }
        assert!((got[x] - best).abs() <= 1e-12 * best.max(1.0));
    }

    let grid = SpatialGrid::new(2, 1.0, 12).unwrap();
    let f: Vec<f64> = (0..144).map(|_| rng.gen_range(0.0..1.0)).collect();
    let got = hardy_littlewood_maximal(&grid, &f, MaximalPolicy::AllWindows).unwrap();
    for (x, &value) in got.iter().enumerate() {
        let (cx, cy) = grid.coords(x);
        let mut best: f64 = 0.0;
        for side in 1..=12usize {
            for r0 in cy.saturating_sub(side - 1)..=cy.min(12 - side) {
                for c0 in cx.saturating_sub(side - 1)..=cx.min(12 - side) {
                    let mut s = 0.0;
                    for r in r0..r0 + side {
                        for c in c0..c0 + side {
                            s += f[grid.index(c, r)];
                        }
                    }
                    best = best.max(s / (side * side) as f64);
                }
            }
        }
        assert!((value - best).abs() <= 1e-12);
    }
}

#[test]
fn modular_over_set_is_a_cell_sum() {
    let grid = SpatialGrid::new(1, 2.0, 80).unwrap();
    let phi = GrowthFunction::product(1, Weight::AbsPower(0.5), Orlicz::Power(0.75)).unwrap();
    let set: Vec<bool> = (0..80).map(|i| i % 3 == 0 || (20..30).contains(&i)).collect();
    let t: f64 = 1.7;
    let want: f64 = (0..80).filter(|&i| set[i]).map(|i| grid.center(i)[0].abs().sqrt() * t.powf(0.75)).sum::<f64>() * grid.spacing();
    let got = phi.modular_over_set(&grid, &set, t).unwrap();
    assert!((got - want).abs() <= 1e-12 * want);
}

#[test]
fn lq_ball_norm_reduces_to_an_average_for_powers() {
    let grid = SpatialGrid::new(1, 1.0, 200).unwrap();
    let ball = Ball::new(grid.center(100), 0.3);
    let cells = grid.ball_cells(&ball);
    let f: Vec<f64> = (0..200).map(|i| if cells.contains(&i) { (i as f64 * 0.37).sin() } else { 0.0 }).collect();
    let phi = GrowthFunction::power(1, 0.6).unwrap();
    for q in [1.0, 2.0, 3.5] {
        let avg = cells.iter().map(|&i| f[i].abs().powf(q)).sum::<f64>() / cells.len() as f64;
        let got = lq_phi_ball_norm(&phi, &grid, &f, &ball, q, &[1.0]).unwrap();
        assert!((got - avg.powf(1.0 / q)).abs() <= 1e-12);
    }
    let got = lq_phi_ball_norm(&phi, &grid, &f, &ball, f64::INFINITY, &[1.0]).unwrap();
    assert_eq!(got, cells.iter().map(|&i| f[i].abs()).fold(0.0, f64::max));
}

#[test]
fn spectral_convolution_matches_direct_sum() {
    let grid = SpatialGrid::new(1, 2.0, 100).unwrap();
    let sp = Spectral::new(&grid);
    let f = grid.sample(|x| (3.0 * x[0]).cos() * (-x[0] * x[0]).exp());
    let kernel = |z: &[f64; 2]| (-(z[0] - 0.2).powi(2) * 8.0).exp() * (1.0 + z[0]);
    let got = sp.apply_complex(&sp.forward(&f).unwrap(), &sp.kernel_spectrum(kernel));
    let centers = grid.centers();
    for (i, x) in centers.iter().enumerate() {
        let direct: f64 = centers.iter().zip(&f).map(|(y, v)| kernel(&[x[0] - y[0], 0.0]) * v).sum::<f64>() * grid.spacing();
        assert!((got[i] - direct).abs() <= 1e-12, "{i}: {} vs {direct}", got[i]);
    }
}

#[test]
fn area_functional_satisfies_cone_duality() {
    // Σ_x 𝒜(F)(x)² h = Σ_{(y,t)} |F|² #{x : |x-y| < t} h² ln ρ / t
    let base = SpatialGrid::new(1, 4.0, 128).unwrap();
    let hs = HalfSpaceGrid::new(base.clone(), 0.1, 2f64.sqrt(), 8).unwrap();
    let f = TentFunction::from_fn(&hs, |y, t| if y[0].abs() < 1.5 { rng_value(y[0] + t) } else { 0.0 });
    let a = area_functional(&f, 1.0);
    let lhs: f64 = a.iter().map(|v| v * v).sum::<f64>() * base.spacing();
    let h = base.spacing();
    let mut rhs = 0.0;
    for m in 0..hs.levels() {
        let t = hs.t(m);
        for y in 0..base.len() {
            let v = f.get(y, m);
            let count = (0..base.len()).filter(|&x| (base.center(x)[0] - base.center(y)[0]).abs() < t * (1.0 - 1e-9)).count();
            rhs += v * v * count as f64 * h * h * hs.log_ratio() / t;
        }
    }
    assert!((lhs - rhs).abs() <= 1e-12 * rhs);
}

fn rng_value(y: f64) -> f64 {
    (17.0 * y).sin() + 0.5 * (5.0 * y).cos()
}

#[test]
fn density_complement_obeys_the_weak_type_bound() {
    let grid = SpatialGrid::new(1, 1.0, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let set: Vec<bool> = (0..512).map(|_| rng.gen::<f64>() < 0.05).collect();
        for gamma in [0.25, 0.5, 0.75] {
            let star = gamma_density_complement(&grid, &set, gamma, MaximalPolicy::AllWindows).unwrap();
            // uncentered one-dimensional maximal function: |{M χ > λ}| <= 2 |O| / λ
            assert!(set_measure(&grid, &star) <= 2.0 * set_measure(&grid, &set) / (1.0 - gamma) + 1e-12);
            assert!(set.iter().zip(&star).all(|(a, b)| !a || *b));
        }
    }
}

#[test]
fn atoms_live_in_their_tents() {
    let base = SpatialGrid::new(1, 4.0, 256).unwrap();
    let hs = HalfSpaceGrid::new(base.clone(), 1.0 / 16.0, 2f64.powf(0.25), 12).unwrap();
    let phi = GrowthFunction::power(1, 1.0).unwrap();
    let norms = BallNorms::new(&phi, &base);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let mut f = TentFunction::zeros(&hs);
        for m in 0..8 {
            for i in 96..160 {
                if rng.gen::<f64>() < 0.6 {
                    f.values_mut()[hs.node(i, m)] = rng.gen_range(-3.0..3.0);
                }
            }
        }
        let report = decompose(&f, &phi, 0.5, MaximalPolicy::AllWindows).unwrap();
        assert!(!report.has_residual());
        for atom in &report.atoms {
            let v = validate_tent_atom(&atom.to_tent(&hs), &atom.ball, &norms, &[2.0]).unwrap();
            assert!(v.support_ok && v.outside_nodes.is_empty());
        }
    }
}

#[test]
fn weighted_maximal_inequality_is_bounded() {
    // |x|^{1/2} is an A_2 weight, so ∫ (Mf)² w <= C ∫ f² w
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ratios = Vec::new();
    for n in [128usize, 256, 512] {
        let grid = SpatialGrid::new(1, 1.0, n).unwrap();
        let w = grid.sample(|x| x[0].abs().sqrt());
        for _ in 0..10 {
            let f: Vec<f64> = (0..n).map(|_| if rng.gen::<f64>() < 0.1 { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
            let m = hardy_littlewood_maximal(&grid, &f, MaximalPolicy::AllWindows).unwrap();
            let num: f64 = m.iter().zip(&w).map(|(a, b)| a * a * b).sum();
            let den: f64 = f.iter().zip(&w).map(|(a, b)| a * a * b).sum();
            if den > 0.0 {
                ratios.push(num / den);
            }
        }
    }
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(worst.is_finite() && worst < 100.0, "{worst}");
}

#[test]
fn doubling_and_reverse_doubling_of_ball_weights() {
    let grid = SpatialGrid::new(1, 4.0, 512).unwrap();
    let phi = sqrt_weight();
    let norms = BallNorms::new(&phi, &grid);
    let mut worst_up: f64 = 0.0;
    let mut worst_down: f64 = f64::INFINITY;
    for i in (64..448).step_by(16) {
        for r in [0.05, 0.1, 0.3, 0.7] {
            let b = Ball::new(grid.center(i), r);
            let small = norms.phi_ball(&b, 1.0).unwrap();
            let big = norms.phi_ball(&b.dilate(2.0), 1.0).unwrap();
            worst_up = worst_up.max(big / small);
            worst_down = worst_down.min(big / small);
        }
    }
    // w(2B) <= 2^{3/2} w(B) up to the lattice, and w(2B) >= 2 w(B)
    assert!(worst_up < 4.0, "{worst_up}");
    assert!(worst_down > 1.5, "{worst_down}");
}

#[test]
fn luxembourg_norm_of_powers_is_the_lp_norm() {
    let grid = SpatialGrid::new(1, 1.0, 300).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for p in [0.3, 0.5, 0.8, 1.0] {
        let phi = GrowthFunction::power(1, p).unwrap();
        let f: Vec<f64> = (0..300).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let lp = (f.iter().map(|v| v.abs().powf(p)).sum::<f64>() * grid.spacing()).powf(1.0 / p);
        let got = luxembourg_norm(&phi, &grid, &f).unwrap().norm;
        assert!((got - lp).abs() <= 1e-8 * lp);
        assert!((modular(&phi, &grid, &f, got) - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn bmo_p_norm_matches_direct_average() {
    let grid = SpatialGrid::new(1, 1.0, 64).unwrap();
    let phi = GrowthFunction::identity(1);
    let b = grid.sample(|x| (x[0].abs().max(1.0 / 64.0)).ln());
    let family = BallFamily::AllIntervals;
    let mut want: f64 = 0.0;
    for ball in family.balls(&grid).unwrap() {
        let cells = grid.ball_cells(&ball);
        let k = cells.len() as f64;
        let mean = cells.iter().map(|&i| b[i]).sum::<f64>() / k;
        let avg2 = cells.iter().map(|&i| (b[i] - mean).powi(2)).sum::<f64>() / k;
        // |B| / ‖χ_B‖_{L^1} = 1
        want = want.max(avg2.sqrt());
    }
    let got = bmo_phi_p_norm(&b, &phi, &grid, 2.0, &family).unwrap();
    assert!((got - want).abs() <= 1e-12 * want);
    assert!(got >= bmo_phi_norm(&b, &phi, &grid, &family).unwrap());
}
