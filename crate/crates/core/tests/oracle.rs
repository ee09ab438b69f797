//! Sampling cross-checks of the analytic GKP and repetition-code rates.

use cvft_core::gkp::{pauli_probs, GkpLattice, QuadratureNoise};
use cvft_core::mc::{compare_models, estimate_pe, outcome_frequencies, GkpShiftChannel, SamplingMode, TrialConfig};

/// χ² critical value for 3 degrees of freedom at α = 0.001.
const CHI2_CRIT_3DOF: f64 = 16.266;

fn chi2(counts: [u64; 4], probs: [f64; 4]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&o, p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

fn channel(aspect: f64, sx: f64, sp: f64) -> GkpShiftChannel {
    GkpShiftChannel { lattice: GkpLattice::new(aspect).unwrap(), noise: QuadratureNoise::new(sx, sp).unwrap() }
}

#[test]
fn outcome_frequencies_on_grid() {
    let mut seed = 100;
    for aspect in [0.5, 1.0, 2.0, 4.0, 8.0] {
        for sigma in [0.3, 0.4, 0.5, 0.6, 0.8] {
            let ch = channel(aspect, sigma, 0.9 * sigma);
            let p = pauli_probs(ch.lattice, ch.noise);
            let trials = 400_000;
            let f = outcome_frequencies(&ch, trials, seed).unwrap();
            seed += 1;
            for (count, prob) in f.iter().zip([p.success, p.px, p.pz, p.py]) {
                let se = (prob * (1.0 - prob) / trials as f64).sqrt();
                let dev = (*count as f64 / trials as f64 - prob).abs();
                assert!(dev <= 5.0 * se.max(1.0 / trials as f64), "R={aspect} σ={sigma}: {f:?} vs {p:?}");
            }
        }
    }
}

#[test]
fn chi_square_at_ten_million() {
    for (i, (aspect, sx, sp)) in [(1.0, 0.45, 0.45), (3.0, 0.4, 0.5), (0.7, 0.55, 0.35)].into_iter().enumerate() {
        let ch = channel(aspect, sx, sp);
        let p = pauli_probs(ch.lattice, ch.noise);
        let f = outcome_frequencies(&ch, 10_000_000, 7 + i as u64).unwrap();
        let stat = chi2(f, [p.success, p.px, p.pz, p.py]);
        assert!(stat < CHI2_CRIT_3DOF, "χ² = {stat} for {f:?}");
    }
}

#[test]
fn independent_marginals_match_analytic() {
    let mut seed = 1;
    for n in [1, 3, 5, 11] {
        for aspect in [1.0, 2.5] {
            for sigma in [0.35, 0.45, 0.6] {
                let cfg = TrialConfig {
                    n,
                    aspect,
                    sigma_x: sigma,
                    sigma_p: sigma,
                    trials: 200_000,
                    seed,
                    mode: SamplingMode::IndependentMarginals,
                };
                seed += 1;
                let e = estimate_pe(&cfg).unwrap();
                let a = cfg.analytic_pe().unwrap();
                assert!(e.deviation(a) < 5.0, "n={n} R={aspect} σ={sigma}: {} vs {a}", e.pe);
            }
        }
    }
}

#[test]
fn standard_error_covers_two_thirds() {
    let base = TrialConfig {
        n: 3,
        aspect: 2.0,
        sigma_x: 0.45,
        sigma_p: 0.45,
        trials: 20_000,
        seed: 0,
        mode: SamplingMode::IndependentMarginals,
    };
    let truth = base.analytic_pe().unwrap();
    let inside = (0..100u64)
        .filter(|&seed| {
            let e = estimate_pe(&TrialConfig { seed: 1000 + seed, ..base }).unwrap();
            (e.pe - truth).abs() <= e.std_error
        })
        .count();
    // 68 expected; ±3 binomial standard deviations.
    assert!((54..=82).contains(&inside), "{inside}/100 within one standard error");
}

#[test]
fn joint_sampling_gap_is_reported() {
    let grid: Vec<TrialConfig> = [(3, 0.5), (11, 0.45)]
        .into_iter()
        .enumerate()
        .map(|(i, (n, sigma))| TrialConfig {
            n,
            aspect: 2.0,
            sigma_x: sigma,
            sigma_p: sigma,
            trials: 200_000,
            seed: 40 + i as u64,
            mode: SamplingMode::JointPhysical,
        })
        .collect();
    for c in compare_models(&grid).unwrap() {
        assert!(c.independent_deviation() < 5.0);
        assert!(c.joint_deviation().is_finite());
        eprintln!(
            "n={} σ={}: analytic {:.5} independent {:.5} joint {:.5} ({:.1} SE)",
            c.config.n,
            c.config.sigma_x,
            c.analytic,
            c.independent.pe,
            c.joint.pe,
            c.joint_deviation()
        );
    }
}

#[test]
fn vanishing_noise_agrees_everywhere() {
    let cfg = TrialConfig {
        n: 5,
        aspect: 1.0,
        sigma_x: 0.02,
        sigma_p: 0.02,
        trials: 50_000,
        seed: 3,
        mode: SamplingMode::JointPhysical,
    };
    let c = &compare_models(&[cfg]).unwrap()[0];
    assert_eq!((c.independent.pe, c.joint.pe), (0.0, 0.0));
    assert!(c.analytic < 1e-300);
}
