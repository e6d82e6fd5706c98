use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noma_gssk::analysis::ber_union_bound;
use noma_gssk::channel::{complex_gaussian, sample_user_channels, NoiseSpec};
use noma_gssk::modulation::Constellation;
use noma_gssk::montecarlo::{cell_edge_snr, fixed_channels, run_sweep, trial_rng, ChannelMode};
use noma_gssk::power::{ftpa_allocate, superpose};
use noma_gssk::receivers::sic_detect;
use noma_gssk::{build_codebook, Metric, SweepSpec, SystemConfig};

fn ber_spec(config: SystemConfig, grid: Vec<f64>, trials: u64, seed: u64, mode: ChannelMode) -> SweepSpec {
    SweepSpec {
        config,
        snr_grid_db: grid,
        trials_per_point: trials,
        master_seed: seed,
        metric: Metric::CellEdgeBer,
        channel_mode: mode,
    }
}

#[test]
fn channel_magnitudes_pass_rayleigh_ks_test() {
    let config = SystemConfig::noma_gssk(4, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut center = Vec::new();
    let mut edge = Vec::new();
    while edge.len() < 20_000 {
        let ch = sample_user_channels(&config, &[1.0, 0.8, 0.4], &mut rng).unwrap();
        center.extend(ch[0].matrix.iter().map(|h| h.norm()));
        edge.extend(ch[2].matrix.iter().map(|h| h.norm()));
    }
    for (mut sample, g) in [(center, 1.0f64), (edge, 0.4)] {
        sample.sort_by(f64::total_cmp);
        let n = sample.len() as f64;
        let d = sample
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let cdf = 1.0 - (-(r * r) / (g * g)).exp();
                (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        // asymptotic critical value at significance 0.01
        let critical = 1.628 / n.sqrt();
        assert!(d < critical, "gain {g}: D = {d}, critical {critical}");
    }
}

#[test]
fn set_error_rate_non_increasing_in_snr() {
    let grid: Vec<f64> = (0..=6).map(|i| 5.0 * i as f64).collect();
    let r = run_sweep(&ber_spec(SystemConfig::noma_gssk(5, 2), grid, 5_000, 21, ChannelMode::PerTrial)).unwrap();
    for w in r.points.windows(2) {
        let slack = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        assert!(w[1].value <= w[0].value + slack, "{} dB -> {} dB", w[0].snr_db, w[1].snr_db);
    }
}

#[test]
fn ber_stderr_is_binomial() {
    let r = run_sweep(&ber_spec(SystemConfig::noma_ssk(4), vec![6.0], 3_000, 5, ChannelMode::PerTrial)).unwrap();
    let p = &r.points[0];
    assert_eq!(p.bits, 3_000 * 2);
    let expected = (p.value * (1.0 - p.value) / p.bits as f64).sqrt();
    assert_eq!(p.stderr.to_bits(), expected.to_bits());
}

#[test]
fn repeated_runs_are_bit_identical() {
    let spec = ber_spec(SystemConfig::mimo_noma(2), vec![0.0, 10.0, 20.0], 3_000, 99, ChannelMode::PerTrial);
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&spec).unwrap();
    assert_eq!(a.points, b.points);
    let other = run_sweep(&SweepSpec { master_seed: 100, ..spec }).unwrap();
    assert_ne!(a.points, other.points);
}

#[test]
fn bound_dominates_fixed_channel_simulation() {
    for (m_t, m_a, seed) in [(4, 2, 7), (6, 3, 8)] {
        let spec = ber_spec(
            SystemConfig::noma_gssk(m_t, m_a),
            vec![10.0, 14.0, 18.0],
            20_000,
            seed,
            ChannelMode::Fixed,
        );
        let r = run_sweep(&spec).unwrap();
        let cb = build_codebook(m_t, m_a).unwrap();
        let edge = fixed_channels(&spec).unwrap().pop().unwrap();
        for p in &r.points {
            let snr = cell_edge_snr(&spec.config, 10f64.powf(p.snr_db / 10.0)).unwrap();
            let bound = ber_union_bound(&cb, &edge, snr, m_a).unwrap();
            assert!(p.value <= bound + 3.0 * p.stderr, "({m_t},{m_a}) at {} dB: {} > {}", p.snr_db, p.value, bound);
        }
    }
}

#[test]
fn sic_matches_joint_ml_for_qpsk() {
    let alloc = ftpa_allocate(&[1.0, 0.16], 0.4).unwrap();
    let amps: Vec<f64> = alloc.alphas().iter().map(|a| a.sqrt()).collect();
    let cons = Constellation::new(4).unwrap();
    let noise = NoiseSpec::from_snr_db(25.0, 1.0).unwrap();
    let trials = 10_000u64;
    let mut agree = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(31, 0, t);
        let labels = [rng.random_range(0..4), rng.random_range(0..4)];
        let syms: Vec<Complex64> = labels.iter().map(|&l| cons.point(l)).collect();
        let x = superpose(&syms, &alloc, 1.0).unwrap().value;
        let mut all = true;
        for (i, g) in [1.0, 0.4].into_iter().enumerate() {
            let h = complex_gaussian(&mut rng) * g;
            let y = h * x + noise.sample(&mut rng);
            let sic = sic_detect(&DVector::from_element(1, y), &DVector::from_element(1, h), i + 1, &alloc, 1.0, 4)
                .unwrap();
            let joint = (0..16)
                .min_by(|&a, &b| {
                    let d = |c: usize| (y - h * (amps[0] * cons.point(c % 4) + amps[1] * cons.point(c / 4))).norm_sqr();
                    d(a).total_cmp(&d(b))
                })
                .unwrap();
            let own = if i == 0 { joint % 4 } else { joint / 4 };
            all &= sic.own_label == own;
        }
        agree += all as u64;
    }
    assert!(agree as f64 >= 0.99 * trials as f64, "agreement {agree}/{trials}");
}

#[test]
fn equal_se_and_spent_power_give_equal_ee() {
    let grid = vec![15.0];
    let run = |cfg: SystemConfig, metric| {
        run_sweep(&SweepSpec {
            config: cfg,
            snr_grid_db: grid.clone(),
            trials_per_point: 2_000,
            master_seed: 4,
            metric,
            channel_mode: ChannelMode::PerTrial,
        })
        .unwrap()
        .points[0]
            .value
    };
    // GSSK(4,1) and SSK(4) share codebook, power and trial streams
    let se_a = run(SystemConfig::noma_gssk(4, 1), Metric::SpectralEfficiency);
    let se_b = run(SystemConfig::noma_ssk(4), Metric::SpectralEfficiency);
    assert_eq!(se_a.to_bits(), se_b.to_bits());
    let ee_a = run(SystemConfig::noma_gssk(4, 1), Metric::EnergyEfficiency);
    let ee_b = run(SystemConfig::noma_ssk(4), Metric::EnergyEfficiency);
    assert_eq!(ee_a.to_bits(), ee_b.to_bits());

    let mut doubled = SystemConfig::noma_ssk(4);
    doubled.total_power = 2.0;
    let ee_double = run(doubled, Metric::EnergyEfficiency);
    assert!((ee_double - ee_b / 2.0).abs() < 1e-12 * ee_b);
}
