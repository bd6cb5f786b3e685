use qrate_core::asymptotics::{
    gamma_bar, gmi_hat, granular_loss_approx, lhat0, lhat_family, mmse_hat, mse_hat, overload_loss_approx,
    per_bit_rules, underload_gmi_approx, waterfall_approx,
};
use qrate_core::lloyd::{consistency_probe, equispaced_optimal, lloyd_optimize, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use qrate_core::optim::golden_section_min;
use qrate_core::par::Execution;
use qrate_core::quantizer::make_uniform;
use qrate_core::rate::{coeff_a, coeff_b, gamma_compensated, gmi, mse_cells, rate_loss};
use qrate_core::specfun::SQRT_2_OVER_PI;
use qrate_core::sweep::{self, SweepFixed, SweepRequest, SweepVariable};
use qrate_core::uniform_opt::{max_gmi, mmse_uniform, optimal_spec, optimal_step, table};
use qrate_core::{Channel, QuantizerSpec, ScaleMode};

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn l_star(bits: u32) -> f64 {
    let k = 1usize << (bits - 1);
    optimal_step(k).unwrap() * k as f64
}

#[test]
fn gmi_and_mse_optima_coincide_for_consistent_quantizers() {
    let grid = log_grid(0.5, 2.0, 401);
    let ch = Channel::from_db(10.0).unwrap();
    let lloyd = lloyd_optimize(4, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap().spec;
    for q in [optimal_spec(4).unwrap(), lloyd] {
        let r = consistency_probe(&q, &grid, ch, ScaleMode::ThresholdsAndLevels).unwrap();
        let ratio = r.argmax_gmi_scale / r.argmin_mse_scale;
        assert!((ratio.ln()).abs() < 2.0 * (4f64.ln() / 400.0), "{} vs {}", r.argmax_gmi_scale, r.argmin_mse_scale);
    }
}

#[test]
fn nonmonotone_levels_break_the_consistency() {
    let q = QuantizerSpec::new(4, vec![0.2, 0.6, 0.7], vec![0.1, 0.9, 0.8, 0.2]).unwrap();
    let grid = log_grid(0.05, 20.0, 601);
    for mode in [ScaleMode::ThresholdsAndLevels, ScaleMode::ThresholdsOnly] {
        let r = consistency_probe(&q, &grid, Channel::from_db(10.0).unwrap(), mode).unwrap();
        assert!(!r.coincide(), "{mode:?}");
        let best = r.points.iter().find(|p| p.scale == r.argmax_gmi_scale).unwrap();
        let least = r.points.iter().find(|p| p.scale == r.argmin_mse_scale).unwrap();
        assert!(best.mse > least.mse * 1.05, "{mode:?}");
    }
    assert!(consistency_probe(&q, &[], Channel::new(1.0).unwrap(), ScaleMode::default()).is_err());
}

#[test]
fn lloyd_improves_on_uniform_and_is_consistent() {
    for k in 2..=8 {
        let r = lloyd_optimize(k, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        assert!(r.converged && r.final_change <= DEFAULT_TOLERANCE);
        let m = mse_cells(&r.spec);
        assert!(m < mmse_uniform(k).unwrap(), "K = {k}");
        let ratio = coeff_a(&r.spec) / coeff_b(&r.spec).unwrap();
        assert!((ratio - SQRT_2_OVER_PI).abs() < 1e-6, "K = {k}");
        assert!((gamma_compensated(&r.spec).unwrap() - m).abs() < 1e-9, "K = {k}");
    }
}

#[test]
fn centroid_levels_post_processing() {
    let ch = Channel::from_db(10.0).unwrap();
    for step in log_grid(0.05, 3.0, 40) {
        for k in [2, 4, 8] {
            let plain = gmi(&make_uniform(k, step).unwrap(), ch).unwrap().gmi.nats();
            let post = gmi(&equispaced_optimal(step, k).unwrap(), ch).unwrap().gmi.nats();
            assert!(post >= plain - 1e-14, "step {step}, K {k}");
        }
    }
    // The best step shrinks once levels are conditional means.
    let g = |s: f64| gamma_compensated(&equispaced_optimal(s, 4).unwrap()).unwrap();
    let best = golden_section_min(g, 0.1, 2.0, 1e-10);
    assert!(best < optimal_step(4).unwrap());
    // Fine cells: centroids approach midpoints. The last cell is unbounded.
    let q = equispaced_optimal(1e-3, 64).unwrap();
    for (i, y) in q.levels().iter().enumerate().take(63) {
        let mid = (i as f64 + 0.5) * 1e-3;
        assert!((y / mid - 1.0).abs() < 1e-3, "cell {i}");
    }
}

#[test]
fn overload_loss_decays_as_predicted() {
    let ch = Channel::new(1.0).unwrap();
    let ratios: Vec<f64> = (3..=8)
        .map(|l| {
            let l = l as f64;
            gamma_bar(l).unwrap().ln_1p() / overload_loss_approx(l, ch).unwrap().nats()
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0), "{ratios:?}");
    // Deeper in the tail the ratio keeps closing in on 1.
    let far = gamma_bar(30.0).unwrap() / overload_loss_approx(30.0, ch).unwrap().nats();
    assert!((far - 1.0).abs() < 0.01, "{far}");
}

#[test]
fn granular_loss_decays_as_predicted() {
    let ch = Channel::new(1.0).unwrap();
    let ratios: Vec<f64> = (2..=10)
        .map(|e| {
            let step = 2f64.powi(-e);
            let k = (8.0 / step) as usize;
            rate_loss(&make_uniform(k, step).unwrap(), ch).unwrap().nats() / granular_loss_approx(step, ch).unwrap().nats()
        })
        .collect();
    let gaps: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!(gaps[gaps.len() - 1] < 1e-3);
}

#[test]
fn combined_approximations_track_exact_losses() {
    let ch = Channel::new(100.0).unwrap();
    // Granular regime, b = 12 at L = 6.
    let k = 2048;
    let exact = rate_loss(&make_uniform(k, 6.0 / k as f64).unwrap(), ch).unwrap().nats();
    let approx = granular_loss_approx(6.0 / k as f64, ch).unwrap().nats();
    assert!((approx / exact - 1.0).abs() < 0.1);
    // Overload regime, b = 12 near L*: the overload part stays below the exact loss.
    let over = overload_loss_approx(5.0143, ch).unwrap().nats();
    let exact = rate_loss(&make_uniform(k, 5.0143 / k as f64).unwrap(), ch).unwrap().nats();
    assert!(over < exact && over > 0.0);
    // Transition, b = 6.
    let k = 32;
    let ch6 = Channel::from_db(20.0).unwrap();
    for l in [3.0, 3.5, 4.0, 4.5, 5.0] {
        let exact = rate_loss(&make_uniform(k, l / k as f64).unwrap(), ch6).unwrap().nats();
        let approx = (mse_hat(l, k).unwrap() * ch6.snr()).ln_1p();
        assert!((approx / exact - 1.0).abs() < 0.2, "L = {l}: {approx} vs {exact}");
    }
    // Underload, b = 4 at L = 6.
    let exact = gmi(&make_uniform(8, 6.0 / 8.0).unwrap(), ch).unwrap().gmi.bits();
    let approx = underload_gmi_approx(6.0, 8, ch).unwrap().bits();
    assert!((exact - approx).abs() < 0.1, "{exact} vs {approx}");
}

#[test]
fn waterfall_matches_overload_saturation() {
    for l in [6.0, 10.0, 20.0] {
        let exact = (1.0 / gamma_bar(l).unwrap()).ln();
        let r = waterfall_approx(l).unwrap().nats() / exact;
        assert!((r - 1.0).abs() < 0.02, "L = {l}: {r}");
    }
}

#[test]
fn loading_factor_approximations() {
    assert!((lhat0(2048).unwrap() - 5.0143).abs() < 0.02);
    let mut prev = 0.0;
    for b in 2..=14u32 {
        let k = 1usize << (b - 1);
        let exact = l_star(b);
        assert!(exact > prev);
        prev = exact;
        for r in lhat_family(k).unwrap() {
            if let (Some(v), Some(e)) = (r.value, r.abs_error) {
                assert!((e - (v - r.reference_exact).abs()).abs() < 1e-15, "{}", r.name);
            }
        }
    }
    let fam = lhat_family(128).unwrap();
    let err = |name: &str| fam.iter().find(|r| r.name == name).and_then(|r| r.abs_error).unwrap();
    assert!(err("lhat3") <= err("lhat2"));
    assert!(err("lhat0") < err("lhat2"));
    assert!(lhat_family(6).is_err());
}

#[test]
fn optimal_loading_tracks_the_square_root_law() {
    let ratios: Vec<f64> = (2..=16u32)
        .map(|b| l_star(b) / (2.0 * ((1u64 << b) as f64).ln().sqrt()))
        .collect();
    assert!(ratios.iter().all(|&r| r < 1.0));
    assert!(ratios[14] > ratios[0] && ratios[14] > 0.85, "{ratios:?}");
}

#[test]
fn resolution_rules() {
    // Each extra bit divides the MMSE by a factor that climbs toward 4.
    let mmse: Vec<f64> = (1..=16u32).map(|b| mmse_uniform(1 << (b - 1)).unwrap()).collect();
    let factors: Vec<f64> = mmse.windows(2).map(|w| w[0] / w[1]).collect();
    assert!(factors.iter().all(|f| (3.0..4.0).contains(f)), "{factors:?}");
    assert!(factors.windows(2).all(|w| w[1] > w[0]), "{factors:?}");
    let ratios: Vec<f64> = (2..=16u32).map(|b| mmse[b as usize - 1] / mmse_hat(b).unwrap()).collect();
    // The closed form overestimates, and approaches slowly (log factors).
    let tail = &ratios[6..];
    assert!(tail.iter().all(|&r| r > 0.75 && r < 1.0), "{ratios:?}");
    assert!(tail.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    for snr in [1.0, 10.0, 100.0] {
        let ch = Channel::new(snr).unwrap();
        let gaps: Vec<f64> = (2..=12u32)
            .map(|b| (max_gmi(b, ch).unwrap().nats() - gmi_hat(b, ch).unwrap().nats()).abs())
            .collect();
        assert!(gaps[2..].windows(2).all(|w| w[1] < w[0]), "snr {snr}: {gaps:?}");
        assert!(gaps[10] < 2e-5, "snr {snr}: {gaps:?}");
    }
    let rules = per_bit_rules(4, 20.0, 2.0).unwrap();
    assert_eq!(rules.snr_q_5db_rule, 20.0);
    assert_eq!(per_bit_rules(6, 20.0, 2.0).unwrap().required_bits, 6.0);
    // The rule is only a rough guide: at 20 dB the exact loss first drops below 0.01
    // bits at b = 9, while six bits still lose about 0.14.
    let loss = |b: u32| rate_loss(&optimal_spec(1 << (b - 1)).unwrap(), Channel::from_db(20.0).unwrap()).unwrap().bits();
    assert!((loss(6) - 0.143).abs() < 5e-3);
    assert!(loss(8) > 1e-2 && loss(9) < 1e-2);
}

#[test]
fn table_is_independent_of_execution() {
    let seq = table(16, Execution::Sequential).unwrap();
    let par = table(16, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    assert!(table(17, Execution::Sequential).is_err());
    assert!(table(0, Execution::Sequential).is_err());
}

#[test]
fn loading_factor_sweep_peaks_at_the_optimum() {
    let req = SweepRequest {
        variable: SweepVariable::LoadingFactor,
        grid: (1..=200).map(|i| i as f64 * 0.025).collect(),
        fixed: SweepFixed { bits: Some(3), snr_db: Some(30.0), approximations: true, ..Default::default() },
    };
    let t = sweep::run(&req, Execution::Parallel).unwrap();
    assert_eq!(t, sweep::run(&req, Execution::Sequential).unwrap());
    let col = |name: &str| t.columns.iter().position(|c| *c == name).unwrap();
    let (lf, g) = (col("loading_factor"), col("gmi_bits"));
    let best = t.rows.iter().max_by(|a, b| a[g].total_cmp(&b[g])).unwrap();
    assert!((best[lf] - l_star(3)).abs() <= 0.0125 + 1e-12, "{}", best[lf]);
    let (c, loss) = (col("capacity_bits"), col("rate_loss_bits"));
    assert!(t.rows.iter().all(|r| (r[c] - r[g] - r[loss]).abs() < 1e-12));
}

#[test]
fn sweeps_over_snr_bits_and_gain() {
    let fixed = SweepFixed { bits: Some(4), snr_db: Some(10.0), ..Default::default() };
    let snr = sweep::run(
        &SweepRequest { variable: SweepVariable::SnrDb, grid: vec![-10.0, 0.0, 10.0, 40.0], fixed: fixed.clone() },
        Execution::Sequential,
    )
    .unwrap();
    let g = snr.columns.iter().position(|c| *c == "gmi_bits").unwrap();
    assert!(snr.rows.windows(2).all(|w| w[1][g] > w[0][g]));

    let bits = sweep::run(
        &SweepRequest { variable: SweepVariable::Bits, grid: vec![1.0, 2.0, 3.0], fixed: fixed.clone() },
        Execution::Sequential,
    )
    .unwrap();
    assert_eq!(bits.rows.len(), 3);
    assert!(sweep::run(
        &SweepRequest { variable: SweepVariable::Bits, grid: vec![1.5], fixed: fixed.clone() },
        Execution::Sequential,
    )
    .is_err());

    let gain = sweep::run(
        &SweepRequest { variable: SweepVariable::GainScale, grid: vec![1e-6, 1.0, 1e6], fixed },
        Execution::Sequential,
    )
    .unwrap();
    let one_bit = qrate_core::rate::gmi_from_gamma(1.0 - 2.0 / std::f64::consts::PI, Channel::from_db(10.0).unwrap());
    let g = gain.columns.iter().position(|c| *c == "gmi_bits").unwrap();
    assert!((gain.rows[0][g] - one_bit.bits()).abs() < 1e-3);
    assert!((gain.rows[2][g] - one_bit.bits()).abs() < 1e-3);
    assert!(gain.rows[1][g] > gain.rows[0][g]);
}
