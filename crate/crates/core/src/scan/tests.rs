use super::*;
use num_complex::Complex64;

const D_NM: f64 = 266.38;

fn harmonics(visibility: f64, phase: f64) -> FringeHarmonics {
    FringeHarmonics::new(
        D_NM * 1e-9,
        vec![Complex64::new(1.0, 0.0), Complex64::from_polar(0.5 * visibility, phase)],
    )
    .unwrap()
}

fn grid(points: usize, periods: f64) -> Vec<f64> {
    (0..points).map(|i| i as f64 * periods * D_NM / points as f64).collect()
}

#[test]
fn constant_signal_renders_flat() {
    let h = FringeHarmonics::new(D_NM * 1e-9, vec![Complex64::new(3.0, 0.0)]).unwrap();
    let r = render_expected_rates(&h, &grid(17, 1.0), 250.0).unwrap();
    assert!(r.iter().all(|x| (x - 250.0).abs() < 1e-12));
    assert!(render_expected_rates(&h, &grid(3, 1.0), 0.0).is_err());
}

#[test]
fn rendered_rates_are_periodic_with_unit_mean() {
    let h = FringeHarmonics::new(
        D_NM * 1e-9,
        vec![
            Complex64::new(0.074, 0.0),
            Complex64::new(0.006, -0.004),
            Complex64::new(0.0003, 0.0001),
        ],
    )
    .unwrap();
    let xs = grid(64, 1.0);
    let r = render_expected_rates(&h, &xs, 120.0).unwrap();
    let shifted: Vec<f64> = xs.iter().map(|x| x + 3.0 * D_NM).collect();
    let r2 = render_expected_rates(&h, &shifted, 120.0).unwrap();
    for (a, b) in r.iter().zip(&r2) {
        assert!((a - b).abs() < 1e-9 * a);
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    assert!((mean - 120.0).abs() < 1e-9);
    assert!(r.iter().all(|x| *x > 0.0));
}

#[test]
fn dark_counts_have_the_right_mean() {
    let xs: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
    let rates = vec![0.0; xs.len()];
    let rec = synthesize_scan(&xs, &rates, 1.0, 15.0, 7).unwrap();
    let mean = rec.counts.iter().sum::<u64>() as f64 / rec.counts.len() as f64;
    assert!((mean - 15.0).abs() < 0.5, "{mean}");
}

#[test]
fn synthesis_is_deterministic() {
    let xs = grid(40, 2.0);
    let rates = render_expected_rates(&harmonics(0.2, 0.3), &xs, 80.0).unwrap();
    let a = synthesize_scan(&xs, &rates, 2.0, 15.0, 99).unwrap();
    let b = synthesize_scan(&xs, &rates, 2.0, 15.0, 99).unwrap();
    let c = synthesize_scan(&xs, &rates, 2.0, 15.0, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.counts, c.counts);
    assert_eq!(a.rng_seed, Some(99));
}

#[test]
fn zero_dwell_gives_zero_counts() {
    let xs = grid(10, 1.0);
    let rec = synthesize_scan(&xs, &[50.0; 10], 0.0, 15.0, 1).unwrap();
    assert!(rec.counts.iter().all(|&c| c == 0));
}

#[test]
fn high_means_are_poisson_too() {
    // variance equals the mean well above the small-mean regime
    let xs: Vec<f64> = (0..20_000).map(|i| i as f64).collect();
    let rec = synthesize_scan(&xs, &vec![400.0; xs.len()], 1.0, 0.0, 3).unwrap();
    let n = rec.counts.len() as f64;
    let mean = rec.counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = rec.counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 400.0).abs() < 5.0 * (400.0 / n).sqrt(), "{mean}");
    assert!((var / 400.0 - 1.0).abs() < 0.05, "{var}");
}

fn noiseless(xs: &[f64], v: f64, flux: f64, dwell: f64, dark: f64) -> Vec<f64> {
    render_expected_rates(&harmonics(v, 1.1), xs, flux)
        .unwrap()
        .iter()
        .map(|r| (r + dark) * dwell)
        .collect()
}

#[test]
fn noiseless_fit_recovers_visibility() {
    let xs = grid(24, 2.0);
    for &(v, dark) in &[(0.23, 0.0), (0.18, 15.0), (0.0, 3.0), (0.9, 0.0)] {
        let counts = noiseless(&xs, v, 200.0, 1.5, dark);
        let fit = fit_counts(&xs, &counts, 1.5, dark, D_NM).unwrap();
        assert!((fit.visibility - v).abs() < 1e-9, "{} vs {v}", fit.visibility);
        assert!((fit.offset - (200.0 + dark) * 1.5).abs() < 1e-7);
        if v > 0.0 {
            assert!((fit.phase + 1.1).abs() < 1e-9);
        }
        assert!(fit.reduced_chi_square < 1e-15);
        assert!(fit.sigma_visibility > 0.0);
    }
}

#[test]
fn fit_is_invariant_under_whole_period_shifts() {
    let xs = grid(30, 1.5);
    let counts = noiseless(&xs, 0.3, 90.0, 1.0, 15.0);
    let a = fit_counts(&xs, &counts, 1.0, 15.0, D_NM).unwrap();
    let shifted: Vec<f64> = xs.iter().map(|x| x + 7.0 * D_NM).collect();
    let b = fit_counts(&shifted, &counts, 1.0, 15.0, D_NM).unwrap();
    for (p, q) in [
        (a.offset, b.offset),
        (a.amplitude, b.amplitude),
        (a.visibility, b.visibility),
        (a.sigma_visibility, b.sigma_visibility),
    ] {
        assert!((p - q).abs() <= 1e-9 * p.abs(), "{p} vs {q}");
    }
    assert!((a.phase - b.phase).abs() < 1e-9);
}

#[test]
fn fit_scales_with_counts() {
    let xs = grid(30, 1.5);
    let counts = noiseless(&xs, 0.3, 90.0, 1.0, 15.0);
    let a = fit_counts(&xs, &counts, 1.0, 15.0, D_NM).unwrap();
    let k = 6.5;
    let scaled: Vec<f64> = counts.iter().map(|c| c * k).collect();
    let b = fit_counts(&xs, &scaled, 1.0, 15.0 * k, D_NM).unwrap();
    assert!((b.offset / a.offset - k).abs() < 1e-9);
    assert!((b.amplitude / a.amplitude - k).abs() < 1e-9);
    assert!((b.visibility - a.visibility).abs() < 1e-9);
}

#[test]
fn monte_carlo_coverage_and_bias() {
    let v = 0.18;
    let xs = grid(40, 2.0);
    // weighting by observed counts and |amplitude| both bias V by O(1/counts);
    // at ~1000 counts per point that stays well inside the standard error
    let rates = render_expected_rates(&harmonics(v, 0.4), &xs, 1000.0).unwrap();
    let replicas = 1000;
    let mut inside = 0;
    let mut values = Vec::with_capacity(replicas);
    for seed in 0..replicas as u64 {
        let rec = synthesize_scan(&xs, &rates, 1.0, 15.0, seed).unwrap();
        let fit = fit_scan(&rec, D_NM * 1e-9).unwrap();
        if (fit.visibility - v).abs() <= fit.sigma_visibility {
            inside += 1;
        }
        values.push(fit.visibility);
    }
    let coverage = inside as f64 / replicas as f64;
    assert!((0.62..=0.74).contains(&coverage), "coverage {coverage}");
    let mean = values.iter().sum::<f64>() / replicas as f64;
    let sd = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (replicas - 1) as f64).sqrt();
    let se = sd / (replicas as f64).sqrt();
    assert!((mean - v).abs() < 3.0 * se, "mean {mean} ± {se}");
}

#[test]
fn reduced_chi_square_is_near_one() {
    let xs = grid(40, 2.0);
    let rates = render_expected_rates(&harmonics(0.25, -0.7), &xs, 150.0).unwrap();
    let replicas = 200;
    let mean: f64 = (0..replicas)
        .map(|seed| {
            let rec = synthesize_scan(&xs, &rates, 1.0, 15.0, 1000 + seed).unwrap();
            fit_scan(&rec, D_NM * 1e-9).unwrap().reduced_chi_square
        })
        .sum::<f64>()
        / replicas as f64;
    assert!((0.8..=1.2).contains(&mean), "{mean}");
}

#[test]
fn dark_subtraction_regime() {
    // low signal on a 15 counts/s dark background
    let xs = grid(40, 2.0);
    let counts = noiseless(&xs, 0.18, 40.0, 2.0, 15.0);
    let fit = fit_counts(&xs, &counts, 2.0, 15.0, D_NM).unwrap();
    assert!((fit.visibility - 0.18).abs() < 1e-9);
    // ignoring the dark level would understate the contrast
    let naive = fit_counts(&xs, &counts, 2.0, 0.0, D_NM).unwrap();
    assert!((naive.visibility - 0.18 * 40.0 / 55.0).abs() < 1e-9);
}

#[test]
fn fit_errors() {
    let xs = grid(20, 1.0);
    let counts = noiseless(&xs, 0.2, 10.0, 1.0, 0.0);
    // dark level above the signal
    assert!(matches!(fit_counts(&xs, &counts, 1.0, 50.0, D_NM), Err(Error::Fit(_))));
    // every position on the same fringe phase
    let aliased: Vec<f64> = (0..8).map(|i| i as f64 * D_NM).collect();
    assert!(matches!(
        fit_counts(&aliased, &[10.0; 8], 1.0, 0.0, D_NM),
        Err(Error::Fit(_))
    ));
    assert!(fit_counts(&xs[..4], &counts[..4], 1.0, 0.0, D_NM).is_err());
    let short = grid(20, 0.5);
    assert!(fit_counts(&short, &counts, 1.0, 0.0, D_NM).is_err());
    assert!(fit_counts(&xs, &counts[..10], 1.0, 0.0, D_NM).is_err());
}

#[test]
fn record_validation() {
    assert!(ScanRecord::new(vec![0.0, 1.0], 1.0, vec![1], 0.0, None).is_err());
    assert!(ScanRecord::new(vec![1.0, 0.0], 1.0, vec![1, 2], 0.0, None).is_err());
    assert!(ScanRecord::new(vec![0.0, 1.0], -1.0, vec![1, 2], 0.0, None).is_err());
    assert!(ScanRecord::new(vec![0.0, 1.0], 1.0, vec![1, 2], -2.0, None).is_err());
}

#[test]
fn csv_round_trip_is_exact() {
    let xs: Vec<f64> = grid(33, 2.0).iter().map(|x| x + 0.1 / 3.0).collect();
    let rates = render_expected_rates(&harmonics(0.2, 0.3), &xs, 80.0).unwrap();
    let rec = synthesize_scan(&xs, &rates, 1.0 / 3.0, 15.25, u64::MAX).unwrap();
    let text = rec.to_csv_string();
    assert!(text.starts_with("# dwell_s = "));
    assert!(text.contains("\nposition_nm,counts\n"));
    assert_eq!(ScanRecord::from_csv_str(&text).unwrap(), rec);

    let measured = ScanRecord::new(vec![0.0, 12.5, 25.0], 2.0, vec![4, 0, 9], 0.0, None).unwrap();
    let text = measured.to_csv_string();
    assert!(!text.contains("seed"));
    assert_eq!(ScanRecord::from_csv_str(&text).unwrap(), measured);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    rec.write_csv(&path).unwrap();
    assert_eq!(ScanRecord::read_csv(&path).unwrap(), rec);
}

#[test]
fn csv_errors_carry_line_numbers() {
    let bad_header = "# dwell_s = 1\nx,counts\n0,1\n";
    assert!(matches!(ScanRecord::from_csv_str(bad_header), Err(Error::Syntax { line: 2, .. })));
    let extra = "# dwell_s = 1\n# tool = x\nposition_nm,counts\n";
    assert!(ScanRecord::from_csv_str(extra).unwrap().counts.is_empty());
    let bad_count = "# dwell_s = 1\nposition_nm,counts\n0,1\n1,-3\n";
    assert!(matches!(ScanRecord::from_csv_str(bad_count), Err(Error::Syntax { line: 4, .. })));
    let no_dwell = "position_nm,counts\n0,1\n";
    assert!(ScanRecord::from_csv_str(no_dwell).is_err());
    assert!(ScanRecord::read_csv("/nonexistent/scan.csv").is_err());
}
